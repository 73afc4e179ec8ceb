//
// Copyright 2026 The userdp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
#include "userdp/clipping.h"

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "userdp/threshold.h"

namespace userdp {
namespace {

using ::testing::DoubleNear;
using ::testing::ElementsAre;
using ::testing::Pointwise;

double Norm(const std::vector<double>& x, ClipNorm norm) {
  double total = 0.0;
  for (double v : x) total += norm == ClipNorm::kL1 ? std::abs(v) : v * v;
  return norm == ClipNorm::kL1 ? total : std::sqrt(total);
}

std::vector<double> Diff(const std::vector<double>& a,
                         const std::vector<double>& b) {
  std::vector<double> out(a.size());
  for (size_t j = 0; j < a.size(); ++j) out[j] = a[j] - b[j];
  return out;
}

std::vector<double> RandomVector(std::mt19937_64& rng, size_t d) {
  std::exponential_distribution<double> exp(0.2);
  std::vector<double> x(d);
  for (double& v : x) v = rng() % 3 == 0 ? 0.0 : std::floor(exp(rng));
  return x;
}

UserHistogram User(std::vector<int64_t> dense) {
  return *UserHistogram::FromDense(dense);
}

TEST(ClipTest, Examples) {
  UserHistogram x = User({3, 4});
  EXPECT_THAT(*Clip(x, 5.0, ClipNorm::kL2), ElementsAre(3.0, 4.0));
  EXPECT_THAT(*Clip(x, 2.5, ClipNorm::kL2), ElementsAre(1.5, 2.0));
  EXPECT_THAT(*Clip(User({2, 2}), 2.0, ClipNorm::kL1), ElementsAre(1.0, 1.0));
}

TEST(ClipTest, RejectsNonPositiveThreshold) {
  UserHistogram x = User({3, 4});
  EXPECT_FALSE(Clip(x, 0.0, ClipNorm::kL2).ok());
  EXPECT_FALSE(Clip(x, -1.0, ClipNorm::kL1).ok());
  EXPECT_FALSE(ClipVector(std::vector<double>{1.0}, 0.0, ClipNorm::kL1).ok());
}

TEST(ClipTest, NormBoundDirectionAndIdempotence) {
  std::mt19937_64 rng(1);
  for (ClipNorm norm : {ClipNorm::kL1, ClipNorm::kL2}) {
    for (int trial = 0; trial < 500; ++trial) {
      const std::vector<double> x = RandomVector(rng, 6);
      const double c = 0.5 + static_cast<double>(rng() % 200) / 10.0;
      const std::vector<double> y = *ClipVector(x, c, norm);
      EXPECT_LE(Norm(y, norm), c * (1.0 + 1e-12));
      if (Norm(x, norm) <= c) {
        EXPECT_EQ(y, x);
      }
      // Same direction: y is a nonnegative multiple of x.
      const double scale =
          Norm(x, norm) > 0 ? Norm(y, norm) / Norm(x, norm) : 1.0;
      for (size_t j = 0; j < x.size(); ++j) {
        EXPECT_NEAR(y[j], scale * x[j], 1e-9 * (1.0 + std::abs(x[j])));
      }
      // Idempotent up to rounding of the rescaled norm.
      EXPECT_THAT(*ClipVector(y, c, norm), Pointwise(DoubleNear(1e-12 * c), y));
    }
  }
}

TEST(ClipTest, L2ClippingIsAContraction) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::vector<double> x = RandomVector(rng, 5);
    const std::vector<double> y = RandomVector(rng, 5);
    const double c = 0.5 + static_cast<double>(rng() % 100) / 10.0;
    const double before = Norm(Diff(x, y), ClipNorm::kL2);
    const double after = Norm(Diff(*ClipVector(x, c, ClipNorm::kL2),
                                   *ClipVector(y, c, ClipNorm::kL2)),
                              ClipNorm::kL2);
    EXPECT_LE(after, before * (1.0 + 1e-12) + 1e-12);
  }
}

TEST(ClipTest, L1ClippingIsTwoLipschitzButNotAContraction) {
  // Radial scaling onto the L1 ball can expand L1 distances.
  const std::vector<double> x = {5.0, 0.0};
  const std::vector<double> y = {5.0, 1.0};
  const double expanded = Norm(Diff(*ClipVector(x, 5.0, ClipNorm::kL1),
                                    *ClipVector(y, 5.0, ClipNorm::kL1)),
                               ClipNorm::kL1);
  EXPECT_NEAR(expanded, 5.0 / 3.0, 1e-12);
  EXPECT_GT(expanded, Norm(Diff(x, y), ClipNorm::kL1));

  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::vector<double> a = RandomVector(rng, 5);
    const std::vector<double> b = RandomVector(rng, 5);
    const double c = 0.5 + static_cast<double>(rng() % 100) / 10.0;
    const double after = Norm(Diff(*ClipVector(a, c, ClipNorm::kL1),
                                   *ClipVector(b, c, ClipNorm::kL1)),
                              ClipNorm::kL1);
    EXPECT_LE(after, 2.0 * Norm(Diff(a, b), ClipNorm::kL1) + 1e-9);
  }
}

TEST(ClippedSumTest, NeighborSensitivityIsAtMostTwoC) {
  std::mt19937_64 rng(4);
  for (ClipNorm norm : {ClipNorm::kL1, ClipNorm::kL2}) {
    for (int trial = 0; trial < 200; ++trial) {
      std::vector<UserHistogram> users;
      for (int i = 0; i < 10; ++i) {
        std::vector<int64_t> dense(4);
        for (int64_t& v : dense) v = static_cast<int64_t>(rng() % 20);
        users.push_back(User(dense));
      }
      std::vector<UserHistogram> neighbor = users;
      std::vector<int64_t> replacement(4);
      for (int64_t& v : replacement) v = static_cast<int64_t>(rng() % 50);
      neighbor[rng() % neighbor.size()] = User(replacement);
      const double c = 1.0 + static_cast<double>(rng() % 30);
      const std::vector<double> s1 =
          *ClippedSum(*Dataset::Create(users), c, norm);
      const std::vector<double> s2 =
          *ClippedSum(*Dataset::Create(neighbor), c, norm);
      EXPECT_LE(Norm(Diff(s1, s2), norm), 2.0 * c + 1e-9);
    }
  }
}

TEST(ReleaseLaplaceTest, RequiresPureBudget) {
  Dataset data = *Dataset::Create({User({1})});
  RandomSource source(1);
  EXPECT_FALSE(ReleaseLaplace(data, 1.0, {1.0, 1e-5}, source).ok());
  EXPECT_FALSE(ReleaseLaplace(data, 0.0, {1.0, 0.0}, source).ok());
}

TEST(ReleaseLaplaceTest, AddsSeededLaplaceNoise) {
  Dataset data = *Dataset::Create({User({1})});
  RandomSource source(1234);
  absl::StatusOr<NoisyEstimate> estimate =
      ReleaseLaplace(data, 1.0, {1.0, 0.0}, source);
  ASSERT_TRUE(estimate.ok());
  RandomSource replay(1234);
  EXPECT_EQ(estimate->values, std::vector<double>{1.0 + replay.Laplace(1.0)});
  EXPECT_EQ(estimate->noise_kind, NoiseKind::kLaplace);
  EXPECT_EQ(estimate->noise_scale, 1.0);
  EXPECT_EQ(estimate->seed, 1234u);
  EXPECT_EQ(estimate->budget_spent, (PrivacyCost{1.0, 0.0}));
}

TEST(ReleaseLaplaceTest, VanishingNoiseGivesClippedSum) {
  Dataset data = *Dataset::Create({User({2, 2}), User({10, 0}), User({1, 0})});
  RandomSource source(5);
  const NoisyEstimate estimate = *ReleaseLaplace(data, 2.0, {1e6, 0.0}, source);
  // clip_1 gives [1,1], [2,0], [1,0].
  EXPECT_THAT(estimate.values, Pointwise(DoubleNear(1e-3), {4.0, 1.0}));
}

TEST(ReleaseLaplaceTest, NoiseVarianceIsTwoCSquaredOverEpsilonSquared) {
  Dataset data = *Dataset::Create({User({3, 0, 1, 0, 9})});
  const double c = 2.0;
  const double epsilon = 0.5;
  const std::vector<double> clipped = *ClippedSum(data, c, ClipNorm::kL1);
  RandomSource source(6);
  double sum_sq = 0.0;
  int count = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    const NoisyEstimate e = *ReleaseLaplace(data, c, {epsilon, 0.0}, source);
    for (size_t j = 0; j < clipped.size(); ++j) {
      const double noise = e.values[j] - clipped[j];
      sum_sq += noise * noise;
      ++count;
    }
  }
  const double expected = 2.0 * c * c / (epsilon * epsilon);
  EXPECT_NEAR(sum_sq / count, expected, 0.05 * expected);
}

TEST(ReleaseGaussianTest, SigmaFormula) {
  // sqrt(2 ln(1.32 / 0.05)) = sqrt(2 ln 26.4).
  EXPECT_NEAR(GaussianReleaseSigma(1.0, {1.0, 0.05}), 2.55866, 1e-5);
  Dataset data = *Dataset::Create({User({1})});
  RandomSource source(1);
  const NoisyEstimate e = *ReleaseGaussian(data, 1.0, {1.0, 0.05}, source);
  EXPECT_NEAR(e.noise_scale, 2.55866, 1e-5);
  EXPECT_EQ(e.noise_kind, NoiseKind::kGaussian);
}

TEST(ReleaseGaussianTest, RequiresApproximateBudget) {
  Dataset data = *Dataset::Create({User({1})});
  RandomSource source(1);
  EXPECT_FALSE(ReleaseGaussian(data, 1.0, {1.0, 0.0}, source).ok());
}

TEST(ReleaseGaussianTest, LargeEpsilonIsAWarningNotAnError) {
  Dataset data = *Dataset::Create({User({1})});
  RandomSource source(1);
  absl::StatusOr<NoisyEstimate> e =
      ReleaseGaussian(data, 1.0, {2.0, 1e-5}, source);
  ASSERT_TRUE(e.ok());
  EXPECT_EQ(e->warnings.size(), 1u);
  EXPECT_TRUE(
      ReleaseGaussian(data, 1.0, {1.0, 1e-5}, source)->warnings.empty());
}

TEST(ReleaseGaussianTest, ExpectedNoiseL1NormIsCTimesM) {
  const int64_t d = 10;
  Dataset data = *Dataset::Create({User(std::vector<int64_t>(d, 0))});
  const PrivacyParams budget{0.8, 1e-4};
  const double c = 3.0;
  RandomSource source(8);
  double total = 0.0;
  const int trials = 10000;
  for (int t = 0; t < trials; ++t) {
    const NoisyEstimate e = *ReleaseGaussian(data, c, budget, source);
    for (double v : e.values) total += std::abs(v);
  }
  const double expected = c * NoiseCoefficient(d, budget);
  // Independent closed form: d * sigma * sqrt(2 / pi).
  const double sigma =
      c * std::sqrt(2.0 * std::log(1.32 / budget.delta)) / budget.epsilon;
  EXPECT_NEAR(expected, d * sigma * std::sqrt(2.0 / std::numbers::pi), 1e-9);
  EXPECT_NEAR(total / trials, expected, 0.02 * expected);
}

TEST(ReleaseGaussianTest, NoClippingAndNoNoiseReturnsInput) {
  Dataset data = *Dataset::Create({User({3, 4, 0})});
  RandomSource source(2);
  const NoisyEstimate e = *ReleaseGaussian(data, 6.0, {1e9, 0.01}, source);
  EXPECT_THAT(e.values, Pointwise(DoubleNear(1e-6), {3.0, 4.0, 0.0}));
}

TEST(ReleaseGaussianTest, ReleaseMeanConvergesToClippedSum) {
  Dataset data = *Dataset::Create({User({3, 4}), User({0, 10}), User({1, 1})});
  const double c = 4.0;
  const PrivacyParams budget{1.0, 1e-3};
  const std::vector<double> clipped = *ClippedSum(data, c, ClipNorm::kL2);
  RandomSource source(9);
  std::vector<double> mean(2, 0.0);
  const int trials = 10000;
  for (int t = 0; t < trials; ++t) {
    const NoisyEstimate e = *ReleaseGaussian(data, c, budget, source);
    for (size_t j = 0; j < 2; ++j) mean[j] += e.values[j] / trials;
  }
  const double se = GaussianReleaseSigma(c, budget) / std::sqrt(trials);
  for (size_t j = 0; j < 2; ++j) EXPECT_NEAR(mean[j], clipped[j], 4.0 * se);
}

}  // namespace
}  // namespace userdp
