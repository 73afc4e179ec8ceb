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
#include "userdp/threshold.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include "gtest/gtest.h"
#include "userdp/histogram.h"
#include "userdp/random.h"

namespace userdp {
namespace {

UserHistogram User(std::vector<int64_t> dense) {
  return *UserHistogram::FromDense(dense);
}

Dataset CountsDataset(const std::vector<int64_t>& counts) {
  std::vector<UserHistogram> users;
  for (int64_t c : counts) users.push_back(User({c}));
  return *Dataset::Create(std::move(users));
}

Dataset RandomDataset(std::mt19937_64& rng, int n, int d) {
  std::geometric_distribution<int64_t> size(0.1);
  std::vector<UserHistogram> users;
  for (int i = 0; i < n; ++i) {
    std::vector<int64_t> dense(d, 0);
    const int64_t total = size(rng);
    for (int64_t k = 0; k < total; ++k) ++dense[rng() % (1 + rng() % d)];
    users.push_back(User(dense));
  }
  return *Dataset::Create(std::move(users));
}

// Direct evaluation of G from its definition, no sorting or prefix sums.
double NaiveG(const Dataset& data, double m, double c,
              double cap = std::numeric_limits<double>::infinity()) {
  double total = c * m;
  for (const UserHistogram& u : data.users()) {
    if (u.l2_norm() == 0.0) continue;
    const double w = std::min(u.l1_norm() / u.l2_norm(), cap);
    total += w * std::max(u.l2_norm() - c, 0.0);
  }
  return total;
}

TEST(SurrogateLossTest, SingleUserExamples) {
  Dataset data = *Dataset::Create({User({3, 4})});
  SurrogateLoss loss = *SurrogateLoss::Create(data, 1.0);
  EXPECT_DOUBLE_EQ(loss.Value(0.0), 7.0);
  EXPECT_DOUBLE_EQ(loss.Value(5.0), 5.0);
  EXPECT_DOUBLE_EQ(loss.Value(2.5), 6.0);
  EXPECT_DOUBLE_EQ(loss.SmallestMinimizer(), 5.0);
  EXPECT_DOUBLE_EQ(ExactGaussianThreshold(data, 1.0)->threshold, 5.0);
  // Once the weight 7/5 no longer exceeds M, no clipping bias is worth paying.
  EXPECT_DOUBLE_EQ(SurrogateLoss::Create(data, 2.0)->SmallestMinimizer(), 0.0);
}

TEST(SurrogateLossTest, RejectsBadArguments) {
  Dataset data = *Dataset::Create({User({1})});
  EXPECT_FALSE(SurrogateLoss::Create(data, 0.0).ok());
  EXPECT_FALSE(SurrogateLoss::Create(data, 1.0, 0.5).ok());
}

TEST(SurrogateLossTest, EmptyUsersContributeNothing) {
  Dataset data = *Dataset::Create({User({0, 0}), User({3, 4})});
  SurrogateLoss loss = *SurrogateLoss::Create(data, 1.0);
  EXPECT_EQ(loss.terms().size(), 1u);
  EXPECT_EQ(loss.num_users(), 2);
  EXPECT_DOUBLE_EQ(loss.Value(0.0), 7.0);
}

TEST(SurrogateLossTest, SparsityCapLimitsWeights) {
  Dataset data = *Dataset::Create({User({1, 1, 1, 1})});
  EXPECT_DOUBLE_EQ(SurrogateLoss::Create(data, 1.0)->terms()[0].weight, 2.0);
  EXPECT_DOUBLE_EQ(SurrogateLoss::Create(data, 1.0, 2.0)->terms()[0].weight,
                   std::sqrt(2.0));
}

TEST(SurrogateLossTest, MatchesDirectEvaluation) {
  std::mt19937_64 rng(11);
  for (int rep = 0; rep < 20; ++rep) {
    Dataset data = RandomDataset(rng, 50, 8);
    const double m = 0.5 + static_cast<double>(rng() % 100) / 10.0;
    SurrogateLoss loss = *SurrogateLoss::Create(data, m, 3.0);
    for (double c = 0.0; c < 40.0; c += 0.37) {
      EXPECT_NEAR(loss.Value(c), NaiveG(data, m, c, std::sqrt(3.0)),
                  1e-9 * (1.0 + loss.Value(c)));
    }
  }
}

TEST(SurrogateLossTest, SmallestMinimizerBeatsEveryGridPoint) {
  std::mt19937_64 rng(12);
  for (int rep = 0; rep < 100; ++rep) {
    Dataset data = RandomDataset(rng, 100, 10);
    const double m = 0.2 + static_cast<double>(rng() % 300) / 10.0;
    const double c_star = ExactGaussianThreshold(data, m)->threshold;
    const double best = NaiveG(data, m, c_star);
    double max_norm = 0.0;
    for (const UserHistogram& u : data.users()) {
      max_norm = std::max(max_norm, u.l2_norm());
    }
    for (int k = 0; k <= 2000; ++k) {
      const double c = max_norm * 1.1 * k / 2000.0;
      EXPECT_LE(best, NaiveG(data, m, c) + 1e-9 * (1.0 + best));
    }
    // Smallest: every candidate norm below C* is strictly worse.
    for (const UserHistogram& u : data.users()) {
      if (u.l2_norm() < c_star) {
        EXPECT_GT(NaiveG(data, m, u.l2_norm()), best - 1e-9 * (1.0 + best));
      }
    }
    if (c_star > 0.0) {
      EXPECT_GT(NaiveG(data, m, 0.0), best);
    }
  }
}

TEST(SurrogateLossTest, SubgradientInequalityHolds) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> point(0.0, 30.0);
  for (int rep = 0; rep < 20; ++rep) {
    Dataset data = RandomDataset(rng, 60, 6);
    SurrogateLoss loss = *SurrogateLoss::Create(data, 3.0);
    for (int k = 0; k < 200; ++k) {
      const double a = point(rng);
      const double b = point(rng);
      const double left = loss.LeftDerivative(a);
      const double right = loss.RightDerivative(a);
      EXPECT_LE(left, right + 1e-12);
      for (double g : {left, right, 0.5 * (left + right)}) {
        EXPECT_GE(loss.Value(b), loss.Value(a) + g * (b - a) - 1e-9);
      }
    }
  }
}

TEST(LaplaceQuantileTest, Examples) {
  Dataset data = CountsDataset({10, 7, 5, 3, 1});
  EXPECT_DOUBLE_EQ(LaplaceQuantileThreshold(data, 3, 1.0)->threshold, 5.0);
  EXPECT_DOUBLE_EQ(LaplaceQuantileThreshold(data, 1, 1.0)->threshold, 10.0);
  EXPECT_DOUBLE_EQ(LaplaceQuantileThreshold(data, 5, 1.0)->threshold, 1.0);
  EXPECT_DOUBLE_EQ(
      LaplaceQuantileThreshold(CountsDataset({4, 4, 4}), 2, 1.0)->threshold,
      4.0);
  EXPECT_FALSE(LaplaceQuantileThreshold(data, 6, 1.0).ok());
}

TEST(LaplaceQuantileTest, RankIsCeilingOfDOverEpsilon) {
  std::vector<int64_t> counts;
  for (int64_t i = 1; i <= 12; ++i) counts.push_back(i);
  Dataset data = CountsDataset(counts);
  // 3 / 0.3 = 10 exactly, so the 10th largest of 1..12.
  absl::StatusOr<ThresholdEstimate> e = LaplaceQuantileThreshold(data, 3, 0.3);
  ASSERT_TRUE(e.ok());
  EXPECT_DOUBLE_EQ(e->threshold, 3.0);
  EXPECT_DOUBLE_EQ(e->diagnostics.at("rank"), 10.0);
  // 3 / 0.35 = 8.57, so the 9th largest.
  EXPECT_DOUBLE_EQ(LaplaceQuantileThreshold(data, 3, 0.35)->threshold, 4.0);
  EXPECT_EQ(e->budget_spent, PrivacyCost{});
}

TEST(DpQuantileTest, ConvergesToMedianWithNegligibleNoise) {
  std::vector<int64_t> counts;
  for (int64_t i = 1; i <= 1000; ++i) counts.push_back(i);
  Dataset data = CountsDataset(counts);
  RandomSource source(21);
  absl::StatusOr<ThresholdEstimate> e =
      DpQuantileThreshold(data, 500.0, {1e9, 0.0}, 500, source);
  ASSERT_TRUE(e.ok());
  EXPECT_NEAR(e->threshold, 500.0, 5.0);
  EXPECT_EQ(e->budget_spent, (PrivacyCost{1e9, 0.0}));
}

TEST(DpQuantileTest, ConstantDataOscillatesWithinOneStepOfTheValue) {
  Dataset data = CountsDataset(std::vector<int64_t>(1000, 5));
  RandomSource source(22);
  const double c =
      DpQuantileThreshold(data, 500.0, {1e9, 0.0}, 50, source)->threshold;
  // Once past 5 every step moves by a factor exp(+-0.2 * 0.5).
  EXPECT_GE(c, 5.0 * std::exp(-0.1) * (1 - 1e-9));
  EXPECT_LE(c, 5.0 * std::exp(0.1) * (1 + 1e-9));
}

TEST(DpQuantileTest, ZeroLearningRateKeepsInitialValue) {
  Dataset data = CountsDataset({1, 2, 3, 4});
  RandomSource source(23);
  DpQuantileOptions options;
  options.learning_rate = 0.0;
  options.initial_threshold = 2.5;
  EXPECT_DOUBLE_EQ(
      DpQuantileThreshold(data, 1.0, {1.0, 0.0}, 50, source, options)
          ->threshold,
      2.5);
}

TEST(DpQuantileTest, SeededAndNoisy) {
  Dataset data = CountsDataset({1, 2, 3, 4, 5, 6, 7, 8});
  RandomSource a(24), b(24), c(25);
  const double ta =
      DpQuantileThreshold(data, 2.0, {0.5, 0.0}, 50, a)->threshold;
  const double tb =
      DpQuantileThreshold(data, 2.0, {0.5, 0.0}, 50, b)->threshold;
  const double tc =
      DpQuantileThreshold(data, 2.0, {0.5, 0.0}, 50, c)->threshold;
  EXPECT_EQ(ta, tb);
  EXPECT_NE(ta, tc);
}

TEST(DpQuantileTest, RejectsBadArguments) {
  Dataset data = CountsDataset({1, 2, 3, 4});
  RandomSource source(1);
  EXPECT_FALSE(DpQuantileThreshold(data, 4.0, {1.0, 0.0}, 50, source).ok());
  EXPECT_FALSE(DpQuantileThreshold(data, 0.0, {1.0, 0.0}, 50, source).ok());
  EXPECT_FALSE(DpQuantileThreshold(data, 1.0, {0.0, 0.0}, 50, source).ok());
  EXPECT_FALSE(DpQuantileThreshold(data, 1.0, {1.0, 0.0}, 0, source).ok());
}

TEST(DpsgdTest, FindsKinkWithNegligibleNoise) {
  // G / n = max(4 - C, 0) + 0.5 C, minimized at C = 4.
  const int n = 1000;
  Dataset data = CountsDataset(std::vector<int64_t>(n, 4));
  RandomSource source(31);
  DpsgdOptions options;
  options.noise_multiplier = 1e-12;
  options.steps = 10000;
  absl::StatusOr<ThresholdEstimate> e =
      DpsgdThreshold(data, 0.5 * n, 8.0, 1.0, {1.0, 1e-6}, source, options);
  ASSERT_TRUE(e.ok());
  EXPECT_NEAR(e->threshold, 4.0, 0.04);
  EXPECT_EQ(e->budget_spent, (PrivacyCost{1.0, 1e-6}));
}

TEST(DpsgdTest, IdenticalUsersWithDefaultNoise) {
  const int n = 100000;
  Dataset data = CountsDataset(std::vector<int64_t>(n, 4));
  RandomSource source(32);
  absl::StatusOr<ThresholdEstimate> e =
      DpsgdThreshold(data, 0.5 * n, 8.0, 1.0, {1.0, 1e-6}, source);
  ASSERT_TRUE(e.ok());
  EXPECT_EQ(e->diagnostics.at("iterations"), 10000.0);
  EXPECT_NEAR(e->threshold, 4.0, 0.2);
}

TEST(DpsgdTest, StaysWithinUpperBound) {
  std::mt19937_64 rng(33);
  for (int rep = 0; rep < 20; ++rep) {
    Dataset data = RandomDataset(rng, 30, 5);
    RandomSource source(rep);
    DpsgdOptions options;
    options.steps = 200;
    const double e =
        DpsgdThreshold(data, 2.0, 3.0, 2.0, {0.1, 1e-5}, source, options)
            ->threshold;
    EXPECT_GE(e, 0.0);
    EXPECT_LE(e, 3.0);
  }
}

TEST(DpsgdTest, NoiseScaleFormula) {
  Dataset data = CountsDataset(std::vector<int64_t>(100, 2));
  RandomSource source(34);
  DpsgdOptions options;
  options.steps = 50;
  const ThresholdEstimate e =
      *DpsgdThreshold(data, 1.0, 4.0, 4.0, {0.5, 1e-3}, source, options);
  const double expected =
      std::sqrt(32.0) * 2.0 *
      std::sqrt(50.0 * std::log(100.0 / 1e-3) * std::log(1.0 / 1e-3)) /
      (100.0 * 0.5);
  EXPECT_NEAR(e.diagnostics.at("noise_sigma"), expected, 1e-9 * expected);
}

TEST(DpsgdTest, RejectsPureBudget) {
  Dataset data = CountsDataset({1, 2});
  RandomSource source(1);
  EXPECT_FALSE(DpsgdThreshold(data, 1.0, 4.0, 1.0, {1.0, 0.0}, source).ok());
  EXPECT_FALSE(DpsgdThreshold(data, 1.0, 0.0, 1.0, {1.0, 1e-5}, source).ok());
  EXPECT_FALSE(DpsgdThreshold(data, 1.0, 4.0, 0.5, {1.0, 1e-5}, source).ok());
}

TEST(OutputPerturbationTest, LambdaAndSensitivityExamples) {
  EXPECT_NEAR(OutputPerturbationLambda(1.0, 1.0, 50, 5.0), 0.178885, 1e-6);
  EXPECT_NEAR(ThresholdSensitivity(OutputPerturbationLambda(1.0, 1.0, 50, 5.0),
                                   1.0, 50),
              0.447214, 1e-6);
  EXPECT_DOUBLE_EQ(ThresholdSensitivity(1.0, 1.0, 4), 1.0);
}

// Independent minimizer of G(C)/n + lambda C^2 / 2: for every interval between
// consecutive norms, solve the stationarity condition with direct sums and keep
// the best feasible candidate.
double BruteRegularizedMinimizer(const Dataset& data, double m, double cap,
                                 double lambda) {
  const double n = static_cast<double>(data.num_users());
  std::vector<double> knots = {0.0};
  for (const UserHistogram& u : data.users()) knots.push_back(u.l2_norm());
  std::sort(knots.begin(), knots.end());
  knots.push_back(std::numeric_limits<double>::infinity());
  auto objective = [&](double c) {
    return NaiveG(data, m, c, cap) / n + 0.5 * lambda * c * c;
  };
  double best_c = 0.0;
  double best = objective(0.0);
  for (size_t k = 0; k + 1 < knots.size(); ++k) {
    const double lo = knots[k];
    const double hi = knots[k + 1];
    if (!(hi > lo)) continue;
    double weight = 0.0;
    for (const UserHistogram& u : data.users()) {
      if (u.l2_norm() > lo) {
        weight += std::min(u.l1_norm() / u.l2_norm(), cap);
      }
    }
    const double c = std::clamp((weight - m) / (n * lambda), lo, hi);
    if (std::isfinite(c) && objective(c) < best) {
      best = objective(c);
      best_c = c;
    }
  }
  return best_c;
}

TEST(OutputPerturbationTest, RegularizedMinimizerMatchesBruteForce) {
  std::mt19937_64 rng(41);
  for (int rep = 0; rep < 100; ++rep) {
    Dataset data = RandomDataset(rng, 40, 6);
    const double m = 0.5 + static_cast<double>(rng() % 200) / 10.0;
    const double s = 1.0 + static_cast<double>(rng() % 5);
    const double lambda = std::pow(10.0, -3.0 + static_cast<double>(rng() % 5));
    SurrogateLoss loss = *SurrogateLoss::Create(data, m, s);
    EXPECT_NEAR(loss.MinimizeRegularized(lambda),
                BruteRegularizedMinimizer(data, m, std::sqrt(s), lambda), 1e-8);
  }
}

TEST(OutputPerturbationTest, VanishingRegularizationGivesSmallestMinimizer) {
  std::mt19937_64 rng(42);
  for (int rep = 0; rep < 50; ++rep) {
    Dataset data = RandomDataset(rng, 80, 6);
    const double m = 0.5 + static_cast<double>(rng() % 200) / 10.0;
    SurrogateLoss loss = *SurrogateLoss::Create(data, m);
    EXPECT_NEAR(loss.MinimizeRegularized(1e-14), loss.SmallestMinimizer(),
                1e-9);
  }
}

TEST(OutputPerturbationTest, NeighborsMoveMinimizerByAtMostSensitivity) {
  std::mt19937_64 rng(43);
  for (int rep = 0; rep < 300; ++rep) {
    const int n = 20;
    Dataset data = RandomDataset(rng, n, 5);
    std::vector<UserHistogram> users = data.users();
    users[rng() % n] = RandomDataset(rng, 1, 5).users()[0];
    Dataset neighbor = *Dataset::Create(users);
    const double s = 1.0 + static_cast<double>(rng() % 4);
    const double m = 0.5 + static_cast<double>(rng() % 100) / 10.0;
    const double lambda = OutputPerturbationLambda(s, 10.0, n, 0.5);
    const double a =
        SurrogateLoss::Create(data, m, s)->MinimizeRegularized(lambda);
    const double b =
        SurrogateLoss::Create(neighbor, m, s)->MinimizeRegularized(lambda);
    EXPECT_LE(std::abs(a - b), ThresholdSensitivity(lambda, s, n) + 1e-12);
  }
}

TEST(OutputPerturbationTest, ResultIsClampedAndPure) {
  std::mt19937_64 rng(44);
  Dataset data = RandomDataset(rng, 10, 4);
  for (uint64_t seed = 0; seed < 50; ++seed) {
    RandomSource source(seed);
    const ThresholdEstimate e =
        *OutputPerturbationThreshold(data, 1.0, 5.0, 1.0, 0.01, source);
    EXPECT_GE(e.threshold, 0.0);
    EXPECT_LE(e.threshold, 5.0);
    EXPECT_EQ(e.budget_spent, (PrivacyCost{0.01, 0.0}));
  }
}

TEST(OutputPerturbationTest, AddsLaplaceNoiseToRegularizedMinimizer) {
  std::mt19937_64 rng(45);
  Dataset data = RandomDataset(rng, 200, 4);
  const double eps = 0.5;
  const double lambda = OutputPerturbationLambda(2.0, 100.0, 200, eps);
  const double scale = ThresholdSensitivity(lambda, 2.0, 200) / eps;
  const double minimizer =
      SurrogateLoss::Create(data, 3.0, 2.0)->MinimizeRegularized(lambda);
  for (uint64_t seed = 0; seed < 20; ++seed) {
    RandomSource source(seed);
    RandomSource replay(seed);
    const ThresholdEstimate e =
        *OutputPerturbationThreshold(data, 3.0, 100.0, 2.0, eps, source);
    EXPECT_DOUBLE_EQ(e.diagnostics.at("noise_scale"), scale);
    EXPECT_DOUBLE_EQ(e.threshold,
                     std::clamp(minimizer + replay.Laplace(scale), 0.0, 100.0));
  }
}

TEST(ThresholdMethodTest, NamesRoundTrip) {
  for (ThresholdMethod method :
       {ThresholdMethod::kExactGaussian, ThresholdMethod::kLaplaceQuantile,
        ThresholdMethod::kDpQuantile, ThresholdMethod::kDpsgd,
        ThresholdMethod::kOutputPerturbation}) {
    EXPECT_EQ(*ParseThresholdMethod(ThresholdMethodName(method)), method);
  }
  EXPECT_EQ(*ParseThresholdMethod("exact"), ThresholdMethod::kExactGaussian);
  EXPECT_EQ(*ParseThresholdMethod("output-perturb"),
            ThresholdMethod::kOutputPerturbation);
  EXPECT_EQ(*ParseThresholdMethod("dp-quantile"), ThresholdMethod::kDpQuantile);
  EXPECT_FALSE(ParseThresholdMethod("median").ok());
}

TEST(SelectThresholdTest, BudgetLedgerPerMethod) {
  std::mt19937_64 rng(51);
  Dataset data = RandomDataset(rng, 500, 3);
  const PrivacyParams gaussian{1.0, 1e-5};
  ThresholdConfig config;
  config.budget = {0.2, 1e-6};
  RandomSource source(1);

  config.method = ThresholdMethod::kExactGaussian;
  EXPECT_EQ(SelectThreshold(data, config, gaussian, source)->budget_spent,
            PrivacyCost{});

  config.method = ThresholdMethod::kDpQuantile;
  EXPECT_EQ(SelectThreshold(data, config, gaussian, source)->budget_spent,
            (PrivacyCost{0.2, 0.0}));

  config.method = ThresholdMethod::kOutputPerturbation;
  config.upper_bound = 20.0;
  EXPECT_EQ(SelectThreshold(data, config, gaussian, source)->budget_spent,
            (PrivacyCost{0.2, 0.0}));
  config.upper_bound.reset();
  EXPECT_EQ(SelectThreshold(data, config, gaussian, source)->budget_spent,
            (PrivacyCost{0.2, 0.0}));

  config.method = ThresholdMethod::kDpsgd;
  config.upper_bound = 20.0;
  config.dpsgd.steps = 100;
  EXPECT_EQ(SelectThreshold(data, config, gaussian, source)->budget_spent,
            (PrivacyCost{0.2, 1e-6}));
  config.upper_bound.reset();
  EXPECT_EQ(SelectThreshold(data, config, gaussian, source)->budget_spent,
            (PrivacyCost{0.2, 1e-6}));

  config.method = ThresholdMethod::kLaplaceQuantile;
  EXPECT_EQ(SelectThreshold(data, config, {10.0, 0.0}, source)->budget_spent,
            PrivacyCost{});
}

TEST(SelectThresholdTest, ExactMatchesSurrogateMinimizer) {
  std::mt19937_64 rng(52);
  Dataset data = RandomDataset(rng, 300, 4);
  const PrivacyParams release{1.0, 1e-5};
  ThresholdConfig config;
  RandomSource source(1);
  EXPECT_DOUBLE_EQ(SelectThreshold(data, config, release, source)->threshold,
                   SurrogateLoss::Create(data, NoiseCoefficient(4, release))
                       ->SmallestMinimizer());
}

TEST(SelectThresholdTest, RejectsMismatchedRelease) {
  Dataset data = CountsDataset({1, 2, 3, 4, 5, 6, 7, 8, 9, 10});
  RandomSource source(1);
  ThresholdConfig config;
  config.method = ThresholdMethod::kExactGaussian;
  EXPECT_FALSE(SelectThreshold(data, config, {1.0, 0.0}, source).ok());
  config.method = ThresholdMethod::kLaplaceQuantile;
  EXPECT_FALSE(SelectThreshold(data, config, {1.0, 1e-5}, source).ok());
  config.method = ThresholdMethod::kDpsgd;
  config.upper_bound = 5.0;
  config.budget = {0.1, 0.0};
  EXPECT_FALSE(SelectThreshold(data, config, {1.0, 1e-5}, source).ok());
}

TEST(NoiseCoefficientTest, ClosedForm) {
  EXPECT_NEAR(NoiseCoefficient(1, {1.0, 0.05}),
              2.0 * std::sqrt(std::log(26.4) / std::numbers::pi), 1e-12);
  EXPECT_DOUBLE_EQ(NoiseCoefficient(10, {0.5, 1e-3}),
                   20.0 * NoiseCoefficient(1, {1.0, 1e-3}));
  EXPECT_DOUBLE_EQ(QuantileTargetRank(7, {0.5, 0.0}), 14.0);
  EXPECT_DOUBLE_EQ(DefaultSparsity(3), 1.0);
  EXPECT_DOUBLE_EQ(DefaultSparsity(5000), 500.0);
}

}  // namespace
}  // namespace userdp
