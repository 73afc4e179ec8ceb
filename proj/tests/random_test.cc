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
#include "userdp/random.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

#include "gtest/gtest.h"

namespace userdp {
namespace {

double KolmogorovSmirnov(std::vector<double> samples,
                         const std::function<double(double)>& cdf) {
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double worst = 0.0;
  for (size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    worst = std::max({worst, f - static_cast<double>(i) / n,
                      static_cast<double>(i + 1) / n - f});
  }
  return worst;
}

// Two-sided critical value at significance 0.001 (asymptotic).
double KsCritical(size_t n) {
  return 1.9495 / std::sqrt(static_cast<double>(n));
}

double Mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) /
         static_cast<double>(v.size());
}

double Variance(const std::vector<double>& v) {
  const double m = Mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

TEST(RandomSourceTest, LaplaceMillionDrawMoments) {
  RandomSource source(101);
  std::vector<double> unit = *SampleLaplace(source, 1.0, 1000000);
  const double var = Variance(unit);
  EXPECT_GE(var, 1.98);
  EXPECT_LE(var, 2.02);

  std::vector<double> wide = *SampleLaplace(source, 3.0, 1000000);
  double abs_mean = 0.0;
  for (double x : wide) abs_mean += std::abs(x);
  abs_mean /= static_cast<double>(wide.size());
  EXPECT_NEAR(abs_mean, 3.0, 0.03);
}

TEST(RandomSourceTest, GaussianMillionDrawMoments) {
  RandomSource source(202);
  std::vector<double> unit = *SampleGaussian(source, 1.0, 1000000);
  EXPECT_NEAR(Mean(unit), 0.0, 0.005);
  const double var = Variance(unit);
  EXPECT_GE(var, 0.99);
  EXPECT_LE(var, 1.01);

  std::vector<double> wide = *SampleGaussian(source, 2.0, 1000000);
  double abs_mean = 0.0;
  for (double x : wide) abs_mean += std::abs(x);
  abs_mean /= static_cast<double>(wide.size());
  const double expected = 2.0 * std::sqrt(2.0 / std::acos(-1.0));
  EXPECT_NEAR(abs_mean, expected, 0.01 * expected);
}

TEST(RandomSourceTest, SubstreamsAreStatisticallyIndependent) {
  RandomSource parent(77);
  RandomSource a = parent.Substream(0);
  RandomSource b = parent.Substream(1);
  const int n = 100000;
  double sum_ab = 0.0;
  for (int i = 0; i < n; ++i) {
    sum_ab += (a.Uniform() - 0.5) * (b.Uniform() - 0.5);
  }
  // Correlation of independent uniforms has standard error 1/sqrt(n).
  const double correlation = sum_ab / n * 12.0;
  EXPECT_LT(std::abs(correlation), 5.0 / std::sqrt(n));
}

TEST(MixBitsTest, MatchesSplitMix64Reference) {
  // First output of the SplitMix64 generator seeded with 0.
  EXPECT_EQ(MixBits(0), 0xe220a8397b1dcdafULL);
}

TEST(RandomSourceTest, SameSeedSameStream) {
  RandomSource a(42);
  RandomSource b(42);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.NextBits(), b.NextBits());
}

TEST(RandomSourceTest, DifferentSeedsDiffer) {
  RandomSource a(1);
  RandomSource b(2);
  int equal = 0;
  for (int i = 0; i < 100; ++i) equal += a.NextBits() == b.NextBits();
  EXPECT_EQ(equal, 0);
}

TEST(RandomSourceTest, SubstreamsAreDeterministicAndDistinct) {
  RandomSource parent(9);
  RandomSource s1 = parent.Substream(1);
  RandomSource s1_again = parent.Substream(1);
  RandomSource s2 = parent.Substream(2);
  EXPECT_EQ(s1.stream(), s1_again.stream());
  EXPECT_NE(s1.stream(), s2.stream());
  for (int i = 0; i < 20; ++i) {
    const uint64_t x = s1.NextBits();
    EXPECT_EQ(x, s1_again.NextBits());
    EXPECT_NE(x, s2.NextBits());
  }
  // Deriving a substream does not advance the parent.
  RandomSource fresh(9);
  EXPECT_EQ(parent.NextBits(), fresh.NextBits());
}

TEST(RandomSourceTest, UniformIsInOpenUnitInterval) {
  RandomSource source(3);
  std::vector<double> u(100000);
  for (double& x : u) {
    x = source.Uniform();
    ASSERT_GT(x, 0.0);
    ASSERT_LT(x, 1.0);
  }
  EXPECT_LT(KolmogorovSmirnov(u, [](double x) { return x; }),
            KsCritical(u.size()));
}

TEST(RandomSourceTest, LaplacePassesKsTest) {
  RandomSource source(17);
  const double scale = 2.5;
  absl::StatusOr<std::vector<double>> draws =
      SampleLaplace(source, scale, 100000);
  ASSERT_TRUE(draws.ok());
  const auto cdf = [scale](double x) {
    return x < 0 ? 0.5 * std::exp(x / scale) : 1.0 - 0.5 * std::exp(-x / scale);
  };
  EXPECT_LT(KolmogorovSmirnov(*draws, cdf), KsCritical(draws->size()));
  EXPECT_NEAR(Variance(*draws), 2.0 * scale * scale,
              0.05 * 2.0 * scale * scale);
}

TEST(RandomSourceTest, GaussianPassesKsTest) {
  RandomSource source(23);
  const double sigma = 1.7;
  absl::StatusOr<std::vector<double>> draws =
      SampleGaussian(source, sigma, 100000);
  ASSERT_TRUE(draws.ok());
  const auto cdf = [sigma](double x) {
    return 0.5 * std::erfc(-x / (sigma * std::sqrt(2.0)));
  };
  EXPECT_LT(KolmogorovSmirnov(*draws, cdf), KsCritical(draws->size()));
  EXPECT_NEAR(std::sqrt(Variance(*draws)), sigma, 0.02 * sigma);
}

TEST(RandomSourceTest, SamplersRejectBadArguments) {
  RandomSource source(1);
  EXPECT_FALSE(SampleLaplace(source, 0.0, 10).ok());
  EXPECT_FALSE(SampleLaplace(source, -1.0, 10).ok());
  EXPECT_FALSE(SampleLaplace(source, 1.0, -1).ok());
  EXPECT_FALSE(SampleGaussian(source, 0.0, 10).ok());
  EXPECT_FALSE(SampleGaussian(source, 1.0, -1).ok());
  EXPECT_TRUE(SampleGaussian(source, 1.0, 0)->empty());
}

TEST(LaplaceCdfTest, InverseCdfInvertsCdf) {
  for (double p : {1e-9, 0.01, 0.3, 0.5, 0.77, 0.999999}) {
    EXPECT_NEAR(LaplaceCdf(LaplaceInverseCdf(p, 3.0), 3.0), p, 1e-12);
  }
  EXPECT_EQ(LaplaceInverseCdf(0.5, 3.0), 0.0);
}

TEST(NormalCdfTest, KnownValues) {
  EXPECT_NEAR(NormalCdf(0.0, 2.0), 0.5, 1e-15);
  EXPECT_NEAR(NormalCdf(1.959963984540054, 1.0), 0.975, 1e-12);
  EXPECT_NEAR(NormalCdf(-2.0, 2.0), 0.15865525393145707, 1e-12);
}

TEST(RandomSourceTest, GammaMomentsMatch) {
  for (double shape : {0.3, 1.0, 4.5, 1e4}) {
    RandomSource source(static_cast<uint64_t>(shape * 10));
    std::vector<double> draws(100000);
    for (double& x : draws) x = source.Gamma(shape);
    const double se = std::sqrt(shape / 100000.0);
    EXPECT_NEAR(Mean(draws), shape, 5.0 * se) << "shape " << shape;
    EXPECT_NEAR(Variance(draws), shape, 0.05 * shape) << "shape " << shape;
  }
}

TEST(RandomSourceTest, PoissonMomentsMatchInBothRegimes) {
  for (double mean : {0.0, 0.2, 1.0, 7.5, 12.0, 300.0}) {
    RandomSource source(static_cast<uint64_t>(mean * 100) + 1);
    std::vector<double> draws(100000);
    for (double& x : draws) {
      const int64_t k = source.Poisson(mean);
      ASSERT_GE(k, 0);
      x = static_cast<double>(k);
    }
    const double se = std::sqrt(std::max(mean, 1e-9) / 100000.0);
    EXPECT_NEAR(Mean(draws), mean, 5.0 * se) << "mean " << mean;
    EXPECT_NEAR(Variance(draws), mean, 0.05 * mean + 1e-12) << "mean " << mean;
  }
}

TEST(RandomSourceTest, PoissonPmfMatchesAtSmallMean) {
  RandomSource source(99);
  std::vector<int> hist(10, 0);
  const int draws = 200000;
  for (int i = 0; i < draws; ++i) {
    const int64_t k = source.Poisson(1.0);
    if (k < 10) ++hist[static_cast<size_t>(k)];
  }
  double factorial = 1.0;
  for (int k = 0; k < 6; ++k) {
    if (k > 0) factorial *= k;
    const double p = std::exp(-1.0) / factorial;
    const double se = std::sqrt(p * (1 - p) / draws);
    EXPECT_NEAR(hist[static_cast<size_t>(k)] / static_cast<double>(draws), p,
                5 * se)
        << "k=" << k;
  }
}

TEST(RandomSourceTest, UniformIntIsUnbiased) {
  RandomSource source(5);
  std::vector<int> hist(7, 0);
  for (int i = 0; i < 70000; ++i) ++hist[source.UniformInt(7)];
  for (int c : hist) EXPECT_NEAR(c, 10000, 500);
}

}  // namespace
}  // namespace userdp
