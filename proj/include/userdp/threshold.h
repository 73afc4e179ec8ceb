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

#ifndef USERDP_THRESHOLD_H_
#define USERDP_THRESHOLD_H_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "userdp/histogram.h"
#include "userdp/random.h"

namespace userdp {

// Expected L1 norm of the Gaussian release noise per unit of threshold:
//   2 * sqrt(ln(1.32 / delta) / pi) * d / epsilon.
// Requires release.delta > 0.
double NoiseCoefficient(int64_t domain_size, const PrivacyParams& release);

// Convex piecewise-linear upper bound on the expected L1 error of the Gaussian
// release at threshold C:
//   G(C) = sum_i w_i * max(l2_i - C, 0) + C * M,   w_i = l1_i / l2_i.
// With a sparsity cap s, every w_i is clipped to sqrt(s). Users with an empty
// histogram contribute nothing.
class SurrogateLoss {
 public:
  struct Term {
    double l2 = 0.0;
    double weight = 0.0;
  };

  static absl::StatusOr<SurrogateLoss> Create(
      const Dataset& dataset, double noise_coefficient,
      std::optional<double> sparsity_cap = std::nullopt);

  double noise_coefficient() const { return m_; }
  int64_t num_users() const { return num_users_; }
  // Nonempty users sorted by ascending l2 norm.
  const std::vector<Term>& terms() const { return terms_; }

  double Value(double c) const;
  // sum_i w_i * max(l2_i - C, 0); the clipping-bias part of Value().
  double BiasTerm(double c) const;
  // Sum of w_i over users with l2_i > C.
  double WeightAbove(double c) const;
  // One-sided derivatives of G. Every value in between is a subgradient.
  double RightDerivative(double c) const { return m_ - WeightAbove(c); }
  double LeftDerivative(double c) const;

  // Smallest C >= 0 with WeightAbove(C) <= M. This is a minimizer of G.
  double SmallestMinimizer() const;

  // Minimizer of G(C) / n + (lambda / 2) * C^2 over C >= 0. The objective is
  // strictly convex and quadratic between consecutive norms, so the scan over
  // norms with a closed-form vertex per piece is exact.
  double MinimizeRegularized(double lambda) const;

 private:
  SurrogateLoss(double m, int64_t num_users, std::vector<Term> terms);

  // Index of the first term with l2 > c.
  size_t FirstAbove(double c) const;

  double m_;
  int64_t num_users_;
  std::vector<Term> terms_;
  // suffix_weight_[k] = sum of weight over terms_[k..]; same for weight * l2.
  std::vector<double> suffix_weight_;
  std::vector<double> suffix_weighted_l2_;
};

enum class ThresholdMethod {
  kExactGaussian,
  kLaplaceQuantile,
  kDpQuantile,
  kDpsgd,
  kOutputPerturbation,
};

std::string ThresholdMethodName(ThresholdMethod method);
absl::StatusOr<ThresholdMethod> ParseThresholdMethod(const std::string& name);

struct ThresholdEstimate {
  double threshold = 0.0;
  ThresholdMethod method = ThresholdMethod::kExactGaussian;
  PrivacyCost budget_spent;
  std::map<std::string, double> diagnostics;
};

// The ceil(d / epsilon)-th largest user L1 norm. Ties are resolved by position
// in the descending order. Non-private. Fails when ceil(d / epsilon) > n.
absl::StatusOr<ThresholdEstimate> LaplaceQuantileThreshold(
    const Dataset& dataset, int64_t domain_size, double epsilon);

// Smallest C >= 0 with sum_{i : l2_i > C} l1_i / l2_i <= M. Non-private.
absl::StatusOr<ThresholdEstimate> ExactGaussianThreshold(
    const Dataset& dataset, double noise_coefficient);

struct DpQuantileOptions {
  double learning_rate = 0.2;
  double initial_threshold = 1.0;
};

// Private tracker for the (1 - M/n) quantile of the user L1 norms:
//   C <- C * exp(-eta * (b - q)),
// where b is the fraction of users with l1 <= C plus Laplace(T / (n * epsilon))
// noise. Each of the T steps spends epsilon / T. Returns the last iterate.
absl::StatusOr<ThresholdEstimate> DpQuantileThreshold(
    const Dataset& dataset, double target_rank, const PrivacyParams& budget,
    int64_t steps, RandomSource& source, const DpQuantileOptions& options = {});

struct DpsgdOptions {
  // 0 selects min(n^2, 10^4).
  int64_t steps = 0;
  // Per-step Gaussian noise is
  //   noise_multiplier * L * sqrt(T * ln(n / delta) * ln(1 / delta)) /
  //   (n * epsilon)
  // with L = sqrt(s) the per-user gradient sensitivity.
  double noise_multiplier = 5.656854249492381;  // sqrt(32)
};

// Projected noisy SGD on G(C) / n over [0, C_m], one user sampled with
// replacement per step, weights capped at sqrt(s). Step size at step t is
// C_m / sqrt(t * (L^2 + sigma^2)). Returns the average of the last half of the
// iterates. Requires budget.delta > 0.
absl::StatusOr<ThresholdEstimate> DpsgdThreshold(
    const Dataset& dataset, double noise_coefficient, double upper_bound,
    double sparsity, const PrivacyParams& budget, RandomSource& source,
    const DpsgdOptions& options = {});

// Regularized minimization with Laplace output noise:
//   lambda = 2 sqrt(2s) / (C_m sqrt(n epsilon')),
//   Delta  = 4 sqrt(s) / (lambda n),
//   returns clamp(argmin_C G(C)/n + lambda C^2 / 2 + Laplace(Delta / epsilon'),
//                 0, C_m).
// Pure (epsilon', 0)-DP.
absl::StatusOr<ThresholdEstimate> OutputPerturbationThreshold(
    const Dataset& dataset, double noise_coefficient, double upper_bound,
    double sparsity, double epsilon_prime, RandomSource& source);

double OutputPerturbationLambda(double sparsity, double upper_bound,
                                int64_t num_users, double epsilon_prime);

// Bound on how far the regularized minimizer moves when one user is replaced:
// 4 sqrt(s) / (lambda n).
double ThresholdSensitivity(double lambda, double sparsity, int64_t num_users);

// Threshold selection as used by the CLI and the experiment runner.
struct ThresholdConfig {
  ThresholdMethod method = ThresholdMethod::kExactGaussian;
  // Budget for the private methods, (epsilon', delta').
  PrivacyParams budget = {0.1, 0.0};
  // s; defaults to max(1, 0.1 * d).
  std::optional<double> sparsity;
  // C_m for DP-SGD and output perturbation. When absent it is estimated with
  // the DP quantile tracker using half of `budget.epsilon`, and the method
  // itself gets the other half.
  std::optional<double> upper_bound;
  int64_t quantile_steps = 50;
  DpQuantileOptions quantile;
  DpsgdOptions dpsgd;
};

// Target rank for the DP quantile tracker: M for a Gaussian release,
// d / epsilon for a Laplace release.
double QuantileTargetRank(int64_t domain_size, const PrivacyParams& release);

double DefaultSparsity(int64_t domain_size);

// Runs the configured method for a release with budget `release`. The
// returned budget_spent covers threshold selection only.
absl::StatusOr<ThresholdEstimate> SelectThreshold(const Dataset& dataset,
                                                  const ThresholdConfig& config,
                                                  const PrivacyParams& release,
                                                  RandomSource& source);

}  // namespace userdp

#endif  // USERDP_THRESHOLD_H_
