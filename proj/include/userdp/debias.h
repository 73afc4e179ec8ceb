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

#ifndef USERDP_DEBIAS_H_
#define USERDP_DEBIAS_H_

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "absl/status/statusor.h"
#include "userdp/histogram.h"
#include "userdp/random.h"

namespace userdp {

// Expected clipped Poisson count h(lambda) = E[min(X, C)], X ~ Poi(lambda),
// and its first two derivatives in lambda. Requires lambda >= 0 and C >= 1;
// the Poisson pmf is evaluated in log space so C in the hundreds is fine.
//   h(lambda)   = C - sum_{j<C} (C - j) pmf(j)
//   h'(lambda)  = P[X <= C - 1]
//   h''(lambda) = -pmf(C - 1)
double H(double lambda, int64_t clip);
double HPrime(double lambda, int64_t clip);
double HDoublePrime(double lambda, int64_t clip);

// The unique lambda >= 0 with H(lambda, clip) == y, to 1e-12 in y. Fails
// unless 0 <= y < clip.
absl::StatusOr<double> HInverse(double y, int64_t clip);

// 1 / P[Poi(1) < C]. Inflation of the release error caused by inverting h.
double GammaC(int64_t clip);

// Single-item count release with clip threshold C and Laplace(C / epsilon)
// noise. epsilon = +infinity gives a noiseless release, which is useful for
// testing but is not private.
struct PoissonClipModel {
  int64_t clip = 1;
  double epsilon = 1.0;
};

struct DebiasResult {
  // Estimated total count n * h^{-1}(y / n).
  double n_hat = 0.0;
  // n_hat / n, clamped to [0, 1] unless disabled.
  double lambda_hat = 0.0;
  // Clipped sum plus Laplace noise, before inversion.
  double noisy_sum = 0.0;
};

struct DebiasOptions {
  // Clamp lambda_hat to [0, 1]. Only appropriate when the mean count is known
  // to be at most 1.
  bool clamp_lambda = true;
};

// sum_i min(N_i, C) + Laplace(C / epsilon).
absl::StatusOr<double> ClipRelease1d(std::span<const int64_t> counts,
                                     double clip, double epsilon,
                                     RandomSource& source);

// Inverts a noisy clipped sum. y / n is first projected onto [0, C - 1e-12],
// the range of h. Pure post-processing.
absl::StatusOr<DebiasResult> DebiasFromNoisySum(
    double noisy_sum, int64_t num_users, int64_t clip,
    const DebiasOptions& options = {});

// ClipRelease1d with an integer C followed by DebiasFromNoisySum.
absl::StatusOr<DebiasResult> DebiasRelease(std::span<const int64_t> counts,
                                           const PoissonClipModel& model,
                                           RandomSource& source,
                                           const DebiasOptions& options = {});

// General post-processed release g(sum_i f(N_i) + Laplace(sensitivity / eps)),
// where f is bounded with range width `sensitivity`.
struct DebiasTransform {
  std::function<double(int64_t)> f;
  std::function<absl::StatusOr<double>(double)> g;
  double sensitivity = 1.0;
};

// f(x) = min(x, C), g(y) = n * h^{-1}(y / n) with the range projection above.
DebiasTransform PoissonDebiasTransform(int64_t clip, int64_t num_users);

absl::StatusOr<double> GeneralDebiasRelease(std::span<const int64_t> counts,
                                            const DebiasTransform& transform,
                                            double epsilon,
                                            RandomSource& source);

// Upper bound on E[(lambda_bar - lambda_hat)^2] for the debiased estimator:
//   gamma_C^2 (C^2 / (n eps)^2 + lambda_bar / n + b * Sigma^2),
// where Sigma is the variance of the lambda_i and b is
// min{1, 1 / (8 pi (C - 1))} in general, or 1 / (4 ((C - 1)!)^2) when every
// lambda_i <= 1. Fails when lambda_bar > 1.
absl::StatusOr<double> DebiasErrorBound(double lambda_bar, double sigma,
                                        int64_t clip, int64_t num_users,
                                        double epsilon, bool all_lambda_le_1);

struct GapReport {
  double lambda_bar = 0.0;
  double sigma = 0.0;
  double h_bar = 0.0;
  double h_min = 0.0;
  double gamma_c = 0.0;
  double alpha = 0.0;
  // Leading term of the MSE advantage of debiasing over plain clipping:
  //   alpha (2 gamma - (gamma + 1) alpha) / (gamma - 1) * (lambda_bar - h)^2.
  double predicted_gap = 0.0;
};

// Fails when lambdas is empty, any lambda_i < 0, lambda_bar == 0, or
// h_bar < h_min = h(lambda_bar) - (lambda_bar - h(lambda_bar)) / (gamma_C - 1).
absl::StatusOr<GapReport> DebiasGap(std::span<const double> lambdas,
                                    int64_t clip);

// Heuristic debias threshold: ceil((n Sigma)^{2/3}) + 1 in general, or
// ceil(1 + ln(1 + n Sigma)) when every lambda_i <= 1. At least 1.
int64_t SuggestDebiasC(double sigma, int64_t num_users, bool all_lambda_le_1);

// Per-item debiasing for a d-item histogram: every item is released with
// DebiasRelease on the per-user counts of that item, each with budget
// PerItemEpsilon(total, d).
absl::StatusOr<std::vector<DebiasResult>> DebiasHistogram(
    const Dataset& dataset, int64_t clip, const PrivacyParams& total,
    RandomSource& source, const DebiasOptions& options = {});

// Largest per-item epsilon whose d-fold composition stays within `total`.
// Uses the better of basic composition (epsilon / d) and, when delta > 0,
// advanced composition sqrt(2 d ln(1/delta)) e0 + d e0 (e^e0 - 1) <= epsilon.
double PerItemEpsilon(const PrivacyParams& total, int64_t domain_size);

}  // namespace userdp

#endif  // USERDP_DEBIAS_H_
