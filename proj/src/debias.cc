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
#include "userdp/debias.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "absl/status/status.h"
#include "absl/strings/str_format.h"
#include "userdp/status_macros.h"

namespace userdp {
namespace {

// Largest y / n accepted for inversion; h never reaches C.
constexpr double kRangeMargin = 1e-12;

double LogPoissonPmf(double lambda, int64_t j) {
  const double jd = static_cast<double>(j);
  return -lambda + jd * std::log(lambda) - std::lgamma(jd + 1.0);
}

double PoissonPmf(double lambda, int64_t j) {
  if (lambda == 0.0) return j == 0 ? 1.0 : 0.0;
  return std::exp(LogPoissonPmf(lambda, j));
}

absl::Status ValidateClip(int64_t clip) {
  if (clip < 1) {
    return absl::InvalidArgumentError(
        absl::StrFormat("clip threshold C must be >= 1, got %d", clip));
  }
  return absl::OkStatus();
}

absl::Status ValidateEpsilon(double epsilon) {
  if (!(epsilon > 0.0)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("epsilon must be positive, got %g", epsilon));
  }
  return absl::OkStatus();
}

double NoiseScale(double sensitivity, double epsilon) {
  return std::isinf(epsilon) ? 0.0 : sensitivity / epsilon;
}

}  // namespace

double H(double lambda, int64_t clip) {
  double deficit = 0.0;
  for (int64_t j = 0; j < clip; ++j) {
    deficit += static_cast<double>(clip - j) * PoissonPmf(lambda, j);
  }
  return std::max(0.0, static_cast<double>(clip) - deficit);
}

double HPrime(double lambda, int64_t clip) {
  double cdf = 0.0;
  for (int64_t j = 0; j < clip; ++j) cdf += PoissonPmf(lambda, j);
  return std::min(1.0, cdf);
}

double HDoublePrime(double lambda, int64_t clip) {
  return -PoissonPmf(lambda, clip - 1);
}

absl::StatusOr<double> HInverse(double y, int64_t clip) {
  USERDP_RETURN_IF_ERROR(ValidateClip(clip));
  if (!(y >= 0.0) || !(y < static_cast<double>(clip))) {
    return absl::OutOfRangeError(absl::StrFormat(
        "h^{-1} is defined on [0, %d), got y = %.17g", clip, y));
  }
  if (y == 0.0) return 0.0;

  // h(lambda) <= lambda, so the root is at least y. Grow an upper bracket.
  double lo = y;
  double hi = std::max(2.0 * y, 1.0);
  while (H(hi, clip) < y) {
    lo = hi;
    hi *= 2.0;
  }
  double x = lo;
  double residual = H(x, clip) - y;
  for (int iter = 0; iter < 500 && residual != 0.0; ++iter) {
    const double slope = HPrime(x, clip);
    double next = slope > 0.0 ? x - residual / slope : hi;
    // Fall back to bisection when Newton leaves the bracket or stalls.
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    double next_residual = H(next, clip) - y;
    if (std::abs(next_residual) > 0.5 * std::abs(residual)) {
      const double mid = 0.5 * (lo + hi);
      const double mid_residual = H(mid, clip) - y;
      if (std::abs(mid_residual) < std::abs(next_residual)) {
        next = mid;
        next_residual = mid_residual;
      }
    }
    if (next == x) break;
    x = next;
    residual = next_residual;
    if (residual < 0.0) {
      lo = x;
    } else {
      hi = x;
    }
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) break;
  }
  return x;
}

double GammaC(int64_t clip) { return 1.0 / HPrime(1.0, clip); }

absl::StatusOr<double> ClipRelease1d(std::span<const int64_t> counts,
                                     double clip, double epsilon,
                                     RandomSource& source) {
  if (counts.empty()) {
    return absl::InvalidArgumentError("counts must be nonempty");
  }
  if (!(clip > 0.0) || !std::isfinite(clip)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("clip threshold must be positive, got %g", clip));
  }
  USERDP_RETURN_IF_ERROR(ValidateEpsilon(epsilon));
  double sum = 0.0;
  for (int64_t count : counts) {
    if (count < 0) {
      return absl::InvalidArgumentError("counts must be nonnegative");
    }
    sum += std::min(static_cast<double>(count), clip);
  }
  return sum + source.Laplace(NoiseScale(clip, epsilon));
}

absl::StatusOr<DebiasResult> DebiasFromNoisySum(double noisy_sum,
                                                int64_t num_users, int64_t clip,
                                                const DebiasOptions& options) {
  USERDP_RETURN_IF_ERROR(ValidateClip(clip));
  if (num_users < 1) {
    return absl::InvalidArgumentError("number of users must be positive");
  }
  const double n = static_cast<double>(num_users);
  const double c = static_cast<double>(clip);
  const double y = std::clamp(noisy_sum / n, 0.0, c - kRangeMargin);
  USERDP_ASSIGN_OR_RETURN(double lambda, HInverse(y, clip));
  DebiasResult result;
  result.noisy_sum = noisy_sum;
  result.n_hat = n * lambda;
  result.lambda_hat =
      options.clamp_lambda ? std::clamp(lambda, 0.0, 1.0) : lambda;
  return result;
}

absl::StatusOr<DebiasResult> DebiasRelease(std::span<const int64_t> counts,
                                           const PoissonClipModel& model,
                                           RandomSource& source,
                                           const DebiasOptions& options) {
  USERDP_RETURN_IF_ERROR(ValidateClip(model.clip));
  USERDP_ASSIGN_OR_RETURN(double noisy_sum,
                          ClipRelease1d(counts, static_cast<double>(model.clip),
                                        model.epsilon, source));
  return DebiasFromNoisySum(noisy_sum, static_cast<int64_t>(counts.size()),
                            model.clip, options);
}

DebiasTransform PoissonDebiasTransform(int64_t clip, int64_t num_users) {
  DebiasTransform transform;
  transform.sensitivity = static_cast<double>(clip);
  transform.f = [clip](int64_t x) {
    return static_cast<double>(std::min(x, clip));
  };
  transform.g = [clip, num_users](double y) -> absl::StatusOr<double> {
    USERDP_ASSIGN_OR_RETURN(
        DebiasResult result,
        DebiasFromNoisySum(y, num_users, clip, {.clamp_lambda = false}));
    return result.n_hat;
  };
  return transform;
}

absl::StatusOr<double> GeneralDebiasRelease(std::span<const int64_t> counts,
                                            const DebiasTransform& transform,
                                            double epsilon,
                                            RandomSource& source) {
  if (counts.empty()) {
    return absl::InvalidArgumentError("counts must be nonempty");
  }
  if (!transform.f || !transform.g) {
    return absl::InvalidArgumentError("transform needs both f and g");
  }
  USERDP_RETURN_IF_ERROR(ValidateEpsilon(epsilon));
  double sum = 0.0;
  for (int64_t count : counts) sum += transform.f(count);
  return transform.g(
      sum + source.Laplace(NoiseScale(transform.sensitivity, epsilon)));
}

absl::StatusOr<double> DebiasErrorBound(double lambda_bar, double sigma,
                                        int64_t clip, int64_t num_users,
                                        double epsilon, bool all_lambda_le_1) {
  USERDP_RETURN_IF_ERROR(ValidateClip(clip));
  USERDP_RETURN_IF_ERROR(ValidateEpsilon(epsilon));
  if (num_users < 1) {
    return absl::InvalidArgumentError("number of users must be positive");
  }
  if (!(lambda_bar >= 0.0) || lambda_bar > 1.0) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "the error bound requires 0 <= lambda_bar <= 1, got %g", lambda_bar));
  }
  if (!(sigma >= 0.0)) {
    return absl::InvalidArgumentError("Sigma must be nonnegative");
  }
  const double c = static_cast<double>(clip);
  const double n = static_cast<double>(num_users);
  double bias_coefficient;
  if (all_lambda_le_1) {
    const double log_factorial = std::lgamma(c);  // ln((C - 1)!)
    bias_coefficient = 0.25 * std::exp(-2.0 * log_factorial);
  } else {
    bias_coefficient =
        clip == 1 ? 1.0
                  : std::min(1.0, 1.0 / (8.0 * std::numbers::pi * (c - 1.0)));
  }
  const double noise_term =
      std::isinf(epsilon) ? 0.0 : (c * c) / (n * n * epsilon * epsilon);
  const double gamma = GammaC(clip);
  return gamma * gamma *
         (noise_term + lambda_bar / n + bias_coefficient * sigma * sigma);
}

absl::StatusOr<GapReport> DebiasGap(std::span<const double> lambdas,
                                    int64_t clip) {
  USERDP_RETURN_IF_ERROR(ValidateClip(clip));
  if (lambdas.empty()) {
    return absl::InvalidArgumentError("lambdas must be nonempty");
  }
  GapReport report;
  double h_sum = 0.0;
  for (double lambda : lambdas) {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
      return absl::InvalidArgumentError(absl::StrFormat(
          "lambda values must be finite and >= 0, got %g", lambda));
    }
    report.lambda_bar += lambda;
    h_sum += H(lambda, clip);
  }
  const double n = static_cast<double>(lambdas.size());
  report.lambda_bar /= n;
  report.h_bar = h_sum / n;
  if (!(report.lambda_bar > 0.0)) {
    return absl::InvalidArgumentError("mean lambda must be positive");
  }
  for (double lambda : lambdas) {
    const double diff = lambda - report.lambda_bar;
    report.sigma += diff * diff;
  }
  report.sigma /= n;

  report.gamma_c = GammaC(clip);
  const double h_at_mean = H(report.lambda_bar, clip);
  const double shortfall = report.lambda_bar - h_at_mean;
  report.h_min = h_at_mean - shortfall / (report.gamma_c - 1.0);
  if (report.h_bar < report.h_min) {
    return absl::FailedPreconditionError(absl::StrFormat(
        "gap hypothesis violated: h_bar = %.6g is below h_min = %.6g",
        report.h_bar, report.h_min));
  }
  const double g = report.gamma_c;
  report.alpha = shortfall > 0.0
                     ? (report.h_bar - report.h_min) * (g - 1.0) / shortfall
                     : 1.0;
  report.predicted_gap = report.alpha * (2.0 * g - (g + 1.0) * report.alpha) /
                         (g - 1.0) * shortfall * shortfall;
  return report;
}

int64_t SuggestDebiasC(double sigma, int64_t num_users, bool all_lambda_le_1) {
  const double spread = std::max(0.0, sigma) * static_cast<double>(num_users);
  // Shave a few ulps so exact integers such as cbrt(1000)^2 do not round up.
  const auto ceil_exact = [](double x) { return std::ceil(x * (1.0 - 1e-12)); };
  double c;
  if (all_lambda_le_1) {
    c = ceil_exact(1.0 + std::log1p(spread));
  } else {
    const double root = std::cbrt(spread);
    c = ceil_exact(root * root) + 1.0;
  }
  return std::max<int64_t>(1, static_cast<int64_t>(c));
}

double PerItemEpsilon(const PrivacyParams& total, int64_t domain_size) {
  const double d = static_cast<double>(domain_size);
  const double basic = total.epsilon / d;
  if (!(total.delta > 0.0) || domain_size == 1) return basic;
  const double root = std::sqrt(2.0 * d * std::log(1.0 / total.delta));
  const auto composed = [&](double e0) {
    return root * e0 + d * e0 * std::expm1(e0);
  };
  double lo = 0.0;
  double hi = total.epsilon;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (composed(mid) <= total.epsilon) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return std::max(basic, lo);
}

absl::StatusOr<std::vector<DebiasResult>> DebiasHistogram(
    const Dataset& dataset, int64_t clip, const PrivacyParams& total,
    RandomSource& source, const DebiasOptions& options) {
  USERDP_RETURN_IF_ERROR(
      PrivacyParams::Create(total.epsilon, total.delta).status());
  const int64_t d = dataset.domain_size();
  const PoissonClipModel model{clip, PerItemEpsilon(total, d)};
  std::vector<std::vector<int64_t>> columns(
      static_cast<size_t>(d), std::vector<int64_t>(dataset.users().size(), 0));
  for (size_t i = 0; i < dataset.users().size(); ++i) {
    for (const HistogramEntry& e : dataset.users()[i].entries()) {
      columns[static_cast<size_t>(e.item)][i] = e.count;
    }
  }
  std::vector<DebiasResult> results;
  results.reserve(columns.size());
  for (const std::vector<int64_t>& column : columns) {
    USERDP_ASSIGN_OR_RETURN(DebiasResult r,
                            DebiasRelease(column, model, source, options));
    results.push_back(r);
  }
  return results;
}

}  // namespace userdp
