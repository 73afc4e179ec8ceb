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
#include <functional>
#include <limits>
#include <numbers>
#include <utility>

#include "absl/status/status.h"
#include "absl/strings/str_format.h"
#include "userdp/status_macros.h"

namespace userdp {
namespace {

absl::Status RequirePositive(double value, const char* name) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("%s must be finite and positive, got %g", name, value));
  }
  return absl::OkStatus();
}

absl::Status RequireSparsity(double sparsity) {
  if (!(sparsity >= 1.0) || !std::isfinite(sparsity)) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "sparsity s must be finite and >= 1, got %g", sparsity));
  }
  return absl::OkStatus();
}

std::vector<double> UserL1Norms(const Dataset& dataset) {
  std::vector<double> norms;
  norms.reserve(dataset.users().size());
  for (const UserHistogram& user : dataset.users()) {
    norms.push_back(user.l1_norm());
  }
  return norms;
}

}  // namespace

double NoiseCoefficient(int64_t domain_size, const PrivacyParams& release) {
  return 2.0 * std::sqrt(std::log(1.32 / release.delta) / std::numbers::pi) *
         static_cast<double>(domain_size) / release.epsilon;
}

SurrogateLoss::SurrogateLoss(double m, int64_t num_users,
                             std::vector<Term> terms)
    : m_(m), num_users_(num_users), terms_(std::move(terms)) {
  const size_t k = terms_.size();
  suffix_weight_.assign(k + 1, 0.0);
  suffix_weighted_l2_.assign(k + 1, 0.0);
  for (size_t i = k; i-- > 0;) {
    suffix_weight_[i] = suffix_weight_[i + 1] + terms_[i].weight;
    suffix_weighted_l2_[i] =
        suffix_weighted_l2_[i + 1] + terms_[i].weight * terms_[i].l2;
  }
}

absl::StatusOr<SurrogateLoss> SurrogateLoss::Create(
    const Dataset& dataset, double noise_coefficient,
    std::optional<double> sparsity_cap) {
  USERDP_RETURN_IF_ERROR(RequirePositive(noise_coefficient, "M"));
  double cap = std::numeric_limits<double>::infinity();
  if (sparsity_cap.has_value()) {
    USERDP_RETURN_IF_ERROR(RequireSparsity(*sparsity_cap));
    cap = std::sqrt(*sparsity_cap);
  }
  std::vector<Term> terms;
  terms.reserve(dataset.users().size());
  for (const UserHistogram& user : dataset.users()) {
    if (user.l2_norm() == 0.0) continue;
    terms.push_back(
        {user.l2_norm(), std::min(user.l1_norm() / user.l2_norm(), cap)});
  }
  std::sort(terms.begin(), terms.end(),
            [](const Term& a, const Term& b) { return a.l2 < b.l2; });
  return SurrogateLoss(noise_coefficient, dataset.num_users(),
                       std::move(terms));
}

size_t SurrogateLoss::FirstAbove(double c) const {
  return static_cast<size_t>(
      std::upper_bound(terms_.begin(), terms_.end(), c,
                       [](double v, const Term& t) { return v < t.l2; }) -
      terms_.begin());
}

double SurrogateLoss::BiasTerm(double c) const {
  const size_t k = FirstAbove(c);
  return std::max(0.0, suffix_weighted_l2_[k] - c * suffix_weight_[k]);
}

double SurrogateLoss::Value(double c) const { return BiasTerm(c) + c * m_; }

double SurrogateLoss::WeightAbove(double c) const {
  return suffix_weight_[FirstAbove(c)];
}

double SurrogateLoss::LeftDerivative(double c) const {
  const size_t k = static_cast<size_t>(
      std::lower_bound(terms_.begin(), terms_.end(), c,
                       [](const Term& t, double v) { return t.l2 < v; }) -
      terms_.begin());
  return m_ - suffix_weight_[k];
}

double SurrogateLoss::SmallestMinimizer() const {
  // Walk distinct norms from the top, accumulating the weight strictly above
  // the current candidate.
  double above = 0.0;
  size_t i = terms_.size();
  while (i > 0) {
    const double norm = terms_[i - 1].l2;
    double group = 0.0;
    while (i > 0 && terms_[i - 1].l2 == norm) {
      group += terms_[i - 1].weight;
      --i;
    }
    if (above + group > m_) return norm;
    above += group;
  }
  return 0.0;
}

double SurrogateLoss::MinimizeRegularized(double lambda) const {
  const double n = static_cast<double>(num_users_);
  double lower = 0.0;
  size_t k = 0;
  while (true) {
    // On [lower, upper) the active set is terms_[k..].
    while (k < terms_.size() && terms_[k].l2 <= lower) ++k;
    const double upper = k < terms_.size()
                             ? terms_[k].l2
                             : std::numeric_limits<double>::infinity();
    const double vertex = (suffix_weight_[k] - m_) / (n * lambda);
    if (vertex <= lower) return lower;
    if (vertex < upper) return vertex;
    lower = upper;
  }
}

std::string ThresholdMethodName(ThresholdMethod method) {
  switch (method) {
    case ThresholdMethod::kExactGaussian:
      return "exact_gaussian";
    case ThresholdMethod::kLaplaceQuantile:
      return "laplace_quantile";
    case ThresholdMethod::kDpQuantile:
      return "dp_quantile";
    case ThresholdMethod::kDpsgd:
      return "dpsgd";
    case ThresholdMethod::kOutputPerturbation:
      return "output_perturbation";
  }
  return "unknown";
}

absl::StatusOr<ThresholdMethod> ParseThresholdMethod(const std::string& name) {
  std::string key = name;
  std::replace(key.begin(), key.end(), '-', '_');
  if (key == "exact") return ThresholdMethod::kExactGaussian;
  if (key == "output_perturb") return ThresholdMethod::kOutputPerturbation;
  for (ThresholdMethod method :
       {ThresholdMethod::kExactGaussian, ThresholdMethod::kLaplaceQuantile,
        ThresholdMethod::kDpQuantile, ThresholdMethod::kDpsgd,
        ThresholdMethod::kOutputPerturbation}) {
    if (ThresholdMethodName(method) == key) return method;
  }
  return absl::InvalidArgumentError(absl::StrFormat(
      "unknown threshold method '%s'; expected one of exact_gaussian, "
      "laplace_quantile, dp_quantile, dpsgd, output_perturbation",
      name));
}

absl::StatusOr<ThresholdEstimate> LaplaceQuantileThreshold(
    const Dataset& dataset, int64_t domain_size, double epsilon) {
  if (domain_size <= 0) {
    return absl::InvalidArgumentError("domain size must be positive");
  }
  USERDP_RETURN_IF_ERROR(RequirePositive(epsilon, "epsilon"));
  const double ratio = static_cast<double>(domain_size) / epsilon;
  // Guard against d / epsilon landing a rounding error above an integer.
  const double rank_real = std::ceil(ratio * (1.0 - 1e-12));
  if (rank_real > static_cast<double>(dataset.num_users())) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "not enough users: rank ceil(d/epsilon) = %.0f exceeds n = %d",
        rank_real, dataset.num_users()));
  }
  const auto rank = static_cast<size_t>(rank_real);
  std::vector<double> norms = UserL1Norms(dataset);
  std::nth_element(norms.begin(), norms.begin() + (rank - 1), norms.end(),
                   std::greater<double>());
  ThresholdEstimate estimate;
  estimate.method = ThresholdMethod::kLaplaceQuantile;
  estimate.threshold = norms[rank - 1];
  estimate.diagnostics["rank"] = rank_real;
  return estimate;
}

absl::StatusOr<ThresholdEstimate> ExactGaussianThreshold(
    const Dataset& dataset, double noise_coefficient) {
  USERDP_ASSIGN_OR_RETURN(SurrogateLoss loss,
                          SurrogateLoss::Create(dataset, noise_coefficient));
  ThresholdEstimate estimate;
  estimate.method = ThresholdMethod::kExactGaussian;
  estimate.threshold = loss.SmallestMinimizer();
  estimate.diagnostics["noise_coefficient"] = noise_coefficient;
  return estimate;
}

absl::StatusOr<ThresholdEstimate> DpQuantileThreshold(
    const Dataset& dataset, double target_rank, const PrivacyParams& budget,
    int64_t steps, RandomSource& source, const DpQuantileOptions& options) {
  USERDP_RETURN_IF_ERROR(
      PrivacyParams::Create(budget.epsilon, budget.delta).status());
  USERDP_RETURN_IF_ERROR(RequirePositive(target_rank, "target rank"));
  const double n = static_cast<double>(dataset.num_users());
  if (target_rank >= n) {
    return absl::InvalidArgumentError(
        absl::StrFormat("target rank %g must be below the number of users %d",
                        target_rank, dataset.num_users()));
  }
  if (steps < 1) {
    return absl::InvalidArgumentError("steps must be at least 1");
  }
  USERDP_RETURN_IF_ERROR(
      RequirePositive(options.initial_threshold, "initial threshold"));
  if (!(options.learning_rate >= 0.0)) {
    return absl::InvalidArgumentError("learning rate must be nonnegative");
  }

  std::vector<double> norms = UserL1Norms(dataset);
  std::sort(norms.begin(), norms.end());
  const double quantile = 1.0 - target_rank / n;
  const double noise_scale = static_cast<double>(steps) / (n * budget.epsilon);
  double c = options.initial_threshold;
  for (int64_t t = 0; t < steps; ++t) {
    const double below = static_cast<double>(
        std::upper_bound(norms.begin(), norms.end(), c) - norms.begin());
    const double noisy_fraction = below / n + source.Laplace(noise_scale);
    c *= std::exp(-options.learning_rate * (noisy_fraction - quantile));
  }

  ThresholdEstimate estimate;
  estimate.method = ThresholdMethod::kDpQuantile;
  estimate.threshold = c;
  estimate.budget_spent = {budget.epsilon, 0.0};
  estimate.diagnostics["iterations"] = static_cast<double>(steps);
  estimate.diagnostics["quantile"] = quantile;
  estimate.diagnostics["noise_scale"] = noise_scale;
  return estimate;
}

absl::StatusOr<ThresholdEstimate> DpsgdThreshold(
    const Dataset& dataset, double noise_coefficient, double upper_bound,
    double sparsity, const PrivacyParams& budget, RandomSource& source,
    const DpsgdOptions& options) {
  USERDP_RETURN_IF_ERROR(RequirePositive(upper_bound, "C_m"));
  USERDP_RETURN_IF_ERROR(RequireSparsity(sparsity));
  USERDP_RETURN_IF_ERROR(
      PrivacyParams::Create(budget.epsilon, budget.delta).status());
  if (!(budget.delta > 0.0)) {
    return absl::InvalidArgumentError("DP-SGD needs delta' > 0");
  }
  if (options.steps < 0) {
    return absl::InvalidArgumentError("DP-SGD steps must be nonnegative");
  }
  USERDP_RETURN_IF_ERROR(
      RequirePositive(options.noise_multiplier, "noise multiplier"));
  USERDP_ASSIGN_OR_RETURN(
      SurrogateLoss loss,
      SurrogateLoss::Create(dataset, noise_coefficient, sparsity));

  const int64_t num_users = dataset.num_users();
  const double n = static_cast<double>(num_users);
  const int64_t steps = options.steps > 0
                            ? options.steps
                            : static_cast<int64_t>(std::min(n * n, 1e4));
  const double sensitivity = std::sqrt(sparsity);
  const double sigma =
      options.noise_multiplier * sensitivity *
      std::sqrt(static_cast<double>(steps) * std::log(n / budget.delta) *
                std::log(1.0 / budget.delta)) /
      (n * budget.epsilon);

  // Per-user (l2, capped weight), indexed by user; empty users have weight 0.
  std::vector<SurrogateLoss::Term> per_user;
  per_user.reserve(dataset.users().size());
  const double cap = std::sqrt(sparsity);
  for (const UserHistogram& user : dataset.users()) {
    const double l2 = user.l2_norm();
    per_user.push_back(
        {l2, l2 > 0.0 ? std::min(user.l1_norm() / l2, cap) : 0.0});
  }

  const double drift = noise_coefficient / n;
  const double gradient_scale =
      std::sqrt(sensitivity * sensitivity + sigma * sigma);
  const int64_t average_from = steps / 2;
  double c = upper_bound / 2.0;
  double sum = 0.0;
  for (int64_t t = 0; t < steps; ++t) {
    const SurrogateLoss::Term& term =
        per_user[source.UniformInt(static_cast<uint64_t>(num_users))];
    double gradient = drift - (c < term.l2 ? term.weight : 0.0);
    gradient += sigma * source.StandardNormal();
    const double step =
        upper_bound / (std::sqrt(static_cast<double>(t + 1)) * gradient_scale);
    c = std::clamp(c - step * gradient, 0.0, upper_bound);
    if (t >= average_from) sum += c;
  }

  ThresholdEstimate estimate;
  estimate.method = ThresholdMethod::kDpsgd;
  estimate.threshold = sum / static_cast<double>(steps - average_from);
  estimate.budget_spent = PrivacyCost::Of(budget);
  estimate.diagnostics["iterations"] = static_cast<double>(steps);
  estimate.diagnostics["noise_sigma"] = sigma;
  estimate.diagnostics["upper_bound"] = upper_bound;
  return estimate;
}

double OutputPerturbationLambda(double sparsity, double upper_bound,
                                int64_t num_users, double epsilon_prime) {
  return 2.0 * std::sqrt(2.0 * sparsity) /
         (upper_bound *
          std::sqrt(static_cast<double>(num_users) * epsilon_prime));
}

double ThresholdSensitivity(double lambda, double sparsity, int64_t num_users) {
  return 4.0 * std::sqrt(sparsity) / (lambda * static_cast<double>(num_users));
}

absl::StatusOr<ThresholdEstimate> OutputPerturbationThreshold(
    const Dataset& dataset, double noise_coefficient, double upper_bound,
    double sparsity, double epsilon_prime, RandomSource& source) {
  USERDP_RETURN_IF_ERROR(RequirePositive(upper_bound, "C_m"));
  USERDP_RETURN_IF_ERROR(RequireSparsity(sparsity));
  USERDP_RETURN_IF_ERROR(RequirePositive(epsilon_prime, "epsilon'"));
  USERDP_ASSIGN_OR_RETURN(
      SurrogateLoss loss,
      SurrogateLoss::Create(dataset, noise_coefficient, sparsity));
  const int64_t n = dataset.num_users();
  const double lambda =
      OutputPerturbationLambda(sparsity, upper_bound, n, epsilon_prime);
  const double sensitivity = ThresholdSensitivity(lambda, sparsity, n);
  const double minimizer = loss.MinimizeRegularized(lambda);
  const double noisy = minimizer + source.Laplace(sensitivity / epsilon_prime);

  ThresholdEstimate estimate;
  estimate.method = ThresholdMethod::kOutputPerturbation;
  estimate.threshold = std::clamp(noisy, 0.0, upper_bound);
  estimate.budget_spent = {epsilon_prime, 0.0};
  estimate.diagnostics["lambda"] = lambda;
  estimate.diagnostics["sensitivity"] = sensitivity;
  estimate.diagnostics["noise_scale"] = sensitivity / epsilon_prime;
  estimate.diagnostics["upper_bound"] = upper_bound;
  return estimate;
}

double QuantileTargetRank(int64_t domain_size, const PrivacyParams& release) {
  if (release.delta > 0.0) return NoiseCoefficient(domain_size, release);
  return static_cast<double>(domain_size) / release.epsilon;
}

double DefaultSparsity(int64_t domain_size) {
  return std::max(1.0, 0.1 * static_cast<double>(domain_size));
}

absl::StatusOr<ThresholdEstimate> SelectThreshold(const Dataset& dataset,
                                                  const ThresholdConfig& config,
                                                  const PrivacyParams& release,
                                                  RandomSource& source) {
  USERDP_RETURN_IF_ERROR(
      PrivacyParams::Create(release.epsilon, release.delta).status());
  const int64_t d = dataset.domain_size();
  const bool gaussian = release.delta > 0.0;
  const ThresholdMethod method = config.method;
  const bool needs_gaussian = method == ThresholdMethod::kExactGaussian ||
                              method == ThresholdMethod::kDpsgd ||
                              method == ThresholdMethod::kOutputPerturbation;
  if (needs_gaussian && !gaussian) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "method %s targets the Gaussian release and needs delta > 0",
        ThresholdMethodName(method)));
  }
  if (method == ThresholdMethod::kLaplaceQuantile && gaussian) {
    return absl::InvalidArgumentError(
        "laplace_quantile targets the Laplace release and needs delta == 0");
  }

  switch (method) {
    case ThresholdMethod::kExactGaussian:
      return ExactGaussianThreshold(dataset, NoiseCoefficient(d, release));
    case ThresholdMethod::kLaplaceQuantile:
      return LaplaceQuantileThreshold(dataset, d, release.epsilon);
    case ThresholdMethod::kDpQuantile:
      return DpQuantileThreshold(
          dataset, QuantileTargetRank(d, release), {config.budget.epsilon, 0.0},
          config.quantile_steps, source, config.quantile);
    case ThresholdMethod::kDpsgd:
    case ThresholdMethod::kOutputPerturbation:
      break;
  }

  USERDP_RETURN_IF_ERROR(
      PrivacyParams::Create(config.budget.epsilon, config.budget.delta)
          .status());
  const double sparsity = config.sparsity.value_or(DefaultSparsity(d));
  const double m = NoiseCoefficient(d, release);
  PrivacyParams method_budget = config.budget;
  PrivacyCost upper_bound_cost;
  double upper_bound = 0.0;
  if (config.upper_bound.has_value()) {
    upper_bound = *config.upper_bound;
  } else {
    method_budget.epsilon = config.budget.epsilon / 2.0;
    RandomSource quantile_source = source.Substream(0);
    USERDP_ASSIGN_OR_RETURN(
        ThresholdEstimate bound,
        DpQuantileThreshold(dataset, m, {method_budget.epsilon, 0.0},
                            config.quantile_steps, quantile_source,
                            config.quantile));
    upper_bound = bound.threshold;
    upper_bound_cost = bound.budget_spent;
  }

  absl::StatusOr<ThresholdEstimate> estimate =
      method == ThresholdMethod::kDpsgd
          ? DpsgdThreshold(dataset, m, upper_bound, sparsity, method_budget,
                           source, config.dpsgd)
          : OutputPerturbationThreshold(dataset, m, upper_bound, sparsity,
                                        method_budget.epsilon, source);
  if (!estimate.ok()) return estimate.status();
  estimate->budget_spent += upper_bound_cost;
  estimate->diagnostics["sparsity"] = sparsity;
  return estimate;
}

}  // namespace userdp
