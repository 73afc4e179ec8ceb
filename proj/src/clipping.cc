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

#include "absl/status/status.h"
#include "absl/strings/str_format.h"

namespace userdp {
namespace {

absl::Status ValidateThreshold(double threshold) {
  if (!(threshold > 0.0) || !std::isfinite(threshold)) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "clipping threshold must be finite and positive, got %g", threshold));
  }
  return absl::OkStatus();
}

double ScaleFactor(double norm_value, double threshold) {
  return norm_value <= threshold ? 1.0 : threshold / norm_value;
}

}  // namespace

double NormOf(const UserHistogram& histogram, ClipNorm norm) {
  return norm == ClipNorm::kL1 ? histogram.l1_norm() : histogram.l2_norm();
}

absl::StatusOr<std::vector<double>> Clip(const UserHistogram& histogram,
                                         double threshold, ClipNorm norm) {
  if (absl::Status s = ValidateThreshold(threshold); !s.ok()) return s;
  const double scale = ScaleFactor(NormOf(histogram, norm), threshold);
  std::vector<double> out(static_cast<size_t>(histogram.domain_size()), 0.0);
  for (const HistogramEntry& e : histogram.entries()) {
    out[static_cast<size_t>(e.item)] =
        scale == 1.0 ? static_cast<double>(e.count)
                     : static_cast<double>(e.count) * scale;
  }
  return out;
}

absl::StatusOr<std::vector<double>> ClipVector(std::span<const double> x,
                                               double threshold,
                                               ClipNorm norm) {
  if (absl::Status s = ValidateThreshold(threshold); !s.ok()) return s;
  double norm_value = 0.0;
  if (norm == ClipNorm::kL1) {
    for (double v : x) norm_value += std::abs(v);
  } else {
    for (double v : x) norm_value += v * v;
    norm_value = std::sqrt(norm_value);
  }
  const double scale = ScaleFactor(norm_value, threshold);
  std::vector<double> out(x.begin(), x.end());
  if (scale != 1.0) {
    for (double& v : out) v *= scale;
  }
  return out;
}

absl::StatusOr<std::vector<double>> ClippedSum(const Dataset& dataset,
                                               double threshold,
                                               ClipNorm norm) {
  if (absl::Status s = ValidateThreshold(threshold); !s.ok()) return s;
  std::vector<double> sum(static_cast<size_t>(dataset.domain_size()), 0.0);
  for (const UserHistogram& user : dataset.users()) {
    const double scale = ScaleFactor(NormOf(user, norm), threshold);
    for (const HistogramEntry& e : user.entries()) {
      sum[static_cast<size_t>(e.item)] += static_cast<double>(e.count) * scale;
    }
  }
  return sum;
}

double GaussianReleaseSigma(double threshold, const PrivacyParams& budget) {
  return threshold * std::sqrt(2.0 * std::log(1.32 / budget.delta)) /
         budget.epsilon;
}

absl::StatusOr<NoisyEstimate> ReleaseLaplace(const Dataset& dataset,
                                             double threshold,
                                             const PrivacyParams& budget,
                                             RandomSource& source) {
  if (budget.delta != 0.0) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "Laplace release is pure DP and needs delta == 0, got %g",
        budget.delta));
  }
  absl::StatusOr<PrivacyParams> checked =
      PrivacyParams::Create(budget.epsilon, budget.delta);
  if (!checked.ok()) return checked.status();
  absl::StatusOr<std::vector<double>> sum =
      ClippedSum(dataset, threshold, ClipNorm::kL1);
  if (!sum.ok()) return sum.status();

  NoisyEstimate estimate;
  estimate.threshold = threshold;
  estimate.noise_kind = NoiseKind::kLaplace;
  estimate.noise_scale = threshold / budget.epsilon;
  estimate.seed = source.seed();
  estimate.budget_spent = PrivacyCost::Of(budget);
  estimate.values = *std::move(sum);
  for (double& v : estimate.values) v += source.Laplace(estimate.noise_scale);
  return estimate;
}

absl::StatusOr<NoisyEstimate> ReleaseGaussian(const Dataset& dataset,
                                              double threshold,
                                              const PrivacyParams& budget,
                                              RandomSource& source) {
  if (!(budget.delta > 0.0)) {
    return absl::InvalidArgumentError(
        "Gaussian release needs delta > 0; use the Laplace release for pure "
        "DP");
  }
  absl::StatusOr<PrivacyParams> checked =
      PrivacyParams::Create(budget.epsilon, budget.delta);
  if (!checked.ok()) return checked.status();
  absl::StatusOr<std::vector<double>> sum =
      ClippedSum(dataset, threshold, ClipNorm::kL2);
  if (!sum.ok()) return sum.status();

  NoisyEstimate estimate;
  estimate.threshold = threshold;
  estimate.noise_kind = NoiseKind::kGaussian;
  estimate.noise_scale = GaussianReleaseSigma(threshold, budget);
  estimate.seed = source.seed();
  estimate.budget_spent = PrivacyCost::Of(budget);
  if (budget.epsilon > 1.0) {
    estimate.warnings.push_back(absl::StrFormat(
        "epsilon=%g exceeds 1; the 2-approximation guarantee assumes "
        "epsilon <= 1",
        budget.epsilon));
  }
  estimate.values = *std::move(sum);
  for (double& v : estimate.values) {
    v += estimate.noise_scale * source.StandardNormal();
  }
  return estimate;
}

}  // namespace userdp
