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

#ifndef USERDP_HISTOGRAM_H_
#define USERDP_HISTOGRAM_H_

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "absl/status/statusor.h"

namespace userdp {

// One (item, count) pair of a sparse histogram.
struct HistogramEntry {
  int64_t item = 0;
  int64_t count = 0;

  friend bool operator==(const HistogramEntry&,
                         const HistogramEntry&) = default;
};

// A single user's histogram over the item domain [0, d). Only strictly positive
// counts are stored, sorted by item. The l0, l1 and l2 norms are computed once
// at construction.
class UserHistogram {
 public:
  // Builds a histogram from (item, count) pairs. Duplicate items are summed and
  // zero counts are dropped. Fails on a negative count, an item outside
  // [0, domain_size), or a non-positive domain size.
  static absl::StatusOr<UserHistogram> Create(
      int64_t domain_size, std::vector<HistogramEntry> entries);

  // Convenience for tests and generators: builds from a dense count vector.
  static absl::StatusOr<UserHistogram> FromDense(
      std::span<const int64_t> counts);

  int64_t domain_size() const { return domain_size_; }
  const std::vector<HistogramEntry>& entries() const { return entries_; }

  // Count of `item`, zero when not stored.
  int64_t count(int64_t item) const;

  int64_t l0_norm() const { return l0_; }
  double l1_norm() const { return l1_; }
  double l2_norm() const { return l2_; }

  std::vector<double> ToDense() const;

  friend bool operator==(const UserHistogram& a, const UserHistogram& b) {
    return a.domain_size_ == b.domain_size_ && a.entries_ == b.entries_;
  }

 private:
  UserHistogram(int64_t domain_size, std::vector<HistogramEntry> entries);

  int64_t domain_size_ = 0;
  std::vector<HistogramEntry> entries_;
  int64_t l0_ = 0;
  double l1_ = 0.0;
  double l2_ = 0.0;
};

// Immutable collection of user histograms over a shared domain. Always holds at
// least one user.
class Dataset {
 public:
  static absl::StatusOr<Dataset> Create(std::vector<UserHistogram> users);

  const std::vector<UserHistogram>& users() const { return users_; }
  int64_t num_users() const { return static_cast<int64_t>(users_.size()); }
  int64_t domain_size() const { return users_.front().domain_size(); }

  friend bool operator==(const Dataset&, const Dataset&) = default;

 private:
  explicit Dataset(std::vector<UserHistogram> users)
      : users_(std::move(users)) {}

  std::vector<UserHistogram> users_;
};

// An (epsilon, delta) differential privacy parameter pair. delta == 0 selects
// the pure (Laplace) paths, delta > 0 permits Gaussian paths.
struct PrivacyParams {
  double epsilon = 1.0;
  double delta = 0.0;

  // Validates epsilon > 0 (finite) and delta in [0, 1).
  static absl::StatusOr<PrivacyParams> Create(double epsilon, double delta);

  bool is_pure() const { return delta == 0.0; }

  friend bool operator==(const PrivacyParams&, const PrivacyParams&) = default;
};

// Privacy budget consumed by one or more mechanisms. Unlike PrivacyParams a
// cost may be zero (non-private computations).
struct PrivacyCost {
  double epsilon = 0.0;
  double delta = 0.0;

  static PrivacyCost Of(const PrivacyParams& params) {
    return {params.epsilon, params.delta};
  }

  PrivacyCost& operator+=(const PrivacyCost& other) {
    epsilon += other.epsilon;
    delta += other.delta;
    return *this;
  }
  friend PrivacyCost operator+(PrivacyCost a, const PrivacyCost& b) {
    return a += b;
  }
  friend bool operator==(const PrivacyCost&, const PrivacyCost&) = default;
};

// Partition of a total budget between clipping-threshold estimation and the
// histogram release. Totals compose sequentially.
struct BudgetSplit {
  PrivacyParams threshold;
  PrivacyParams release;

  PrivacyCost Total() const {
    return PrivacyCost::Of(threshold) + PrivacyCost::Of(release);
  }
};

enum class NoiseKind { kLaplace, kGaussian };

std::string NoiseKindName(NoiseKind kind);

// A privately released length-d histogram together with how it was produced.
struct NoisyEstimate {
  std::vector<double> values;
  double threshold = 0.0;
  NoiseKind noise_kind = NoiseKind::kLaplace;
  double noise_scale = 0.0;
  uint64_t seed = 0;
  PrivacyCost budget_spent;
  // Non-fatal conditions, e.g. a release run outside the regime its accuracy
  // guarantee assumes.
  std::vector<std::string> warnings;
};

// Coordinate-wise sum of all user histograms.
std::vector<double> Aggregate(const Dataset& dataset);

// Sum of absolute coordinate differences. Fails on a length mismatch.
absl::StatusOr<double> L1Distance(std::span<const double> a,
                                  std::span<const double> b);

// L1Distance(estimate, truth) / ||truth||_1. Fails when ||truth||_1 == 0.
absl::StatusOr<double> RelativeLoss(std::span<const double> estimate,
                                    std::span<const double> truth);

}  // namespace userdp

#endif  // USERDP_HISTOGRAM_H_
