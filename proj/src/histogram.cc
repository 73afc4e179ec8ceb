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
#include "userdp/histogram.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "absl/status/status.h"
#include "absl/strings/str_format.h"

namespace userdp {

absl::StatusOr<UserHistogram> UserHistogram::Create(
    int64_t domain_size, std::vector<HistogramEntry> entries) {
  if (domain_size <= 0) {
    return absl::InvalidArgumentError(
        absl::StrFormat("domain size must be positive, got %d", domain_size));
  }
  for (const HistogramEntry& e : entries) {
    if (e.count < 0) {
      return absl::InvalidArgumentError(
          absl::StrFormat("negative count %d for item %d", e.count, e.item));
    }
    if (e.item < 0 || e.item >= domain_size) {
      return absl::InvalidArgumentError(absl::StrFormat(
          "item %d outside domain [0, %d)", e.item, domain_size));
    }
  }
  std::sort(entries.begin(), entries.end(),
            [](const HistogramEntry& a, const HistogramEntry& b) {
              return a.item < b.item;
            });
  std::vector<HistogramEntry> merged;
  merged.reserve(entries.size());
  for (const HistogramEntry& e : entries) {
    if (!merged.empty() && merged.back().item == e.item) {
      if (e.count > std::numeric_limits<int64_t>::max() - merged.back().count) {
        return absl::OutOfRangeError(
            absl::StrFormat("count overflow for item %d", e.item));
      }
      merged.back().count += e.count;
    } else {
      merged.push_back(e);
    }
  }
  std::erase_if(merged, [](const HistogramEntry& e) { return e.count == 0; });
  return UserHistogram(domain_size, std::move(merged));
}

absl::StatusOr<UserHistogram> UserHistogram::FromDense(
    std::span<const int64_t> counts) {
  std::vector<HistogramEntry> entries;
  for (size_t j = 0; j < counts.size(); ++j) {
    if (counts[j] != 0) {
      entries.push_back({static_cast<int64_t>(j), counts[j]});
    }
  }
  return Create(static_cast<int64_t>(counts.size()), std::move(entries));
}

UserHistogram::UserHistogram(int64_t domain_size,
                             std::vector<HistogramEntry> entries)
    : domain_size_(domain_size), entries_(std::move(entries)) {
  l0_ = static_cast<int64_t>(entries_.size());
  double sum = 0.0;
  double sum_sq = 0.0;
  for (const HistogramEntry& e : entries_) {
    const double c = static_cast<double>(e.count);
    sum += c;
    sum_sq += c * c;
  }
  l1_ = sum;
  l2_ = std::sqrt(sum_sq);
}

int64_t UserHistogram::count(int64_t item) const {
  auto it = std::lower_bound(
      entries_.begin(), entries_.end(), item,
      [](const HistogramEntry& e, int64_t value) { return e.item < value; });
  if (it == entries_.end() || it->item != item) return 0;
  return it->count;
}

std::vector<double> UserHistogram::ToDense() const {
  std::vector<double> dense(static_cast<size_t>(domain_size_), 0.0);
  for (const HistogramEntry& e : entries_) {
    dense[static_cast<size_t>(e.item)] = static_cast<double>(e.count);
  }
  return dense;
}

absl::StatusOr<Dataset> Dataset::Create(std::vector<UserHistogram> users) {
  if (users.empty()) {
    return absl::InvalidArgumentError("dataset must contain at least one user");
  }
  const int64_t d = users.front().domain_size();
  for (size_t i = 1; i < users.size(); ++i) {
    if (users[i].domain_size() != d) {
      return absl::InvalidArgumentError(
          absl::StrFormat("user %d has domain size %d, expected %d", i,
                          users[i].domain_size(), d));
    }
  }
  return Dataset(std::move(users));
}

absl::StatusOr<PrivacyParams> PrivacyParams::Create(double epsilon,
                                                    double delta) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "epsilon must be finite and positive, got %g", epsilon));
  }
  if (!(delta >= 0.0 && delta < 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("delta must be in [0, 1), got %g", delta));
  }
  return PrivacyParams{epsilon, delta};
}

std::string NoiseKindName(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::kLaplace:
      return "laplace";
    case NoiseKind::kGaussian:
      return "gaussian";
  }
  return "unknown";
}

std::vector<double> Aggregate(const Dataset& dataset) {
  std::vector<int64_t> totals(static_cast<size_t>(dataset.domain_size()), 0);
  for (const UserHistogram& user : dataset.users()) {
    for (const HistogramEntry& e : user.entries()) {
      totals[static_cast<size_t>(e.item)] += e.count;
    }
  }
  return std::vector<double>(totals.begin(), totals.end());
}

absl::StatusOr<double> L1Distance(std::span<const double> a,
                                  std::span<const double> b) {
  if (a.size() != b.size()) {
    return absl::InvalidArgumentError(
        absl::StrFormat("length mismatch: %d vs %d", a.size(), b.size()));
  }
  double total = 0.0;
  for (size_t j = 0; j < a.size(); ++j) total += std::abs(a[j] - b[j]);
  return total;
}

absl::StatusOr<double> RelativeLoss(std::span<const double> estimate,
                                    std::span<const double> truth) {
  double truth_norm = 0.0;
  for (double v : truth) truth_norm += std::abs(v);
  if (truth_norm == 0.0) {
    return absl::InvalidArgumentError(
        "relative loss is undefined for an all-zero truth vector");
  }
  absl::StatusOr<double> distance = L1Distance(estimate, truth);
  if (!distance.ok()) return distance.status();
  return *distance / truth_norm;
}

}  // namespace userdp
