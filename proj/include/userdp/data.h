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

#ifndef USERDP_DATA_H_
#define USERDP_DATA_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "userdp/histogram.h"

namespace userdp {

// Record formats for (user_id, item, count) triples.
//
// CSV: a required header line "user_id,item,count", then one record per line.
// Fields may be double-quoted; a doubled quote inside a quoted field is a
// literal quote.
//
// JSONL: one object per line, {"user_id": ..., "item": ..., "count": ...}.
// user_id and item may be strings or integers; count is an integer.
//
// Blank lines are skipped in both formats. Duplicate (user, item) pairs are
// summed. A count of 0 records that the user exists without adding to any
// item, so users with empty histograms survive a write/load round trip.
enum class DataFormat { kCsv, kJsonl };

absl::StatusOr<DataFormat> ParseDataFormat(const std::string& name);
// Picks the format from the file extension (.csv, .jsonl, .json).
absl::StatusOr<DataFormat> DataFormatFromPath(const std::string& path);

struct LoadOptions {
  // Keep only the top_d items by aggregate count.
  std::optional<int64_t> top_d;
  // Items are integer indices into [0, domain_size) and are kept in place
  // rather than ranked. Without domain_size the domain is max index + 1.
  bool numeric_items = false;
  std::optional<int64_t> domain_size;
};

struct LoadedDataset {
  Dataset dataset;
  // Item label for each index of the domain.
  std::vector<std::string> item_names;
  // User id for each user, in order of first appearance in the file.
  std::vector<std::string> user_ids;
};

// Groups records by user. Unless numeric_items is set, items are indexed by
// aggregate count, descending, with ties broken lexicographically by label.
// Errors name the offending line.
absl::StatusOr<LoadedDataset> LoadDataset(const std::string& path,
                                          DataFormat format,
                                          const LoadOptions& options = {});
absl::StatusOr<LoadedDataset> ParseDataset(const std::string& contents,
                                           DataFormat format,
                                           const LoadOptions& options = {});

// Writes one record per stored entry, item labels being the integer index and
// user ids the position in the dataset. Loading the result with
// numeric_items and the same domain_size reproduces `dataset`. The file is
// written to a temporary path and renamed into place.
absl::Status WriteDataset(const Dataset& dataset, const std::string& path,
                          DataFormat format);
std::string SerializeDataset(const Dataset& dataset, DataFormat format);

// Keeps the top_d items by aggregate count (ties to the lower index) and
// re-indexes them 0..top_d-1 in that order. Returns the kept original indices
// alongside.
struct RestrictedDataset {
  Dataset dataset;
  std::vector<int64_t> kept_items;
};
absl::StatusOr<RestrictedDataset> RestrictToTopItems(const Dataset& dataset,
                                                     int64_t top_d);

// Writes `contents` to `path` through a temporary file and a rename.
absl::Status WriteFileAtomically(const std::string& path,
                                 const std::string& contents);

enum class SizeLawKind { kZipf, kLogNormal };

// Distribution of per-user sample sizes m_i for heterogeneous histograms.
struct SizeLaw {
  SizeLawKind kind = SizeLawKind::kLogNormal;
  // Zipf: P(m) proportional to m^-exponent on [min_size, max_size].
  double exponent = 2.0;
  // LogNormal: m = round(exp(mu + sigma Z)), clamped to [min_size, max_size].
  double mu = 3.0;
  double sigma = 1.0;
  int64_t min_size = 1;
  int64_t max_size = 10000;
};

enum class GeneratorKind { kPoissonDirichlet, kHeterogeneous };

struct SyntheticSpec {
  GeneratorKind generator = GeneratorKind::kPoissonDirichlet;
  int64_t num_users = 1000;
  int64_t domain_size = 1;
  uint64_t seed = 0;

  // Poisson-Dirichlet: Dirichlet concentration and total mass S of the
  // Poisson means. S <= 0 selects S = n, so the mean rate is 1.
  double alpha = 1.0;
  double total_mass = 0.0;

  // Heterogeneous histograms.
  SizeLaw size_law;
  // Zipf exponent of global item popularity.
  double item_exponent = 1.1;
  // Probability that a draw comes from the user's own preferred items rather
  // than from global popularity.
  double personal_weight = 0.5;
  int64_t preferred_items = 5;
};

absl::StatusOr<GeneratorKind> ParseGeneratorKind(const std::string& name);
std::string GeneratorKindName(GeneratorKind kind);
absl::StatusOr<SizeLawKind> ParseSizeLawKind(const std::string& name);
std::string SizeLawKindName(SizeLawKind kind);

struct PoissonDirichletData {
  Dataset dataset;
  // Ground-truth Poisson mean of each user; they sum to S.
  std::vector<double> lambdas;
};

// Draws p ~ Dirichlet(alpha, ..., alpha) over the n users, sets
// lambda_i = S p_i, and samples N_i ~ Poi(lambda_i). Requires d == 1.
absl::StatusOr<PoissonDirichletData> GenPoissonDirichlet(
    const SyntheticSpec& spec);

// Heavy-tailed, sparse histograms: m_i from the size law, then m_i item draws,
// each from the user's preferred items with probability personal_weight and
// from the global Zipf popularity otherwise. Preferred items are themselves
// drawn from global popularity.
absl::StatusOr<Dataset> GenHeterogeneousHistograms(const SyntheticSpec& spec);

}  // namespace userdp

#endif  // USERDP_DATA_H_
