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
#include "userdp/data.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <unordered_map>
#include <utility>

#include "absl/strings/ascii.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/string_view.h"
#include "nlohmann/json.hpp"
#include "userdp/random.h"
#include "userdp/status_macros.h"

namespace userdp {
namespace {

struct Record {
  std::string user;
  std::string item;
  int64_t count = 0;
};

absl::Status LineError(int64_t line, absl::string_view message) {
  return absl::InvalidArgumentError(
      absl::StrFormat("line %d: %s", line, message));
}

absl::StatusOr<int64_t> ParseInt(absl::string_view text) {
  text = absl::StripAsciiWhitespace(text);
  int64_t value = 0;
  const auto [ptr, ec] =
      std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    return absl::InvalidArgumentError(
        absl::StrCat("not an integer: '", text, "'"));
  }
  return value;
}

// Splits one CSV line into fields, honoring double quotes.
absl::StatusOr<std::vector<std::string>> SplitCsvLine(absl::string_view line) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          fields.back().push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        fields.back().push_back(ch);
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.emplace_back();
    } else {
      fields.back().push_back(ch);
    }
  }
  if (quoted) return absl::InvalidArgumentError("unterminated quoted field");
  return fields;
}

absl::StatusOr<std::string> JsonKey(const nlohmann::json& value,
                                    const char* name) {
  if (value.is_string()) return value.get<std::string>();
  if (value.is_number_integer()) return value.dump();
  return absl::InvalidArgumentError(
      absl::StrCat("'", name, "' must be a string or an integer"));
}

absl::StatusOr<Record> ParseJsonRecord(absl::string_view line) {
  nlohmann::json object =
      nlohmann::json::parse(line.begin(), line.end(), nullptr, false);
  if (object.is_discarded() || !object.is_object()) {
    return absl::InvalidArgumentError("not a JSON object");
  }
  for (const char* key : {"user_id", "item", "count"}) {
    if (!object.contains(key)) {
      return absl::InvalidArgumentError(
          absl::StrCat("missing key '", key, "'"));
    }
  }
  Record record;
  USERDP_ASSIGN_OR_RETURN(record.user, JsonKey(object["user_id"], "user_id"));
  USERDP_ASSIGN_OR_RETURN(record.item, JsonKey(object["item"], "item"));
  const nlohmann::json& count = object["count"];
  if (!count.is_number_integer()) {
    return absl::InvalidArgumentError("'count' must be an integer");
  }
  record.count = count.get<int64_t>();
  return record;
}

absl::StatusOr<std::vector<Record>> ParseRecords(const std::string& contents,
                                                 DataFormat format) {
  std::vector<Record> records;
  std::istringstream in(contents);
  std::string line;
  int64_t line_number = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (absl::StripAsciiWhitespace(line).empty()) continue;

    absl::StatusOr<Record> record;
    if (format == DataFormat::kJsonl) {
      record = ParseJsonRecord(line);
    } else {
      absl::StatusOr<std::vector<std::string>> fields = SplitCsvLine(line);
      if (!fields.ok())
        return LineError(line_number, fields.status().message());
      if (fields->size() != 3) {
        return LineError(
            line_number,
            absl::StrFormat("expected 3 fields, found %d", fields->size()));
      }
      if (!header_seen) {
        for (std::string& field : *fields) absl::StripAsciiWhitespace(&field);
        if ((*fields)[0] != "user_id" || (*fields)[1] != "item" ||
            (*fields)[2] != "count") {
          return LineError(line_number, "expected header 'user_id,item,count'");
        }
        header_seen = true;
        continue;
      }
      absl::StatusOr<int64_t> count = ParseInt((*fields)[2]);
      if (!count.ok()) return LineError(line_number, count.status().message());
      record = Record{std::move((*fields)[0]), std::move((*fields)[1]), *count};
    }
    if (!record.ok()) return LineError(line_number, record.status().message());
    if (record->count < 0) {
      return LineError(line_number,
                       absl::StrFormat("negative count %d", record->count));
    }
    records.push_back(*std::move(record));
  }
  if (format == DataFormat::kCsv && !header_seen) {
    return absl::InvalidArgumentError(
        "missing CSV header 'user_id,item,count'");
  }
  return records;
}

std::string ReadFile(std::ifstream& in) {
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::vector<int64_t> ItemTotals(const Dataset& dataset) {
  std::vector<int64_t> totals(static_cast<size_t>(dataset.domain_size()), 0);
  for (const UserHistogram& user : dataset.users()) {
    for (const HistogramEntry& e : user.entries()) {
      totals[static_cast<size_t>(e.item)] += e.count;
    }
  }
  return totals;
}

}  // namespace

absl::StatusOr<DataFormat> ParseDataFormat(const std::string& name) {
  const std::string lower = absl::AsciiStrToLower(name);
  if (lower == "csv") return DataFormat::kCsv;
  if (lower == "jsonl" || lower == "json") return DataFormat::kJsonl;
  return absl::InvalidArgumentError(
      absl::StrCat("unknown data format '", name, "'; expected csv or jsonl"));
}

absl::StatusOr<DataFormat> DataFormatFromPath(const std::string& path) {
  std::string extension = std::filesystem::path(path).extension().string();
  if (extension.empty()) {
    return absl::InvalidArgumentError(absl::StrCat(
        "cannot infer data format of '", path, "'; use a .csv or .jsonl name"));
  }
  return ParseDataFormat(extension.substr(1));
}

absl::StatusOr<LoadedDataset> ParseDataset(const std::string& contents,
                                           DataFormat format,
                                           const LoadOptions& options) {
  USERDP_ASSIGN_OR_RETURN(std::vector<Record> records,
                          ParseRecords(contents, format));
  if (records.empty()) {
    return absl::InvalidArgumentError("dataset has no records");
  }

  std::vector<std::string> user_ids;
  std::unordered_map<std::string, size_t> user_index;
  std::vector<std::map<std::string, int64_t>> per_user;
  std::map<std::string, int64_t> item_totals;
  for (const Record& r : records) {
    auto [it, inserted] = user_index.emplace(r.user, user_ids.size());
    if (inserted) {
      user_ids.push_back(r.user);
      per_user.emplace_back();
    }
    if (r.count == 0) continue;
    per_user[it->second][r.item] += r.count;
    item_totals[r.item] += r.count;
  }

  std::vector<std::string> item_names;
  std::unordered_map<std::string, int64_t> item_index;
  int64_t domain_size = 0;
  if (options.numeric_items) {
    int64_t max_item = -1;
    for (const auto& [label, total] : item_totals) {
      absl::StatusOr<int64_t> index = ParseInt(label);
      if (!index.ok() || *index < 0) {
        return absl::InvalidArgumentError(absl::StrCat(
            "item '", label, "' is not a nonnegative integer index"));
      }
      item_index[label] = *index;
      max_item = std::max(max_item, *index);
    }
    domain_size =
        options.domain_size.value_or(std::max<int64_t>(max_item + 1, 1));
    if (max_item >= domain_size) {
      return absl::InvalidArgumentError(
          absl::StrFormat("item index %d is outside the domain of size %d",
                          max_item, domain_size));
    }
    for (int64_t j = 0; j < domain_size; ++j) {
      item_names.push_back(absl::StrCat(j));
    }
  } else {
    std::vector<std::pair<std::string, int64_t>> ranked(item_totals.begin(),
                                                        item_totals.end());
    std::stable_sort(
        ranked.begin(), ranked.end(),
        [](const auto& a, const auto& b) { return a.second > b.second; });
    for (const auto& [label, total] : ranked) {
      item_index[label] = static_cast<int64_t>(item_names.size());
      item_names.push_back(label);
    }
    domain_size = static_cast<int64_t>(item_names.size());
    if (options.domain_size.has_value()) {
      return absl::InvalidArgumentError(
          "domain_size applies only to numeric items");
    }
    if (domain_size == 0) {
      return absl::InvalidArgumentError("dataset has no nonzero counts");
    }
  }

  std::vector<UserHistogram> users;
  users.reserve(per_user.size());
  for (const auto& counts : per_user) {
    std::vector<HistogramEntry> entries;
    entries.reserve(counts.size());
    for (const auto& [label, count] : counts) {
      entries.push_back({item_index.at(label), count});
    }
    USERDP_ASSIGN_OR_RETURN(
        UserHistogram user,
        UserHistogram::Create(domain_size, std::move(entries)));
    users.push_back(std::move(user));
  }
  USERDP_ASSIGN_OR_RETURN(Dataset dataset, Dataset::Create(std::move(users)));

  if (options.top_d.has_value()) {
    USERDP_ASSIGN_OR_RETURN(RestrictedDataset restricted,
                            RestrictToTopItems(dataset, *options.top_d));
    std::vector<std::string> kept_names;
    kept_names.reserve(restricted.kept_items.size());
    for (int64_t item : restricted.kept_items) {
      kept_names.push_back(item_names[static_cast<size_t>(item)]);
    }
    return LoadedDataset{std::move(restricted.dataset), std::move(kept_names),
                         std::move(user_ids)};
  }
  return LoadedDataset{std::move(dataset), std::move(item_names),
                       std::move(user_ids)};
}

absl::StatusOr<LoadedDataset> LoadDataset(const std::string& path,
                                          DataFormat format,
                                          const LoadOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open '", path, "'"));
  absl::StatusOr<LoadedDataset> loaded =
      ParseDataset(ReadFile(in), format, options);
  if (!loaded.ok()) {
    return absl::Status(loaded.status().code(),
                        absl::StrCat(path, ": ", loaded.status().message()));
  }
  return loaded;
}

std::string SerializeDataset(const Dataset& dataset, DataFormat format) {
  std::string out;
  if (format == DataFormat::kCsv) out = "user_id,item,count\n";
  const auto append = [&](size_t user, int64_t item, int64_t count) {
    if (format == DataFormat::kCsv) {
      absl::StrAppend(&out, user, ",", item, ",", count, "\n");
    } else {
      absl::StrAppend(&out, "{\"user_id\":\"", user, "\",\"item\":", item,
                      ",\"count\":", count, "}\n");
    }
  };
  for (size_t i = 0; i < dataset.users().size(); ++i) {
    const UserHistogram& user = dataset.users()[i];
    if (user.entries().empty()) append(i, 0, 0);
    for (const HistogramEntry& e : user.entries()) append(i, e.item, e.count);
  }
  return out;
}

absl::Status WriteFileAtomically(const std::string& path,
                                 const std::string& contents) {
  const std::string temp = path + ".tmp";
  {
    std::ofstream out(temp, std::ios::binary | std::ios::trunc);
    if (!out) {
      return absl::PermissionDeniedError(
          absl::StrCat("cannot open '", temp, "' for writing"));
    }
    out << contents;
    out.flush();
    if (!out) {
      return absl::DataLossError(absl::StrCat("failed writing '", temp, "'"));
    }
  }
  std::error_code ec;
  std::filesystem::rename(temp, path, ec);
  if (ec) {
    std::filesystem::remove(temp, ec);
    return absl::InternalError(
        absl::StrCat("cannot move '", temp, "' to '", path, "'"));
  }
  return absl::OkStatus();
}

absl::Status WriteDataset(const Dataset& dataset, const std::string& path,
                          DataFormat format) {
  return WriteFileAtomically(path, SerializeDataset(dataset, format));
}

absl::StatusOr<RestrictedDataset> RestrictToTopItems(const Dataset& dataset,
                                                     int64_t top_d) {
  if (top_d < 1 || top_d > dataset.domain_size()) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "top_d must be in [1, %d], got %d", dataset.domain_size(), top_d));
  }
  const std::vector<int64_t> totals = ItemTotals(dataset);
  std::vector<int64_t> order(totals.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int64_t a, int64_t b) {
    return totals[static_cast<size_t>(a)] > totals[static_cast<size_t>(b)];
  });
  order.resize(static_cast<size_t>(top_d));
  std::vector<int64_t> new_index(totals.size(), -1);
  for (size_t k = 0; k < order.size(); ++k) {
    new_index[static_cast<size_t>(order[k])] = static_cast<int64_t>(k);
  }

  std::vector<UserHistogram> users;
  users.reserve(dataset.users().size());
  for (const UserHistogram& user : dataset.users()) {
    std::vector<HistogramEntry> entries;
    for (const HistogramEntry& e : user.entries()) {
      const int64_t mapped = new_index[static_cast<size_t>(e.item)];
      if (mapped >= 0) entries.push_back({mapped, e.count});
    }
    USERDP_ASSIGN_OR_RETURN(UserHistogram restricted,
                            UserHistogram::Create(top_d, std::move(entries)));
    users.push_back(std::move(restricted));
  }
  USERDP_ASSIGN_OR_RETURN(Dataset restricted,
                          Dataset::Create(std::move(users)));
  return RestrictedDataset{std::move(restricted), std::move(order)};
}

absl::StatusOr<GeneratorKind> ParseGeneratorKind(const std::string& name) {
  std::string key = name;
  std::replace(key.begin(), key.end(), '-', '_');
  if (key == "poisson_dirichlet") return GeneratorKind::kPoissonDirichlet;
  if (key == "heterogeneous" || key == "heavy_tail") {
    return GeneratorKind::kHeterogeneous;
  }
  return absl::InvalidArgumentError(
      absl::StrCat("unknown generator '", name,
                   "'; expected poisson_dirichlet or heterogeneous"));
}

std::string GeneratorKindName(GeneratorKind kind) {
  return kind == GeneratorKind::kPoissonDirichlet ? "poisson_dirichlet"
                                                  : "heterogeneous";
}

absl::StatusOr<SizeLawKind> ParseSizeLawKind(const std::string& name) {
  if (name == "zipf") return SizeLawKind::kZipf;
  if (name == "lognormal") return SizeLawKind::kLogNormal;
  return absl::InvalidArgumentError(absl::StrCat(
      "unknown size law '", name, "'; expected zipf or lognormal"));
}

std::string SizeLawKindName(SizeLawKind kind) {
  return kind == SizeLawKind::kZipf ? "zipf" : "lognormal";
}

namespace {

absl::Status ValidateCommon(const SyntheticSpec& spec) {
  if (spec.num_users < 1) {
    return absl::InvalidArgumentError("number of users must be positive");
  }
  if (spec.domain_size < 1) {
    return absl::InvalidArgumentError("domain size must be positive");
  }
  return absl::OkStatus();
}

// Inverse-CDF sampler over {0, ..., k-1} with weights w_j.
class DiscreteSampler {
 public:
  explicit DiscreteSampler(std::vector<double> weights)
      : cdf_(std::move(weights)) {
    std::partial_sum(cdf_.begin(), cdf_.end(), cdf_.begin());
    const double total = cdf_.back();
    for (double& c : cdf_) c /= total;
  }

  int64_t Sample(RandomSource& source) const {
    const double u = source.Uniform();
    const auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
    return std::min<int64_t>(it - cdf_.begin(),
                             static_cast<int64_t>(cdf_.size()) - 1);
  }

 private:
  std::vector<double> cdf_;
};

std::vector<double> ZipfWeights(int64_t count, int64_t first, double exponent) {
  std::vector<double> weights(static_cast<size_t>(count));
  // Normalize against the first weight so large exponents do not underflow
  // the whole table.
  for (int64_t k = 0; k < count; ++k) {
    const double ratio =
        static_cast<double>(first + k) / static_cast<double>(first);
    weights[static_cast<size_t>(k)] = std::exp(-exponent * std::log(ratio));
  }
  return weights;
}

}  // namespace

absl::StatusOr<PoissonDirichletData> GenPoissonDirichlet(
    const SyntheticSpec& spec) {
  USERDP_RETURN_IF_ERROR(ValidateCommon(spec));
  if (spec.domain_size != 1) {
    return absl::InvalidArgumentError(
        "the Poisson-Dirichlet generator produces single-item data; set d = 1");
  }
  if (!(spec.alpha > 0.0) || !std::isfinite(spec.alpha)) {
    return absl::InvalidArgumentError("alpha must be finite and positive");
  }
  const double n = static_cast<double>(spec.num_users);
  const double mass = spec.total_mass > 0.0 ? spec.total_mass : n;

  RandomSource source(spec.seed);
  RandomSource gamma_source = source.Substream(1);
  RandomSource count_source = source.Substream(2);
  std::vector<double> lambdas(static_cast<size_t>(spec.num_users));
  double total = 0.0;
  for (double& g : lambdas) {
    g = gamma_source.Gamma(spec.alpha);
    total += g;
  }
  if (!(total > 0.0)) {
    // Every gamma draw underflowed; all mass goes to one user.
    lambdas.front() = 1.0;
    total = 1.0;
  }
  for (double& g : lambdas) g = mass * (g / total);

  std::vector<UserHistogram> users;
  users.reserve(lambdas.size());
  for (double lambda : lambdas) {
    const int64_t count = count_source.Poisson(lambda);
    std::vector<HistogramEntry> entries;
    if (count > 0) entries.push_back({0, count});
    USERDP_ASSIGN_OR_RETURN(UserHistogram user,
                            UserHistogram::Create(1, std::move(entries)));
    users.push_back(std::move(user));
  }
  USERDP_ASSIGN_OR_RETURN(Dataset dataset, Dataset::Create(std::move(users)));
  return PoissonDirichletData{std::move(dataset), std::move(lambdas)};
}

absl::StatusOr<Dataset> GenHeterogeneousHistograms(const SyntheticSpec& spec) {
  USERDP_RETURN_IF_ERROR(ValidateCommon(spec));
  const SizeLaw& law = spec.size_law;
  if (law.min_size < 1 || law.max_size < law.min_size) {
    return absl::InvalidArgumentError(
        "size law needs 1 <= min_size <= max_size");
  }
  if (law.kind == SizeLawKind::kZipf && !(law.exponent > 0.0)) {
    return absl::InvalidArgumentError("Zipf exponent must be positive");
  }
  if (law.kind == SizeLawKind::kLogNormal && !(law.sigma >= 0.0)) {
    return absl::InvalidArgumentError("log-normal sigma must be nonnegative");
  }
  if (!(spec.personal_weight >= 0.0 && spec.personal_weight <= 1.0)) {
    return absl::InvalidArgumentError("personal_weight must be in [0, 1]");
  }
  if (spec.preferred_items < 1) {
    return absl::InvalidArgumentError("preferred_items must be positive");
  }

  RandomSource source(spec.seed);
  const DiscreteSampler popularity(
      ZipfWeights(spec.domain_size, 1, spec.item_exponent));
  std::optional<DiscreteSampler> zipf_sizes;
  if (law.kind == SizeLawKind::kZipf) {
    zipf_sizes.emplace(ZipfWeights(law.max_size - law.min_size + 1,
                                   law.min_size, law.exponent));
  }

  std::vector<UserHistogram> users;
  users.reserve(static_cast<size_t>(spec.num_users));
  for (int64_t i = 0; i < spec.num_users; ++i) {
    RandomSource user_source = source.Substream(static_cast<uint64_t>(i));
    int64_t size;
    if (zipf_sizes.has_value()) {
      size = law.min_size + zipf_sizes->Sample(user_source);
    } else {
      const double raw = std::round(
          std::exp(law.mu + law.sigma * user_source.StandardNormal()));
      size = static_cast<int64_t>(
          std::clamp(raw, static_cast<double>(law.min_size),
                     static_cast<double>(law.max_size)));
    }
    std::vector<int64_t> preferred(static_cast<size_t>(spec.preferred_items));
    for (int64_t& item : preferred) item = popularity.Sample(user_source);

    std::vector<HistogramEntry> entries;
    entries.reserve(static_cast<size_t>(size));
    for (int64_t k = 0; k < size; ++k) {
      const int64_t item =
          user_source.Uniform() < spec.personal_weight
              ? preferred[user_source.UniformInt(preferred.size())]
              : popularity.Sample(user_source);
      entries.push_back({item, 1});
    }
    USERDP_ASSIGN_OR_RETURN(
        UserHistogram user,
        UserHistogram::Create(spec.domain_size, std::move(entries)));
    users.push_back(std::move(user));
  }
  return Dataset::Create(std::move(users));
}

}  // namespace userdp
