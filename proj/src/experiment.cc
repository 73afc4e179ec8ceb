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
#include "userdp/experiment.h"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <thread>
#include <tuple>
#include <utility>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_join.h"
#include "nlohmann/json.hpp"
#include "userdp/clipping.h"
#include "userdp/debias.h"
#include "userdp/random.h"
#include "userdp/status_macros.h"

namespace userdp {
namespace {

using Json = nlohmann::json;

// Threshold floor used when an estimator returns C = 0; the release needs a
// positive threshold and a tiny one releases (almost) pure noise.
constexpr double kMinThreshold = 1e-12;

absl::Status CheckKeys(const Json& object, const std::set<std::string>& allowed,
                       const std::string& where) {
  std::vector<std::string> unknown;
  for (const auto& [key, value] : object.items()) {
    if (!allowed.contains(key)) unknown.push_back(key);
  }
  if (unknown.empty()) return absl::OkStatus();
  return absl::InvalidArgumentError(absl::StrCat(
      "unknown key(s) in ", where, ": ", absl::StrJoin(unknown, ", ")));
}

template <typename T>
absl::Status Read(const Json& object, const char* key, T& out) {
  if (!object.contains(key) || object[key].is_null()) return absl::OkStatus();
  try {
    out = object[key].get<T>();
  } catch (const Json::exception& e) {
    return absl::InvalidArgumentError(
        absl::StrCat("config key '", key, "': ", e.what()));
  }
  return absl::OkStatus();
}

template <typename T>
absl::Status ReadOptional(const Json& object, const char* key,
                          std::optional<T>& out) {
  if (!object.contains(key) || object[key].is_null()) return absl::OkStatus();
  T value{};
  USERDP_RETURN_IF_ERROR(Read(object, key, value));
  out = value;
  return absl::OkStatus();
}

absl::Status ParseSynthetic(const Json& object, SyntheticSpec& spec) {
  if (!object.is_object()) {
    return absl::InvalidArgumentError("'synthetic' must be an object");
  }
  USERDP_RETURN_IF_ERROR(
      CheckKeys(object,
                {"generator", "n", "d", "alpha", "mass", "size_law", "exponent",
                 "mu", "sigma", "min_size", "max_size", "item_exponent",
                 "personal_weight", "preferred_items"},
                "synthetic"));
  std::string generator = GeneratorKindName(spec.generator);
  USERDP_RETURN_IF_ERROR(Read(object, "generator", generator));
  USERDP_ASSIGN_OR_RETURN(spec.generator, ParseGeneratorKind(generator));
  USERDP_RETURN_IF_ERROR(Read(object, "n", spec.num_users));
  USERDP_RETURN_IF_ERROR(Read(object, "d", spec.domain_size));
  USERDP_RETURN_IF_ERROR(Read(object, "alpha", spec.alpha));
  USERDP_RETURN_IF_ERROR(Read(object, "mass", spec.total_mass));
  std::string size_law = SizeLawKindName(spec.size_law.kind);
  USERDP_RETURN_IF_ERROR(Read(object, "size_law", size_law));
  USERDP_ASSIGN_OR_RETURN(spec.size_law.kind, ParseSizeLawKind(size_law));
  USERDP_RETURN_IF_ERROR(Read(object, "exponent", spec.size_law.exponent));
  USERDP_RETURN_IF_ERROR(Read(object, "mu", spec.size_law.mu));
  USERDP_RETURN_IF_ERROR(Read(object, "sigma", spec.size_law.sigma));
  USERDP_RETURN_IF_ERROR(Read(object, "min_size", spec.size_law.min_size));
  USERDP_RETURN_IF_ERROR(Read(object, "max_size", spec.size_law.max_size));
  USERDP_RETURN_IF_ERROR(Read(object, "item_exponent", spec.item_exponent));
  USERDP_RETURN_IF_ERROR(Read(object, "personal_weight", spec.personal_weight));
  USERDP_RETURN_IF_ERROR(Read(object, "preferred_items", spec.preferred_items));
  return absl::OkStatus();
}

absl::Status ValidateCommon(const ExperimentConfig& config) {
  if (config.trials < 1) {
    return absl::InvalidArgumentError(
        absl::StrFormat("trials must be at least 1, got %d", config.trials));
  }
  if (config.name.empty() ||
      config.name.find_first_of(",\"\r\n") != std::string::npos) {
    return absl::InvalidArgumentError(
        "experiment name must be nonempty and free of commas, quotes and "
        "line breaks");
  }
  if (config.threads < 1) {
    return absl::InvalidArgumentError("threads must be at least 1");
  }
  if (!(config.epsilon > 0.0) || !std::isfinite(config.epsilon)) {
    return absl::InvalidArgumentError("epsilon must be finite and positive");
  }
  if (!(config.epsilon_prime > 0.0) || !std::isfinite(config.epsilon_prime)) {
    return absl::InvalidArgumentError("epsilon' must be finite and positive");
  }
  if (config.quantile_steps < 1) {
    return absl::InvalidArgumentError("quantile_steps must be at least 1");
  }
  return absl::OkStatus();
}

double DefaultDelta(int64_t num_users) {
  return 1.0 / (2.0 * static_cast<double>(num_users));
}

PrivacyParams ReleaseParams(const ExperimentConfig& config, int64_t num_users) {
  return {config.epsilon, config.delta.value_or(DefaultDelta(num_users))};
}

PrivacyParams ThresholdParams(const ExperimentConfig& config,
                              int64_t num_users) {
  return {config.epsilon_prime,
          config.delta_prime.value_or(DefaultDelta(num_users))};
}

bool SameCost(const PrivacyCost& a, const PrivacyCost& b) {
  const auto close = [](double x, double y) {
    return std::abs(x - y) <= 1e-12 * std::max({1.0, std::abs(x), std::abs(y)});
  };
  return close(a.epsilon, b.epsilon) && close(a.delta, b.delta);
}

// Runs tasks [0, count) on `threads` workers; results are stored by index so
// the output order never depends on scheduling.
template <typename T>
absl::StatusOr<std::vector<T>> RunTasks(
    int64_t count, int threads,
    const std::function<absl::StatusOr<T>(int64_t)>& task) {
  std::vector<std::optional<absl::StatusOr<T>>> slots(
      static_cast<size_t>(count));
  std::atomic<int64_t> next{0};
  std::atomic<bool> failed{false};
  const auto worker = [&] {
    while (!failed.load()) {
      const int64_t i = next.fetch_add(1);
      if (i >= count) return;
      slots[static_cast<size_t>(i)] = task(i);
      if (!slots[static_cast<size_t>(i)]->ok()) failed.store(true);
    }
  };
  const int workers =
      static_cast<int>(std::min<int64_t>(std::max(threads, 1), count));
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  std::vector<T> out;
  out.reserve(static_cast<size_t>(count));
  for (auto& slot : slots) {
    if (!slot.has_value()) continue;
    if (!slot->ok()) return slot->status();
    out.push_back(*std::move(*slot));
  }
  if (static_cast<int64_t>(out.size()) != count) {
    return absl::InternalError("experiment stopped before all trials ran");
  }
  return out;
}

absl::StatusOr<Dataset> LoadExperimentData(const ExperimentConfig& config) {
  if (config.data_path.has_value()) {
    DataFormat format;
    if (config.data_format.has_value()) {
      format = *config.data_format;
    } else {
      USERDP_ASSIGN_OR_RETURN(format, DataFormatFromPath(*config.data_path));
    }
    LoadOptions options;
    options.numeric_items = config.numeric_items;
    USERDP_ASSIGN_OR_RETURN(LoadedDataset loaded,
                            LoadDataset(*config.data_path, format, options));
    return std::move(loaded.dataset);
  }
  if (config.synthetic.generator == GeneratorKind::kPoissonDirichlet) {
    USERDP_ASSIGN_OR_RETURN(PoissonDirichletData data,
                            GenPoissonDirichlet(config.synthetic));
    return std::move(data.dataset);
  }
  return GenHeterogeneousHistograms(config.synthetic);
}

std::vector<int64_t> ItemColumn(const Dataset& dataset, int64_t item) {
  std::vector<int64_t> column;
  column.reserve(dataset.users().size());
  for (const UserHistogram& user : dataset.users()) {
    column.push_back(user.count(item));
  }
  return column;
}

}  // namespace

std::string ExperimentKindName(ExperimentKind kind) {
  return kind == ExperimentKind::kHistogram ? "histogram" : "count";
}

absl::StatusOr<ExperimentConfig> ParseExperimentConfig(
    const std::string& json_text) {
  Json root = Json::parse(json_text, nullptr, false);
  if (root.is_discarded()) {
    return absl::InvalidArgumentError("experiment config is not valid JSON");
  }
  if (!root.is_object()) {
    return absl::InvalidArgumentError("experiment config must be an object");
  }
  USERDP_RETURN_IF_ERROR(CheckKeys(root,
                                   {"experiment",
                                    "name",
                                    "seed",
                                    "trials",
                                    "threads",
                                    "data",
                                    "synthetic",
                                    "alphas",
                                    "methods",
                                    "d_values",
                                    "epsilon",
                                    "delta",
                                    "epsilon_prime",
                                    "delta_prime",
                                    "sparsity",
                                    "upper_bound",
                                    "quantile_steps",
                                    "quantile_learning_rate",
                                    "quantile_initial",
                                    "dpsgd_steps",
                                    "dpsgd_noise_multiplier",
                                    "clip",
                                    "clamp_lambda"},
                                   "config"));

  ExperimentConfig config;
  std::string kind = "histogram";
  USERDP_RETURN_IF_ERROR(Read(root, "experiment", kind));
  if (kind == "histogram") {
    config.kind = ExperimentKind::kHistogram;
  } else if (kind == "count") {
    config.kind = ExperimentKind::kCount;
    config.synthetic.domain_size = 1;
  } else {
    return absl::InvalidArgumentError(absl::StrCat(
        "unknown experiment '", kind, "'; expected histogram or count"));
  }
  config.synthetic.generator = config.kind == ExperimentKind::kCount
                                   ? GeneratorKind::kPoissonDirichlet
                                   : GeneratorKind::kHeterogeneous;
  if (config.kind == ExperimentKind::kHistogram) {
    config.synthetic.domain_size = 1000;
  }
  USERDP_RETURN_IF_ERROR(Read(root, "name", config.name));
  USERDP_RETURN_IF_ERROR(Read(root, "seed", config.seed));
  USERDP_RETURN_IF_ERROR(Read(root, "trials", config.trials));
  USERDP_RETURN_IF_ERROR(Read(root, "threads", config.threads));

  if (root.contains("data")) {
    const Json& data = root["data"];
    if (!data.is_object()) {
      return absl::InvalidArgumentError("'data' must be an object");
    }
    USERDP_RETURN_IF_ERROR(
        CheckKeys(data, {"path", "format", "numeric_items", "item"}, "data"));
    std::string path;
    USERDP_RETURN_IF_ERROR(Read(data, "path", path));
    if (path.empty()) {
      return absl::InvalidArgumentError("'data.path' is required");
    }
    config.data_path = path;
    if (data.contains("format")) {
      std::string format;
      USERDP_RETURN_IF_ERROR(Read(data, "format", format));
      USERDP_ASSIGN_OR_RETURN(config.data_format, ParseDataFormat(format));
    }
    USERDP_RETURN_IF_ERROR(Read(data, "numeric_items", config.numeric_items));
    USERDP_RETURN_IF_ERROR(Read(data, "item", config.item));
  }
  if (root.contains("synthetic")) {
    if (config.data_path.has_value()) {
      return absl::InvalidArgumentError(
          "'data' and 'synthetic' are mutually exclusive");
    }
    USERDP_RETURN_IF_ERROR(ParseSynthetic(root["synthetic"], config.synthetic));
  }
  USERDP_RETURN_IF_ERROR(Read(root, "alphas", config.alphas));
  if (root.contains("methods")) {
    std::vector<std::string> names;
    USERDP_RETURN_IF_ERROR(Read(root, "methods", names));
    config.methods.clear();
    for (const std::string& name : names) {
      USERDP_ASSIGN_OR_RETURN(ThresholdMethod method,
                              ParseThresholdMethod(name));
      config.methods.push_back(method);
    }
  }
  USERDP_RETURN_IF_ERROR(Read(root, "d_values", config.d_values));
  USERDP_RETURN_IF_ERROR(Read(root, "epsilon", config.epsilon));
  USERDP_RETURN_IF_ERROR(ReadOptional(root, "delta", config.delta));
  USERDP_RETURN_IF_ERROR(Read(root, "epsilon_prime", config.epsilon_prime));
  USERDP_RETURN_IF_ERROR(ReadOptional(root, "delta_prime", config.delta_prime));
  USERDP_RETURN_IF_ERROR(ReadOptional(root, "sparsity", config.sparsity));
  USERDP_RETURN_IF_ERROR(ReadOptional(root, "upper_bound", config.upper_bound));
  USERDP_RETURN_IF_ERROR(Read(root, "quantile_steps", config.quantile_steps));
  USERDP_RETURN_IF_ERROR(
      Read(root, "quantile_learning_rate", config.quantile.learning_rate));
  USERDP_RETURN_IF_ERROR(
      Read(root, "quantile_initial", config.quantile.initial_threshold));
  USERDP_RETURN_IF_ERROR(Read(root, "dpsgd_steps", config.dpsgd.steps));
  USERDP_RETURN_IF_ERROR(
      Read(root, "dpsgd_noise_multiplier", config.dpsgd.noise_multiplier));
  USERDP_RETURN_IF_ERROR(ReadOptional(root, "clip", config.clip));
  USERDP_RETURN_IF_ERROR(Read(root, "clamp_lambda", config.clamp_lambda));
  return config;
}

uint64_t TrialSeed(uint64_t master, uint64_t cell, uint64_t trial) {
  return MixBits(MixBits(master ^ MixBits(cell + 1)) + trial);
}

PrivacyCost DeclaredTrialBudget(const ExperimentConfig& config,
                                ThresholdMethod method, int64_t num_users) {
  if (config.kind == ExperimentKind::kCount) {
    PrivacyCost cost{config.epsilon, 0.0};
    if (!config.clip.has_value()) cost.epsilon += config.epsilon_prime;
    return cost;
  }
  const PrivacyParams threshold = ThresholdParams(config, num_users);
  PrivacyCost cost = PrivacyCost::Of(ReleaseParams(config, num_users));
  switch (method) {
    case ThresholdMethod::kExactGaussian:
    case ThresholdMethod::kLaplaceQuantile:
      break;
    case ThresholdMethod::kDpQuantile:
    case ThresholdMethod::kOutputPerturbation:
      cost += {threshold.epsilon, 0.0};
      break;
    case ThresholdMethod::kDpsgd:
      cost += PrivacyCost::Of(threshold);
      break;
  }
  return cost;
}

absl::StatusOr<std::vector<TrialResult>> RunHistogramExperiment(
    const ExperimentConfig& config) {
  USERDP_RETURN_IF_ERROR(ValidateCommon(config));
  if (config.methods.empty()) {
    return absl::InvalidArgumentError("at least one method is required");
  }
  USERDP_ASSIGN_OR_RETURN(Dataset base, LoadExperimentData(config));
  const int64_t n = base.num_users();
  std::vector<int64_t> d_values = config.d_values;
  if (d_values.empty()) d_values.push_back(base.domain_size());

  const PrivacyParams release = ReleaseParams(config, n);
  const PrivacyParams threshold = ThresholdParams(config, n);
  if (!(release.delta > 0.0)) {
    return absl::InvalidArgumentError(
        "the histogram experiment uses the Gaussian release and needs "
        "delta > 0");
  }
  USERDP_RETURN_IF_ERROR(
      PrivacyParams::Create(release.epsilon, release.delta).status());
  USERDP_RETURN_IF_ERROR(
      PrivacyParams::Create(threshold.epsilon, threshold.delta).status());

  // Validate every cell before running anything.
  std::vector<Dataset> restricted;
  std::vector<std::vector<double>> truths;
  for (int64_t d : d_values) {
    if (d < 1 || d > base.domain_size()) {
      return absl::InvalidArgumentError(
          absl::StrFormat("d = %d is outside [1, %d], the domain of the data",
                          d, base.domain_size()));
    }
    const double m = NoiseCoefficient(d, release);
    for (ThresholdMethod method : config.methods) {
      if (method == ThresholdMethod::kLaplaceQuantile) {
        return absl::InvalidArgumentError(
            "laplace_quantile targets the Laplace release; the histogram "
            "experiment uses the Gaussian release");
      }
      if (method == ThresholdMethod::kDpsgd && !(threshold.delta > 0.0)) {
        return absl::InvalidArgumentError("dpsgd needs delta' > 0");
      }
      const bool uses_quantile =
          method == ThresholdMethod::kDpQuantile ||
          ((method == ThresholdMethod::kDpsgd ||
            method == ThresholdMethod::kOutputPerturbation) &&
           !config.upper_bound.has_value());
      if (uses_quantile && m >= static_cast<double>(n)) {
        return absl::InvalidArgumentError(absl::StrFormat(
            "%s at d = %d needs the quantile rank M = %g below n = %d",
            ThresholdMethodName(method), d, m, n));
      }
    }
    USERDP_ASSIGN_OR_RETURN(RestrictedDataset top, RestrictToTopItems(base, d));
    std::vector<double> truth = Aggregate(top.dataset);
    double mass = 0.0;
    for (double v : truth) mass += v;
    if (!(mass > 0.0)) {
      return absl::InvalidArgumentError(
          absl::StrFormat("the top %d items have zero total count", d));
    }
    restricted.push_back(std::move(top.dataset));
    truths.push_back(std::move(truth));
  }

  const int64_t num_methods = static_cast<int64_t>(config.methods.size());
  const int64_t per_d = num_methods * config.trials;
  const int64_t total = static_cast<int64_t>(d_values.size()) * per_d;
  const std::function<absl::StatusOr<TrialResult>(int64_t)> task =
      [&](int64_t index) -> absl::StatusOr<TrialResult> {
    const int64_t d_index = index / per_d;
    const int64_t method_index = (index % per_d) / config.trials;
    const int64_t trial = index % config.trials;
    const ThresholdMethod method =
        config.methods[static_cast<size_t>(method_index)];
    const Dataset& data = restricted[static_cast<size_t>(d_index)];
    const uint64_t cell =
        static_cast<uint64_t>(d_index * num_methods + method_index);
    const uint64_t seed =
        TrialSeed(config.seed, cell, static_cast<uint64_t>(trial));
    RandomSource root(seed);
    RandomSource threshold_source = root.Substream(1);
    RandomSource release_source = root.Substream(2);

    ThresholdConfig threshold_config;
    threshold_config.method = method;
    threshold_config.budget = threshold;
    threshold_config.sparsity = config.sparsity;
    threshold_config.upper_bound = config.upper_bound;
    threshold_config.quantile_steps = config.quantile_steps;
    threshold_config.quantile = config.quantile;
    threshold_config.dpsgd = config.dpsgd;
    USERDP_ASSIGN_OR_RETURN(
        ThresholdEstimate estimate,
        SelectThreshold(data, threshold_config, release, threshold_source));
    const double c = std::max(estimate.threshold, kMinThreshold);
    USERDP_ASSIGN_OR_RETURN(NoisyEstimate released,
                            ReleaseGaussian(data, c, release, release_source));
    USERDP_ASSIGN_OR_RETURN(
        double loss,
        RelativeLoss(released.values, truths[static_cast<size_t>(d_index)]));

    TrialResult result;
    result.experiment = config.name;
    result.method = ThresholdMethodName(method);
    result.d = d_values[static_cast<size_t>(d_index)];
    result.trial_index = trial;
    result.seed = seed;
    result.c_used = c;
    result.loss = loss;
    result.budget_spent = estimate.budget_spent + released.budget_spent;
    const PrivacyCost declared = DeclaredTrialBudget(config, method, n);
    if (!SameCost(result.budget_spent, declared)) {
      return absl::InternalError(absl::StrFormat(
          "budget ledger mismatch for %s trial %d: spent (%g, %g), declared "
          "(%g, %g)",
          result.method, trial, result.budget_spent.epsilon,
          result.budget_spent.delta, declared.epsilon, declared.delta));
    }
    return result;
  };
  return RunTasks<TrialResult>(total, config.threads, task);
}

absl::StatusOr<std::vector<TrialResult>> RunCountExperiment(
    const ExperimentConfig& config) {
  USERDP_RETURN_IF_ERROR(ValidateCommon(config));
  if (config.clip.has_value() && *config.clip < 1) {
    return absl::InvalidArgumentError("clip must be a positive integer");
  }
  const bool from_file = config.data_path.has_value();
  std::vector<int64_t> file_counts;
  double file_total = 0.0;
  std::optional<Dataset> file_dataset;
  std::vector<double> alphas = config.alphas;
  if (from_file) {
    USERDP_ASSIGN_OR_RETURN(Dataset data, LoadExperimentData(config));
    if (config.item < 0 || config.item >= data.domain_size()) {
      return absl::InvalidArgumentError(
          absl::StrFormat("item %d is outside the domain of size %d",
                          config.item, data.domain_size()));
    }
    file_counts = ItemColumn(data, config.item);
    for (int64_t c : file_counts) file_total += static_cast<double>(c);
    if (!(file_total > 0.0)) {
      return absl::InvalidArgumentError("the selected item has zero count");
    }
    std::vector<UserHistogram> users;
    for (int64_t c : file_counts) {
      std::vector<HistogramEntry> entries;
      if (c > 0) entries.push_back({0, c});
      USERDP_ASSIGN_OR_RETURN(UserHistogram user,
                              UserHistogram::Create(1, std::move(entries)));
      users.push_back(std::move(user));
    }
    USERDP_ASSIGN_OR_RETURN(Dataset column, Dataset::Create(std::move(users)));
    file_dataset = std::move(column);
    alphas = {0.0};
  } else {
    if (config.synthetic.generator != GeneratorKind::kPoissonDirichlet) {
      return absl::InvalidArgumentError(
          "the count experiment needs the poisson_dirichlet generator or a "
          "data file");
    }
    if (config.synthetic.domain_size != 1) {
      return absl::InvalidArgumentError("the count experiment needs d = 1");
    }
    if (config.synthetic.num_users < 1) {
      return absl::InvalidArgumentError("number of users must be positive");
    }
    if (alphas.empty()) alphas.push_back(config.synthetic.alpha);
    for (double alpha : alphas) {
      if (!(alpha > 0.0) || !std::isfinite(alpha)) {
        return absl::InvalidArgumentError(absl::StrFormat(
            "alpha must be finite and positive, got %g", alpha));
      }
    }
  }
  const int64_t n =
      from_file ? file_dataset->num_users() : config.synthetic.num_users;
  const double target_rank = std::ceil(1.0 / config.epsilon * (1.0 - 1e-12));
  if (!config.clip.has_value() && target_rank >= static_cast<double>(n)) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "the top ceil(1/epsilon) = %g count needs more than %d users",
        target_rank, n));
  }

  const int64_t total = static_cast<int64_t>(alphas.size()) * config.trials;
  const std::function<absl::StatusOr<std::vector<TrialResult>>(int64_t)> task =
      [&](int64_t index) -> absl::StatusOr<std::vector<TrialResult>> {
    const int64_t alpha_index = index / config.trials;
    const int64_t trial = index % config.trials;
    const double alpha = alphas[static_cast<size_t>(alpha_index)];
    const uint64_t seed =
        TrialSeed(config.seed, static_cast<uint64_t>(alpha_index),
                  static_cast<uint64_t>(trial));
    RandomSource root(seed);
    RandomSource threshold_source = root.Substream(1);
    RandomSource release_source = root.Substream(2);

    std::optional<Dataset> generated;
    std::vector<int64_t> generated_counts;
    double truth = 0.0;
    if (!from_file) {
      SyntheticSpec spec = config.synthetic;
      spec.alpha = alpha;
      spec.seed = root.Substream(0).NextBits();
      USERDP_ASSIGN_OR_RETURN(PoissonDirichletData data,
                              GenPoissonDirichlet(spec));
      for (double lambda : data.lambdas) truth += lambda;
      truth /= static_cast<double>(n);
      generated_counts = ItemColumn(data.dataset, 0);
      generated = std::move(data.dataset);
    }
    const Dataset& dataset = from_file ? *file_dataset : *generated;
    const std::vector<int64_t>& counts =
        from_file ? file_counts : generated_counts;

    PrivacyCost spent{config.epsilon, 0.0};
    int64_t clip;
    if (config.clip.has_value()) {
      clip = *config.clip;
    } else {
      USERDP_ASSIGN_OR_RETURN(
          ThresholdEstimate estimate,
          DpQuantileThreshold(dataset, target_rank, {config.epsilon_prime, 0.0},
                              config.quantile_steps, threshold_source,
                              config.quantile));
      clip = std::max<int64_t>(
          1, static_cast<int64_t>(std::ceil(estimate.threshold)));
      spent += estimate.budget_spent;
    }
    USERDP_ASSIGN_OR_RETURN(double noisy_sum,
                            ClipRelease1d(counts, static_cast<double>(clip),
                                          config.epsilon, release_source));
    USERDP_ASSIGN_OR_RETURN(
        DebiasResult debiased,
        DebiasFromNoisySum(noisy_sum, n, clip,
                           {.clamp_lambda = config.clamp_lambda}));

    const double nd = static_cast<double>(n);
    double clip_estimate;
    double debias_estimate;
    double clip_loss;
    double debias_loss;
    if (from_file) {
      clip_estimate = noisy_sum;
      debias_estimate = debiased.n_hat;
      clip_loss = std::abs(noisy_sum - file_total) / file_total;
      debias_loss = std::abs(debiased.n_hat - file_total) / file_total;
    } else {
      clip_estimate = noisy_sum / nd;
      debias_estimate = debiased.lambda_hat;
      const double clip_error = truth - noisy_sum / nd;
      const double debias_error = truth - debiased.lambda_hat;
      clip_loss = clip_error * clip_error;
      debias_loss = debias_error * debias_error;
    }
    const PrivacyCost declared =
        DeclaredTrialBudget(config, ThresholdMethod::kDpQuantile, n);
    if (!SameCost(spent, declared)) {
      return absl::InternalError(absl::StrFormat(
          "budget ledger mismatch for count trial %d: spent (%g, %g), "
          "declared (%g, %g)",
          trial, spent.epsilon, spent.delta, declared.epsilon, declared.delta));
    }

    std::vector<TrialResult> rows(2);
    for (TrialResult& row : rows) {
      row.experiment = config.name;
      row.d = 1;
      row.alpha = alpha;
      row.trial_index = trial;
      row.seed = seed;
      row.c_used = static_cast<double>(clip);
      row.budget_spent = spent;
    }
    rows[0].method = "clip";
    rows[0].estimate = clip_estimate;
    rows[0].loss = clip_loss;
    rows[1].method = "debias";
    rows[1].estimate = debias_estimate;
    rows[1].loss = debias_loss;
    return rows;
  };
  USERDP_ASSIGN_OR_RETURN(
      std::vector<std::vector<TrialResult>> pairs,
      RunTasks<std::vector<TrialResult>>(total, config.threads, task));
  std::vector<TrialResult> results;
  results.reserve(2 * pairs.size());
  for (std::vector<TrialResult>& pair : pairs) {
    for (TrialResult& row : pair) results.push_back(std::move(row));
  }
  return results;
}

absl::StatusOr<std::vector<TrialResult>> RunExperiment(
    const ExperimentConfig& config) {
  return config.kind == ExperimentKind::kHistogram
             ? RunHistogramExperiment(config)
             : RunCountExperiment(config);
}

absl::StatusOr<std::vector<SummaryRow>> Summarize(
    const std::vector<TrialResult>& results) {
  if (results.empty()) {
    return absl::InvalidArgumentError("no results to summarize");
  }
  using Key = std::tuple<std::string, int64_t, double>;
  std::map<Key, size_t> index;
  std::vector<SummaryRow> rows;
  std::vector<std::vector<double>> losses;
  for (const TrialResult& r : results) {
    const Key key{r.method, r.d, r.alpha};
    auto [it, inserted] = index.emplace(key, rows.size());
    if (inserted) {
      rows.push_back({r.method, r.d, r.alpha});
      losses.emplace_back();
    }
    losses[it->second].push_back(r.loss);
  }
  for (size_t k = 0; k < rows.size(); ++k) {
    const std::vector<double>& values = losses[k];
    const double count = static_cast<double>(values.size());
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= count;
    double squares = 0.0;
    for (double v : values) squares += (v - mean) * (v - mean);
    rows[k].mean = mean;
    rows[k].count = static_cast<int64_t>(values.size());
    rows[k].degenerate = values.size() == 1;
    rows[k].std = values.size() > 1 ? std::sqrt(squares / (count - 1.0)) : 0.0;
  }
  return rows;
}

std::string FormatDouble(double value) {
  char buffer[64];
  const auto [end, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, end);
}

std::string ResultsToCsv(const std::vector<TrialResult>& results) {
  std::string out =
      "experiment,method,d,alpha,trial_index,seed,c_used,estimate,loss,"
      "budget_epsilon,budget_delta\n";
  for (const TrialResult& r : results) {
    absl::StrAppend(&out, r.experiment, ",", r.method, ",", r.d, ",",
                    FormatDouble(r.alpha), ",", r.trial_index, ",", r.seed, ",",
                    FormatDouble(r.c_used), ",", FormatDouble(r.estimate), ",",
                    FormatDouble(r.loss), ",",
                    FormatDouble(r.budget_spent.epsilon), ",",
                    FormatDouble(r.budget_spent.delta), "\n");
  }
  return out;
}

std::string SummaryToCsv(const std::vector<SummaryRow>& rows) {
  std::string out = "method,d,alpha,mean,std,count,degenerate\n";
  for (const SummaryRow& r : rows) {
    absl::StrAppend(&out, r.method, ",", r.d, ",", FormatDouble(r.alpha), ",",
                    FormatDouble(r.mean), ",", FormatDouble(r.std), ",",
                    r.count, ",", r.degenerate ? "true" : "false", "\n");
  }
  return out;
}

}  // namespace userdp
