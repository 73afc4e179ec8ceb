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
#include "cli.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <system_error>
#include <utility>
#include <variant>
#include <vector>

#include "CLI11.hpp"
#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "nlohmann/json.hpp"
#include "userdp/clipping.h"
#include "userdp/data.h"
#include "userdp/experiment.h"
#include "userdp/histogram.h"
#include "userdp/random.h"
#include "userdp/threshold.h"

namespace userdp::cli {
namespace {

using Json = nlohmann::ordered_json;

constexpr char kVersion[] = USERDP_VERSION;

// Default budgets, applied only when the matching flag is absent and always
// reported in the output record.
constexpr double kDefaultEpsilon = 1.0;
constexpr double kDefaultEpsilonPrime = 0.1;

// A failed command: the status to report and the exit code to return.
struct Failure {
  absl::Status status;
  int exit_code = kExitRuntimeError;
};

Failure Usage(std::string message) {
  return {absl::InvalidArgumentError(std::move(message)), kExitUsageError};
}

Failure Runtime(absl::Status status) {
  return {std::move(status), kExitRuntimeError};
}

using Outcome = std::optional<Failure>;

void WriteError(std::ostream& err, const Failure& failure) {
  Json error;
  error["code"] = absl::StatusCodeToString(failure.status.code());
  error["message"] = std::string(failure.status.message());
  error["exit_code"] = failure.exit_code;
  Json line;
  line["error"] = error;
  err << line.dump() << "\n";
}

Json CostJson(const PrivacyCost& cost) {
  return Json{{"epsilon", cost.epsilon}, {"delta", cost.delta}};
}

// Seed from --seed, else from the environment, else 0.
std::variant<uint64_t, Failure> ResolveSeed(const std::optional<uint64_t>& flag,
                                            std::vector<std::string>& notes) {
  if (flag.has_value()) return *flag;
  const char* env = std::getenv(kSeedEnvVar);
  if (env != nullptr && *env != '\0') {
    uint64_t seed = 0;
    const char* end = env + std::char_traits<char>::length(env);
    const auto [ptr, ec] = std::from_chars(env, end, seed);
    if (ec != std::errc() || ptr != end) {
      return Usage(absl::StrCat(kSeedEnvVar, " is not an unsigned integer: '",
                                env, "'"));
    }
    notes.push_back(absl::StrCat("seed=", seed, " from ", kSeedEnvVar));
    return seed;
  }
  notes.push_back("seed=0 (default)");
  return uint64_t{0};
}

absl::StatusOr<DataFormat> ResolveFormat(const std::string& flag,
                                         const std::string& path) {
  if (!flag.empty()) return ParseDataFormat(flag);
  return DataFormatFromPath(path);
}

Outcome CheckPositive(double value, const char* flag) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    return Usage(
        absl::StrFormat("%s must be finite and positive, got %g", flag, value));
  }
  return std::nullopt;
}

Outcome CheckDelta(double value, const char* flag) {
  if (!(value >= 0.0 && value < 1.0)) {
    return Usage(absl::StrFormat("%s must be in [0, 1), got %g", flag, value));
  }
  return std::nullopt;
}

struct SynthFlags {
  std::string generator;
  int64_t n = 1000;
  std::optional<int64_t> d;
  double alpha = 1.0;
  double mass = 0.0;
  std::string size_law = "lognormal";
  double exponent = 2.0;
  double mu = 3.0;
  double sigma = 1.0;
  int64_t min_size = 1;
  int64_t max_size = 10000;
  double item_exponent = 1.1;
  double personal_weight = 0.5;
  int64_t preferred_items = 5;
  std::optional<uint64_t> seed;
  std::string out;
  std::string format;
};

void AddSynthFlags(CLI::App* cmd, SynthFlags& f) {
  cmd->add_option("--gen", f.generator,
                  "Generator: poisson-dirichlet or heterogeneous")
      ->required();
  cmd->add_option("--n", f.n, "Number of users");
  cmd->add_option("--d", f.d,
                  "Domain size (1 for poisson-dirichlet, default 1000 "
                  "otherwise)");
  cmd->add_option("--alpha", f.alpha, "Dirichlet concentration");
  cmd->add_option("--mass", f.mass, "Total Poisson mass S; 0 selects S = n");
  cmd->add_option("--size-law", f.size_law, "zipf or lognormal");
  cmd->add_option("--exponent", f.exponent, "Zipf exponent of user sizes");
  cmd->add_option("--mu", f.mu, "Log-normal mu of user sizes");
  cmd->add_option("--sigma", f.sigma, "Log-normal sigma of user sizes");
  cmd->add_option("--min-size", f.min_size, "Smallest user size");
  cmd->add_option("--max-size", f.max_size, "Largest user size");
  cmd->add_option("--item-exponent", f.item_exponent,
                  "Zipf exponent of global item popularity");
  cmd->add_option("--personal-weight", f.personal_weight,
                  "Probability of drawing from the user's preferred items");
  cmd->add_option("--preferred-items", f.preferred_items,
                  "Preferred items per user");
  cmd->add_option("--seed", f.seed, "Master seed");
  cmd->add_option("--out", f.out, "Output dataset path (.csv or .jsonl)")
      ->required();
  cmd->add_option("--format", f.format, "csv or jsonl; default from --out");
}

Outcome RunSynth(const SynthFlags& f, std::ostream& out) {
  std::vector<std::string> notes;
  auto seed = ResolveSeed(f.seed, notes);
  if (auto* failure = std::get_if<Failure>(&seed)) return *failure;

  absl::StatusOr<GeneratorKind> generator = ParseGeneratorKind(f.generator);
  if (!generator.ok()) return Usage(std::string(generator.status().message()));
  absl::StatusOr<DataFormat> format = ResolveFormat(f.format, f.out);
  if (!format.ok()) return Usage(std::string(format.status().message()));
  if (f.n < 1) return Usage("--n must be at least 1");
  if (!(f.alpha > 0.0) || !std::isfinite(f.alpha)) {
    return Usage(absl::StrFormat("--alpha must be finite and positive, got %g",
                                 f.alpha));
  }
  if (f.mass < 0.0) return Usage("--mass must be nonnegative");

  SyntheticSpec spec;
  spec.generator = *generator;
  spec.num_users = f.n;
  spec.seed = std::get<uint64_t>(seed);
  spec.alpha = f.alpha;
  spec.total_mass = f.mass;
  if (spec.generator == GeneratorKind::kPoissonDirichlet) {
    if (f.d.has_value() && *f.d != 1) {
      return Usage("poisson-dirichlet data is single-item; --d must be 1");
    }
    spec.domain_size = 1;
  } else {
    spec.domain_size = f.d.value_or(1000);
    if (spec.domain_size < 1) return Usage("--d must be at least 1");
    absl::StatusOr<SizeLawKind> law = ParseSizeLawKind(f.size_law);
    if (!law.ok()) return Usage(std::string(law.status().message()));
    spec.size_law.kind = *law;
    spec.size_law.exponent = f.exponent;
    spec.size_law.mu = f.mu;
    spec.size_law.sigma = f.sigma;
    spec.size_law.min_size = f.min_size;
    spec.size_law.max_size = f.max_size;
    spec.item_exponent = f.item_exponent;
    spec.personal_weight = f.personal_weight;
    spec.preferred_items = f.preferred_items;
  }

  Json sidecar;
  sidecar["version"] = kVersion;
  sidecar["generator"] = GeneratorKindName(spec.generator);
  sidecar["n"] = spec.num_users;
  sidecar["d"] = spec.domain_size;
  sidecar["seed"] = spec.seed;
  std::optional<Dataset> dataset;
  if (spec.generator == GeneratorKind::kPoissonDirichlet) {
    absl::StatusOr<PoissonDirichletData> data = GenPoissonDirichlet(spec);
    if (!data.ok()) return Usage(std::string(data.status().message()));
    const double mass = spec.total_mass > 0.0
                            ? spec.total_mass
                            : static_cast<double>(spec.num_users);
    // The lambdas sum to S by construction.
    const double mean = mass / static_cast<double>(spec.num_users);
    double variance = 0.0;
    for (double lambda : data->lambdas) {
      variance += (lambda - mean) * (lambda - mean);
    }
    variance /= static_cast<double>(data->lambdas.size());
    sidecar["alpha"] = spec.alpha;
    sidecar["mass"] = mass;
    sidecar["lambda_bar"] = mean;
    sidecar["lambda_variance"] = variance;
    dataset = std::move(data->dataset);
  } else {
    absl::StatusOr<Dataset> data = GenHeterogeneousHistograms(spec);
    if (!data.ok()) return Usage(std::string(data.status().message()));
    sidecar["size_law"] = SizeLawKindName(spec.size_law.kind);
    sidecar["exponent"] = spec.size_law.exponent;
    sidecar["mu"] = spec.size_law.mu;
    sidecar["sigma"] = spec.size_law.sigma;
    sidecar["min_size"] = spec.size_law.min_size;
    sidecar["max_size"] = spec.size_law.max_size;
    sidecar["item_exponent"] = spec.item_exponent;
    sidecar["personal_weight"] = spec.personal_weight;
    sidecar["preferred_items"] = spec.preferred_items;
    dataset = *std::move(data);
  }

  if (absl::Status s = WriteDataset(*dataset, f.out, *format); !s.ok()) {
    return Runtime(s);
  }
  const std::string sidecar_path = f.out + ".json";
  if (absl::Status s =
          WriteFileAtomically(sidecar_path, sidecar.dump(2) + "\n");
      !s.ok()) {
    return Runtime(s);
  }
  Json record;
  record["command"] = "synth";
  record["version"] = kVersion;
  record["path"] = f.out;
  record["sidecar"] = sidecar_path;
  record["spec"] = sidecar;
  record["notes"] = notes;
  out << record.dump(2) << "\n";
  return std::nullopt;
}

struct EstimateFlags {
  std::string input;
  std::string format;
  bool numeric_items = false;
  std::string method;
  std::optional<double> eps;
  std::optional<double> delta;
  std::optional<double> eps_prime;
  std::optional<double> delta_prime;
  std::optional<int64_t> top_d;
  std::optional<double> s;
  std::optional<double> cm;
  std::optional<uint64_t> seed;
  std::string out;
  int64_t quantile_steps = 50;
  int64_t dpsgd_steps = 0;
};

void AddEstimateFlags(CLI::App* cmd, EstimateFlags& f) {
  cmd->add_option("--input", f.input, "Dataset path (.csv or .jsonl)")
      ->required();
  cmd->add_option("--format", f.format, "csv or jsonl; default from --input");
  cmd->add_flag("--numeric-items", f.numeric_items,
                "Items are integer indices rather than labels");
  cmd->add_option("--method", f.method,
                  "exact, laplace-quantile, dp-quantile, dpsgd or "
                  "output-perturb")
      ->required();
  cmd->add_option("--eps", f.eps, "Release epsilon (default 1)");
  cmd->add_option("--delta", f.delta,
                  "Release delta (default 1/(2n); 0 selects the Laplace "
                  "release)");
  cmd->add_option("--eps-prime", f.eps_prime,
                  "Threshold epsilon' (default 0.1)");
  cmd->add_option("--delta-prime", f.delta_prime,
                  "Threshold delta' (default 1/(2n))");
  cmd->add_option("--top-d", f.top_d, "Keep only the top-d items");
  cmd->add_option("--s", f.s, "Sparsity s (default max(1, 0.1 d))");
  cmd->add_option("--cm", f.cm,
                  "Upper bound C_m; default is a DP quantile estimate");
  cmd->add_option("--seed", f.seed, "Master seed");
  cmd->add_option("--out", f.out, "Write the released histogram as CSV");
  cmd->add_option("--quantile-steps", f.quantile_steps,
                  "Steps of the DP quantile tracker");
  cmd->add_option("--dpsgd-steps", f.dpsgd_steps,
                  "DP-SGD steps (0 selects min(n^2, 10^4))");
}

Outcome RunEstimate(const EstimateFlags& f, std::ostream& out) {
  std::vector<std::string> notes;
  auto seed_or = ResolveSeed(f.seed, notes);
  if (auto* failure = std::get_if<Failure>(&seed_or)) return *failure;
  const uint64_t seed = std::get<uint64_t>(seed_or);

  absl::StatusOr<ThresholdMethod> method = ParseThresholdMethod(f.method);
  if (!method.ok()) return Usage(std::string(method.status().message()));
  absl::StatusOr<DataFormat> format = ResolveFormat(f.format, f.input);
  if (!format.ok()) return Usage(std::string(format.status().message()));
  for (const auto& [value, flag] :
       {std::pair{f.eps, "--eps"}, std::pair{f.eps_prime, "--eps-prime"},
        std::pair{f.s, "--s"}, std::pair{f.cm, "--cm"}}) {
    if (value.has_value()) {
      if (Outcome bad = CheckPositive(*value, flag)) return bad;
    }
  }
  for (const auto& [value, flag] :
       {std::pair{f.delta, "--delta"},
        std::pair{f.delta_prime, "--delta-prime"}}) {
    if (value.has_value()) {
      if (Outcome bad = CheckDelta(*value, flag)) return bad;
    }
  }
  if (f.s.has_value() && *f.s < 1.0) return Usage("--s must be at least 1");
  if (f.top_d.has_value() && *f.top_d < 1) {
    return Usage("--top-d must be at least 1");
  }

  LoadOptions load_options;
  load_options.numeric_items = f.numeric_items;
  absl::StatusOr<LoadedDataset> loaded =
      LoadDataset(f.input, *format, load_options);
  if (!loaded.ok()) return Runtime(loaded.status());
  Dataset dataset = std::move(loaded->dataset);
  std::vector<std::string> item_names = std::move(loaded->item_names);
  if (f.top_d.has_value()) {
    if (*f.top_d > dataset.domain_size()) {
      return Usage(
          absl::StrFormat("--top-d %d exceeds the domain size %d of the data",
                          *f.top_d, dataset.domain_size()));
    }
    absl::StatusOr<RestrictedDataset> top =
        RestrictToTopItems(dataset, *f.top_d);
    if (!top.ok()) return Runtime(top.status());
    std::vector<std::string> kept;
    for (int64_t item : top->kept_items) {
      kept.push_back(item_names[static_cast<size_t>(item)]);
    }
    item_names = std::move(kept);
    dataset = std::move(top->dataset);
  }
  const int64_t n = dataset.num_users();
  const double default_delta = 1.0 / (2.0 * static_cast<double>(n));
  const bool private_method = *method != ThresholdMethod::kExactGaussian &&
                              *method != ThresholdMethod::kLaplaceQuantile;

  PrivacyParams release;
  release.epsilon = f.eps.value_or(kDefaultEpsilon);
  if (!f.eps.has_value()) notes.push_back("epsilon=1 (default)");
  if (f.delta.has_value()) {
    release.delta = *f.delta;
  } else if (*method == ThresholdMethod::kLaplaceQuantile) {
    release.delta = 0.0;
    notes.push_back("delta=0 (Laplace release)");
  } else {
    release.delta = default_delta;
    notes.push_back(absl::StrCat("delta=1/(2n)=", FormatDouble(default_delta),
                                 " (default)"));
  }

  ThresholdConfig config;
  config.method = *method;
  config.sparsity = f.s;
  config.upper_bound = f.cm;
  config.quantile_steps = f.quantile_steps;
  config.dpsgd.steps = f.dpsgd_steps;
  config.budget.epsilon = f.eps_prime.value_or(kDefaultEpsilonPrime);
  config.budget.delta = f.delta_prime.value_or(default_delta);
  if (private_method) {
    if (!f.eps_prime.has_value()) notes.push_back("epsilon'=0.1 (default)");
    if (!f.delta_prime.has_value() && *method == ThresholdMethod::kDpsgd) {
      notes.push_back(absl::StrCat(
          "delta'=1/(2n)=", FormatDouble(default_delta), " (default)"));
    }
  }
  if (f.quantile_steps < 1) return Usage("--quantile-steps must be positive");
  if (f.dpsgd_steps < 0) return Usage("--dpsgd-steps must be nonnegative");

  RandomSource root(seed);
  RandomSource threshold_source = root.Substream(1);
  RandomSource release_source = root.Substream(2);
  absl::StatusOr<ThresholdEstimate> estimate =
      SelectThreshold(dataset, config, release, threshold_source);
  if (!estimate.ok()) {
    return estimate.status().code() == absl::StatusCode::kInvalidArgument
               ? Usage(std::string(estimate.status().message()))
               : Runtime(estimate.status());
  }
  std::vector<std::string> warnings;
  double threshold = estimate->threshold;
  if (!(threshold > 0.0)) {
    threshold = 1e-12;
    warnings.push_back(
        "estimated threshold was 0; released with C = 1e-12 (noise only)");
  }
  absl::StatusOr<NoisyEstimate> released =
      release.delta > 0.0
          ? ReleaseGaussian(dataset, threshold, release, release_source)
          : ReleaseLaplace(dataset, threshold, release, release_source);
  if (!released.ok()) return Runtime(released.status());
  for (const std::string& w : released->warnings) warnings.push_back(w);
  const std::vector<double> truth = Aggregate(dataset);
  absl::StatusOr<double> loss = RelativeLoss(released->values, truth);

  if (!f.out.empty()) {
    std::string csv = "item,value\n";
    for (size_t j = 0; j < released->values.size(); ++j) {
      absl::StrAppend(&csv, item_names[j], ",",
                      FormatDouble(released->values[j]), "\n");
    }
    if (absl::Status s = WriteFileAtomically(f.out, csv); !s.ok()) {
      return Runtime(s);
    }
  }

  const PrivacyCost release_cost = released->budget_spent;
  Json record;
  record["command"] = "estimate";
  record["version"] = kVersion;
  record["input"] = f.input;
  record["method"] = ThresholdMethodName(*method);
  record["seed"] = seed;
  record["num_users"] = n;
  record["d"] = dataset.domain_size();
  record["threshold"] = threshold;
  record["noise_kind"] = NoiseKindName(released->noise_kind);
  record["noise_scale"] = released->noise_scale;
  record["budget"] =
      Json{{"threshold", CostJson(estimate->budget_spent)},
           {"release", CostJson(release_cost)},
           {"total", CostJson(estimate->budget_spent + release_cost)}};
  if (loss.ok()) {
    record["relative_loss"] = *loss;
  } else {
    record["relative_loss"] = nullptr;
  }
  Json diagnostics = Json::object();
  for (const auto& [key, value] : estimate->diagnostics) {
    diagnostics[key] = value;
  }
  record["diagnostics"] = diagnostics;
  record["output"] = f.out.empty() ? Json(nullptr) : Json(f.out);
  record["notes"] = notes;
  record["warnings"] = warnings;
  out << record.dump(2) << "\n";
  return std::nullopt;
}

struct DebiasFlags {
  std::string input;
  std::string format;
  bool numeric_items = false;
  int64_t item = 0;
  int64_t n = 100000;
  double alpha = 1e6;
  double mass = 0.0;
  std::optional<int64_t> clip;
  bool auto_clip = false;
  std::optional<double> eps;
  std::optional<double> eps_prime;
  int64_t trials = 20;
  std::optional<uint64_t> seed;
  bool clamp = false;
  std::string results;
  std::string summary;
  int64_t quantile_steps = 50;
  int threads = 1;
};

void AddDebiasFlags(CLI::App* cmd, DebiasFlags& f) {
  cmd->add_option("--input", f.input,
                  "Dataset path; without it synthetic Poisson-Dirichlet "
                  "counts are generated");
  cmd->add_option("--format", f.format, "csv or jsonl; default from --input");
  cmd->add_flag("--numeric-items", f.numeric_items,
                "Items are integer indices rather than labels");
  cmd->add_option("--item", f.item,
                  "Item index in the loaded domain (0 = most frequent)");
  cmd->add_option("--n", f.n, "Synthetic users");
  cmd->add_option("--alpha", f.alpha, "Synthetic Dirichlet concentration");
  cmd->add_option("--mass", f.mass, "Synthetic total mass; 0 selects n");
  cmd->add_option("--C", f.clip, "Integer clip threshold");
  cmd->add_flag("--auto-C", f.auto_clip,
                "Estimate C privately as the top ceil(1/eps) count");
  cmd->add_option("--eps", f.eps, "Release epsilon (default 1)");
  cmd->add_option("--eps-prime", f.eps_prime,
                  "Budget for --auto-C (default 0.1)");
  cmd->add_option("--trials", f.trials, "Paired trials");
  cmd->add_option("--seed", f.seed, "Master seed");
  cmd->add_flag("--clamp", f.clamp, "Clamp the debiased mean rate to [0, 1]");
  cmd->add_option("--results", f.results, "Write per-trial CSV here");
  cmd->add_option("--summary", f.summary, "Write summary CSV here");
  cmd->add_option("--quantile-steps", f.quantile_steps,
                  "Steps of the DP quantile tracker for --auto-C");
  cmd->add_option("--threads", f.threads, "Worker threads");
}

Outcome RunDebias(const DebiasFlags& f, std::ostream& out) {
  std::vector<std::string> notes;
  auto seed_or = ResolveSeed(f.seed, notes);
  if (auto* failure = std::get_if<Failure>(&seed_or)) return *failure;

  if (f.clip.has_value() == f.auto_clip) {
    return Usage("exactly one of --C and --auto-C is required");
  }
  if (f.clip.has_value() && *f.clip < 1) {
    return Usage("--C must be a positive integer");
  }
  if (f.trials < 1) return Usage("--trials must be at least 1");
  if (f.threads < 1) return Usage("--threads must be at least 1");
  if (f.eps.has_value()) {
    if (Outcome bad = CheckPositive(*f.eps, "--eps")) return bad;
  }
  if (f.eps_prime.has_value()) {
    if (Outcome bad = CheckPositive(*f.eps_prime, "--eps-prime")) return bad;
  }

  ExperimentConfig config;
  config.kind = ExperimentKind::kCount;
  config.name = "debias";
  config.seed = std::get<uint64_t>(seed_or);
  config.trials = f.trials;
  config.threads = f.threads;
  config.clip = f.clip;
  config.clamp_lambda = f.clamp;
  config.quantile_steps = f.quantile_steps;
  config.epsilon = f.eps.value_or(kDefaultEpsilon);
  if (!f.eps.has_value()) notes.push_back("epsilon=1 (default)");
  config.epsilon_prime = f.eps_prime.value_or(kDefaultEpsilonPrime);
  if (f.auto_clip && !f.eps_prime.has_value()) {
    notes.push_back("epsilon'=0.1 (default)");
  }
  if (!f.input.empty()) {
    absl::StatusOr<DataFormat> format = ResolveFormat(f.format, f.input);
    if (!format.ok()) return Usage(std::string(format.status().message()));
    config.data_path = f.input;
    config.data_format = *format;
    config.numeric_items = f.numeric_items;
    config.item = f.item;
  } else {
    if (f.n < 1) return Usage("--n must be at least 1");
    if (!(f.alpha > 0.0) || !std::isfinite(f.alpha)) {
      return Usage("--alpha must be finite and positive");
    }
    config.synthetic.generator = GeneratorKind::kPoissonDirichlet;
    config.synthetic.domain_size = 1;
    config.synthetic.num_users = f.n;
    config.synthetic.alpha = f.alpha;
    config.synthetic.total_mass = f.mass;
  }

  absl::StatusOr<std::vector<TrialResult>> results = RunCountExperiment(config);
  if (!results.ok()) return Runtime(results.status());
  absl::StatusOr<std::vector<SummaryRow>> summary = Summarize(*results);
  if (!summary.ok()) return Runtime(summary.status());
  if (!f.results.empty()) {
    if (absl::Status s = WriteFileAtomically(f.results, ResultsToCsv(*results));
        !s.ok()) {
      return Runtime(s);
    }
  }
  if (!f.summary.empty()) {
    if (absl::Status s = WriteFileAtomically(f.summary, SummaryToCsv(*summary));
        !s.ok()) {
      return Runtime(s);
    }
  }

  Json trials = Json::array();
  for (size_t k = 0; k + 1 < results->size(); k += 2) {
    const TrialResult& clip = (*results)[k];
    const TrialResult& debias = (*results)[k + 1];
    trials.push_back(Json{{"trial_index", clip.trial_index},
                          {"seed", clip.seed},
                          {"c_used", clip.c_used},
                          {"clip_estimate", clip.estimate},
                          {"debias_estimate", debias.estimate},
                          {"clip_loss", clip.loss},
                          {"debias_loss", debias.loss}});
  }
  Json table = Json::array();
  for (const SummaryRow& row : *summary) {
    table.push_back(Json{{"method", row.method},
                         {"avg_loss", row.mean},
                         {"std", row.std},
                         {"count", row.count},
                         {"degenerate", row.degenerate}});
  }
  Json record;
  record["command"] = "debias";
  record["version"] = kVersion;
  record["input"] = f.input.empty() ? Json(nullptr) : Json(f.input);
  record["seed"] = config.seed;
  record["clip"] = f.clip.has_value() ? Json(*f.clip) : Json("auto");
  record["loss"] =
      f.input.empty() ? "squared_error_of_mean" : "relative_count_error";
  const PrivacyCost spent = results->front().budget_spent;
  record["budget"] =
      Json{{"threshold", CostJson({spent.epsilon - config.epsilon, 0.0})},
           {"release", CostJson({config.epsilon, 0.0})},
           {"total", CostJson(spent)}};
  record["trials"] = trials;
  record["summary"] = table;
  record["notes"] = notes;
  out << record.dump(2) << "\n";
  return std::nullopt;
}

struct ExperimentFlags {
  std::string config;
  std::string out_dir = ".";
  std::string results;
  std::string summary;
  std::optional<int> threads;
  std::optional<uint64_t> seed;
};

void AddExperimentFlags(CLI::App* cmd, ExperimentFlags& f) {
  cmd->add_option("--config", f.config, "JSON experiment config")->required();
  cmd->add_option("--out-dir", f.out_dir,
                  "Directory for <name>_results.csv and <name>_summary.csv");
  cmd->add_option("--results", f.results, "Results CSV path override");
  cmd->add_option("--summary", f.summary, "Summary CSV path override");
  cmd->add_option("--threads", f.threads, "Worker threads override");
  cmd->add_option("--seed", f.seed, "Master seed override");
}

Outcome RunExperimentCommand(const ExperimentFlags& f, std::ostream& out) {
  std::ifstream in(f.config, std::ios::binary);
  if (!in) {
    return Runtime(absl::NotFoundError(
        absl::StrCat("cannot open config '", f.config, "'")));
  }
  std::ostringstream text;
  text << in.rdbuf();
  absl::StatusOr<ExperimentConfig> config = ParseExperimentConfig(text.str());
  if (!config.ok()) return Usage(std::string(config.status().message()));
  if (f.threads.has_value()) config->threads = *f.threads;
  if (f.seed.has_value()) config->seed = *f.seed;

  absl::StatusOr<std::vector<TrialResult>> results = RunExperiment(*config);
  if (!results.ok()) {
    return results.status().code() == absl::StatusCode::kInvalidArgument
               ? Usage(std::string(results.status().message()))
               : Runtime(results.status());
  }
  absl::StatusOr<std::vector<SummaryRow>> summary = Summarize(*results);
  if (!summary.ok()) return Runtime(summary.status());

  const std::filesystem::path dir(f.out_dir);
  std::error_code dir_error;
  std::filesystem::create_directories(dir, dir_error);
  if (dir_error) {
    return Runtime(absl::PermissionDeniedError(
        absl::StrCat("cannot create output directory '", f.out_dir,
                     "': ", dir_error.message())));
  }
  const std::string results_path =
      f.results.empty() ? (dir / (config->name + "_results.csv")).string()
                        : f.results;
  const std::string summary_path =
      f.summary.empty() ? (dir / (config->name + "_summary.csv")).string()
                        : f.summary;
  if (absl::Status s =
          WriteFileAtomically(results_path, ResultsToCsv(*results));
      !s.ok()) {
    return Runtime(s);
  }
  if (absl::Status s =
          WriteFileAtomically(summary_path, SummaryToCsv(*summary));
      !s.ok()) {
    return Runtime(s);
  }
  Json record;
  record["command"] = "experiment";
  record["version"] = kVersion;
  record["experiment"] = ExperimentKindName(config->kind);
  record["name"] = config->name;
  record["seed"] = config->seed;
  record["results"] = results_path;
  record["summary"] = summary_path;
  record["result_rows"] = results->size();
  record["summary_rows"] = summary->size();
  out << record.dump(2) << "\n";
  return std::nullopt;
}

}  // namespace

int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err) {
  CLI::App app{"User-level differentially private histogram estimation",
               "userdp"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  SynthFlags synth;
  EstimateFlags estimate;
  DebiasFlags debias;
  ExperimentFlags experiment;
  CLI::App* synth_cmd =
      app.add_subcommand("synth", "Generate a synthetic dataset");
  AddSynthFlags(synth_cmd, synth);
  CLI::App* estimate_cmd = app.add_subcommand(
      "estimate", "Choose a clipping threshold and release a histogram");
  AddEstimateFlags(estimate_cmd, estimate);
  CLI::App* debias_cmd = app.add_subcommand(
      "debias", "Compare clipping and debiasing on single-item counts");
  AddDebiasFlags(debias_cmd, debias);
  CLI::App* experiment_cmd = app.add_subcommand(
      "experiment", "Run an experiment sweep from a JSON config");
  AddExperimentFlags(experiment_cmd, experiment);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    WriteError(err, Usage(e.what()));
    return kExitUsageError;
  }

  Outcome outcome;
  try {
    if (synth_cmd->parsed()) {
      outcome = RunSynth(synth, out);
    } else if (estimate_cmd->parsed()) {
      outcome = RunEstimate(estimate, out);
    } else if (debias_cmd->parsed()) {
      outcome = RunDebias(debias, out);
    } else {
      outcome = RunExperimentCommand(experiment, out);
    }
  } catch (const std::exception& e) {
    outcome = Runtime(absl::InternalError(e.what()));
  }
  if (outcome.has_value()) {
    WriteError(err, *outcome);
    return outcome->exit_code;
  }
  return kExitOk;
}

}  // namespace userdp::cli
