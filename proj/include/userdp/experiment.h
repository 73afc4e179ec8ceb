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

#ifndef USERDP_EXPERIMENT_H_
#define USERDP_EXPERIMENT_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "userdp/data.h"
#include "userdp/histogram.h"
#include "userdp/threshold.h"

namespace userdp {

enum class ExperimentKind {
  // Threshold-method comparison on d-item histograms with the Gaussian
  // release. Loss is the relative L1 error of the released histogram.
  kHistogram,
  // Clipping versus clipping plus Poisson debiasing on single-item counts.
  // Loss is the squared error of the mean estimate against the true mean
  // rate for synthetic data, or the relative count error for file data.
  kCount,
};

std::string ExperimentKindName(ExperimentKind kind);

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::kHistogram;
  std::string name = "experiment";
  uint64_t seed = 0;
  int64_t trials = 20;
  // Worker threads. Results do not depend on this.
  int threads = 1;

  // Input data: a file when data_path is set, a synthetic generator otherwise.
  std::optional<std::string> data_path;
  std::optional<DataFormat> data_format;
  bool numeric_items = false;
  // Count experiment on a file: index of the item in the loaded domain.
  int64_t item = 0;
  SyntheticSpec synthetic;
  // Count experiment: Dirichlet concentrations to sweep. Empty uses
  // synthetic.alpha.
  std::vector<double> alphas;

  // Histogram experiment.
  std::vector<ThresholdMethod> methods = {ThresholdMethod::kExactGaussian};
  std::vector<int64_t> d_values;

  // Release budget (epsilon, delta) and threshold budget (epsilon', delta').
  // Unset deltas default to 1 / (2n). The count experiment releases with
  // pure Laplace noise and ignores both deltas.
  double epsilon = 1.0;
  std::optional<double> delta;
  double epsilon_prime = 0.1;
  std::optional<double> delta_prime;

  std::optional<double> sparsity;
  std::optional<double> upper_bound;
  int64_t quantile_steps = 50;
  DpQuantileOptions quantile;
  DpsgdOptions dpsgd;

  // Count experiment: fixed integer C instead of the private estimate.
  std::optional<int64_t> clip;
  bool clamp_lambda = false;
};

// Parses a JSON experiment config. Unknown keys are an error that lists them.
absl::StatusOr<ExperimentConfig> ParseExperimentConfig(
    const std::string& json_text);

struct TrialResult {
  std::string experiment;
  std::string method;
  int64_t d = 0;
  // Dirichlet concentration for synthetic count data, otherwise 0.
  double alpha = 0.0;
  int64_t trial_index = 0;
  // Root seed of the trial's random streams.
  uint64_t seed = 0;
  double c_used = 0.0;
  // Method output: the estimated mean rate for synthetic count data, the
  // estimated total count for file count data, unused for histograms.
  double estimate = 0.0;
  double loss = 0.0;
  // Threshold selection plus release for this trial.
  PrivacyCost budget_spent;
};

// Runs every (d, method, trial) cell. Fails before any trial runs when the
// config is inconsistent, and fails if a trial's spend differs from the
// declared threshold-plus-release budget.
absl::StatusOr<std::vector<TrialResult>> RunHistogramExperiment(
    const ExperimentConfig& config);

// Runs every (alpha, trial) cell and emits one "clip" and one "debias" row
// per trial. Both estimators are computed from the same noisy clipped sum.
absl::StatusOr<std::vector<TrialResult>> RunCountExperiment(
    const ExperimentConfig& config);

absl::StatusOr<std::vector<TrialResult>> RunExperiment(
    const ExperimentConfig& config);

// Declared spend of one trial: the threshold method's share of
// (epsilon', delta') plus the release budget.
PrivacyCost DeclaredTrialBudget(const ExperimentConfig& config,
                                ThresholdMethod method, int64_t num_users);

struct SummaryRow {
  std::string method;
  int64_t d = 0;
  double alpha = 0.0;
  double mean = 0.0;
  // Sample standard deviation (n - 1 denominator); 0 for a single trial.
  double std = 0.0;
  int64_t count = 0;
  // Set when count == 1, so std carries no information.
  bool degenerate = false;
};

// Groups by (method, d, alpha) in order of first appearance.
absl::StatusOr<std::vector<SummaryRow>> Summarize(
    const std::vector<TrialResult>& results);

// Shortest decimal text that parses back to the same double.
std::string FormatDouble(double value);

// Columns: experiment,method,d,alpha,trial_index,seed,c_used,estimate,loss,
// budget_epsilon,budget_delta
std::string ResultsToCsv(const std::vector<TrialResult>& results);
// Columns: method,d,alpha,mean,std,count,degenerate
std::string SummaryToCsv(const std::vector<SummaryRow>& rows);

// Seed for trial `trial` of cell `cell` under `master`.
uint64_t TrialSeed(uint64_t master, uint64_t cell, uint64_t trial);

}  // namespace userdp

#endif  // USERDP_EXPERIMENT_H_
