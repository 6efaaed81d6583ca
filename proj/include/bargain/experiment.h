// Copyright 2026 The Bargain Authors
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

#ifndef BARGAIN_EXPERIMENT_H_
#define BARGAIN_EXPERIMENT_H_

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bargain/amtft.h"
#include "bargain/config.h"
#include "bargain/evaluation.h"
#include "bargain/exploitability.h"

namespace bargain {

using Filter = std::pair<std::string, std::string>;

// Parses "key=value". Throws std::invalid_argument on other shapes.
Filter ParseFilter(const std::string& text);

struct RunOptions {
  std::string out_dir;  // overrides the config's output_dir when non-empty
  int jobs = 1;
  std::optional<std::uint64_t> seed;  // overrides the config's top-level seed
  // env, algo and id select experiments; every results column filters records.
  std::vector<Filter> filters;
  std::ostream* log = nullptr;
};

struct TrainSummary {
  int trained = 0;
  int skipped = 0;
};

// Writes one bundle per run to <out>/runs/<id>/run-<r>.json plus
// <out>/config.json and <out>/train_manifest.json. Runs whose bundle already
// matches the experiment and seed are skipped.
TrainSummary Train(const ExperimentConfig& config, const RunOptions& options);

struct EvaluateSummary {
  std::string results_path;
  std::size_t records = 0;
};

// Reads the bundles, plays every match and writes <out>/results.tsv,
// <out>/aggregate.tsv and <out>/manifest.json. Missing or stale bundles raise
// std::runtime_error naming them. amTFT bundles hold fingerprints; their
// policies are retrained deterministically and checked against them.
EvaluateSummary Evaluate(const ExperimentConfig& config, const RunOptions& options);

// Every ordered pair of welfare kinds on each named matrix game, with the
// environment's default disagreement point.
std::vector<BoundReport> VerifyGames(std::span<const std::string> games);

// One JSON object per line.
std::string BoundReportJson(const BoundReport& report);

// Validates a results file and returns a per-(env, algo, pair_type) summary.
std::string ReportResults(const std::string& results_path);

// Stable 64-bit fingerprint of a trained amTFT(W) policy.
std::uint64_t PolicyFingerprint(const NormAdaptivePolicy& policy);

}  // namespace bargain

#endif  // BARGAIN_EXPERIMENT_H_
