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

#ifndef BARGAIN_CONFIG_H_
#define BARGAIN_CONFIG_H_

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bargain/amtft.h"
#include "bargain/environment.h"
#include "bargain/lola.h"
#include "bargain/welfare.h"

namespace bargain {

// Invalid configuration text; `line` is 1-based, 0 when unknown.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& message, int line)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + message : message),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

enum class Algorithm { kLola, kAmTFT };

struct EvaluationSettings {
  int episodes = 10;
  int length = 0;         // 0: environment episode length (LOLA is exact)
  int cross_offsets = 0;  // 0: all ordered cross-play pairs
  int scorer_episodes = 10;
};

struct ExperimentSpec {
  std::string id;  // defaults to "<env>-<algorithm>"
  EnvConfig environment;
  Algorithm algorithm = Algorithm::kLola;
  LolaConfig lola;
  NormAdaptiveConfig amtft;
  // Welfare names as written: short names (util, egal, nash, ks, ia) take the
  // environment's defaults; "kind(k=v,...)" is used verbatim.
  std::vector<std::string> evaluation_welfare = {"util", "ia"};
  std::vector<std::vector<std::string>> welfare_sets;  // amTFT only
  int runs = 20;
  std::optional<std::uint64_t> seed;  // falls back to the top-level seed
  EvaluationSettings evaluation;
};

struct ExperimentConfig {
  std::string output_dir = "runs";
  std::uint64_t seed = 0;
  std::vector<ExperimentSpec> experiments;
};

// Unknown keys, wrong types and out-of-range values raise ConfigError naming
// the key and its line.
ExperimentConfig ParseConfig(const std::string& text);
ExperimentConfig LoadConfig(const std::string& path);

// Canonical JSON with every field, defaults included; parses back to an equal
// configuration.
std::string ConfigToJson(const ExperimentConfig& config, int indent = 2);
std::string ExperimentToJson(const ExperimentSpec& spec);

std::string_view AlgorithmName(Algorithm algorithm);
std::uint64_t ExperimentSeed(const ExperimentConfig& config, const ExperimentSpec& spec);

WelfareSpec ResolveWelfare(const Environment& env, const std::string& name);
std::vector<WelfareSpec> ResolveWelfare(const Environment& env,
                                        const std::vector<std::string>& names);

}  // namespace bargain

#endif  // BARGAIN_CONFIG_H_
