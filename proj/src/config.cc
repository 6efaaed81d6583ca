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

#include "bargain/config.h"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace bargain {
namespace {

using Json = nlohmann::ordered_json;

// Line of the first occurrence of `"key"` in the text, or 0.
int LineOf(const std::string& text, const std::string& key) {
  const std::size_t pos = text.find('"' + key + '"');
  if (pos == std::string::npos) return 0;
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + pos, '\n'));
}

// Reads the members of one JSON object and rejects the ones never read.
class Reader {
 public:
  Reader(const Json& json, std::string path, const std::string& text)
      : json_(json), path_(std::move(path)), text_(text) {
    if (!json_.is_object()) Fail(path_, "expected an object");
  }

  template <typename T>
  void Get(const std::string& key, T& out) {
    seen_.insert(key);
    if (!json_.contains(key)) return;
    const Json& value = json_.at(key);
    try {
      if constexpr (std::is_same_v<T, bool>) {
        if (!value.is_boolean()) throw std::invalid_argument("expected a boolean");
      } else if constexpr (std::is_integral_v<T>) {
        if (!value.is_number_integer()) throw std::invalid_argument("expected an integer");
        if (std::is_unsigned_v<T> && value.is_number_integer() && !value.is_number_unsigned()) {
          throw std::invalid_argument("expected a non-negative integer");
        }
      } else if constexpr (std::is_floating_point_v<T>) {
        if (!value.is_number()) throw std::invalid_argument("expected a number");
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!value.is_string()) throw std::invalid_argument("expected a string");
      }
      out = value.get<T>();
    } catch (const std::exception& e) {
      Fail(key, e.what());
    }
  }

  bool Has(const std::string& key) {
    seen_.insert(key);
    return json_.contains(key);
  }
  const Json& At(const std::string& key) const { return json_.at(key); }
  std::string Path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  [[noreturn]] void Fail(const std::string& key, const std::string& message) const {
    throw ConfigError(Path(key) + ": " + message, LineOf(text_, key));
  }

  void Finish() const {
    for (const auto& [key, value] : json_.items()) {
      if (!seen_.count(key)) {
        throw ConfigError((path_.empty() ? "" : path_ + ": ") + "unknown key '" + key + "'",
                          LineOf(text_, key));
      }
    }
  }

 private:
  const Json& json_;
  std::string path_;
  const std::string& text_;
  std::set<std::string> seen_;
};

Payoff PayoffFrom(Reader& r, const std::string& key, const Json& value) {
  if (!value.is_array() || value.size() != 2 || !value[0].is_number() || !value[1].is_number()) {
    r.Fail(key, "expected a pair of numbers");
  }
  return {value[0].get<double>(), value[1].get<double>()};
}

EnvConfig ParseEnvironment(const Json& json, const std::string& path, const std::string& text) {
  Reader r(json, path, text);
  EnvConfig c;
  r.Get("name", c.name);
  if (r.Has("payoffs")) {
    const Json& list = r.At("payoffs");
    if (!list.is_array()) r.Fail("payoffs", "expected a list of payoff pairs");
    for (const Json& p : list) c.payoffs.push_back(PayoffFrom(r, "payoffs", p));
  }
  r.Get("grid_size", c.grid_size);
  r.Get("episode_length", c.episode_length);
  r.Get("discount", c.discount);
  r.Get("seed", c.seed);
  if (r.Has("cooperation_reward")) {
    c.cooperation_reward = PayoffFrom(r, "cooperation_reward", r.At("cooperation_reward"));
  }
  r.Get("disagreement_reward", c.disagreement_reward);
  r.Get("disagreement_penalty", c.disagreement_penalty);
  r.Get("disagreement_respawns_all", c.disagreement_respawns_all);
  if (r.Has("inequity_beta") && !r.At("inequity_beta").is_null()) {
    double beta = 0.0;
    r.Get("inequity_beta", beta);
    c.inequity_beta = beta;
  }
  r.Finish();
  if (c.discount <= 0.0 || c.discount >= 1.0) r.Fail("discount", "must lie in (0, 1)");
  if (c.episode_length < 0) r.Fail("episode_length", "must be non-negative");
  return c;
}

void ParseAlgorithm(const Json& json, const std::string& path, const std::string& text,
                    ExperimentSpec& spec) {
  Reader r(json, path, text);
  std::string name;
  r.Get("name", name);
  if (name == "lola") {
    spec.algorithm = Algorithm::kLola;
    LolaConfig& c = spec.lola;
    r.Get("lr", c.lr);
    r.Get("eta", c.eta);
    r.Get("iterations", c.iterations);
    r.Get("tolerance", c.tolerance);
    r.Get("init_stddev", c.init_stddev);
    r.Finish();
    if (c.lr < 0.0) r.Fail("lr", "must be non-negative");
    if (c.eta < 0.0) r.Fail("eta", "must be non-negative");
    if (c.iterations < 1) r.Fail("iterations", "must be at least 1");
  } else if (name == "amtft") {
    spec.algorithm = Algorithm::kAmTFT;
    NormAdaptiveConfig& c = spec.amtft;
    r.Get("debit_threshold", c.amtft.debit_threshold);
    if (r.Has("alpha") && !r.At("alpha").is_null()) {
      double alpha = 0.0;
      r.Get("alpha", alpha);
      if (alpha <= 0.0) r.Fail("alpha", "must be positive");
      c.amtft.alpha = alpha;
    }
    r.Get("rollout_length", c.amtft.rollout_length);
    r.Get("rollouts", c.amtft.rollouts);
    r.Get("shared_punishment", c.amtft.shared_punishment);
    r.Get("ledger_buckets", c.amtft.planning.ledger_buckets);
    r.Get("planning_tolerance", c.amtft.planning.tolerance);
    r.Get("max_sweeps", c.amtft.planning.max_sweeps);
    r.Get("window", c.window);
    r.Get("rho", c.rho);
    r.Get("dwell", c.dwell);
    std::string initial = c.initial == InitialWelfare::kUniform ? "uniform" : "preferred";
    r.Get("initial", initial);
    if (initial == "uniform") {
      c.initial = InitialWelfare::kUniform;
    } else if (initial == "preferred") {
      c.initial = InitialWelfare::kPreferred;
    } else {
      r.Fail("initial", "expected \"uniform\" or \"preferred\"");
    }
    r.Get("resample_weights", c.resample_weights);
    r.Finish();
    if (c.window < 1) r.Fail("window", "must be at least 1");
    if (c.rho <= 0.0 || c.rho > 1.0) r.Fail("rho", "must lie in (0, 1]");
    if (c.amtft.rollouts < 1) r.Fail("rollouts", "must be at least 1");
  } else {
    r.Fail("name", "expected \"lola\" or \"amtft\", got \"" + name + "\"");
  }
}

ExperimentSpec ParseExperiment(const Json& json, const std::string& path, const std::string& text) {
  Reader r(json, path, text);
  ExperimentSpec spec;
  if (!r.Has("environment")) r.Fail("environment", "missing");
  spec.environment = ParseEnvironment(r.At("environment"), r.Path("environment"), text);
  if (!r.Has("algorithm")) r.Fail("algorithm", "missing");
  ParseAlgorithm(r.At("algorithm"), r.Path("algorithm"), text, spec);
  if (r.Has("welfare")) {
    Reader w(r.At("welfare"), r.Path("welfare"), text);
    w.Get("evaluation", spec.evaluation_welfare);
    w.Get("sets", spec.welfare_sets);
    w.Finish();
    if (spec.evaluation_welfare.empty()) w.Fail("evaluation", "must not be empty");
    auto check = [&](const std::string& key, const std::string& name) {
      try {
        WelfareSpec::Parse(name);
      } catch (const std::invalid_argument& e) {
        w.Fail(key, e.what());
      }
    };
    for (const std::string& name : spec.evaluation_welfare) check("evaluation", name);
    for (const auto& set : spec.welfare_sets) {
      for (const std::string& name : set) check("sets", name);
    }
  }
  r.Get("id", spec.id);
  r.Get("runs", spec.runs);
  if (r.Has("seed") && !r.At("seed").is_null()) {
    std::uint64_t seed = 0;
    r.Get("seed", seed);
    spec.seed = seed;
  }
  if (r.Has("evaluation")) {
    Reader e(r.At("evaluation"), r.Path("evaluation"), text);
    e.Get("episodes", spec.evaluation.episodes);
    e.Get("length", spec.evaluation.length);
    e.Get("cross_offsets", spec.evaluation.cross_offsets);
    e.Get("scorer_episodes", spec.evaluation.scorer_episodes);
    e.Finish();
    if (spec.evaluation.episodes < 1) e.Fail("episodes", "must be at least 1");
    if (spec.evaluation.length < 0) e.Fail("length", "must be non-negative");
    if (spec.evaluation.cross_offsets < 0) e.Fail("cross_offsets", "must be non-negative");
    if (spec.evaluation.scorer_episodes < 1) e.Fail("scorer_episodes", "must be at least 1");
  }
  r.Finish();
  if (spec.runs < 1) r.Fail("runs", "must be at least 1");
  if (spec.algorithm == Algorithm::kAmTFT) {
    if (spec.welfare_sets.empty()) r.Fail("welfare", "amtft needs at least one welfare set");
    for (const auto& set : spec.welfare_sets) {
      if (set.empty()) r.Fail("welfare", "welfare sets must not be empty");
    }
  } else if (!spec.welfare_sets.empty()) {
    r.Fail("welfare", "lola takes no welfare sets");
  }
  if (spec.id.empty()) spec.id = spec.environment.name + "-" + std::string(AlgorithmName(spec.algorithm));
  return spec;
}

Json EnvironmentJson(const EnvConfig& c) {
  Json j;
  j["name"] = c.name;
  Json payoffs = Json::array();
  for (const Payoff& p : c.payoffs) payoffs.push_back({p.p1, p.p2});
  j["payoffs"] = payoffs;
  j["grid_size"] = c.grid_size;
  j["episode_length"] = c.episode_length;
  j["discount"] = c.discount;
  j["seed"] = c.seed;
  j["cooperation_reward"] = {c.cooperation_reward.p1, c.cooperation_reward.p2};
  j["disagreement_reward"] = c.disagreement_reward;
  j["disagreement_penalty"] = c.disagreement_penalty;
  j["disagreement_respawns_all"] = c.disagreement_respawns_all;
  j["inequity_beta"] = c.inequity_beta ? Json(*c.inequity_beta) : Json(nullptr);
  return j;
}

Json ExperimentJson(const ExperimentSpec& s) {
  Json j;
  j["id"] = s.id;
  j["environment"] = EnvironmentJson(s.environment);
  Json a;
  a["name"] = std::string(AlgorithmName(s.algorithm));
  if (s.algorithm == Algorithm::kLola) {
    a["lr"] = s.lola.lr;
    a["eta"] = s.lola.eta;
    a["iterations"] = s.lola.iterations;
    a["tolerance"] = s.lola.tolerance;
    a["init_stddev"] = s.lola.init_stddev;
  } else {
    const NormAdaptiveConfig& c = s.amtft;
    a["debit_threshold"] = c.amtft.debit_threshold;
    a["alpha"] = c.amtft.alpha ? Json(*c.amtft.alpha) : Json(nullptr);
    a["rollout_length"] = c.amtft.rollout_length;
    a["rollouts"] = c.amtft.rollouts;
    a["shared_punishment"] = c.amtft.shared_punishment;
    a["ledger_buckets"] = c.amtft.planning.ledger_buckets;
    a["planning_tolerance"] = c.amtft.planning.tolerance;
    a["max_sweeps"] = c.amtft.planning.max_sweeps;
    a["window"] = c.window;
    a["rho"] = c.rho;
    a["dwell"] = c.dwell;
    a["initial"] = c.initial == InitialWelfare::kUniform ? "uniform" : "preferred";
    a["resample_weights"] = c.resample_weights;
  }
  j["algorithm"] = a;
  j["welfare"] = {{"evaluation", s.evaluation_welfare}, {"sets", s.welfare_sets}};
  j["runs"] = s.runs;
  j["seed"] = s.seed ? Json(*s.seed) : Json(nullptr);
  j["evaluation"] = {{"episodes", s.evaluation.episodes},
                     {"length", s.evaluation.length},
                     {"cross_offsets", s.evaluation.cross_offsets},
                     {"scorer_episodes", s.evaluation.scorer_episodes}};
  return j;
}

}  // namespace

std::string_view AlgorithmName(Algorithm algorithm) {
  return algorithm == Algorithm::kLola ? "lola" : "amtft";
}

ExperimentConfig ParseConfig(const std::string& text) {
  Json json;
  try {
    json = Json::parse(text);
  } catch (const Json::parse_error& e) {
    const std::size_t byte = std::min(e.byte, text.size());
    const int line = 1 + static_cast<int>(std::count(text.begin(), text.begin() + byte, '\n'));
    std::string what = e.what();
    // Drop the library's "[json.exception.parse_error.101] " prefix.
    if (const std::size_t cut = what.find("] "); cut != std::string::npos) what = what.substr(cut + 2);
    throw ConfigError(what, line);
  }
  Reader r(json, "", text);
  ExperimentConfig config;
  r.Get("output_dir", config.output_dir);
  r.Get("seed", config.seed);
  if (r.Has("experiments")) {
    const Json& list = r.At("experiments");
    if (!list.is_array()) r.Fail("experiments", "expected a list");
    for (std::size_t i = 0; i < list.size(); ++i) {
      config.experiments.push_back(
          ParseExperiment(list[i], "experiments[" + std::to_string(i) + "]", text));
    }
  }
  r.Finish();
  std::set<std::string> ids;
  for (const ExperimentSpec& s : config.experiments) {
    if (!ids.insert(s.id).second) throw ConfigError("duplicate experiment id '" + s.id + "'", LineOf(text, "id"));
  }
  return config;
}

ExperimentConfig LoadConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path, 0);
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return ParseConfig(buffer.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what(), 0);
  }
}

std::string ConfigToJson(const ExperimentConfig& config, int indent) {
  Json j;
  j["output_dir"] = config.output_dir;
  j["seed"] = config.seed;
  j["experiments"] = Json::array();
  for (const ExperimentSpec& s : config.experiments) j["experiments"].push_back(ExperimentJson(s));
  return j.dump(indent);
}

std::string ExperimentToJson(const ExperimentSpec& spec) { return ExperimentJson(spec).dump(); }

std::uint64_t ExperimentSeed(const ExperimentConfig& config, const ExperimentSpec& spec) {
  return spec.seed.value_or(config.seed);
}

WelfareSpec ResolveWelfare(const Environment& env, const std::string& name) {
  const WelfareSpec parsed = WelfareSpec::Parse(name);
  if (name.find('(') != std::string::npos) return parsed;
  return DefaultWelfare(env, parsed.kind);
}

std::vector<WelfareSpec> ResolveWelfare(const Environment& env,
                                        const std::vector<std::string>& names) {
  std::vector<WelfareSpec> out;
  for (const std::string& n : names) out.push_back(ResolveWelfare(env, n));
  return out;
}

}  // namespace bargain
