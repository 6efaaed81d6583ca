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

#include "bargain/experiment.h"

#include <chrono>
#include <cinttypes>
#include <cstdio>
#include <cstring>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#ifndef BARGAIN_COMMIT
#define BARGAIN_COMMIT "unknown"
#endif

namespace bargain {
namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

const std::set<std::string> kExperimentKeys = {"env", "algo", "id"};
const std::set<std::string> kRecordKeys = {"env",        "algo",          "welfare_p1",
                                           "welfare_p2", "pair_type",     "convention_p1",
                                           "convention_p2"};

class Fnv {
 public:
  void Add(const void* data, std::size_t size) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < size; ++i) hash_ = (hash_ ^ bytes[i]) * 0x100000001b3ull;
  }
  void Add(const std::string& s) {
    Add(s.data(), s.size());
    Add(std::uint64_t{s.size()});
  }
  void Add(double x) { Add(&x, sizeof x); }
  void Add(std::uint64_t x) { Add(&x, sizeof x); }
  std::uint64_t value() const { return hash_; }

 private:
  std::uint64_t hash_ = 0xcbf29ce484222325ull;
};

std::string Hex(std::uint64_t x) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, x);
  return buf;
}

std::uint64_t HashText(const std::string& text) {
  Fnv h;
  h.Add(text);
  return h.value();
}

std::string Timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void WriteFile(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << text;
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string ReadFile(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void Log(const RunOptions& options, const std::string& line) {
  if (options.log) *options.log << line << std::endl;
}

fs::path OutDir(const ExperimentConfig& config, const RunOptions& options) {
  return options.out_dir.empty() ? fs::path(config.output_dir) : fs::path(options.out_dir);
}

std::uint64_t BaseSeed(const ExperimentConfig& config, const ExperimentSpec& spec,
                       const RunOptions& options) {
  if (spec.seed) return *spec.seed;
  return options.seed.value_or(config.seed);
}

std::uint64_t RunSeed(std::uint64_t base, int run) {
  return MixSeed(base, static_cast<std::uint64_t>(run));
}

void CheckFilterKeys(const RunOptions& options) {
  for (const auto& [key, value] : options.filters) {
    if (!kExperimentKeys.count(key) && !kRecordKeys.count(key)) {
      throw std::invalid_argument("unknown filter key '" + key + "'");
    }
  }
}

std::vector<const ExperimentSpec*> Selected(const ExperimentConfig& config,
                                            const RunOptions& options) {
  CheckFilterKeys(options);
  std::vector<const ExperimentSpec*> out;
  for (const ExperimentSpec& spec : config.experiments) {
    bool keep = true;
    for (const auto& [key, value] : options.filters) {
      if (key == "env") keep = keep && spec.environment.name == value;
      if (key == "algo") keep = keep && AlgorithmName(spec.algorithm) == value;
      if (key == "id") keep = keep && spec.id == value;
    }
    if (keep) out.push_back(&spec);
  }
  return out;
}

bool KeepRecord(const MatchRecord& r, const RunOptions& options) {
  for (const auto& [key, value] : options.filters) {
    if (!kRecordKeys.count(key)) continue;
    std::string field;
    if (key == "env") field = r.env;
    if (key == "algo") field = r.algo;
    if (key == "welfare_p1") field = r.welfare_p1;
    if (key == "welfare_p2") field = r.welfare_p2;
    if (key == "pair_type") field = std::string(PairTypeName(r.pair_type));
    if (key == "convention_p1") field = r.convention_p1;
    if (key == "convention_p2") field = r.convention_p2;
    if (field != value) return false;
  }
  return true;
}

fs::path BundlePath(const fs::path& out, const ExperimentSpec& spec, int run) {
  return out / "runs" / spec.id / ("run-" + std::to_string(run) + ".json");
}

Json PayoffJson(const Payoff& p) { return Json::array({p.p1, p.p2}); }

Json ParamsJson(const Memory1Policy& p) {
  return Json(std::vector<double>(p.params().data(), p.params().data() + p.params().size()));
}

Memory1Policy ParamsFrom(const Json& j, int num_actions) {
  const auto v = j.get<std::vector<double>>();
  if (static_cast<int>(v.size()) != Memory1Policy::NumParams(num_actions)) {
    throw std::runtime_error("policy has the wrong number of parameters");
  }
  return Memory1Policy(num_actions, Eigen::Map<const Eigen::VectorXd>(v.data(), v.size()));
}

std::vector<std::vector<WelfareSpec>> WelfareSets(const Environment& env, const ExperimentSpec& spec) {
  std::vector<std::vector<WelfareSpec>> sets;
  for (const auto& names : spec.welfare_sets) sets.push_back(ResolveWelfare(env, names));
  return sets;
}

Json TrainBundle(const Environment& env, const ExperimentSpec& spec, int run, std::uint64_t seed) {
  Json j;
  j["experiment"] = spec.id;
  j["experiment_fingerprint"] = Hex(HashText(ExperimentToJson(spec)));
  j["algorithm"] = std::string(AlgorithmName(spec.algorithm));
  j["run"] = run;
  j["seed"] = seed;
  if (spec.algorithm == Algorithm::kLola) {
    LolaConfig config = spec.lola;
    config.gamma = env.discount();
    config.seed = seed;
    const LolaResult result = TrainLola(env.game(), config);
    j["iterations_run"] = result.iterations_run;
    j["converged"] = result.converged;
    j["policies"] = {{"p1", ParamsJson(result.policies.first)},
                     {"p2", ParamsJson(result.policies.second)}};
    j["value"] = PayoffJson(ExactValue(result.policies.first, result.policies.second, env.game(),
                                       env.discount()));
    Json trace = Json::array();
    for (const Payoff& v : result.value_trace) trace.push_back(PayoffJson(v));
    j["value_trace"] = trace;
  } else {
    Json artifacts = Json::array();
    for (const auto& set : WelfareSets(env, spec)) {
      const AmTFTRun trained = TrainAmTFTRun(env, set, seed, spec.amtft);
      artifacts.push_back({{"welfare", WelfareSetName(set)},
                           {"seat1", Hex(PolicyFingerprint(*trained.seat[0]))},
                           {"seat2", Hex(PolicyFingerprint(*trained.seat[1]))}});
    }
    j["artifacts"] = artifacts;
  }
  return j;
}

// The bundle if it exists and belongs to this experiment and seed.
std::optional<Json> LoadBundle(const fs::path& path, const ExperimentSpec& spec, std::uint64_t seed) {
  if (!fs::exists(path)) return std::nullopt;
  Json j;
  try {
    j = Json::parse(ReadFile(path));
  } catch (const Json::exception&) {
    return std::nullopt;
  }
  if (!j.is_object() || j.value("experiment_fingerprint", "") != Hex(HashText(ExperimentToJson(spec))) ||
      !j.contains("seed") || j["seed"] != seed) {
    return std::nullopt;
  }
  return j;
}

Json ConventionsJson(const Scorer& scorer) {
  Json j = Json::object();
  for (const LabeledProfile& c : scorer.conventions()) j[c.label] = PayoffJson(c.profile);
  return j;
}

Json ScorerJson(const Scorer& scorer) {
  Json vertices = Json::array();
  for (const Payoff& p : scorer.feasible().hull()) vertices.push_back(PayoffJson(p));
  Json welfare = Json::array();
  for (const WelfareSpec& w : scorer.welfare()) welfare.push_back(w.ToString());
  return {{"feasible_hull", vertices},
          {"disagreement", PayoffJson(scorer.disagreement())},
          {"welfare", welfare},
          {"conventions", ConventionsJson(scorer)}};
}

Json OptionsJson(const RunOptions& options) {
  Json filters = Json::array();
  for (const auto& [k, v] : options.filters) filters.push_back(k + "=" + v);
  return {{"jobs", options.jobs},
          {"seed", options.seed ? Json(*options.seed) : Json(nullptr)},
          {"out", options.out_dir},
          {"filters", filters}};
}

}  // namespace

Filter ParseFilter(const std::string& text) {
  const std::size_t eq = text.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 == text.size()) {
    throw std::invalid_argument("filter must look like key=value, got '" + text + "'");
  }
  return {text.substr(0, eq), text.substr(eq + 1)};
}

std::uint64_t PolicyFingerprint(const NormAdaptivePolicy& policy) {
  Fnv h;
  auto add = [&](const AmTFTPolicy& p) {
    h.Add(p.welfare.ToString());
    h.Add(std::uint64_t(p.seat));
    h.Add(p.plan ? p.plan->Describe() : std::string());
    h.Add(p.plan_value.p1);
    h.Add(p.plan_value.p2);
    if (p.punishment) {
      for (int s = 0; s < p.punishment->num_states(); ++s) {
        for (double x : p.punishment->row(s)) h.Add(x);
      }
    }
  };
  h.Add(std::uint64_t(policy.seat));
  for (const AmTFTPolicy& p : policy.members) add(p);
  for (const AmTFTPolicy& p : policy.library_norms) add(p);
  return h.value();
}

TrainSummary Train(const ExperimentConfig& config, const RunOptions& options) {
  const fs::path out = OutDir(config, options);
  const std::string started = Timestamp();
  TrainSummary summary;
  for (const ExperimentSpec* spec : Selected(config, options)) {
    auto env = Environment::Make(spec->environment);
    if (spec->algorithm == Algorithm::kLola && !env->is_matrix()) {
      throw std::invalid_argument(spec->id + ": lola needs an iterated matrix game");
    }
    const std::uint64_t base = BaseSeed(config, *spec, options);
    std::vector<int> pending;
    for (int r = 0; r < spec->runs; ++r) {
      if (LoadBundle(BundlePath(out, *spec, r), *spec, RunSeed(base, r))) {
        ++summary.skipped;
      } else {
        pending.push_back(r);
      }
    }
    Log(options, spec->id + ": " + std::to_string(pending.size()) + " to train, " +
                     std::to_string(spec->runs - static_cast<int>(pending.size())) + " up to date");
    ParallelFor(static_cast<int>(pending.size()), options.jobs, [&](int k) {
      const int r = pending[k];
      const Json bundle = TrainBundle(*env, *spec, r, RunSeed(base, r));
      WriteFile(BundlePath(out, *spec, r), bundle.dump() + "\n");
    });
    summary.trained += static_cast<int>(pending.size());
  }
  WriteFile(out / "config.json", ConfigToJson(config) + "\n");
  Json manifest;
  manifest["command"] = "train";
  manifest["commit"] = BARGAIN_COMMIT;
  manifest["started"] = started;
  manifest["finished"] = Timestamp();
  manifest["options"] = OptionsJson(options);
  manifest["trained"] = summary.trained;
  manifest["skipped"] = summary.skipped;
  manifest["config"] = Json::parse(ConfigToJson(config));
  WriteFile(out / "train_manifest.json", manifest.dump(2) + "\n");
  return summary;
}

EvaluateSummary Evaluate(const ExperimentConfig& config, const RunOptions& options) {
  const fs::path out = OutDir(config, options);
  const std::string started = Timestamp();
  std::vector<MatchRecord> records;
  Json experiments = Json::object();
  for (const ExperimentSpec* spec : Selected(config, options)) {
    auto env = Environment::Make(spec->environment);
    const std::uint64_t base = BaseSeed(config, *spec, options);
    std::vector<Json> bundles;
    std::vector<std::string> missing;
    for (int r = 0; r < spec->runs; ++r) {
      const fs::path path = BundlePath(out, *spec, r);
      std::optional<Json> bundle = LoadBundle(path, *spec, RunSeed(base, r));
      if (!bundle) {
        missing.push_back(path.string());
      } else {
        bundles.push_back(std::move(*bundle));
      }
    }
    if (!missing.empty()) {
      std::string list;
      for (const std::string& m : missing) list += "\n  " + m;
      throw std::runtime_error(spec->id + ": missing or stale run bundles (run train first):" + list);
    }
    Log(options, spec->id + ": evaluating " + std::to_string(spec->runs) + " runs");
    const Scorer scorer(*env, ResolveWelfare(*env, spec->evaluation_welfare),
                        spec->evaluation.scorer_episodes, MixSeed(base, 0x5C0));
    std::vector<MatchRecord> these;
    if (spec->algorithm == Algorithm::kLola) {
      std::vector<LolaRun> runs;
      const int n = env->num_actions();
      for (const Json& b : bundles) {
        runs.push_back({b["seed"].get<std::uint64_t>(),
                        {ParamsFrom(b["policies"]["p1"], n), ParamsFrom(b["policies"]["p2"], n)}});
      }
      these = EvaluateLola(*env, runs, scorer);
    } else {
      const auto sets = WelfareSets(*env, *spec);
      std::vector<std::vector<AmTFTRun>> runs(sets.size(), std::vector<AmTFTRun>(bundles.size()));
      ParallelFor(static_cast<int>(sets.size() * bundles.size()), options.jobs, [&](int k) {
        const std::size_t s = k / bundles.size(), r = k % bundles.size();
        const Json& bundle = bundles[r];
        AmTFTRun run = TrainAmTFTRun(*env, sets[s], bundle["seed"].get<std::uint64_t>(), spec->amtft);
        const Json& artifact = bundle["artifacts"].at(s);
        if (artifact["seat1"] != Hex(PolicyFingerprint(*run.seat[0])) ||
            artifact["seat2"] != Hex(PolicyFingerprint(*run.seat[1]))) {
          throw std::runtime_error(spec->id + ": retrained policy of run " + std::to_string(r) +
                                   " does not match its bundle fingerprint");
        }
        runs[s][r] = std::move(run);
      });
      AmTFTEvalOptions eval;
      eval.episodes = spec->evaluation.episodes;
      eval.length = spec->evaluation.length;
      eval.cross_offsets = spec->evaluation.cross_offsets;
      eval.config = spec->amtft;
      eval.jobs = options.jobs;
      these = EvaluateAmTFT(*env, runs, eval, scorer);
    }
    for (MatchRecord& r : these) {
      if (KeepRecord(r, options)) records.push_back(std::move(r));
    }
    experiments[spec->id] = ScorerJson(scorer);
  }

  std::ostringstream results;
  WriteResults(results, records);
  const fs::path results_path = out / "results.tsv";
  WriteFile(results_path, results.str());
  const std::vector<std::string> keys = {"env", "algo", "welfare_p1", "welfare_p2", "pair_type"};
  std::ostringstream aggregate;
  if (records.empty()) {
    WriteAggregate(aggregate, keys, {});
  } else {
    WriteAggregate(aggregate, keys, Aggregate(records, keys));
  }
  WriteFile(out / "aggregate.tsv", aggregate.str());

  Json manifest;
  manifest["command"] = "evaluate";
  manifest["commit"] = BARGAIN_COMMIT;
  manifest["started"] = started;
  manifest["finished"] = Timestamp();
  manifest["options"] = OptionsJson(options);
  manifest["results"] = {{"path", "results.tsv"},
                         {"records", records.size()},
                         {"fingerprint", Hex(HashText(results.str()))}};
  manifest["experiments"] = experiments;
  manifest["config"] = Json::parse(ConfigToJson(config));
  WriteFile(out / "manifest.json", manifest.dump(2) + "\n");
  WriteFile(out / "config.json", ConfigToJson(config) + "\n");
  return {results_path.string(), records.size()};
}

std::vector<BoundReport> VerifyGames(std::span<const std::string> games) {
  const std::vector<std::string> kinds = {"util", "egal", "nash", "ks", "ia"};
  std::vector<BoundReport> reports;
  for (const std::string& name : games) {
    EnvConfig env_config;
    env_config.name = name;
    auto env = Environment::Make(env_config);
    if (!env->is_matrix()) throw std::invalid_argument(name + " is not an iterated matrix game");
    for (const std::string& a : kinds) {
      for (const std::string& b : kinds) {
        reports.push_back(VerifyBound(env->game(), ResolveWelfare(*env, a), ResolveWelfare(*env, b),
                                      env->discount()));
      }
    }
  }
  return reports;
}

std::string BoundReportJson(const BoundReport& r) {
  Json j;
  j["game"] = r.game;
  j["w"] = r.w.ToString();
  j["w_prime"] = r.w_prime.ToString();
  j["status"] = std::string(BoundStatusName(r.status));
  j["premise"] = r.premise;
  if (r.status != BoundStatus::kPremiseFailed) {
    j["t_found"] = r.t_found;
    j["optimum_w"] = PayoffJson(r.optimum_w);
    j["optimum_w_prime"] = PayoffJson(r.optimum_w_prime);
    j["minimax"] = PayoffJson(r.minimax);
    j["tail_exact"] = PayoffJson(r.tail_exact);
    j["tail_simulated"] = PayoffJson(r.tail_simulated);
    j["cross_play"] = PayoffJson(r.cross_play);
    j["tail_bound"] = r.tail_bound;
    j["inequality_one"] = r.inequality_one;
  }
  return j.dump();
}

std::string ReportResults(const std::string& results_path) {
  std::ifstream in(results_path);
  if (!in) throw std::runtime_error("cannot read " + results_path);
  const std::vector<MatchRecord> records = ReadResults(in);
  std::ostringstream out;
  out << results_path << ": " << records.size() << " records, schema ok\n";
  if (records.empty()) return out.str();
  const std::vector<std::string> keys = {"env", "algo", "pair_type"};
  WriteAggregate(out, keys, Aggregate(records, keys));
  return out.str();
}

}  // namespace bargain
