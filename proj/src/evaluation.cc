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

#include "bargain/evaluation.h"

#include <algorithm>
#include <atomic>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <exception>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "bargain/planning.h"

namespace bargain {
namespace {

constexpr std::string_view kNone = "none";

std::string FormatNumber(double x) {
  if (std::abs(x) < 5e-10) x = 0.0;  // no "-0.000000000"
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9f", x);
  return buf;
}

std::vector<std::string> SplitTabs(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    fields.push_back(line.substr(start, tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return fields;
}

const std::string& Column(const MatchRecord& r, const std::string& name, std::string& scratch) {
  if (name == "env") return r.env;
  if (name == "algo") return r.algo;
  if (name == "welfare_p1") return r.welfare_p1;
  if (name == "welfare_p2") return r.welfare_p2;
  if (name == "convention_p1") return r.convention_p1;
  if (name == "convention_p2") return r.convention_p2;
  if (name == "pair_type") return scratch = std::string(PairTypeName(r.pair_type));
  throw std::invalid_argument("unknown group column: " + name);
}

bool Intersect(std::span<const WelfareSpec> a, std::span<const WelfareSpec> b) {
  for (const WelfareSpec& w : a) {
    if (std::find(b.begin(), b.end(), w) != b.end()) return true;
  }
  return false;
}

}  // namespace

std::string_view PairTypeName(PairType type) {
  switch (type) {
    case PairType::kSelfPlay: return "self_play";
    case PairType::kCrossSameWelfare: return "cross_same_welfare";
    case PairType::kCrossDiffWelfare: return "cross_diff_welfare";
    case PairType::kCrossUnclassified: return "cross_unclassified";
  }
  return "?";
}

PairType ParsePairType(std::string_view name) {
  for (PairType t : {PairType::kSelfPlay, PairType::kCrossSameWelfare, PairType::kCrossDiffWelfare,
                     PairType::kCrossUnclassified}) {
    if (PairTypeName(t) == name) return t;
  }
  throw std::invalid_argument("unknown pair type: " + std::string(name));
}

void WriteResults(std::ostream& out, std::span<const MatchRecord> records) {
  for (std::size_t i = 0; i < kResultsColumns.size(); ++i) {
    out << (i ? "\t" : "") << kResultsColumns[i];
  }
  out << '\n';
  for (const MatchRecord& r : records) {
    out << r.env << '\t' << r.algo << '\t' << r.welfare_p1 << '\t' << r.welfare_p2 << '\t'
        << PairTypeName(r.pair_type) << '\t' << r.seed_a << '\t' << r.seed_b << '\t'
        << FormatNumber(r.value.p1) << '\t' << FormatNumber(r.value.p2) << '\t'
        << FormatNumber(r.normalized_score) << '\t' << r.convention_p1 << '\t' << r.convention_p2
        << '\n';
  }
}

std::vector<MatchRecord> ReadResults(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("results: missing header");
  const std::vector<std::string> header = SplitTabs(line);
  if (!std::equal(header.begin(), header.end(), kResultsColumns.begin(), kResultsColumns.end())) {
    throw std::runtime_error("results line 1: header does not match the results schema");
  }
  std::vector<MatchRecord> records;
  int number = 1;
  while (std::getline(in, line)) {
    ++number;
    const std::string where = "results line " + std::to_string(number) + ": ";
    const std::vector<std::string> f = SplitTabs(line);
    if (f.size() != kResultsColumns.size()) {
      throw std::runtime_error(where + "expected " + std::to_string(kResultsColumns.size()) +
                               " fields, got " + std::to_string(f.size()));
    }
    MatchRecord r;
    try {
      r.env = f[0];
      r.algo = f[1];
      r.welfare_p1 = f[2];
      r.welfare_p2 = f[3];
      r.pair_type = ParsePairType(f[4]);
      std::size_t used = 0;
      r.seed_a = std::stoull(f[5], &used);
      if (used != f[5].size()) throw std::invalid_argument("seed_a");
      r.seed_b = std::stoull(f[6], &used);
      if (used != f[6].size()) throw std::invalid_argument("seed_b");
      r.value.p1 = std::stod(f[7]);
      r.value.p2 = std::stod(f[8]);
      r.normalized_score = std::stod(f[9]);
      r.convention_p1 = f[10];
      r.convention_p2 = f[11];
    } catch (const std::exception& e) {
      throw std::runtime_error(where + "malformed field (" + e.what() + ")");
    }
    if (r.env.empty() || r.algo.empty()) throw std::runtime_error(where + "empty env or algo");
    records.push_back(std::move(r));
  }
  return records;
}

std::vector<AggregateCell> Aggregate(std::span<const MatchRecord> records,
                                     std::span<const std::string> group_columns) {
  if (records.empty()) throw std::invalid_argument("Aggregate: no records");
  struct Sums {
    double sum = 0.0, sum_sq = 0.0;
    Payoff value;
    int n = 0;
  };
  std::map<std::vector<std::string>, Sums> groups;
  std::string scratch;
  for (const MatchRecord& r : records) {
    std::vector<std::string> key;
    for (const std::string& c : group_columns) key.push_back(Column(r, c, scratch));
    Sums& s = groups[key];
    s.sum += r.normalized_score;
    s.sum_sq += r.normalized_score * r.normalized_score;
    s.value = s.value + r.value;
    ++s.n;
  }
  std::vector<AggregateCell> cells;
  for (const auto& [key, s] : groups) {
    AggregateCell cell;
    cell.key = key;
    cell.n = s.n;
    cell.mean = s.sum / s.n;
    cell.mean_value = (1.0 / s.n) * s.value;
    if (s.n > 1) {
      const double var = std::max(0.0, (s.sum_sq - s.n * cell.mean * cell.mean) / (s.n - 1));
      cell.standard_error = std::sqrt(var / s.n);
    }
    cells.push_back(std::move(cell));
  }
  return cells;
}

void WriteAggregate(std::ostream& out, std::span<const std::string> group_columns,
                    std::span<const AggregateCell> cells) {
  for (const std::string& c : group_columns) out << c << '\t';
  out << "n\tmean_score\tstderr\tmean_v1\tmean_v2\n";
  for (const AggregateCell& cell : cells) {
    for (const std::string& k : cell.key) out << k << '\t';
    out << cell.n << '\t' << FormatNumber(cell.mean) << '\t' << FormatNumber(cell.standard_error)
        << '\t' << FormatNumber(cell.mean_value.p1) << '\t' << FormatNumber(cell.mean_value.p2)
        << '\n';
  }
}

std::string WelfareSetName(std::span<const WelfareSpec> set) {
  std::string name;
  for (const WelfareSpec& w : set) name += (name.empty() ? "" : "+") + w.Label();
  return name;
}

Scorer::Scorer(const Environment& env, std::vector<WelfareSpec> welfare, int episodes,
               std::uint64_t seed)
    : welfare_(std::move(welfare)), disagreement_(DisagreementProfile(env)) {
  if (welfare_.empty()) throw std::invalid_argument("Scorer: empty welfare set");
  if (env.is_matrix()) {
    feasible_ = MakeFeasibleSet(env.game(), env.discount());
    for (const WelfareSpec& w : welfare_) {
      try {
        conventions_.push_back({w.Label(), FindWelfareOptimum(w, feasible_).profile});
      } catch (const std::domain_error&) {
        // No optimum, so no convention to recognize.
      }
    }
    return;
  }
  if (episodes < 1) throw std::invalid_argument("Scorer: episodes must be positive");
  std::vector<Payoff> points = {{0.0, 0.0}};
  for (const WelfareSpec& w : welfare_) {
    const PlannedPolicy planned = WelfareOptimalJointPolicy(env, w);
    Payoff sum;
    for (int e = 0; e < episodes; ++e) {
      PlanAgent a(planned.plan, 0), b(planned.plan, 1);
      sum = sum + Rollout(env, a, b, env.episode_length(), MixSeed(seed, e)).AverageRewardValue();
    }
    points.push_back((1.0 / episodes) * sum);
    conventions_.push_back({w.Label(), points.back()});
  }
  feasible_ = FeasibleSet(points);
}

double Scorer::Score(const Payoff& v) const {
  return NormalizedScore(v, welfare_, disagreement_, feasible_).normalized_score;
}

std::string Scorer::Classify(const Payoff& v) const {
  return ClassifyConvention(v, conventions_);
}

std::vector<MatchRecord> EvaluateLola(const Environment& env, std::span<const LolaRun> runs,
                                      const Scorer& scorer) {
  if (!env.is_matrix()) throw std::invalid_argument("EvaluateLola: iterated matrix games only");
  const MatrixGame& game = env.game();
  const double gamma = env.discount();
  std::vector<std::string> labels;
  for (const LolaRun& run : runs) {
    labels.push_back(scorer.Classify(ExactValue(run.policies.first, run.policies.second, game, gamma)));
  }
  std::vector<MatchRecord> records;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    for (std::size_t j = 0; j < runs.size(); ++j) {
      MatchRecord r;
      r.env = game.name();
      r.algo = "lola";
      r.welfare_p1 = r.welfare_p2 = std::string(kNone);
      r.seed_a = runs[i].seed;
      r.seed_b = runs[j].seed;
      r.value = ExactValue(runs[i].policies.first, runs[j].policies.second, game, gamma);
      r.normalized_score = scorer.Score(r.value);
      r.convention_p1 = labels[i];
      r.convention_p2 = labels[j];
      if (i == j) {
        r.pair_type = PairType::kSelfPlay;
      } else if (labels[i] == kUnclassified || labels[j] == kUnclassified) {
        r.pair_type = PairType::kCrossUnclassified;
      } else {
        r.pair_type = labels[i] == labels[j] ? PairType::kCrossSameWelfare
                                             : PairType::kCrossDiffWelfare;
      }
      records.push_back(std::move(r));
    }
  }
  return records;
}

AmTFTRun TrainAmTFTRun(const Environment& env, std::vector<WelfareSpec> welfare,
                       std::uint64_t seed, const NormAdaptiveConfig& config) {
  AmTFTRun run;
  run.seed = seed;
  for (int seat = 0; seat < 2; ++seat) {
    run.seat[seat] = std::make_shared<const NormAdaptivePolicy>(
        TrainNormAdaptive(env, welfare, seat, MixSeed(seed, seat), config));
  }
  run.welfare = std::move(welfare);
  return run;
}

std::vector<MatchRecord> EvaluateAmTFT(const Environment& env,
                                       std::span<const std::vector<AmTFTRun>> runs,
                                       const AmTFTEvalOptions& options, const Scorer& scorer) {
  if (options.episodes < 1) throw std::invalid_argument("EvaluateAmTFT: episodes must be positive");
  const int length = options.length > 0 ? options.length : env.episode_length();
  struct Job {
    std::size_t s1, s2, i, j;
  };
  std::vector<Job> jobs;
  for (std::size_t s1 = 0; s1 < runs.size(); ++s1) {
    for (std::size_t s2 = 0; s2 < runs.size(); ++s2) {
      const std::size_t n = std::min(runs[s1].size(), runs[s2].size());
      if (n == 0) continue;
      const std::size_t offsets =
          options.cross_offsets > 0 ? std::min<std::size_t>(options.cross_offsets, n - 1) : n - 1;
      for (std::size_t i = 0; i < n; ++i) {
        if (s1 == s2) jobs.push_back({s1, s2, i, i});
        for (std::size_t k = 1; k <= offsets; ++k) jobs.push_back({s1, s2, i, (i + k) % n});
      }
    }
  }
  std::vector<MatchRecord> records(jobs.size());
  ParallelFor(static_cast<int>(jobs.size()), options.jobs, [&](int index) {
    const Job& job = jobs[index];
    const AmTFTRun& red = runs[job.s1][job.i];
    const AmTFTRun& blue = runs[job.s2][job.j];
    NormAdaptiveAgent a(red.seat[0], MixSeed(red.seed, 0xA1), options.config);
    NormAdaptiveAgent b(blue.seat[1], MixSeed(blue.seed, 0xB2), options.config);
    Payoff value;
    const std::uint64_t match = MixSeed(red.seed, blue.seed);
    for (int e = 0; e < options.episodes; ++e) {
      value = value + Rollout(env, a, b, length, MixSeed(match, e)).AverageRewardValue();
    }
    MatchRecord& r = records[index];
    r.env = env.config().name;
    r.algo = "amtft";
    r.welfare_p1 = WelfareSetName(red.welfare);
    r.welfare_p2 = WelfareSetName(blue.welfare);
    r.seed_a = red.seed;
    r.seed_b = blue.seed;
    r.value = (1.0 / options.episodes) * value;
    r.normalized_score = scorer.Score(r.value);
    r.convention_p1 = a.current_welfare().Label();
    r.convention_p2 = b.current_welfare().Label();
    if (job.s1 == job.s2 && job.i == job.j) {
      r.pair_type = PairType::kSelfPlay;
    } else {
      r.pair_type = Intersect(red.welfare, blue.welfare) ? PairType::kCrossSameWelfare
                                                         : PairType::kCrossDiffWelfare;
    }
  });
  return records;
}

void ParallelFor(int count, int jobs, const std::function<void(int)>& fn) {
  if (jobs <= 1 || count <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> threads;
  for (int t = 0; t < std::min(jobs, count); ++t) {
    threads.emplace_back([&] {
      for (int i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          next = count;
        }
      }
    });
  }
  for (std::thread& t : threads) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace bargain
