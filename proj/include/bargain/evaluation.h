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

#ifndef BARGAIN_EVALUATION_H_
#define BARGAIN_EVALUATION_H_

#include <array>
#include <functional>
#include <cstdint>
#include <istream>
#include <memory>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bargain/amtft.h"
#include "bargain/environment.h"
#include "bargain/lola.h"
#include "bargain/welfare.h"

namespace bargain {

// kCrossUnclassified holds cross-play between LOLA runs at least one of which
// matches no convention; those matches stay out of the same/diff buckets.
enum class PairType { kSelfPlay, kCrossSameWelfare, kCrossDiffWelfare, kCrossUnclassified };

std::string_view PairTypeName(PairType type);
PairType ParsePairType(std::string_view name);

struct MatchRecord {
  std::string env;
  std::string algo;
  std::string welfare_p1;  // "+"-joined welfare set, "none" for LOLA
  std::string welfare_p2;
  PairType pair_type = PairType::kSelfPlay;
  std::uint64_t seed_a = 0;
  std::uint64_t seed_b = 0;
  Payoff value;
  double normalized_score = 0.0;
  std::string convention_p1;
  std::string convention_p2;
};

inline constexpr std::array<std::string_view, 12> kResultsColumns = {
    "env",     "algo", "welfare_p1",       "welfare_p2",    "pair_type",     "seed_a",
    "seed_b",  "v1",   "v2", "normalized_score", "convention_p1", "convention_p2"};

// Tab-separated with a header line; numbers use a fixed format so equal
// records give equal bytes.
void WriteResults(std::ostream& out, std::span<const MatchRecord> records);

// Throws std::runtime_error naming the line on any schema violation.
std::vector<MatchRecord> ReadResults(std::istream& in);

struct AggregateCell {
  std::vector<std::string> key;  // one value per group column
  double mean = 0.0;
  double standard_error = 0.0;  // sample std / sqrt(n); 0 when n == 1
  int n = 0;
  Payoff mean_value;
};

// Groups by the named columns (any of env, algo, welfare_p1, welfare_p2,
// pair_type, convention_p1, convention_p2). Rows are sorted by key. Throws
// std::invalid_argument on an unknown column or empty input.
std::vector<AggregateCell> Aggregate(std::span<const MatchRecord> records,
                                     std::span<const std::string> group_columns);

void WriteAggregate(std::ostream& out, std::span<const std::string> group_columns,
                    std::span<const AggregateCell> cells);

std::string WelfareSetName(std::span<const WelfareSpec> set);

// Scores and labels value profiles for one environment. Matrix games use the
// exact feasible set. Gridworlds use the hull of (0, 0) and the average
// self-play values of the welfare-optimal plans of `welfare`.
class Scorer {
 public:
  Scorer(const Environment& env, std::vector<WelfareSpec> welfare, int episodes = 10,
         std::uint64_t seed = 0);

  double Score(const Payoff& v) const;
  std::string Classify(const Payoff& v) const;

  const FeasibleSet& feasible() const { return feasible_; }
  const Payoff& disagreement() const { return disagreement_; }
  std::span<const WelfareSpec> welfare() const { return welfare_; }
  std::span<const LabeledProfile> conventions() const { return conventions_; }

 private:
  std::vector<WelfareSpec> welfare_;
  Payoff disagreement_;
  FeasibleSet feasible_;
  std::vector<LabeledProfile> conventions_;
};

struct LolaRun {
  std::uint64_t seed = 0;
  PolicyPair policies;
};

// Exact values for every self-play and ordered cross-play pair. Runs are
// labeled by the convention of their self-play value.
std::vector<MatchRecord> EvaluateLola(const Environment& env, std::span<const LolaRun> runs,
                                      const Scorer& scorer);

struct AmTFTRun {
  std::uint64_t seed = 0;
  std::vector<WelfareSpec> welfare;
  std::shared_ptr<const NormAdaptivePolicy> seat[2];
};

AmTFTRun TrainAmTFTRun(const Environment& env, std::vector<WelfareSpec> welfare,
                       std::uint64_t seed, const NormAdaptiveConfig& config);

struct AmTFTEvalOptions {
  int episodes = 10;
  int length = 0;  // 0 selects the environment's episode length
  // Cross-play partners of run i are runs i+1, ..., i+k (mod R); 0 means all.
  int cross_offsets = 0;
  NormAdaptiveConfig config;
  int jobs = 1;
};

// For every ordered pair of welfare sets: self-play of run i with itself when
// the sets are equal, and cross-play of run i (seat 1) with run j (seat 2).
// Cross-play is "same welfare" when the sets intersect. `runs[s][r]` is run r
// of welfare set s.
std::vector<MatchRecord> EvaluateAmTFT(const Environment& env,
                                       std::span<const std::vector<AmTFTRun>> runs,
                                       const AmTFTEvalOptions& options, const Scorer& scorer);

// Runs `count` jobs on up to `jobs` threads; job i calls fn(i).
void ParallelFor(int count, int jobs, const std::function<void(int)>& fn);

}  // namespace bargain

#endif  // BARGAIN_EVALUATION_H_
