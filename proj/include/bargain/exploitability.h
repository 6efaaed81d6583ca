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

#ifndef BARGAIN_EXPLOITABILITY_H_
#define BARGAIN_EXPLOITABILITY_H_

#include <cstdint>
#include <string>
#include <vector>

#include "bargain/amtft.h"
#include "bargain/environment.h"
#include "bargain/game.h"
#include "bargain/welfare.h"

namespace bargain {

// Grim welfare policy for one seat of an iterated matrix game: play the seat
// of the deterministic w-optimal profile until the opponent first deviates
// from its seat of that profile, then play `minimax_action` forever.
struct GrimWelfarePolicy {
  WelfareSpec welfare;
  int seat = 0;
  // Best deterministic joint cycle under w (length at most 6); step t plays
  // cycle[t % size].
  std::vector<JointAction> cycle;
  // argmin over own actions of the max over opponent actions of the
  // opponent's reward.
  int minimax_action = 0;
};

// Throws std::domain_error when the w-optimum is not a pure stationary
// profile.
// Throws std::domain_error when no cycle improves on the disagreement point.
GrimWelfarePolicy BuildGrimPolicy(const MatrixGame& game, const WelfareSpec& w, int seat,
                                  double gamma);

class GrimAgent : public Agent {
 public:
  explicit GrimAgent(GrimWelfarePolicy policy);
  void BeginEpisode(const Environment& env, std::uint64_t public_seed) override;
  int Act(const Environment& env, const EnvState& state) override;
  void Observe(const Environment& env, const EnvState& state, JointAction action,
               const Payoff& rewards) override;
  bool triggered() const { return triggered_; }

 private:
  const JointAction& Base(int step) const;

  GrimWelfarePolicy policy_;
  bool triggered_ = false;
};

enum class BoundStatus { kHolds, kViolated, kPremiseFailed };

std::string_view BoundStatusName(BoundStatus status);

struct BoundReport {
  std::string game;
  WelfareSpec w;
  WelfareSpec w_prime;
  BoundStatus status = BoundStatus::kPremiseFailed;
  std::string premise;  // why the premise failed, if it did
  Payoff optimum_w;     // discounted values of the two grim profiles in self-play
  Payoff optimum_w_prime;
  Payoff minimax;       // discounted pure minimax value per player
  int t_found = -1;     // first step with both players post-trigger
  Payoff tail_exact;    // V_i(t) in closed form
  Payoff tail_simulated;  // V_i(t) summed over the simulated horizon
  Payoff cross_play;    // whole-episode value from t = 0
  bool tail_bound = false;      // tail values <= minimax
  bool inequality_one = false;  // cross_play <= min of the two optima
};

// Cross-play of grim policies (seat 1 optimizes w, seat 2 optimizes w_prime)
// and the check of the minimax bound on tail values. Simulated tails must
// be within `slack` of the bound.
BoundReport VerifyBound(const MatrixGame& game, const WelfareSpec& w, const WelfareSpec& w_prime,
                        double gamma, int horizon = 500, double slack = 1e-6);

std::string FormatBoundReport(const BoundReport& report);

struct GapReport {
  Payoff value;                // long-run value of the cross-play
  Payoff preferred_self_play;  // each seat's value under its preferred welfare
  Payoff gap;                  // value - preferred_self_play
  std::string final_welfare_p1;
  std::string final_welfare_p2;
};

// Cross-play of amTFT(W1) against amTFT(W2); W[0] is each side's preferred
// welfare function and the initial choice follows `config`. Values are
// average-reward values over the final quarter of a `length`-step episode.
GapReport ExploitationGap(const Environment& env, const std::vector<WelfareSpec>& W1,
                          const std::vector<WelfareSpec>& W2, std::uint64_t seed,
                          const NormAdaptiveConfig& config = {}, int length = 400);

}  // namespace bargain

#endif  // BARGAIN_EXPLOITABILITY_H_
