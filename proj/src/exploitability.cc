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

#include "bargain/exploitability.h"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "bargain/planning.h"

namespace bargain {
namespace {

constexpr int kMaxCycle = 6;

// Best deterministic cycle of joint actions under w, of length at most
// kMaxCycle. Ties keep the shorter, then lexicographically smaller, cycle.
Schedule BestDeterministicCycle(const MatrixGame& game, const WelfareSpec& w, double gamma,
                                Payoff& value) {
  const FeasibleSet feasible = MakeFeasibleSet(game, gamma);
  const int n = game.num_joint_actions();
  std::optional<Schedule> best;
  double best_welfare = 0.0;
  for (int len = 1; len <= kMaxCycle; ++len) {
    std::vector<int> cycle(len, 0);
    while (true) {
      const Schedule candidate{cycle, false};
      const Payoff v = ScheduleValue(game, candidate, gamma);
      try {
        const double welfare = EvaluateWelfare(w, v, feasible);
        if (!best || welfare > best_welfare + 1e-9) {
          best = candidate;
          best_welfare = welfare;
          value = v;
        }
      } catch (const std::domain_error&) {
        // Below the disagreement point; not a candidate.
      }
      int i = len - 1;
      while (i >= 0 && ++cycle[i] == n) cycle[i--] = 0;
      if (i < 0) break;
    }
  }
  if (!best) throw std::domain_error("no deterministic cycle improves on the disagreement point");
  return *best;
}

}  // namespace

GrimWelfarePolicy BuildGrimPolicy(const MatrixGame& game, const WelfareSpec& w, int seat,
                                  double gamma) {
  if (seat != 0 && seat != 1) throw std::invalid_argument("BuildGrimPolicy: seat must be 0 or 1");
  Payoff value;
  const Schedule schedule = BestDeterministicCycle(game, w, gamma, value);
  GrimWelfarePolicy policy;
  policy.welfare = w;
  policy.seat = seat;
  for (int joint : schedule.cycle) policy.cycle.push_back(game.joint_action(joint));
  policy.minimax_action = Minimax(game, 1 - seat, gamma).minimizing_action;
  return policy;
}

GrimAgent::GrimAgent(GrimWelfarePolicy policy) : policy_(std::move(policy)) {}

void GrimAgent::BeginEpisode(const Environment& env, std::uint64_t) {
  if (!env.is_matrix()) throw std::invalid_argument("GrimAgent: iterated matrix games only");
  triggered_ = false;
}

int GrimAgent::Act(const Environment&, const EnvState& state) {
  return triggered_ ? policy_.minimax_action : Base(state.step)[policy_.seat];
}

void GrimAgent::Observe(const Environment&, const EnvState& state, JointAction action,
                        const Payoff&) {
  const int other = 1 - policy_.seat;
  if (action[other] != Base(state.step)[other]) triggered_ = true;
}

const JointAction& GrimAgent::Base(int step) const {
  return policy_.cycle[static_cast<std::size_t>(step) % policy_.cycle.size()];
}

std::string_view BoundStatusName(BoundStatus status) {
  switch (status) {
    case BoundStatus::kHolds: return "holds";
    case BoundStatus::kViolated: return "violated";
    case BoundStatus::kPremiseFailed: return "premise_failed";
  }
  return "?";
}

BoundReport VerifyBound(const MatrixGame& game, const WelfareSpec& w, const WelfareSpec& w_prime,
                        double gamma, int horizon, double slack) {
  if (horizon < 2) throw std::invalid_argument("VerifyBound: horizon must be at least 2");
  BoundReport report;
  report.game = game.name();
  report.w = w;
  report.w_prime = w_prime;
  report.minimax = {Minimax(game, 0, gamma).discounted, Minimax(game, 1, gamma).discounted};
  auto fail = [&](std::string why) {
    report.status = BoundStatus::kPremiseFailed;
    report.premise = std::move(why);
    return report;
  };
  if (w == w_prime) return fail("identical welfare functions");
  try {
    BestDeterministicCycle(game, w, gamma, report.optimum_w);
    BestDeterministicCycle(game, w_prime, gamma, report.optimum_w_prime);
  } catch (const std::domain_error& e) {
    return fail(e.what());
  }
  if (std::abs(report.optimum_w.p1 - report.optimum_w_prime.p1) < 1e-9 &&
      std::abs(report.optimum_w.p2 - report.optimum_w_prime.p2) < 1e-9) {
    return fail("the optima coincide");
  }
  for (int i = 0; i < 2; ++i) {
    const double preferred = std::max(report.optimum_w[i], report.optimum_w_prime[i]);
    if (!(report.minimax[i] < preferred)) {
      return fail("minimax value of player " + std::to_string(i + 1) +
                  " is not below their preferred optimum");
    }
  }

  auto env = Environment::Matrix(game, horizon, gamma);
  const GrimWelfarePolicy red_policy = BuildGrimPolicy(game, w, 0, gamma);
  const GrimWelfarePolicy blue_policy = BuildGrimPolicy(game, w_prime, 1, gamma);
  GrimAgent red(red_policy), blue(blue_policy);
  red.BeginEpisode(*env, 0);
  blue.BeginEpisode(*env, 0);
  std::vector<Payoff> rewards;
  Rng rng(0);
  EnvState state = env->Reset(rng);
  for (int t = 0; t < horizon; ++t) {
    if (report.t_found < 0 && red.triggered() && blue.triggered()) report.t_found = t;
    const JointAction joint{red.Act(*env, state), blue.Act(*env, state)};
    const StepResult step = env->Advance(state, joint, rng);
    red.Observe(*env, state, joint, step.rewards);
    blue.Observe(*env, state, joint, step.rewards);
    rewards.push_back(step.rewards);
    state = step.state;
  }
  if (report.t_found < 0) return fail("the grim profiles never disagree within the horizon");
  const int t = report.t_found;
  // From t on both play their minimax actions forever.
  const Payoff stationary =
      game.payoff(JointAction{red_policy.minimax_action, blue_policy.minimax_action});
  report.tail_exact = (1.0 / (1.0 - gamma)) * stationary;
  double discount = 1.0;
  for (int k = t; k < horizon; ++k, discount *= gamma) {
    report.tail_simulated = report.tail_simulated + discount * rewards[k];
  }
  discount = 1.0;
  for (int k = 0; k < t; ++k, discount *= gamma) report.cross_play = report.cross_play + discount * rewards[k];
  report.cross_play = report.cross_play + discount * report.tail_exact;

  report.tail_bound = true;
  report.inequality_one = true;
  for (int i = 0; i < 2; ++i) {
    report.tail_bound = report.tail_bound && report.tail_exact[i] <= report.minimax[i] + 1e-12 &&
                        report.tail_simulated[i] <= report.minimax[i] + slack;
    report.inequality_one = report.inequality_one &&
                            report.cross_play[i] <= std::min(report.optimum_w[i], report.optimum_w_prime[i]) + 1e-9;
  }
  report.status = report.tail_bound && report.inequality_one ? BoundStatus::kHolds : BoundStatus::kViolated;
  return report;
}

std::string FormatBoundReport(const BoundReport& r) {
  std::ostringstream out;
  out << r.game << ": " << r.w.Label() << " vs " << r.w_prime.Label() << " -> "
      << BoundStatusName(r.status);
  if (r.status == BoundStatus::kPremiseFailed) {
    out << " (" << r.premise << ")";
    return out.str();
  }
  out << "; t=" << r.t_found << ", tail (" << r.tail_exact.p1 << ", " << r.tail_exact.p2
      << ") <= minimax (" << r.minimax.p1 << ", " << r.minimax.p2 << "), cross-play ("
      << r.cross_play.p1 << ", " << r.cross_play.p2 << ")";
  return out.str();
}

GapReport ExploitationGap(const Environment& env, const std::vector<WelfareSpec>& W1,
                          const std::vector<WelfareSpec>& W2, std::uint64_t seed,
                          const NormAdaptiveConfig& config, int length) {
  if (W1.empty() || W2.empty()) throw std::invalid_argument("ExploitationGap: empty welfare set");
  if (length < 4) throw std::invalid_argument("ExploitationGap: episode too short");
  auto red_policy = std::make_shared<const NormAdaptivePolicy>(
      TrainNormAdaptive(env, W1, 0, MixSeed(seed, 1), config));
  auto blue_policy = std::make_shared<const NormAdaptivePolicy>(
      TrainNormAdaptive(env, W2, 1, MixSeed(seed, 2), config));
  NormAdaptiveAgent red(red_policy, MixSeed(seed, 3), config), blue(blue_policy, MixSeed(seed, 4), config);
  const Trajectory t = Rollout(env, red, blue, length, seed);

  GapReport report;
  report.value = t.AverageRewardValue(static_cast<std::size_t>(length - length / 4));
  auto preferred = [&](const WelfareSpec& w, int seat) {
    const PlannedPolicy planned = WelfareOptimalJointPolicy(env, w, config.amtft.planning);
    if (env.is_matrix()) return planned.value[seat];
    double sum = 0.0;
    const int episodes = 10;
    for (int e = 0; e < episodes; ++e) {
      PlanAgent a(planned.plan, 0), b(planned.plan, 1);
      sum += Rollout(env, a, b, env.episode_length(), MixSeed(seed, 100 + e)).AverageRewardValue()[seat];
    }
    return sum / episodes;
  };
  report.preferred_self_play = {preferred(W1[0], 0), preferred(W2[0], 1)};
  report.gap = report.value - report.preferred_self_play;
  report.final_welfare_p1 = red.current_welfare().Label();
  report.final_welfare_p2 = blue.current_welfare().Label();
  return report;
}

}  // namespace bargain
