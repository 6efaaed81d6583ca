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

#ifndef BARGAIN_PLANNING_H_
#define BARGAIN_PLANNING_H_

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "bargain/environment.h"
#include "bargain/welfare.h"

namespace bargain {

// State -> action distribution over an enumerated environment.
class TabularPolicy {
 public:
  TabularPolicy() = default;
  TabularPolicy(std::string env_fingerprint, int num_actions,
                std::vector<std::vector<double>> table);
  static TabularPolicy Deterministic(const Environment& env, std::vector<int> actions);
  static TabularPolicy Constant(const Environment& env, int action);

  int num_states() const { return static_cast<int>(table_.size()); }
  int num_actions() const { return num_actions_; }
  const std::vector<double>& row(int state) const { return table_.at(state); }
  const std::string& env_fingerprint() const { return fingerprint_; }

  int Sample(int state, Rng& rng) const;
  // Most likely action; the lowest index wins ties.
  int Mode(int state) const;
  // Throws std::invalid_argument if the policy belongs to another environment.
  void CheckCompatible(const Environment& env) const;

 private:
  std::string fingerprint_;
  int num_actions_ = 0;
  std::vector<std::vector<double>> table_;
};

class PolicyAgent : public Agent {
 public:
  PolicyAgent(TabularPolicy policy, std::uint64_t seed);
  void BeginEpisode(const Environment& env, std::uint64_t public_seed) override;
  int Act(const Environment& env, const EnvState& state) override;

 private:
  TabularPolicy policy_;
  std::uint64_t seed_;
  Rng rng_;
};

// Per-episode memory of a joint plan: the smoothed inequity ledger e1 - e2.
struct PlanContext {
  double ledger = 0.0;
};

// A deterministic cooperative joint policy. Plans may depend on the time step
// (alternation schedules), on the public episode seed (coin-flip phases) and
// on the inequity ledger.
class JointPlan {
 public:
  JointPlan(WelfareSpec welfare, std::string env_fingerprint, double ledger_decay)
      : welfare_(std::move(welfare)),
        fingerprint_(std::move(env_fingerprint)),
        ledger_decay_(ledger_decay) {}
  virtual ~JointPlan() = default;

  virtual JointAction Act(const Environment& env, const EnvState& state,
                          const PlanContext& context, std::uint64_t public_seed) const = 0;
  virtual std::string Describe() const = 0;

  void Update(PlanContext& context, const Payoff& rewards) const {
    context.ledger = ledger_decay_ * context.ledger + rewards.p1 - rewards.p2;
  }
  const WelfareSpec& welfare() const { return welfare_; }
  const std::string& env_fingerprint() const { return fingerprint_; }

 private:
  WelfareSpec welfare_;
  std::string fingerprint_;
  double ledger_decay_;
};

// Stationary joint action or period-2 alternation over joint-action indices.
struct Schedule {
  std::vector<int> cycle;
  bool public_coin = false;  // phase drawn from the public seed

  std::string ToString(const MatrixGame& game) const;
};

class SchedulePlan : public JointPlan {
 public:
  SchedulePlan(WelfareSpec welfare, const Environment& env, Schedule schedule);
  JointAction Act(const Environment& env, const EnvState& state, const PlanContext& context,
                  std::uint64_t public_seed) const override;
  std::string Describe() const override { return description_; }
  const Schedule& schedule() const { return schedule_; }

 private:
  Schedule schedule_;
  int num_actions_;
  std::string description_;
};

// Exact discounted value of a schedule from t = 0; coin phases are averaged.
Payoff ScheduleValue(const MatrixGame& game, const Schedule& schedule, double gamma);

// Greedy plan from joint value iteration on a gridworld.
class GridPlan : public JointPlan {
 public:
  struct Tables {
    int buckets = 1;  // 1 for the utilitarian team reward
    double ledger_limit = 0.0;
    double penalty = 0.0;  // beta * (1 - gamma)
    std::vector<double> values;  // [state * buckets + bucket]
    std::vector<double> group_values;  // [group * buckets + bucket]
    int sweeps = 0;
  };

  GridPlan(WelfareSpec welfare, const Environment& env, Tables tables);
  JointAction Act(const Environment& env, const EnvState& state, const PlanContext& context,
                  std::uint64_t public_seed) const override;
  std::string Describe() const override;

  // Team value of the plan at `state` given a ledger value.
  double Value(int state, double ledger) const;
  const Tables& tables() const { return tables_; }

 private:
  double Interpolate(const std::vector<double>& table, int row, double ledger) const;
  double Q(const Environment& env, int state, double ledger, int joint) const;

  Tables tables_;
  double gamma_;
  double ledger_decay_;
};

struct PlanningOptions {
  int ledger_buckets = 21;
  double tolerance = 1e-5;
  int max_sweeps = 5000;
};

struct PlannedPolicy {
  std::shared_ptr<const JointPlan> plan;
  Payoff value;          // exact for schedules, NaN until evaluated for grids
  double welfare = 0.0;  // w at `value` (schedules only)
};

// Matrix games: best stationary joint action, period-2 alternation or
// coin-phased alternation under w. Gridworlds: joint value iteration for the
// utilitarian and inequity-averse welfare functions; other kinds throw
// std::invalid_argument. Results are cached per environment and welfare.
PlannedPolicy WelfareOptimalJointPolicy(const Environment& env, const WelfareSpec& w,
                                        const PlanningOptions& options = {});

// Agent playing one seat of a joint plan.
class PlanAgent : public Agent {
 public:
  PlanAgent(std::shared_ptr<const JointPlan> plan, int seat);
  void BeginEpisode(const Environment& env, std::uint64_t public_seed) override;
  int Act(const Environment& env, const EnvState& state) override;
  void Observe(const Environment& env, const EnvState& state, JointAction action,
               const Payoff& rewards) override;

 private:
  std::shared_ptr<const JointPlan> plan_;
  int seat_;
  PlanContext context_;
  std::uint64_t public_seed_ = 0;
};

enum class Objective { kMaximizeOwn, kMinimizeOpponent };

struct QLearningConfig {
  int episodes = 800;
  int episode_length = 20;
  double learning_rate = 0.1;
  double epsilon_start = 0.3;
  double epsilon_end = 0.05;
  double gamma = 0.96;
  std::uint64_t seed = 0;

  // Matrix defaults; gridworlds use 100000 episodes of the episode length.
  static QLearningConfig ForEnvironment(const Environment& env, std::uint64_t seed);
};

// Epsilon-greedy tabular Q-learning for `seat` against a fixed opponent;
// returns the greedy policy (unvisited states take action 0).
TabularPolicy QLearningBestResponse(const Environment& env, int seat, Agent& opponent,
                                    Objective objective, const QLearningConfig& config);

// Exact discounted values of two Markov policies from the initial distribution.
Payoff EvaluateMarkovPolicies(const Environment& env, const TabularPolicy& p1,
                              const TabularPolicy& p2, double gamma, double tolerance = 1e-10);

struct BestResponse {
  TabularPolicy policy;
  double value = 0.0;  // own discounted value from the initial distribution
};

// Single-agent value iteration against a Markov opponent.
BestResponse ExactBestResponse(const Environment& env, int seat, const TabularPolicy& opponent,
                               double gamma, double tolerance = 1e-10);

struct MinimaxResult {
  double per_step = 0.0;
  double discounted = 0.0;
  int minimizing_action = 0;   // opponent action
  int maximizing_response = 0; // own best response to it
};

// Pure-action minimax of `player`'s stage reward: min over the opponent's
// actions of the max over own actions.
MinimaxResult Minimax(const MatrixGame& game, int player, double gamma);

}  // namespace bargain

#endif  // BARGAIN_PLANNING_H_
