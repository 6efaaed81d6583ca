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

#include "bargain/planning.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>

namespace bargain {
namespace {

constexpr std::uint64_t kCoinSalt = 0xC01F11Bull;
constexpr double kTieTolerance = 1e-9;

int ArgMax(const std::vector<double>& xs) {
  int best = 0;
  for (int i = 1; i < static_cast<int>(xs.size()); ++i) {
    if (xs[i] > xs[best] + kTieTolerance) best = i;
  }
  return best;
}

double NextValue(const Transition& tr, const std::vector<double>& values,
                 const std::vector<double>& group_values) {
  return tr.respawn_group >= 0 ? group_values[tr.respawn_group] : values[tr.next];
}

void GroupMeans(const Environment& env, const std::vector<double>& values,
                std::vector<double>& group_values) {
  group_values.assign(env.num_respawn_groups(), 0.0);
  for (int g = 0; g < env.num_respawn_groups(); ++g) {
    double sum = 0.0;
    for (int s : env.respawn_group(g)) sum += values[s];
    group_values[g] = sum / static_cast<double>(env.respawn_group(g).size());
  }
}

double InitialMean(const Environment& env, const std::vector<double>& values) {
  double sum = 0.0;
  for (int s : env.initial_states()) sum += values[s];
  return sum / static_cast<double>(env.initial_states().size());
}

}  // namespace

// ------------------------------- TabularPolicy -------------------------------

TabularPolicy::TabularPolicy(std::string env_fingerprint, int num_actions,
                             std::vector<std::vector<double>> table)
    : fingerprint_(std::move(env_fingerprint)), num_actions_(num_actions), table_(std::move(table)) {
  for (const auto& row : table_) {
    if (static_cast<int>(row.size()) != num_actions_) {
      throw std::invalid_argument("TabularPolicy: row size does not match the action count");
    }
    double sum = 0.0;
    for (double p : row) {
      if (!(p >= 0.0)) throw std::invalid_argument("TabularPolicy: negative probability");
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument("TabularPolicy: row does not sum to 1");
  }
}

TabularPolicy TabularPolicy::Deterministic(const Environment& env, std::vector<int> actions) {
  if (static_cast<int>(actions.size()) != env.num_states()) {
    throw std::invalid_argument("TabularPolicy::Deterministic: one action per state required");
  }
  std::vector<std::vector<double>> table(actions.size(), std::vector<double>(env.num_actions()));
  for (std::size_t s = 0; s < actions.size(); ++s) table[s].at(actions[s]) = 1.0;
  return TabularPolicy(env.Fingerprint(), env.num_actions(), std::move(table));
}

TabularPolicy TabularPolicy::Constant(const Environment& env, int action) {
  return Deterministic(env, std::vector<int>(env.num_states(), action));
}

int TabularPolicy::Sample(int state, Rng& rng) const {
  const std::vector<double>& p = row(state);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double x = u(rng);
  for (int a = 0; a < num_actions_; ++a) {
    x -= p[a];
    if (x < 0.0) return a;
  }
  return Mode(state);
}

int TabularPolicy::Mode(int state) const { return ArgMax(row(state)); }

void TabularPolicy::CheckCompatible(const Environment& env) const {
  if (fingerprint_ != env.Fingerprint()) {
    throw std::invalid_argument("TabularPolicy: policy was built for a different environment");
  }
}

PolicyAgent::PolicyAgent(TabularPolicy policy, std::uint64_t seed)
    : policy_(std::move(policy)), seed_(seed), rng_(seed) {}

void PolicyAgent::BeginEpisode(const Environment& env, std::uint64_t public_seed) {
  policy_.CheckCompatible(env);
  rng_.seed(MixSeed(seed_, public_seed));
}

int PolicyAgent::Act(const Environment&, const EnvState& state) {
  return policy_.Sample(state.index, rng_);
}

// -------------------------------- Schedules ----------------------------------

std::string Schedule::ToString(const MatrixGame& game) const {
  std::ostringstream out;
  for (std::size_t i = 0; i < cycle.size(); ++i) {
    if (i > 0) out << "/";
    const JointAction a = game.joint_action(cycle[i]);
    out << game.action_names()[a.a1] << game.action_names()[a.a2];
  }
  if (public_coin) out << " (coin phase)";
  return out.str();
}

SchedulePlan::SchedulePlan(WelfareSpec welfare, const Environment& env, Schedule schedule)
    : JointPlan(std::move(welfare), env.Fingerprint(), 0.0),
      schedule_(std::move(schedule)),
      num_actions_(env.num_actions()),
      description_(schedule_.ToString(env.game())) {
  if (schedule_.cycle.empty()) throw std::invalid_argument("SchedulePlan: empty cycle");
}

JointAction SchedulePlan::Act(const Environment&, const EnvState& state, const PlanContext&,
                              std::uint64_t public_seed) const {
  const std::size_t n = schedule_.cycle.size();
  const std::size_t phase = schedule_.public_coin ? MixSeed(public_seed, kCoinSalt) % n : 0;
  const int joint = schedule_.cycle[(static_cast<std::size_t>(state.step) + phase) % n];
  return {joint / num_actions_, joint % num_actions_};
}

Payoff ScheduleValue(const MatrixGame& game, const Schedule& schedule, double gamma) {
  const std::size_t n = schedule.cycle.size();
  const double cycle_discount = 1.0 - std::pow(gamma, static_cast<double>(n));
  auto phased = [&](std::size_t phase) {
    Payoff v;
    for (std::size_t k = 0; k < n; ++k) {
      v = v + std::pow(gamma, static_cast<double>(k)) * game.payoff(schedule.cycle[(k + phase) % n]);
    }
    return (1.0 / cycle_discount) * v;
  };
  if (!schedule.public_coin) return phased(0);
  Payoff sum;
  for (std::size_t p = 0; p < n; ++p) sum = sum + phased(p);
  return (1.0 / static_cast<double>(n)) * sum;
}

// -------------------------------- Grid plans ---------------------------------

GridPlan::GridPlan(WelfareSpec welfare, const Environment& env, Tables tables)
    : JointPlan(welfare, env.Fingerprint(), welfare.ia.gamma * welfare.ia.lambda),
      tables_(std::move(tables)),
      gamma_(env.discount()),
      ledger_decay_(welfare.ia.gamma * welfare.ia.lambda) {}

double GridPlan::Interpolate(const std::vector<double>& table, int row, double ledger) const {
  const int b = tables_.buckets;
  if (b == 1) return table[row];
  const double limit = tables_.ledger_limit;
  const double x = std::clamp(ledger, -limit, limit);
  const double pos = (x + limit) / (2.0 * limit) * (b - 1);
  const int i = std::min(static_cast<int>(pos), b - 2);
  const double frac = pos - i;
  const double* base = table.data() + static_cast<std::size_t>(row) * b;
  return (1.0 - frac) * base[i] + frac * base[i + 1];
}

double GridPlan::Q(const Environment& env, int state, double ledger, int joint) const {
  const Transition& tr = env.transition(state, env.joint_action(joint));
  const double next_ledger = ledger_decay_ * ledger + tr.rewards.p1 - tr.rewards.p2;
  const double team =
      tr.rewards.p1 + tr.rewards.p2 - tables_.penalty * std::abs(next_ledger);
  const double next = tr.respawn_group >= 0
                          ? Interpolate(tables_.group_values, tr.respawn_group, next_ledger)
                          : Interpolate(tables_.values, tr.next, next_ledger);
  return team + gamma_ * next;
}

double GridPlan::Value(int state, double ledger) const {
  return Interpolate(tables_.values, state, ledger);
}

JointAction GridPlan::Act(const Environment& env, const EnvState& state,
                          const PlanContext& context, std::uint64_t) const {
  int best = 0;
  double best_q = -std::numeric_limits<double>::infinity();
  for (int j = 0; j < env.num_joint_actions(); ++j) {
    const double q = Q(env, state.index, context.ledger, j);
    if (q > best_q + kTieTolerance) {
      best_q = q;
      best = j;
    }
  }
  return env.joint_action(best);
}

std::string GridPlan::Describe() const {
  std::ostringstream out;
  out << "joint value iteration (" << welfare().Label() << ", " << tables_.buckets
      << " ledger buckets, " << tables_.sweeps << " sweeps)";
  return out.str();
}

namespace {

PlannedPolicy PlanMatrix(const Environment& env, const WelfareSpec& w) {
  const MatrixGame& game = env.game();
  const double gamma = env.discount();
  const FeasibleSet feasible = MakeFeasibleSet(game, gamma);
  std::vector<Schedule> candidates;
  const int joints = game.num_joint_actions();
  for (int j = 0; j < joints; ++j) candidates.push_back({{j}, false});
  for (int j = 0; j < joints; ++j) {
    for (int k = 0; k < joints; ++k) {
      if (j == k) continue;
      candidates.push_back({{j, k}, false});
      if (j < k) candidates.push_back({{j, k}, true});
    }
  }
  const Schedule* best = nullptr;
  Payoff best_value;
  double best_welfare = -std::numeric_limits<double>::infinity();
  for (const Schedule& c : candidates) {
    const Payoff v = ScheduleValue(game, c, gamma);
    double value = 0.0;
    try {
      value = EvaluateWelfare(w, v, feasible);
    } catch (const std::domain_error&) {
      continue;
    }
    const double tol = kTieTolerance * (1.0 + std::abs(best_welfare));
    bool better = value > best_welfare + tol;
    if (!better && std::abs(value - best_welfare) <= tol) {
      better = v.p1 > best_value.p1 + kTieTolerance ||
               (std::abs(v.p1 - best_value.p1) <= kTieTolerance && v.p2 > best_value.p2 + kTieTolerance);
    }
    if (best == nullptr || better) {
      best = &c;
      best_value = v;
      best_welfare = value;
    }
  }
  if (best == nullptr) {
    throw std::domain_error("WelfareOptimalJointPolicy: no schedule has defined welfare");
  }
  return {std::make_shared<SchedulePlan>(w, env, *best), best_value, best_welfare};
}

PlannedPolicy PlanGrid(const Environment& env, const WelfareSpec& w, const PlanningOptions& o) {
  GridPlan::Tables t;
  const double gamma = env.discount();
  const double decay = w.ia.gamma * w.ia.lambda;
  if (w.kind == WelfareKind::kInequityAverse) {
    if (o.ledger_buckets < 2) throw std::invalid_argument("PlanGrid: at least 2 ledger buckets");
    if (!(decay < 1.0)) throw std::invalid_argument("PlanGrid: ledger decay must be below 1");
    double max_gap = 0.0;
    for (int s = 0; s < env.num_states(); ++s) {
      for (int j = 0; j < env.num_joint_actions(); ++j) {
        const Payoff& r = env.transition(s, env.joint_action(j)).rewards;
        max_gap = std::max(max_gap, std::abs(r.p1 - r.p2));
      }
    }
    t.buckets = o.ledger_buckets;
    t.ledger_limit = std::max(max_gap / (1.0 - decay), 1e-9);
    t.penalty = w.ia.beta * (1.0 - gamma);
  } else if (w.kind != WelfareKind::kUtilitarian) {
    throw std::invalid_argument("WelfareOptimalJointPolicy: only utilitarian and inequity-averse "
                                "welfare are supported on gridworlds, got " + w.Label());
  }
  const int n = env.num_states();
  const int b = t.buckets;
  const int joints = env.num_joint_actions();
  t.values.assign(static_cast<std::size_t>(n) * b, 0.0);
  std::vector<double> ledgers(b, 0.0);
  for (int k = 0; k < b && b > 1; ++k) ledgers[k] = -t.ledger_limit + 2.0 * t.ledger_limit * k / (b - 1);


  // Ledger arithmetic depends only on the reward pair, so interpolation
  // weights are tabulated once per distinct pair.
  struct Step {
    std::vector<int> index;
    std::vector<double> frac;
    std::vector<double> team;
  };
  std::vector<Step> steps;
  std::map<std::pair<double, double>, int> step_ids;
  std::vector<int> step_of(static_cast<std::size_t>(n) * joints);
  for (int s = 0; s < n; ++s) {
    for (int j = 0; j < joints; ++j) {
      const Payoff& r = env.transition(s, env.joint_action(j)).rewards;
      auto [it, added] = step_ids.emplace(std::make_pair(r.p1, r.p2), static_cast<int>(steps.size()));
      if (added) {
        Step step;
        for (int k = 0; k < b; ++k) {
          const double next_ledger = decay * ledgers[k] + r.p1 - r.p2;
          step.team.push_back(r.p1 + r.p2 - t.penalty * std::abs(next_ledger));
          if (b == 1) {
            step.index.push_back(0);
            step.frac.push_back(0.0);
            continue;
          }
          const double limit = t.ledger_limit;
          const double pos = (std::clamp(next_ledger, -limit, limit) + limit) / (2.0 * limit) * (b - 1);
          const int i = std::min(static_cast<int>(pos), b - 2);
          step.index.push_back(i);
          step.frac.push_back(pos - i);
        }
        steps.push_back(std::move(step));
      }
      step_of[static_cast<std::size_t>(s) * joints + j] = it->second;
    }
  }
  std::vector<double> best(b);

  for (t.sweeps = 1; t.sweeps <= o.max_sweeps; ++t.sweeps) {
    // Respawn groups are averaged once per sweep.
    t.group_values.assign(static_cast<std::size_t>(env.num_respawn_groups()) * b, 0.0);
    for (int g = 0; g < env.num_respawn_groups(); ++g) {
      const auto members = env.respawn_group(g);
      for (int s : members) {
        for (int k = 0; k < b; ++k) t.group_values[g * b + k] += t.values[s * b + k];
      }
      for (int k = 0; k < b; ++k) t.group_values[g * b + k] /= static_cast<double>(members.size());
    }
    double change = 0.0;
    for (int s = 0; s < n; ++s) {
      std::fill(best.begin(), best.end(), -std::numeric_limits<double>::infinity());
      for (int j = 0; j < joints; ++j) {
        const Transition& tr = env.transition(s, env.joint_action(j));
        const Step& step = steps[step_of[static_cast<std::size_t>(s) * joints + j]];
        const double* row = tr.respawn_group >= 0
                                ? t.group_values.data() + static_cast<std::size_t>(tr.respawn_group) * b
                                : t.values.data() + static_cast<std::size_t>(tr.next) * b;
        for (int k = 0; k < b; ++k) {
          const int i = step.index[k];
          const double f = step.frac[k];
          const double next = b == 1 ? row[0] : (1.0 - f) * row[i] + f * row[i + 1];
          best[k] = std::max(best[k], step.team[k] + gamma * next);
        }
      }
      double* v = t.values.data() + static_cast<std::size_t>(s) * b;
      for (int k = 0; k < b; ++k) {
        change = std::max(change, std::abs(best[k] - v[k]));
        v[k] = best[k];
      }
    }
    if (change < o.tolerance) break;
  }
  if (t.sweeps > o.max_sweeps) {
    throw std::runtime_error("WelfareOptimalJointPolicy: value iteration did not converge");
  }
  // Final group means consistent with the converged values.
  for (int g = 0; g < env.num_respawn_groups(); ++g) {
    const auto members = env.respawn_group(g);
    for (int k = 0; k < b; ++k) {
      double sum = 0.0;
      for (int s : members) sum += t.values[s * b + k];
      t.group_values[g * b + k] = sum / static_cast<double>(members.size());
    }
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  return {std::make_shared<GridPlan>(w, env, std::move(t)), {nan, nan}, nan};
}

}  // namespace

PlannedPolicy WelfareOptimalJointPolicy(const Environment& env, const WelfareSpec& w,
                                        const PlanningOptions& options) {
  static std::mutex mutex;
  static std::map<std::string, PlannedPolicy> cache;
  std::ostringstream key;
  key << env.Fingerprint() << '|' << w.ToString() << '|' << options.ledger_buckets << '|'
      << options.tolerance << '|' << options.max_sweeps;
  {
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(key.str());
    if (it != cache.end()) return it->second;
  }
  PlannedPolicy planned = env.is_matrix() ? PlanMatrix(env, w) : PlanGrid(env, w, options);
  std::lock_guard<std::mutex> lock(mutex);
  return cache.emplace(key.str(), std::move(planned)).first->second;
}

PlanAgent::PlanAgent(std::shared_ptr<const JointPlan> plan, int seat)
    : plan_(std::move(plan)), seat_(seat) {
  if (!plan_) throw std::invalid_argument("PlanAgent: null plan");
  if (seat != 0 && seat != 1) throw std::invalid_argument("PlanAgent: seat must be 0 or 1");
}

void PlanAgent::BeginEpisode(const Environment& env, std::uint64_t public_seed) {
  if (env.Fingerprint() != plan_->env_fingerprint()) {
    throw std::invalid_argument("PlanAgent: plan was built for a different environment");
  }
  context_ = {};
  public_seed_ = public_seed;
}

int PlanAgent::Act(const Environment& env, const EnvState& state) {
  const JointAction a = plan_->Act(env, state, context_, public_seed_);
  return seat_ == 0 ? a.a1 : a.a2;
}

void PlanAgent::Observe(const Environment&, const EnvState&, JointAction, const Payoff& rewards) {
  plan_->Update(context_, rewards);
}

// -------------------------------- Q-learning ---------------------------------

QLearningConfig QLearningConfig::ForEnvironment(const Environment& env, std::uint64_t seed) {
  QLearningConfig c;
  c.gamma = env.discount();
  c.seed = seed;
  if (!env.is_matrix()) {
    c.episodes = 100000;
    c.episode_length = env.episode_length();
  }
  return c;
}

TabularPolicy QLearningBestResponse(const Environment& env, int seat, Agent& opponent,
                                    Objective objective, const QLearningConfig& c) {
  if (seat != 0 && seat != 1) throw std::invalid_argument("QLearningBestResponse: bad seat");
  if (c.episodes < 1 || c.episode_length < 1) {
    throw std::invalid_argument("QLearningBestResponse: episodes and length must be positive");
  }
  const int n = env.num_states();
  const int actions = env.num_actions();
  std::vector<double> q(static_cast<std::size_t>(n) * actions, 0.0);
  Rng rng(c.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> any_action(0, actions - 1);
  auto greedy = [&](int s) {
    int best = 0;
    for (int a = 1; a < actions; ++a) {
      if (q[s * actions + a] > q[s * actions + best] + kTieTolerance) best = a;
    }
    return best;
  };
  for (int e = 0; e < c.episodes; ++e) {
    const double progress = c.episodes > 1 ? static_cast<double>(e) / (c.episodes - 1) : 1.0;
    const double epsilon = c.epsilon_start + (c.epsilon_end - c.epsilon_start) * progress;
    const std::uint64_t public_seed = MixSeed(c.seed, static_cast<std::uint64_t>(e));
    opponent.BeginEpisode(env, public_seed);
    Rng env_rng(MixSeed(public_seed, 0x5EED));
    EnvState state = env.Reset(env_rng);
    for (int t = 0; t < c.episode_length; ++t) {
      const int own = unit(rng) < epsilon ? any_action(rng) : greedy(state.index);
      const int other = opponent.Act(env, state);
      const JointAction joint = seat == 0 ? JointAction{own, other} : JointAction{other, own};
      const StepResult r = env.Advance(state, joint, env_rng);
      opponent.Observe(env, state, joint, r.rewards);
      const double reward =
          objective == Objective::kMaximizeOwn ? r.rewards[seat] : -r.rewards[1 - seat];
      const int next = r.state.index;
      double next_best = q[next * actions];
      for (int a = 1; a < actions; ++a) next_best = std::max(next_best, q[next * actions + a]);
      double& entry = q[state.index * actions + own];
      entry += c.learning_rate * (reward + c.gamma * next_best - entry);
      state = r.state;
    }
  }
  std::vector<int> policy(n);
  for (int s = 0; s < n; ++s) policy[s] = greedy(s);
  return TabularPolicy::Deterministic(env, std::move(policy));
}

// ------------------------------ Exact evaluation -----------------------------

Payoff EvaluateMarkovPolicies(const Environment& env, const TabularPolicy& p1,
                              const TabularPolicy& p2, double gamma, double tolerance) {
  p1.CheckCompatible(env);
  p2.CheckCompatible(env);
  if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument("EvaluateMarkovPolicies: gamma");
  const int n = env.num_states();
  const int actions = env.num_actions();
  std::vector<double> v1(n, 0.0), v2(n, 0.0), g1, g2;
  for (int sweep = 0; sweep < 100000; ++sweep) {
    GroupMeans(env, v1, g1);
    GroupMeans(env, v2, g2);
    double change = 0.0;
    for (int s = 0; s < n; ++s) {
      double n1 = 0.0, n2 = 0.0;
      for (int a1 = 0; a1 < actions; ++a1) {
        const double q1 = p1.row(s)[a1];
        if (q1 == 0.0) continue;
        for (int a2 = 0; a2 < actions; ++a2) {
          const double q = q1 * p2.row(s)[a2];
          if (q == 0.0) continue;
          const Transition& tr = env.transition(s, {a1, a2});
          n1 += q * (tr.rewards.p1 + gamma * NextValue(tr, v1, g1));
          n2 += q * (tr.rewards.p2 + gamma * NextValue(tr, v2, g2));
        }
      }
      change = std::max({change, std::abs(n1 - v1[s]), std::abs(n2 - v2[s])});
      v1[s] = n1;
      v2[s] = n2;
    }
    if (change < tolerance) return {InitialMean(env, v1), InitialMean(env, v2)};
  }
  throw std::runtime_error("EvaluateMarkovPolicies: policy evaluation did not converge");
}

BestResponse ExactBestResponse(const Environment& env, int seat, const TabularPolicy& opponent,
                               double gamma, double tolerance) {
  opponent.CheckCompatible(env);
  if (seat != 0 && seat != 1) throw std::invalid_argument("ExactBestResponse: bad seat");
  const int n = env.num_states();
  const int actions = env.num_actions();
  std::vector<double> v(n, 0.0), g;
  std::vector<int> policy(n, 0);
  for (int sweep = 0; sweep < 100000; ++sweep) {
    GroupMeans(env, v, g);
    double change = 0.0;
    for (int s = 0; s < n; ++s) {
      std::vector<double> q(actions, 0.0);
      for (int own = 0; own < actions; ++own) {
        for (int other = 0; other < actions; ++other) {
          const double p = opponent.row(s)[other];
          if (p == 0.0) continue;
          const JointAction joint = seat == 0 ? JointAction{own, other} : JointAction{other, own};
          const Transition& tr = env.transition(s, joint);
          q[own] += p * (tr.rewards[seat] + gamma * NextValue(tr, v, g));
        }
      }
      policy[s] = ArgMax(q);
      change = std::max(change, std::abs(q[policy[s]] - v[s]));
      v[s] = q[policy[s]];
    }
    if (change < tolerance) {
      return {TabularPolicy::Deterministic(env, std::move(policy)), InitialMean(env, v)};
    }
  }
  throw std::runtime_error("ExactBestResponse: value iteration did not converge");
}

MinimaxResult Minimax(const MatrixGame& game, int player, double gamma) {
  if (player != 0 && player != 1) throw std::invalid_argument("Minimax: player must be 0 or 1");
  if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument("Minimax: gamma must lie in [0, 1)");
  MinimaxResult result;
  result.per_step = std::numeric_limits<double>::infinity();
  const int n = game.num_actions();
  for (int other = 0; other < n; ++other) {
    int response = 0;
    double best = -std::numeric_limits<double>::infinity();
    for (int own = 0; own < n; ++own) {
      const JointAction a = player == 0 ? JointAction{own, other} : JointAction{other, own};
      const double r = game.reward(player, a);
      if (r > best) {
        best = r;
        response = own;
      }
    }
    if (best < result.per_step) {
      result.per_step = best;
      result.minimizing_action = other;
      result.maximizing_response = response;
    }
  }
  result.discounted = result.per_step / (1.0 - gamma);
  return result;
}

}  // namespace bargain
