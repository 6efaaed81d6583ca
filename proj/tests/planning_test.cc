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

#include <cmath>
#include <set>

#include "bargain/planning.h"
#include "gtest/gtest.h"

namespace bargain {
namespace {

constexpr double kGamma = 0.96;
constexpr int kB = 0, kS = 1;

std::vector<WelfareSpec> KindsWithDisagreement(const Payoff& d) {
  return {WelfareSpec::Utilitarian(), WelfareSpec::Egalitarian(d), WelfareSpec::Nash(d),
          WelfareSpec::KalaiSmorodinsky(d), WelfareSpec::InequityAverse()};
}

// Seat-2 tit-for-tat: cooperate first, then copy Red's previous action.
TabularPolicy TitForTat(const Environment& env) {
  std::vector<int> actions(env.num_states(), 0);
  for (int j = 0; j < env.num_joint_actions(); ++j) actions[1 + j] = env.joint_action(j).a1;
  return TabularPolicy::Deterministic(env, actions);
}

// Markov snapshot of a plan that ignores the ledger (utilitarian plans).
TabularPolicy SeatPolicy(const Environment& env, const JointPlan& plan, int seat) {
  std::vector<int> actions(env.num_states());
  for (int s = 0; s < env.num_states(); ++s) {
    const JointAction a = plan.Act(env, {s, 0}, {}, 0);
    actions[s] = seat == 0 ? a.a1 : a.a2;
  }
  return TabularPolicy::Deterministic(env, actions);
}

TEST(TabularPolicyTest, Validation) {
  auto env = Environment::Matrix(AsymmetricBachOrStravinsky());
  EXPECT_THROW(TabularPolicy(env->Fingerprint(), 2, {{0.5, 0.6}}), std::invalid_argument);
  EXPECT_THROW(TabularPolicy(env->Fingerprint(), 2, {{1.0}}), std::invalid_argument);
  EXPECT_THROW(TabularPolicy::Deterministic(*env, {0, 1}), std::invalid_argument);
  const TabularPolicy p = TabularPolicy::Constant(*env, kS);
  EXPECT_EQ(p.Mode(3), kS);
  auto other = Environment::Matrix(PrisonersDilemma());
  EXPECT_THROW(p.CheckCompatible(*other), std::invalid_argument);
  PolicyAgent agent(p, 1);
  EXPECT_THROW(agent.BeginEpisode(*other, 0), std::invalid_argument);
}

TEST(WelfareOptimalJointPolicyTest, AsymmetricBosExamples) {
  auto env = Environment::Matrix(AsymmetricBachOrStravinsky());
  const PlannedPolicy util = WelfareOptimalJointPolicy(*env, WelfareSpec::Utilitarian());
  const auto* util_plan = dynamic_cast<const SchedulePlan*>(util.plan.get());
  ASSERT_NE(util_plan, nullptr);
  EXPECT_EQ(util_plan->schedule().cycle, std::vector<int>{0});
  EXPECT_NEAR(util.value.p1, 100, 1e-9);
  EXPECT_NEAR(util.value.p2, 25, 1e-9);

  const PlannedPolicy ia = WelfareOptimalJointPolicy(*env, WelfareSpec::InequityAverse());
  const auto* ia_plan = dynamic_cast<const SchedulePlan*>(ia.plan.get());
  ASSERT_NE(ia_plan, nullptr);
  EXPECT_EQ(ia_plan->schedule().cycle, std::vector<int>{3});

  // Oracle: trajectory-level inequity-averse welfare of the two constant plays.
  auto traj = [](Payoff r) {
    Trajectory t;
    t.discount = kGamma;
    t.steps.assign(800, {{}, {}, r});
    return t;
  };
  EXPECT_GT(IaWelfare(traj({2, 2}), 1.0, 0.96), IaWelfare(traj({4, 1}), 1.0, 0.96));
}

TEST(WelfareOptimalJointPolicyTest, MatchesWelfareOptimum) {
  struct Case {
    MatrixGame game;
    Payoff d;
  };
  const std::vector<Case> cases = {{PureCoordination(), {0, 0}},
                                   {BachOrStravinsky(), {0, 0}},
                                   {AsymmetricBachOrStravinsky(), {0, 0}},
                                   {PrisonersDilemma(), {-75, -75}}};
  for (const Case& c : cases) {
    auto env = Environment::Matrix(c.game);
    const FeasibleSet set = MakeFeasibleSet(c.game, kGamma);
    for (const WelfareSpec& w : KindsWithDisagreement(c.d)) {
      const PlannedPolicy planned = WelfareOptimalJointPolicy(*env, w);
      const WelfareOptimum optimum = FindWelfareOptimum(w, set);
      EXPECT_NEAR(planned.welfare, optimum.welfare, 1e-6) << c.game.name() << " " << w.Label();
      EXPECT_NEAR(planned.value.p1, optimum.profile.p1, 1e-6) << c.game.name() << " " << w.Label();
      EXPECT_NEAR(planned.value.p2, optimum.profile.p2, 1e-6) << c.game.name() << " " << w.Label();
    }
  }
}

TEST(WelfareOptimalJointPolicyTest, UnrealizableOptimumIsBelowHullOptimum) {
  // The egalitarian point of the extreme BoS lies a third of the way along
  // the front, which no period-2 schedule reaches.
  auto env = Environment::Matrix(ExtremeAsymmetricBachOrStravinsky());
  const WelfareSpec w = WelfareSpec::Egalitarian();
  const PlannedPolicy planned = WelfareOptimalJointPolicy(*env, w);
  const WelfareOptimum optimum = FindWelfareOptimum(w, MakeFeasibleSet(env->game(), kGamma));
  EXPECT_NEAR(optimum.welfare, 250.0 + 25.0 / 3.0, 1e-6);
  EXPECT_LT(planned.welfare, optimum.welfare - 1.0);
}

TEST(WelfareOptimalJointPolicyTest, ScheduleValueMatchesRollout) {
  auto env = Environment::Matrix(BachOrStravinsky(), 800);
  const PlannedPolicy nash = WelfareOptimalJointPolicy(*env, WelfareSpec::Nash());
  const auto* plan = dynamic_cast<const SchedulePlan*>(nash.plan.get());
  ASSERT_NE(plan, nullptr);
  EXPECT_TRUE(plan->schedule().public_coin);
  // Average of rollout values over public seeds that cover both phases.
  Payoff sum;
  std::set<int> first_actions;
  for (std::uint64_t seed = 0; seed < 64; ++seed) {
    PlanAgent a(nash.plan, 0), b(nash.plan, 1);
    const Trajectory t = Rollout(*env, a, b, 800, seed);
    first_actions.insert(t.steps[0].action.a1);
    for (const auto& step : t.steps) EXPECT_EQ(step.action.a1, step.action.a2);
    sum = sum + t.DiscountedValue();
  }
  EXPECT_EQ(first_actions.size(), 2u);
  for (int phase = 0; phase < 2; ++phase) {
    Schedule fixed = plan->schedule();
    fixed.public_coin = false;
    if (phase == 1) std::swap(fixed.cycle[0], fixed.cycle[1]);
    PlanAgent a(std::make_shared<SchedulePlan>(WelfareSpec::Nash(), *env, fixed), 0);
    PlanAgent b(std::make_shared<SchedulePlan>(WelfareSpec::Nash(), *env, fixed), 1);
    const Payoff rolled = Rollout(*env, a, b, 800, 0).DiscountedValue();
    const Payoff exact = ScheduleValue(env->game(), fixed, kGamma);
    EXPECT_NEAR(rolled.p1, exact.p1, 1e-9);
    EXPECT_NEAR(rolled.p2, exact.p2, 1e-9);
  }
  EXPECT_NEAR(nash.value.p1, 62.5, 1e-9);
  EXPECT_NEAR(nash.value.p2, 62.5, 1e-9);
}

TEST(WelfareOptimalJointPolicyTest, GridworldRestrictions) {
  auto env = Environment::Make({.name = "CoinGame"});
  EXPECT_THROW(WelfareOptimalJointPolicy(*env, WelfareSpec::Nash()), std::invalid_argument);
  EXPECT_THROW(WelfareOptimalJointPolicy(*env, WelfareSpec::Egalitarian()), std::invalid_argument);
}

TEST(WelfareOptimalJointPolicyTest, GridUtilitarianValueMatchesPolicyEvaluation) {
  auto env = Environment::Make({.name = "CoinGame"});
  const PlannedPolicy util = WelfareOptimalJointPolicy(*env, WelfareSpec::Utilitarian());
  const auto* plan = dynamic_cast<const GridPlan*>(util.plan.get());
  ASSERT_NE(plan, nullptr);
  const Payoff v = EvaluateMarkovPolicies(*env, SeatPolicy(*env, *plan, 0),
                                          SeatPolicy(*env, *plan, 1), kGamma);
  double planned = 0;
  for (int s : env->initial_states()) planned += plan->Value(s, 0.0);
  planned /= env->initial_states().size();
  EXPECT_NEAR(v.p1 + v.p2, planned, 1e-3);
  // Picking up only one's own coins beats the greedy free-for-all.
  EXPECT_GT(v.p1 + v.p2, 0.0);
}

TEST(BargainingCoinGameCalibrationTest, UtilitarianPlanConsumesOnlyCooperationCoins) {
  auto env = Environment::Make({.name = "ABCG"});
  const PlannedPolicy util = WelfareOptimalJointPolicy(*env, WelfareSpec::Utilitarian());
  const Payoff coop = env->config().cooperation_reward;
  int consumed = 0;
  for (int s = 0; s < env->num_states(); ++s) {
    const Transition& tr = env->transition(s, util.plan->Act(*env, {s, 0}, {}, 0));
    if (tr.respawn_group >= 0) {
      ++consumed;
      EXPECT_EQ(tr.rewards, coop) << env->DescribeState(s);
    }
  }
  EXPECT_GT(consumed, 0);
}

int BlueDisagreementPickups(const Environment& env, const PlannedPolicy& planned) {
  int pickups = 0;
  const double dc = env.config().disagreement_reward;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    PlanAgent red(planned.plan, 0), blue(planned.plan, 1);
    for (const auto& step : Rollout(env, red, blue, 100, seed).steps) {
      if (step.rewards == Payoff{env.config().disagreement_penalty, dc}) {
        ++pickups;
      }
    }
  }
  return pickups;
}

TEST(BargainingCoinGameCalibrationTest, InequityAversePlanLetsBlueTakeDisagreementCoins) {
  // Sweep beta upward from 1 in steps of 0.25; the first value at which Blue
  // consumes blue disagreement coins is the configured default.
  double first = 0.0;
  for (double beta = 1.0; beta <= 3.0 && first == 0.0; beta += 0.25) {
    auto env = Environment::Make({.name = "ABCG", .inequity_beta = beta});
    if (BlueDisagreementPickups(*env, WelfareOptimalJointPolicy(*env, DefaultInequityAverse(*env))) > 0) {
      first = beta;
    }
  }
  EXPECT_DOUBLE_EQ(first, kBargainingCoinGameBeta);
  auto env = Environment::Make({.name = "ABCG"});
  EXPECT_DOUBLE_EQ(DefaultInequityAverse(*env).ia.beta, kBargainingCoinGameBeta);
  EXPECT_GT(BlueDisagreementPickups(*env, WelfareOptimalJointPolicy(*env, DefaultInequityAverse(*env))), 0);
}

TEST(QLearningTest, AsymmetricBosAgainstConstantB) {
  auto env = Environment::Matrix(AsymmetricBachOrStravinsky());
  ConstantAgent b(kB);
  const auto config = QLearningConfig::ForEnvironment(*env, 1);
  const TabularPolicy best = QLearningBestResponse(*env, 0, b, Objective::kMaximizeOwn, config);
  const TabularPolicy punish =
      QLearningBestResponse(*env, 0, b, Objective::kMinimizeOpponent, config);
  // States reachable against constant B: the start and (x, B) for either x.
  for (int s : {0, 1 + env->joint_index({kB, kB}), 1 + env->joint_index({kS, kB})}) {
    EXPECT_EQ(best.Mode(s), kB);
    EXPECT_EQ(punish.Mode(s), kS);
  }
  const Payoff v = EvaluateMarkovPolicies(*env, best, TabularPolicy::Constant(*env, kB), kGamma);
  EXPECT_NEAR(v.p1, 100, 1e-6);
}

TEST(QLearningTest, PrisonersDilemmaAgainstTitForTat) {
  auto env = Environment::Matrix(PrisonersDilemma());
  const TabularPolicy tft = TitForTat(*env);
  PolicyAgent opponent(tft, 3);
  const TabularPolicy learned = QLearningBestResponse(
      *env, 0, opponent, Objective::kMaximizeOwn, QLearningConfig::ForEnvironment(*env, 2));
  const double learned_value = EvaluateMarkovPolicies(*env, learned, tft, kGamma).p1;
  const double defect_value =
      EvaluateMarkovPolicies(*env, TabularPolicy::Constant(*env, 1), tft, kGamma).p1;
  EXPECT_GT(learned_value, defect_value);
}

// Q-learning reaches 95% of the exact best-response value, measured from the
// value of the worst pure response so that the ratio is scale-free.
void ExpectNearBestResponse(const Environment& env, const TabularPolicy& opponent_policy,
                            std::uint64_t seed) {
  PolicyAgent opponent(opponent_policy, seed);
  const TabularPolicy learned = QLearningBestResponse(
      env, 0, opponent, Objective::kMaximizeOwn, QLearningConfig::ForEnvironment(env, seed));
  const double learned_value = EvaluateMarkovPolicies(env, learned, opponent_policy, kGamma).p1;
  const BestResponse exact = ExactBestResponse(env, 0, opponent_policy, kGamma);
  EXPECT_LE(learned_value, exact.value + 1e-6) << env.name();
  EXPECT_GE(learned_value, exact.value - 0.05 * std::abs(exact.value) - 1e-6) << env.name();
}

TEST(QLearningTest, NearExactBestResponseOnBundledEnvironments) {
  for (const char* name : {"IPD", "IAsymBoS", "BoS", "PureCoordination", "ExtremeAsymBoS"}) {
    auto env = Environment::Make({.name = name});
    ExpectNearBestResponse(*env, TabularPolicy::Constant(*env, 0), 4);
    if (std::string(name) == "IPD") ExpectNearBestResponse(*env, TitForTat(*env), 5);
  }
  for (const char* name : {"CoinGame", "ABCG"}) {
    auto env = Environment::Make({.name = name});
    const PlannedPolicy util = WelfareOptimalJointPolicy(*env, WelfareSpec::Utilitarian());
    ExpectNearBestResponse(*env, SeatPolicy(*env, *util.plan, 1), 6);
  }
}

TEST(ExactBestResponseTest, MatchesEnumeration) {
  // Against tit-for-tat the best memory-1 responses are among the 32
  // deterministic memory-1 policies; enumerate them all.
  auto env = Environment::Matrix(PrisonersDilemma());
  const TabularPolicy tft = TitForTat(*env);
  double best = -INFINITY;
  for (int bits = 0; bits < 32; ++bits) {
    std::vector<int> actions(5);
    for (int s = 0; s < 5; ++s) actions[s] = (bits >> s) & 1;
    best = std::max(best, EvaluateMarkovPolicies(*env, TabularPolicy::Deterministic(*env, actions),
                                                 tft, kGamma)
                              .p1);
  }
  EXPECT_NEAR(ExactBestResponse(*env, 0, tft, kGamma).value, best, 1e-8);
  EXPECT_NEAR(best, -25.0, 1e-8);
}

TEST(MinimaxTest, Examples) {
  const MinimaxResult red = Minimax(AsymmetricBachOrStravinsky(), 0, kGamma);
  EXPECT_DOUBLE_EQ(red.per_step, 2);
  EXPECT_NEAR(red.discounted, 50, 1e-9);
  EXPECT_EQ(red.minimizing_action, kS);
  const MinimaxResult blue = Minimax(AsymmetricBachOrStravinsky(), 1, kGamma);
  EXPECT_DOUBLE_EQ(blue.per_step, 1);
  EXPECT_NEAR(blue.discounted, 25, 1e-9);
  EXPECT_EQ(blue.minimizing_action, kB);
  const MinimaxResult ipd = Minimax(PrisonersDilemma(), 0, kGamma);
  EXPECT_DOUBLE_EQ(ipd.per_step, -3);
  EXPECT_EQ(ipd.minimizing_action, 1);
}

TEST(MinimaxTest, BelowParetoOptimalEquilibria) {
  for (const MatrixGame& g :
       {BachOrStravinsky(), AsymmetricBachOrStravinsky(), ExtremeAsymmetricBachOrStravinsky()}) {
    for (int eq : PureNashEquilibria(g)) {
      if (!IsParetoOptimalOutcome(g, eq)) continue;
      for (int player = 0; player < 2; ++player) {
        EXPECT_LE(Minimax(g, player, kGamma).per_step, g.payoff(eq)[player]) << g.name();
      }
    }
  }
}

}  // namespace
}  // namespace bargain
