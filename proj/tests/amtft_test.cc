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

#include "bargain/amtft.h"

#include <cmath>
#include <map>
#include <random>

#include "gtest/gtest.h"

namespace bargain {
namespace {

constexpr int kB = 0, kS = 1;
constexpr int kC = 0, kD = 1;

std::shared_ptr<const Environment> Make(const std::string& name) { return Environment::Make({.name = name}); }

WelfareSpec Util(const Environment& env) { return DefaultWelfare(env, WelfareKind::kUtilitarian); }
WelfareSpec Ia(const Environment& env) { return DefaultWelfare(env, WelfareKind::kInequityAverse); }

std::shared_ptr<const NormAdaptivePolicy> Adaptive(const Environment& env,
                                                   std::vector<WelfareSpec> W, int seat,
                                                   std::uint64_t seed = 1) {
  return std::make_shared<NormAdaptivePolicy>(TrainNormAdaptive(env, W, seat, seed));
}

// States a Red agent reaches when Blue always plays `blue`.
std::vector<int> ReachableAgainst(const Environment& env, int blue) {
  return {0, 1 + env.joint_index({kB, blue}), 1 + env.joint_index({kS, blue})};
}

TEST(TrainAmTFTTest, AsymmetricBosPolicies) {
  auto env = Make("IAsymBoS");
  const AmTFTPolicy util = TrainAmTFT(*env, Util(*env), 0, 3);
  const AmTFTPolicy ia = TrainAmTFT(*env, Ia(*env), 0, 3);
  for (int t = 0; t < 6; ++t) {
    EXPECT_EQ(util.plan->Act(*env, {0, t}, {}, 9), (JointAction{kB, kB}));
    EXPECT_EQ(ia.plan->Act(*env, {0, t}, {}, 9), (JointAction{kS, kS}));
  }
  for (int s : ReachableAgainst(*env, kB)) EXPECT_EQ(util.punishment->Mode(s), kS);
  for (int s : ReachableAgainst(*env, kS)) EXPECT_EQ(ia.punishment->Mode(s), kB);
  EXPECT_THROW(TrainAmTFT(*env, Util(*env), 2, 3), std::invalid_argument);
}

TEST(TrainAmTFTTest, SelfPlayReproducesWelfareOptimum) {
  for (const char* name : {"IAsymBoS", "BoS", "IPD", "PureCoordination", "ExtremeAsymBoS"}) {
    auto env = Make(name);
    const FeasibleSet set = MakeFeasibleSet(env->game(), env->discount());
    for (WelfareKind kind : {WelfareKind::kUtilitarian, WelfareKind::kInequityAverse}) {
      const WelfareSpec w = DefaultWelfare(*env, kind);
      AmTFTAgent red(TrainAmTFT(*env, w, 0, 5)), blue(TrainAmTFT(*env, w, 1, 5));
      // Coin-phased plans attain the optimum on average over both phases:
      // keep one value per distinct opening joint action.
      std::map<int, Payoff> by_opening;
      for (std::uint64_t seed = 0; seed < 32; ++seed) {
        const Trajectory t = Rollout(*env, red, blue, 800, seed);
        by_opening[env->joint_index(t.steps[0].action)] = t.DiscountedValue();
        EXPECT_EQ(red.punishments() + blue.punishments(), 0);
      }
      Payoff v;
      for (const auto& [opening, value] : by_opening) v = v + (1.0 / by_opening.size()) * value;
      const WelfareOptimum optimum = FindWelfareOptimum(w, set);
      EXPECT_NEAR(EvaluateWelfare(w, v, set), optimum.welfare, 1e-6) << name << " " << w.Label();
    }
  }
}

TEST(DebitTest, Examples) {
  auto bos = Make("IAsymBoS");
  EXPECT_DOUBLE_EQ(DebitIncrement(*bos, {0, 0}, 0, kB, kB, kB), 0.0);
  EXPECT_DOUBLE_EQ(DebitIncrement(*bos, {0, 0}, 0, kB, kS, kB), 0.0);
  auto ipd = Make("IPD");
  EXPECT_DOUBLE_EQ(DebitIncrement(*ipd, {0, 0}, 0, kC, kD, kC), 1.0);
  EXPECT_DOUBLE_EQ(DebitIncrement(*ipd, {0, 0}, 1, kC, kD, kC), 1.0);
}

TEST(PunishmentLengthTest, Examples) {
  auto env = Make("IAsymBoS");
  const AmTFTPolicy util = TrainAmTFT(*env, Util(*env), 0, 3);
  EXPECT_EQ(PunishmentLength(*env, util, {0, 0}, {}, 0, 0.0, 1), 0);
  // Punishing with S against B costs Blue 1 per step.
  EXPECT_EQ(PunishmentLength(*env, util, {0, 0}, {}, 0, 1.0, 1), 2);
  // Never enough within the rollout: capped.
  EXPECT_EQ(PunishmentLength(*env, util, {0, 0}, {}, 0, 100.0, 1), 20);
}

// Oracle: in a matrix game with constant cooperative play, k steps of the
// punishment action cost the opponent k times the per-step loss.
TEST(PunishmentLengthTest, ProportionalOnRandomGames) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> payoff(-5.0, 5.0), debit(0.01, 20.0);
  int checked = 0;
  for (int trial = 0; trial < 60; ++trial) {
    std::vector<Payoff> payoffs(4);
    for (Payoff& p : payoffs) p = {payoff(rng), payoff(rng)};
    auto env = Environment::Matrix(MatrixGame("random", 2, payoffs, {"a", "b"}));
    const AmTFTPolicy policy = TrainAmTFT(*env, WelfareSpec::Utilitarian(), 0, trial);
    const auto* plan = dynamic_cast<const SchedulePlan*>(policy.plan.get());
    if (plan == nullptr || plan->schedule().cycle.size() != 1) continue;
    const JointAction coop = env->joint_action(plan->schedule().cycle[0]);
    // Punishment is learned against the stationary plan; read it in the
    // state the plan keeps revisiting.
    const int state = 1 + plan->schedule().cycle[0];
    const int punish = policy.punishment->Mode(state);
    if (policy.punishment->Mode(1 + env->joint_index({punish, coop.a2})) != punish) continue;
    const double loss = env->game().payoff(coop).p2 - env->game().payoff({punish, coop.a2}).p2;
    const AmTFTConfig config;
    const double alpha = Alpha(config, *env);
    for (int i = 0; i < 5; ++i) {
      const double d = debit(rng);
      const int k = PunishmentLength(*env, policy, {state, 3}, {}, 0, d, 9, config);
      if (loss <= 0.0 || loss * config.rollout_length < alpha * d) {
        EXPECT_EQ(k, config.rollout_length);
        continue;
      }
      EXPECT_GE(k * loss, alpha * d - 1e-9);
      EXPECT_LT((k - 1) * loss, alpha * d + 1e-9);
      EXPECT_LE(k * loss, alpha * d + loss + 1e-9);
      EXPECT_GE(PunishmentLength(*env, policy, {state, 3}, {}, 0, 2 * d, 9, config), k);
      ++checked;
    }
  }
  EXPECT_GT(checked, 60);
}

TEST(AmTFTAgentTest, SelfPlayNeverPunishes) {
  auto env = Make("IAsymBoS");
  AmTFTAgent red(TrainAmTFT(*env, Util(*env), 0, 1)), blue(TrainAmTFT(*env, Util(*env), 1, 1));
  const Trajectory t = Rollout(*env, red, blue, 20, 4);
  for (const auto& step : t.steps) EXPECT_EQ(step.action, (JointAction{kB, kB}));
  for (const auto& entry : red.trace()) {
    EXPECT_EQ(entry.phase, Phase::kCooperate);
    EXPECT_DOUBLE_EQ(entry.debit, 0.0);
  }
}

TEST(AmTFTAgentTest, PunishesAlwaysDefect) {
  auto env = Make("IPD");
  AmTFTAgent red(TrainAmTFT(*env, Util(*env), 0, 1));
  ConstantAgent defect(kD);
  const Trajectory t = Rollout(*env, red, defect, 200, 2);
  int first = -1;
  for (std::size_t i = 0; i < red.trace().size() && first < 0; ++i) {
    if (red.trace()[i].phase == Phase::kPunish) first = static_cast<int>(i);
  }
  ASSERT_GE(first, 0);
  EXPECT_LE(first, 3);
  double blue = 0.0;
  for (const auto& step : t.steps) blue += step.rewards.p2;
  EXPECT_LT(blue / t.steps.size(), env->game().payoff({kC, kC}).p2);
}

TEST(AmTFTAgentTest, DeterministicGivenSeed) {
  auto env = Make("ABCG");
  const AmTFTPolicy util = TrainAmTFT(*env, Util(*env), 0, 1);
  auto run = [&] {
    AmTFTAgent red(util);
    RandomAgent blue(5);
    const Trajectory t = Rollout(*env, red, blue, 100, 8);
    std::vector<std::pair<int, double>> out;
    for (const auto& e : red.trace()) out.emplace_back(e.action, e.debit);
    return out;
  };
  EXPECT_EQ(run(), run());
}

// Replays a recorded trace: the plan's action is recomputed from the
// trajectory's rewards and the punishment action from the policy table.
void ExpectCompliant(const Environment& env, const AmTFTPolicy& policy, const Trajectory& t,
                     const std::vector<TraceEntry>& trace, std::uint64_t public_seed) {
  ASSERT_EQ(trace.size(), t.steps.size());
  PlanContext context;
  int punished = 0;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const EnvState& state = t.steps[i].state;
    const JointAction coop = policy.plan->Act(env, state, context, public_seed);
    const int own = policy.seat == 0 ? t.steps[i].action.a1 : t.steps[i].action.a2;
    if (trace[i].phase == Phase::kCooperate) {
      EXPECT_EQ(own, policy.seat == 0 ? coop.a1 : coop.a2) << "step " << i;
    } else {
      EXPECT_EQ(own, policy.punishment->Mode(state.index)) << "step " << i;
      ++punished;
    }
    policy.plan->Update(context, t.steps[i].rewards);
  }
  EXPECT_GT(punished, 0);
}

TEST(AmTFTAgentTest, TracesComplyWithTheNorm) {
  for (const char* name : {"IPD", "ABCG"}) {
    auto env = Make(name);
    for (WelfareKind kind : {WelfareKind::kUtilitarian, WelfareKind::kInequityAverse}) {
      const AmTFTPolicy policy = TrainAmTFT(*env, DefaultWelfare(*env, kind), 0, 2);
      for (std::uint64_t seed = 0; seed < 3; ++seed) {
        AmTFTAgent red(policy);
        RandomAgent blue(seed);
        const Trajectory t = Rollout(*env, red, blue, 100, seed);
        ExpectCompliant(*env, policy, t, red.trace(), seed);
      }
    }
  }
}

TEST(DetectNormativeDisagreementTest, Examples) {
  auto env = Make("IAsymBoS");
  const std::vector<WelfareSpec> library = DefaultWelfareLibrary(*env);
  ASSERT_EQ(library.size(), 4u);
  const int util = 0, egal = 1, nash = 2, ia = 3;
  // Opponent actions S on every step: matches egal and IA, and nash on
  // alternate steps.
  std::vector<std::vector<bool>> window;
  for (int t = 0; t < 10; ++t) window.push_back({false, true, t % 2 == 1, true});
  const std::vector<int> flexible = {util, ia}, rigid = {util};
  EXPECT_EQ(DetectNormativeDisagreement(window, library, util, flexible, 10, 0.9),
            (Verdict{VerdictKind::kDisagreement, ia}));
  EXPECT_EQ(DetectNormativeDisagreement(window, library, util, rigid, 10, 0.9),
            (Verdict{VerdictKind::kDisagreement, egal}));
  EXPECT_EQ(DetectNormativeDisagreement(window, library, ia, flexible, 10, 0.9),
            (Verdict{VerdictKind::kNoDisagreement, -1}));
  EXPECT_EQ(DetectNormativeDisagreement(window, library, nash, rigid, 10, 0.9).kind,
            VerdictKind::kDisagreement);
  EXPECT_EQ(DetectNormativeDisagreement(std::span(window).first(9), library, util, flexible, 10, 0.9).kind,
            VerdictKind::kPending);
  window[0] = {true, false, false, false};
  window[1] = {true, false, true, false};
  EXPECT_EQ(DetectNormativeDisagreement(window, library, util, flexible, 10, 0.9).kind,
            VerdictKind::kUnrecognized);
  EXPECT_THROW(DetectNormativeDisagreement(window, {}, 0, flexible, 10, 0.9), std::invalid_argument);
}

// Oracle: exact probability, over the 2^10 equally likely opponent action
// sequences, that no convention matches at least 9 of 10 actions.
double ExactUnrecognized(const std::vector<std::vector<int>>& patterns) {
  int recognized = 0;
  for (int bits = 0; bits < 1024; ++bits) {
    bool any = false;
    for (const auto& pattern : patterns) {
      int matches = 0;
      for (int t = 0; t < 10; ++t) matches += ((bits >> t) & 1) == pattern[t];
      any = any || matches >= 9;
    }
    recognized += any;
  }
  return 1.0 - recognized / 1024.0;
}

TEST(DetectNormativeDisagreementTest, RandomOpponentIsUnrecognized) {
  auto env = Make("IAsymBoS");
  const std::vector<WelfareSpec> full = DefaultWelfareLibrary(*env);
  const std::vector<WelfareSpec> pair = {full[0], full[3]};
  std::vector<int> all_b(10, kB), all_s(10, kS), alternating(10);
  for (int t = 0; t < 10; ++t) alternating[t] = t % 2;
  const double exact_pair = ExactUnrecognized({all_b, all_s});
  const double exact_full = ExactUnrecognized({all_b, all_s, alternating, all_s});
  EXPECT_NEAR(exact_pair, 1.0 - 22.0 / 1024.0, 1e-12);
  EXPECT_GE(exact_pair, 0.97);
  EXPECT_NEAR(exact_full, 1.0 - 33.0 / 1024.0, 1e-12);

  std::mt19937_64 rng(3);
  const int trials = 20000;
  int pair_hits = 0, full_hits = 0;
  for (int trial = 0; trial < trials; ++trial) {
    std::vector<std::vector<bool>> pw, fw;
    for (int t = 0; t < 10; ++t) {
      const int a = static_cast<int>(rng() & 1);
      pw.push_back({a == kB, a == kS});
      fw.push_back({a == kB, a == kS, a == alternating[t], a == kS});
    }
    pair_hits += DetectNormativeDisagreement(pw, pair, 0, std::vector<int>{0}, 10, 0.9).kind ==
                 VerdictKind::kUnrecognized;
    full_hits += DetectNormativeDisagreement(fw, full, 0, std::vector<int>{0}, 10, 0.9).kind ==
                 VerdictKind::kUnrecognized;
  }
  auto se = [&](double p) { return std::sqrt(p * (1 - p) / trials); };
  EXPECT_NEAR(pair_hits / static_cast<double>(trials), exact_pair, 4 * se(exact_pair));
  EXPECT_NEAR(full_hits / static_cast<double>(trials), exact_full, 4 * se(exact_full));
}

TEST(NormAdaptiveAgentTest, SingletonMatchesPlainAmTFT) {
  for (const char* name : {"IPD", "IAsymBoS", "ABCG"}) {
    auto env = Make(name);
    auto red_w = Adaptive(*env, {Util(*env)}, 0), blue_w = Adaptive(*env, {Util(*env)}, 1);
    NormAdaptiveAgent red(red_w, 1), blue(blue_w, 2);
    AmTFTAgent plain_red(red_w->members[0]), plain_blue(blue_w->members[0]);
    const Trajectory a = Rollout(*env, red, blue, 100, 6);
    const Trajectory b = Rollout(*env, plain_red, plain_blue, 100, 6);
    for (std::size_t i = 0; i < a.steps.size(); ++i) {
      EXPECT_EQ(a.steps[i].action, b.steps[i].action) << name;
      EXPECT_EQ(red.trace()[i].phase, plain_red.trace()[i].phase) << name;
      EXPECT_DOUBLE_EQ(red.trace()[i].debit, plain_red.trace()[i].debit) << name;
    }
  }
}

TEST(NormAdaptiveAgentTest, FlexibleSeatAdoptsRigidConvention) {
  auto env = Make("IAsymBoS");
  auto red_w = Adaptive(*env, {Util(*env)}, 0);
  auto blue_w = Adaptive(*env, {Ia(*env), Util(*env)}, 1);
  NormAdaptiveConfig preferred;
  preferred.initial = InitialWelfare::kPreferred;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    NormAdaptiveAgent red(red_w, seed), blue(blue_w, seed + 100, preferred);
    const Trajectory t = Rollout(*env, red, blue, 200, seed);
    EXPECT_EQ(blue.trace().front().welfare, "inequity_averse");
    EXPECT_GE(blue.resamples(), 1);
    EXPECT_EQ(blue.current_welfare().kind, WelfareKind::kUtilitarian);
    for (std::size_t i = 150; i < t.steps.size(); ++i) EXPECT_EQ(t.steps[i].action, (JointAction{kB, kB}));
  }
}

TEST(NormAdaptiveAgentTest, DisjointSetsMiscoordinate) {
  auto env = Make("IAsymBoS");
  auto red_w = Adaptive(*env, {Util(*env)}, 0), blue_w = Adaptive(*env, {Ia(*env)}, 1);
  const FeasibleSet set = MakeFeasibleSet(env->game(), env->discount());
  const std::vector<WelfareSpec> W = {Util(*env), Ia(*env)};
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    NormAdaptiveAgent red(red_w, seed), blue(blue_w, seed);
    const Payoff v = Rollout(*env, red, blue, 200, seed).AverageRewardValue();
    EXPECT_LT(NormalizedScore(v, W, DisagreementProfile(*env), set).normalized_score, 0.05);
    EXPECT_EQ(red.resamples() + blue.resamples(), 0);
  }
}

TEST(NormAdaptiveAgentTest, AbsorbsOnceConventionsAgree) {
  auto env = Make("IAsymBoS");
  auto red_w = Adaptive(*env, {Util(*env), Ia(*env)}, 0);
  auto blue_w = Adaptive(*env, {Util(*env), Ia(*env)}, 1);
  int agreed_within_50 = 0;
  const int trials = 200;
  for (int trial = 0; trial < trials; ++trial) {
    NormAdaptiveAgent red(red_w, 2 * trial), blue(blue_w, 2 * trial + 1);
    Rollout(*env, red, blue, 1200, trial);
    const auto& rt = red.trace();
    const auto& bt = blue.trace();
    std::size_t agree = rt.size();
    for (std::size_t i = 0; i < rt.size() && agree == rt.size(); ++i) {
      if (rt[i].welfare == bt[i].welfare) agree = i;
    }
    if (agree == rt.size()) continue;
    int rounds = 0;
    for (std::size_t i = 1; i <= agree; ++i) rounds += rt[i].welfare != rt[i - 1].welfare || bt[i].welfare != bt[i - 1].welfare;
    for (std::size_t i = agree; i < rt.size(); ++i) {
      ASSERT_EQ(rt[i].welfare, rt[agree].welfare);
      ASSERT_EQ(bt[i].welfare, bt[agree].welfare);
      EXPECT_NE(rt[i].verdict.kind, VerdictKind::kDisagreement);
    }
    agreed_within_50 += rounds <= 50;
  }
  EXPECT_GE(agreed_within_50, 0.99 * trials);
}

TEST(NormAdaptiveAgentTest, ForcingHistoriesSelectEachNorm) {
  auto env = Make("IAsymBoS");
  auto red_w = Adaptive(*env, {Util(*env), Ia(*env)}, 0);
  NormAdaptiveConfig preferred;
  preferred.initial = InitialWelfare::kPreferred;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    NormAdaptiveAgent red(red_w, seed, preferred);
    ConstantAgent s(kS), b(kB);
    Rollout(*env, red, s, 300, seed);
    EXPECT_EQ(red.current_welfare().kind, WelfareKind::kInequityAverse);
    Rollout(*env, red, b, 300, seed);
    EXPECT_EQ(red.current_welfare().kind, WelfareKind::kUtilitarian);
  }
}

TEST(NormAdaptiveAgentTest, Errors) {
  auto env = Make("IAsymBoS");
  EXPECT_THROW(TrainNormAdaptive(*env, {}, 0, 1), std::invalid_argument);
  EXPECT_THROW(TrainNormAdaptive(*env, {Util(*env), Util(*env)}, 0, 1), std::invalid_argument);
  EXPECT_THROW(NormAdaptiveAgent(nullptr, 1), std::invalid_argument);
  auto policy = Adaptive(*env, {Util(*env), Ia(*env)}, 0);
  NormAdaptiveConfig bad;
  bad.resample_weights = {1.0};
  EXPECT_THROW(NormAdaptiveAgent(policy, 1, bad), std::invalid_argument);
  NormAdaptiveAgent agent(policy, 1);
  EXPECT_THROW(agent.BeginEpisode(*Make("IPD"), 0), std::invalid_argument);
}

}  // namespace
}  // namespace bargain
