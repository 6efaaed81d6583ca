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

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <random>
#include <sstream>
#include <stdexcept>
#include <tuple>

namespace bargain {
namespace {

constexpr int kMaxDiscards = 5;
// Deviation rate of the opponent model used to learn punishments, so that
// states reached only after a deviation are visited.
constexpr double kPunishmentExploration = 0.1;
constexpr double kMatchTolerance = 1e-12;

int Seat(JointAction a, int seat) { return seat == 0 ? a.a1 : a.a2; }

JointAction Seated(int seat, int own, int other) {
  return seat == 0 ? JointAction{own, other} : JointAction{other, own};
}

// Plays a seat of a joint plan with occasional uniformly random deviations.
class DeviatingPlanAgent : public Agent {
 public:
  DeviatingPlanAgent(std::shared_ptr<const JointPlan> plan, int seat)
      : inner_(std::move(plan), seat) {}
  void BeginEpisode(const Environment& env, std::uint64_t public_seed) override {
    inner_.BeginEpisode(env, public_seed);
    rng_.seed(MixSeed(public_seed, 0xDE71A7E));
  }
  int Act(const Environment& env, const EnvState& state) override {
    const int planned = inner_.Act(env, state);
    if (std::uniform_real_distribution<double>(0.0, 1.0)(rng_) >= kPunishmentExploration) return planned;
    return std::uniform_int_distribution<int>(0, env.num_actions() - 1)(rng_);
  }
  void Observe(const Environment& env, const EnvState& state, JointAction action,
               const Payoff& rewards) override {
    inner_.Observe(env, state, action, rewards);
  }

 private:
  PlanAgent inner_;
  Rng rng_;
};

// Punishment policies are the expensive part of training on gridworlds and
// are shared between agents trained with the same seed.
std::shared_ptr<const TabularPolicy> LearnPunishment(const Environment& env,
                                                     const PlannedPolicy& planned, int seat,
                                                     std::uint64_t seed) {
  static std::mutex mutex;
  static std::map<std::tuple<std::string, std::string, int, std::uint64_t>,
                  std::shared_ptr<const TabularPolicy>>
      cache;
  const auto key = std::make_tuple(env.Fingerprint(), planned.plan->welfare().ToString(), seat, seed);
  {
    std::lock_guard<std::mutex> lock(mutex);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }
  DeviatingPlanAgent opponent(planned.plan, 1 - seat);
  auto policy = std::make_shared<const TabularPolicy>(
      QLearningBestResponse(env, seat, opponent, Objective::kMinimizeOpponent,
                            QLearningConfig::ForEnvironment(env, MixSeed(seed, 0xB0B + seat))));
  std::lock_guard<std::mutex> lock(mutex);
  return cache.emplace(key, std::move(policy)).first->second;
}

// A utilitarian IAsymBoS plan must not settle on the egalitarian outcome.
bool Discard(const Environment& env, const WelfareSpec& w, const PlannedPolicy& planned) {
  if (!env.is_matrix() || env.name() != "IAsymBoS" || w.kind != WelfareKind::kUtilitarian) {
    return false;
  }
  const FeasibleSet set = MakeFeasibleSet(env.game(), env.discount());
  const std::vector<LabeledProfile> optima = {
      {"utilitarian", FindWelfareOptimum(WelfareSpec::Utilitarian(), set).profile},
      {"egalitarian",
       FindWelfareOptimum(DefaultWelfare(env, WelfareKind::kEgalitarian), set).profile}};
  return ClassifyConvention(planned.value, optima) == "egalitarian";
}

}  // namespace

double DefaultAlpha(const Environment& env) {
  return env.kind() == EnvKind::kBargainingCoinGame ? kBargainingCoinGameAlpha : kDefaultAlpha;
}

double Alpha(const AmTFTConfig& config, const Environment& env) {
  const double alpha = config.alpha.value_or(DefaultAlpha(env));
  if (!(alpha > 0.0)) throw std::invalid_argument("amTFT: alpha must be positive");
  return alpha;
}

AmTFTPolicy TrainAmTFT(const Environment& env, const WelfareSpec& w, int seat,
                       std::uint64_t seed, const AmTFTConfig& config) {
  if (seat != 0 && seat != 1) throw std::invalid_argument("TrainAmTFT: seat must be 0 or 1");
  for (int attempt = 0; attempt <= kMaxDiscards; ++attempt) {
    const std::uint64_t run_seed = seed + static_cast<std::uint64_t>(attempt);
    const PlannedPolicy planned = WelfareOptimalJointPolicy(env, w, config.planning);
    if (Discard(env, w, planned)) continue;
    AmTFTPolicy policy;
    policy.welfare = w;
    policy.seat = seat;
    policy.seed = run_seed;
    policy.plan = planned.plan;
    policy.plan_value = planned.value;
    policy.punishment =
        LearnPunishment(env, planned, seat, config.shared_punishment ? kLibrarySeed : run_seed);
    return policy;
  }
  throw std::runtime_error("TrainAmTFT: " + w.Label() + " run discarded " +
                           std::to_string(kMaxDiscards + 1) +
                           " times for settling on the egalitarian outcome");
}

double DebitIncrement(const Environment& env, const EnvState& state, int seat, int own_coop,
                      int opponent_actual, int opponent_coop) {
  const int other = 1 - seat;
  const double actual = env.transition(state.index, Seated(seat, own_coop, opponent_actual)).rewards[other];
  const double coop = env.transition(state.index, Seated(seat, own_coop, opponent_coop)).rewards[other];
  return std::max(0.0, actual - coop);
}

int PunishmentLength(const Environment& env, const AmTFTPolicy& policy, const EnvState& state,
                     const PlanContext& context, std::uint64_t public_seed, double debit,
                     std::uint64_t seed, const AmTFTConfig& config) {
  if (debit <= 0.0) return 0;
  if (config.rollouts < 1 || config.rollout_length < 1) {
    throw std::invalid_argument("PunishmentLength: rollouts and length must be positive");
  }
  const int seat = policy.seat, other = 1 - seat;
  const int length = config.rollout_length;
  std::vector<double> loss(length, 0.0);
  for (int r = 0; r < config.rollouts; ++r) {
    const std::uint64_t rollout_seed = MixSeed(seed, static_cast<std::uint64_t>(r));
    auto simulate = [&](bool punish) {
      std::vector<double> rewards(length);
      Rng rng(rollout_seed);
      EnvState s = state;
      PlanContext ctx = context;
      for (int t = 0; t < length; ++t) {
        JointAction a = policy.plan->Act(env, s, ctx, public_seed);
        if (punish) a = Seated(seat, policy.punishment->Mode(s.index), Seat(a, other));
        const StepResult step = env.Advance(s, a, rng);
        rewards[t] = step.rewards[other];
        policy.plan->Update(ctx, step.rewards);
        s = step.state;
      }
      return rewards;
    };
    const std::vector<double> baseline = simulate(false), punished = simulate(true);
    for (int t = 0; t < length; ++t) loss[t] += baseline[t] - punished[t];
  }
  const double target = Alpha(config, env) * debit;
  double cumulative = 0.0;
  for (int k = 1; k <= length; ++k) {
    cumulative += loss[k - 1] / config.rollouts;
    if (cumulative >= target) return k;
  }
  return length;
}

std::string VerdictName(const Verdict& verdict, std::span<const WelfareSpec> library) {
  switch (verdict.kind) {
    case VerdictKind::kPending: return "pending";
    case VerdictKind::kNoDisagreement: return "no_disagreement";
    case VerdictKind::kUnrecognized: return "unrecognized";
    case VerdictKind::kDisagreement:
      return "disagreement(" + library[static_cast<std::size_t>(verdict.welfare)].Label() + ")";
  }
  return "?";
}

// ------------------------------- amTFT(w) -----------------------------------

AmTFTAgent::AmTFTAgent(AmTFTPolicy policy, AmTFTConfig config)
    : policy_(std::move(policy)), config_(std::move(config)) {
  if (!policy_.plan || !policy_.punishment) throw std::invalid_argument("AmTFTAgent: untrained policy");
}

void AmTFTAgent::BeginEpisode(const Environment& env, std::uint64_t public_seed) {
  if (env.Fingerprint() != policy_.plan->env_fingerprint()) {
    throw std::invalid_argument("AmTFTAgent: policy was trained for a different environment");
  }
  policy_.punishment->CheckCompatible(env);
  public_seed_ = public_seed;
  context_ = {};
  phase_ = Phase::kCooperate;
  debit_ = 0.0;
  punish_remaining_ = 0;
  punishments_ = 0;
  trace_.clear();
}

int AmTFTAgent::Act(const Environment& env, const EnvState& state) {
  if (phase_ == Phase::kCooperate && debit_ > config_.debit_threshold) {
    // Seeded by the match only, so that opponent models reproduce the length.
    const std::uint64_t seed = MixSeed(public_seed_, static_cast<std::uint64_t>(state.step));
    punish_remaining_ = PunishmentLength(env, policy_, state, context_, public_seed_, debit_, seed, config_);
    phase_ = Phase::kPunish;
    ++punishments_;
  }
  TraceEntry entry;
  entry.step = state.step;
  entry.phase = phase_;
  entry.cooperative_action = Seat(policy_.plan->Act(env, state, context_, public_seed_), policy_.seat);
  entry.punishment_action = policy_.punishment->Mode(state.index);
  entry.action = phase_ == Phase::kPunish ? entry.punishment_action : entry.cooperative_action;
  entry.welfare = policy_.welfare.Label();
  trace_.push_back(entry);
  return entry.action;
}

void AmTFTAgent::Observe(const Environment& env, const EnvState& state, JointAction action,
                         const Payoff& rewards) {
  ObserveStep(env, state, action, rewards, false);
}

void AmTFTAgent::ObserveStep(const Environment& env, const EnvState& state, JointAction action,
                             const Payoff& rewards, bool exempt) {
  const int seat = policy_.seat, other = 1 - seat;
  if (phase_ == Phase::kCooperate) {
    if (!exempt) {
      const JointAction coop = policy_.plan->Act(env, state, context_, public_seed_);
      debit_ += DebitIncrement(env, state, seat, Seat(coop, seat), Seat(action, other), Seat(coop, other));
    }
  } else if (--punish_remaining_ <= 0) {
    punish_remaining_ = 0;
    phase_ = Phase::kCooperate;
    debit_ = 0.0;
  }
  policy_.plan->Update(context_, rewards);
  if (!trace_.empty()) {
    trace_.back().debit = debit_;
    trace_.back().punish_remaining = punish_remaining_;
  }
}

void AmTFTAgent::SwitchPolicy(const AmTFTPolicy& policy, const PlanContext& context) {
  if (policy.seat != policy_.seat) throw std::invalid_argument("AmTFTAgent: seat mismatch");
  policy_ = policy;
  context_ = context;
  phase_ = Phase::kCooperate;
  debit_ = 0.0;
  punish_remaining_ = 0;
}

// ------------------------------- amTFT(W) -----------------------------------

Verdict DetectNormativeDisagreement(std::span<const std::vector<bool>> window,
                                    std::span<const WelfareSpec> library, int current,
                                    std::span<const int> own_set, int M, double rho) {
  if (library.empty()) throw std::invalid_argument("DetectNormativeDisagreement: empty library");
  if (M < 1) throw std::invalid_argument("DetectNormativeDisagreement: window must be positive");
  const int n = static_cast<int>(library.size());
  if (current < 0 || current >= n) throw std::invalid_argument("DetectNormativeDisagreement: bad current");
  if (static_cast<int>(window.size()) < M) return {VerdictKind::kPending, -1};
  std::vector<double> fraction(n, 0.0);
  for (std::size_t t = window.size() - M; t < window.size(); ++t) {
    if (static_cast<int>(window[t].size()) != n) {
      throw std::invalid_argument("DetectNormativeDisagreement: window row size mismatch");
    }
    for (int k = 0; k < n; ++k) fraction[k] += window[t][k] ? 1.0 / M : 0.0;
  }
  const double best = *std::max_element(fraction.begin(), fraction.end());
  auto tied = [&](int k) { return fraction[k] >= best - kMatchTolerance; };
  if (fraction[current] >= rho - kMatchTolerance && tied(current)) {
    return {VerdictKind::kNoDisagreement, -1};
  }
  if (best >= rho - kMatchTolerance) {
    for (int k : own_set) {
      if (k != current && tied(k)) return {VerdictKind::kDisagreement, k};
    }
    for (int k = 0; k < n; ++k) {
      if (k != current && tied(k)) return {VerdictKind::kDisagreement, k};
    }
  }
  return {VerdictKind::kUnrecognized, -1};
}

std::vector<WelfareSpec> DefaultWelfareLibrary(const Environment& env) {
  if (!env.is_matrix()) {
    return {DefaultWelfare(env, WelfareKind::kUtilitarian),
            DefaultWelfare(env, WelfareKind::kInequityAverse)};
  }
  return {DefaultWelfare(env, WelfareKind::kUtilitarian),
          DefaultWelfare(env, WelfareKind::kEgalitarian), DefaultWelfare(env, WelfareKind::kNash),
          DefaultWelfare(env, WelfareKind::kInequityAverse)};
}

NormAdaptivePolicy TrainNormAdaptive(const Environment& env, const std::vector<WelfareSpec>& W,
                                     int seat, std::uint64_t seed,
                                     const NormAdaptiveConfig& config) {
  if (W.empty()) throw std::invalid_argument("TrainNormAdaptive: empty welfare set");
  NormAdaptivePolicy policy;
  policy.seat = seat;
  policy.library = config.library.empty() ? DefaultWelfareLibrary(env) : config.library;
  for (const WelfareSpec& w : W) {
    auto it = std::find(policy.library.begin(), policy.library.end(), w);
    if (it == policy.library.end()) it = policy.library.insert(policy.library.end(), w);
    const int index = static_cast<int>(it - policy.library.begin());
    if (std::find(policy.member_library_index.begin(), policy.member_library_index.end(), index) !=
        policy.member_library_index.end()) {
      throw std::invalid_argument("TrainNormAdaptive: duplicate welfare function " + w.Label());
    }
    policy.member_library_index.push_back(index);
    policy.members.push_back(TrainAmTFT(env, w, seat, seed, config.amtft));
  }
  for (const WelfareSpec& w : policy.library) {
    policy.library_norms.push_back(TrainAmTFT(env, w, 1 - seat, kLibrarySeed, config.amtft));
  }
  return policy;
}

NormAdaptiveAgent::NormAdaptiveAgent(std::shared_ptr<const NormAdaptivePolicy> policy,
                                     std::uint64_t seed, NormAdaptiveConfig config)
    : policy_(std::move(policy)), seed_(seed), config_(std::move(config)) {
  if (!policy_ || policy_->members.empty()) throw std::invalid_argument("NormAdaptiveAgent: untrained policy");
  if (!config_.resample_weights.empty() && config_.resample_weights.size() != policy_->members.size()) {
    throw std::invalid_argument("NormAdaptiveAgent: one resampling weight per welfare function");
  }
  if (config_.window < 1 || config_.dwell < 0 || !(config_.rho > 0.0 && config_.rho <= 1.0)) {
    throw std::invalid_argument("NormAdaptiveAgent: bad detection parameters");
  }
  own_set_ = policy_->member_library_index;
  inner_ = std::make_unique<AmTFTAgent>(policy_->members[0], config_.amtft);
}

const WelfareSpec& NormAdaptiveAgent::current_welfare() const {
  return policy_->members[static_cast<std::size_t>(current_)].welfare;
}

int NormAdaptiveAgent::SampleMember() {
  const std::size_t n = policy_->members.size();
  if (config_.resample_weights.empty()) {
    return std::uniform_int_distribution<int>(0, static_cast<int>(n) - 1)(rng_);
  }
  std::discrete_distribution<int> pick(config_.resample_weights.begin(), config_.resample_weights.end());
  return pick(rng_);
}

void NormAdaptiveAgent::BeginEpisode(const Environment& env, std::uint64_t public_seed) {
  public_seed_ = public_seed;
  rng_.seed(MixSeed(seed_, public_seed));
  current_ = config_.initial == InitialWelfare::kPreferred ? 0 : SampleMember();
  resamples_ = 0;
  since_resample_ = 0;
  window_.clear();
  shadows_.clear();
  for (const AmTFTPolicy& norm : policy_->library_norms) {
    shadows_.emplace_back(norm, config_.amtft);
    shadows_.back().BeginEpisode(env, public_seed);
  }
  inner_ = std::make_unique<AmTFTAgent>(policy_->members[static_cast<std::size_t>(current_)], config_.amtft);
  inner_->BeginEpisode(env, public_seed);
}

int NormAdaptiveAgent::Act(const Environment& env, const EnvState& state) {
  return inner_->Act(env, state);
}

void NormAdaptiveAgent::Observe(const Environment& env, const EnvState& state, JointAction action,
                                const Payoff& rewards) {
  const int other = 1 - policy_->seat;
  const std::size_t n = policy_->library.size();
  std::vector<bool> row(n);
  std::vector<int> predicted(n);
  for (std::size_t k = 0; k < n; ++k) {
    predicted[k] = shadows_[k].Act(env, state);
    row[k] = predicted[k] == Seat(action, other);
    shadows_[k].Observe(env, state, action, rewards);
  }
  // Steps on which every convention prescribes the same action say nothing
  // about which one the opponent follows.
  const bool informative = std::adjacent_find(predicted.begin(), predicted.end(),
                                              std::not_equal_to<>()) != predicted.end();
  if (informative) {
    window_.push_back(row);
    if (static_cast<int>(window_.size()) > config_.window) window_.erase(window_.begin());
  }
  const int current_index = policy_->member_library_index[static_cast<std::size_t>(current_)];
  const Verdict verdict = DetectNormativeDisagreement(window_, policy_->library, current_index,
                                                      own_set_, config_.window, config_.rho);
  auto in_own_set = [&](int k) {
    return std::find(own_set_.begin(), own_set_.end(), k) != own_set_.end();
  };
  bool exempt = verdict.kind == VerdictKind::kDisagreement && in_own_set(verdict.welfare);
  if (verdict.kind == VerdictKind::kPending) {
    for (int k : own_set_) exempt = exempt || (k != current_index && row[static_cast<std::size_t>(k)]);
  }
  inner_->ObserveStep(env, state, action, rewards, exempt);
  if (!inner_->trace().empty()) inner_->trace().back().verdict = verdict;
  ++since_resample_;
  if (verdict.kind == VerdictKind::kDisagreement && in_own_set(verdict.welfare) &&
      since_resample_ >= config_.dwell) {
    current_ = SampleMember();
    ++resamples_;
    since_resample_ = 0;
    window_.clear();
    const auto& member = policy_->members[static_cast<std::size_t>(current_)];
    const auto& shadow = shadows_[static_cast<std::size_t>(
        policy_->member_library_index[static_cast<std::size_t>(current_)])];
    inner_->SwitchPolicy(member, shadow.context());
  }
}

}  // namespace bargain
