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

#ifndef BARGAIN_AMTFT_H_
#define BARGAIN_AMTFT_H_

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bargain/environment.h"
#include "bargain/planning.h"
#include "bargain/welfare.h"

namespace bargain {

struct AmTFTConfig {
  double debit_threshold = 0.5;
  // Punishment must cost the opponent alpha * debit; unset selects
  // DefaultAlpha for the environment.
  std::optional<double> alpha;
  int rollout_length = 20;
  int rollouts = 8;
  // Learn the punishment policy once per environment, welfare function and
  // seat instead of per run seed, so that opponent models in the recognition
  // library reproduce the punishments of independently trained runs.
  bool shared_punishment = true;
  PlanningOptions planning;
};

// ABCG's disagreement penalty lets one punishment step cost the opponent
// about six times what blocking the cooperation coin does, so punishments
// there are scaled up to last comparably long.
inline constexpr double kDefaultAlpha = 2.0;
inline constexpr double kBargainingCoinGameAlpha = 12.0;

double DefaultAlpha(const Environment& env);
double Alpha(const AmTFTConfig& config, const Environment& env);

// Training seed of the opponent models in the recognition library and of
// shared punishment policies.
inline constexpr std::uint64_t kLibrarySeed = 0x11B;

// Trained artefacts of amTFT(w) for one seat: the cooperative joint plan and a
// punishment policy that minimizes the opponent's reward against the plan's
// other seat (learned with 10% random deviations by that seat).
struct AmTFTPolicy {
  WelfareSpec welfare;
  int seat = 0;
  std::uint64_t seed = 0;
  std::shared_ptr<const JointPlan> plan;
  Payoff plan_value;  // exact for matrix games, NaN for gridworlds
  std::shared_ptr<const TabularPolicy> punishment;
};

// Plans the cooperative pair and learns the punishment policy. In IAsymBoS a
// utilitarian run whose self-play outcome looks egalitarian is discarded and
// retrained with the next seed; more than five discards throw
// std::runtime_error.
AmTFTPolicy TrainAmTFT(const Environment& env, const WelfareSpec& w, int seat,
                       std::uint64_t seed, const AmTFTConfig& config = {});

// Opponent's one-step gain from deviating: max(0, r_opp(own_coop, actual) -
// r_opp(own_coop, opponent_coop)).
double DebitIncrement(const Environment& env, const EnvState& state, int seat, int own_coop,
                      int opponent_actual, int opponent_coop);

// Smallest k <= rollout_length such that k punishment steps cost the opponent
// at least alpha * debit, averaged over `rollouts` simulations of the
// punishment policy against the opponent's cooperative seat; rollout_length
// if none does. Returns 0 for a zero debit.
int PunishmentLength(const Environment& env, const AmTFTPolicy& policy, const EnvState& state,
                     const PlanContext& context, std::uint64_t public_seed, double debit,
                     std::uint64_t seed, const AmTFTConfig& config = {});

enum class Phase { kCooperate, kPunish };

enum class VerdictKind { kPending, kNoDisagreement, kDisagreement, kUnrecognized };

struct Verdict {
  VerdictKind kind = VerdictKind::kPending;
  int welfare = -1;  // library index for kDisagreement
  friend bool operator==(const Verdict&, const Verdict&) = default;
};

std::string VerdictName(const Verdict& verdict, std::span<const WelfareSpec> library);

// One row per step: the phase used to choose the action and the state after
// observing the outcome.
struct TraceEntry {
  int step = 0;
  Phase phase = Phase::kCooperate;
  int action = 0;
  int cooperative_action = 0;
  int punishment_action = 0;
  double debit = 0.0;
  int punish_remaining = 0;
  std::string welfare;
  Verdict verdict;
};

// amTFT(w): follow the cooperative plan, accumulate the opponent's deviation
// gains as debit, and punish for a proportional number of steps once the debit
// exceeds the threshold. The debit is reset when punishment ends.
class AmTFTAgent : public Agent {
 public:
  AmTFTAgent(AmTFTPolicy policy, AmTFTConfig config = {});

  void BeginEpisode(const Environment& env, std::uint64_t public_seed) override;
  int Act(const Environment& env, const EnvState& state) override;
  void Observe(const Environment& env, const EnvState& state, JointAction action,
               const Payoff& rewards) override;

  // Observation hook for wrappers: skips debit accrual when `exempt`.
  void ObserveStep(const Environment& env, const EnvState& state, JointAction action,
                   const Payoff& rewards, bool exempt);
  // Switches to another trained policy for the same seat, resetting the debit
  // and returning to cooperation.
  void SwitchPolicy(const AmTFTPolicy& policy, const PlanContext& context);

  const AmTFTPolicy& policy() const { return policy_; }
  const PlanContext& context() const { return context_; }
  Phase phase() const { return phase_; }
  double debit() const { return debit_; }
  int punish_remaining() const { return punish_remaining_; }
  int punishments() const { return punishments_; }
  std::vector<TraceEntry>& trace() { return trace_; }
  const std::vector<TraceEntry>& trace() const { return trace_; }

 private:
  AmTFTPolicy policy_;
  AmTFTConfig config_;
  PlanContext context_;
  std::uint64_t public_seed_ = 0;
  Phase phase_ = Phase::kCooperate;
  double debit_ = 0.0;
  int punish_remaining_ = 0;
  int punishments_ = 0;
  std::vector<TraceEntry> trace_;
};

// Fraction of the last M opponent actions matching each library member's
// cooperative action decides the verdict: disagreement(w') if the strictly
// best match is some w' != current reaching rho, no_disagreement if current
// reaches rho, otherwise unrecognized. Ties prefer current, then members of
// `own_set`, then library order. `window[t][k]` is true iff step t matched
// member k. Fewer than M rows give kPending.
Verdict DetectNormativeDisagreement(std::span<const std::vector<bool>> window,
                                    std::span<const WelfareSpec> library, int current,
                                    std::span<const int> own_set, int M, double rho);

enum class InitialWelfare { kUniform, kPreferred };

struct NormAdaptiveConfig {
  AmTFTConfig amtft;
  int window = 10;
  double rho = 0.9;
  int dwell = 5;
  InitialWelfare initial = InitialWelfare::kUniform;
  // Resampling weights over the welfare set; empty means uniform.
  std::vector<double> resample_weights;
  // Welfare functions used to recognize the opponent's convention; empty
  // selects DefaultWelfareLibrary.
  std::vector<WelfareSpec> library;
};

// util, egal, nash and IA on matrix games; util and IA on gridworlds.
std::vector<WelfareSpec> DefaultWelfareLibrary(const Environment& env);

// amTFT(W) artefacts: one amTFT policy per member of W (W[0] is the preferred
// member) and, for each convention of the recognition library (which always
// contains W), an amTFT policy for the opponent's seat. The latter are run as
// shadows of the opponent to predict its actions, punishments included.
struct NormAdaptivePolicy {
  std::vector<AmTFTPolicy> members;
  std::vector<WelfareSpec> library;
  std::vector<AmTFTPolicy> library_norms;
  std::vector<int> member_library_index;
  int seat = 0;
};

NormAdaptivePolicy TrainNormAdaptive(const Environment& env, const std::vector<WelfareSpec>& W,
                                     int seat, std::uint64_t seed,
                                     const NormAdaptiveConfig& config = {});

// amTFT(W). Each step first checks for normative disagreement; a recognized
// disagreement with a convention in W, once the dwell time has elapsed,
// resamples the current welfare function and resets the debit. Debit accrues
// from all other deviations.
class NormAdaptiveAgent : public Agent {
 public:
  NormAdaptiveAgent(std::shared_ptr<const NormAdaptivePolicy> policy, std::uint64_t seed,
                    NormAdaptiveConfig config = {});

  void BeginEpisode(const Environment& env, std::uint64_t public_seed) override;
  int Act(const Environment& env, const EnvState& state) override;
  void Observe(const Environment& env, const EnvState& state, JointAction action,
               const Payoff& rewards) override;

  const WelfareSpec& current_welfare() const;
  int current_member() const { return current_; }
  int resamples() const { return resamples_; }
  const AmTFTAgent& inner() const { return *inner_; }
  const std::vector<TraceEntry>& trace() const { return inner_->trace(); }

 private:
  int SampleMember();

  std::shared_ptr<const NormAdaptivePolicy> policy_;
  std::uint64_t seed_;
  NormAdaptiveConfig config_;
  Rng rng_;
  std::uint64_t public_seed_ = 0;
  int current_ = 0;
  int resamples_ = 0;
  int since_resample_ = 0;
  std::unique_ptr<AmTFTAgent> inner_;
  std::vector<AmTFTAgent> shadows_;
  std::vector<std::vector<bool>> window_;
  std::vector<int> own_set_;
};

}  // namespace bargain

#endif  // BARGAIN_AMTFT_H_
