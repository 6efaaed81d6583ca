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

#ifndef BARGAIN_ENVIRONMENT_H_
#define BARGAIN_ENVIRONMENT_H_

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "bargain/game.h"

namespace bargain {

using Rng = std::mt19937_64;

enum class EnvKind { kMatrix, kCoinGame, kBargainingCoinGame };

enum class CoinKind { kCooperation, kDisagreement, kPlain };
enum class CoinColor { kRed, kBlue, kNone };

struct Cell {
  int row = 0;
  int col = 0;
  friend bool operator==(const Cell&, const Cell&) = default;
};

struct Coin {
  CoinKind kind = CoinKind::kPlain;
  CoinColor color = CoinColor::kNone;
  Cell cell;
};

// Decoded gridworld configuration. Red is seat 0, Blue is seat 1.
struct GridGame {
  int grid_size = 3;
  std::array<Cell, 2> player_positions;
  std::vector<Coin> coins;
  int step_count = 0;
  int episode_length = 100;
};

// Environment-independent state handle: a dense state index plus the step
// counter. Both players observe the full state.
struct EnvState {
  int index = 0;
  int step = 0;
  friend bool operator==(const EnvState&, const EnvState&) = default;
};

// Result of one joint action. The successor is either `next` (deterministic)
// or uniform over respawn group `respawn_group`.
struct Transition {
  Payoff rewards;
  int next = -1;
  int respawn_group = -1;
};

struct StepResult {
  EnvState state;
  Payoff rewards;
  bool done = false;
};

struct EnvConfig {
  std::string name = "IAsymBoS";
  std::vector<Payoff> payoffs;  // optional override for matrix games
  int grid_size = 3;
  int episode_length = 0;  // 0 selects the environment default
  double discount = 0.96;
  std::uint64_t seed = 0;
  // Bargaining coin game rewards.
  Payoff cooperation_reward{3.0, 1.0};
  double disagreement_reward = 2.0;
  // Reward to the other player when a disagreement coin is consumed.
  double disagreement_penalty = -4.0;
  // If false, consuming a disagreement coin respawns only that coin.
  bool disagreement_respawns_all = true;
  // Inequity-aversion beta for this environment; unset selects the calibrated
  // default (see DefaultInequityAverse).
  std::optional<double> inequity_beta;
};

// Immutable two-player environment with a finite, enumerated state space.
// Matrix games use state 0 as the start and 1 + joint index as "previous joint
// action" states. Gridworlds enumerate every player/coin configuration.
class Environment {
 public:
  static std::shared_ptr<const Environment> Make(const EnvConfig& config);
  static std::shared_ptr<const Environment> Matrix(MatrixGame game, int episode_length = 20,
                                                   double discount = 0.96);

  const std::string& name() const { return name_; }
  EnvKind kind() const { return kind_; }
  bool is_matrix() const { return kind_ == EnvKind::kMatrix; }
  const MatrixGame& game() const;  // matrix environments only
  const EnvConfig& config() const { return config_; }

  int num_actions() const { return num_actions_; }
  int num_joint_actions() const { return num_actions_ * num_actions_; }
  int num_states() const { return static_cast<int>(transitions_.size()) / num_joint_actions(); }
  int episode_length() const { return episode_length_; }
  double discount() const { return discount_; }

  int joint_index(JointAction a) const { return a.a1 * num_actions_ + a.a2; }
  JointAction joint_action(int index) const { return {index / num_actions_, index % num_actions_}; }

  const Transition& transition(int state, JointAction a) const;
  std::span<const int> respawn_group(int group) const { return groups_.at(group); }
  int num_respawn_groups() const { return static_cast<int>(groups_.size()); }
  std::span<const int> initial_states() const { return initial_; }

  EnvState Reset(Rng& rng) const;
  // Throws std::out_of_range on an invalid action and std::logic_error on a
  // terminal state.
  StepResult Step(const EnvState& state, JointAction action, Rng& rng) const;
  // Step without the terminal check; iterated games may run past the
  // nominal episode length.
  StepResult Advance(const EnvState& state, JointAction action, Rng& rng) const;

  // Gridworld environments only.
  GridGame Decode(const EnvState& state) const;
  int Encode(const GridGame& grid) const;

  // Stable description of the dynamics; policies carry it so they cannot be
  // loaded into a different environment.
  std::string Fingerprint() const;
  std::string DescribeState(int state) const;

 private:
  Environment() = default;
  void BuildMatrix(MatrixGame game);
  void BuildGrid();

  std::string name_;
  EnvKind kind_ = EnvKind::kMatrix;
  EnvConfig config_;
  std::optional<MatrixGame> game_;
  int num_actions_ = 0;
  int episode_length_ = 20;
  double discount_ = 0.96;
  std::vector<Transition> transitions_;  // [state * joint + joint_index]
  std::vector<std::vector<int>> groups_;
  std::vector<int> initial_;
};

// One recorded step.
struct TrajectoryStep {
  EnvState state;
  JointAction action;
  Payoff rewards;
};

struct Trajectory {
  std::vector<TrajectoryStep> steps;
  double discount = 0.96;

  // Sum over t of discount^t * r_t per player.
  Payoff DiscountedValue() const;
  // Mean per-step reward scaled by 1 / (1 - discount): the discounted value of
  // a stationary stream with the same average.
  Payoff AverageRewardValue(std::size_t from = 0) const;
};

// A decision maker occupying one seat. Agents may keep per-episode state.
class Agent {
 public:
  virtual ~Agent() = default;
  // `public_seed` is shared by both seats of a match; agents may derive
  // correlated randomness from it.
  virtual void BeginEpisode(const Environment& env, std::uint64_t public_seed) {
    (void)env;
    (void)public_seed;
  }
  virtual int Act(const Environment& env, const EnvState& state) = 0;
  virtual void Observe(const Environment& env, const EnvState& state, JointAction action,
                       const Payoff& rewards) {
    (void)env;
    (void)state;
    (void)action;
    (void)rewards;
  }
};

// Plays a fixed action forever.
class ConstantAgent : public Agent {
 public:
  explicit ConstantAgent(int action) : action_(action) {}
  int Act(const Environment&, const EnvState&) override { return action_; }

 private:
  int action_;
};

// Uniformly random actions.
class RandomAgent : public Agent {
 public:
  explicit RandomAgent(std::uint64_t seed) : seed_base_(seed), rng_(seed) {}
  void BeginEpisode(const Environment& env, std::uint64_t public_seed) override;
  int Act(const Environment& env, const EnvState& state) override;

 private:
  std::uint64_t seed_base_ = 0;
  Rng rng_;
};

// Runs exactly `length` steps from a fresh state, ignoring the episode
// length. Reproducible for a fixed seed.
Trajectory Rollout(const Environment& env, Agent& seat1, Agent& seat2, int length,
                   std::uint64_t seed);

// Mixes two 64-bit values into a seed; used to derive per-job seeds.
std::uint64_t MixSeed(std::uint64_t a, std::uint64_t b);

}  // namespace bargain

#endif  // BARGAIN_ENVIRONMENT_H_
