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

#include "bargain/environment.h"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace bargain {

namespace {

constexpr int kGridActions = 4;  // up, down, left, right

Cell Move(const Cell& c, int action, int n) {
  switch (action) {
    case 0: return {(c.row + n - 1) % n, c.col};
    case 1: return {(c.row + 1) % n, c.col};
    case 2: return {c.row, (c.col + n - 1) % n};
    default: return {c.row, (c.col + 1) % n};
  }
}

const char* ColorName(CoinColor c) {
  switch (c) {
    case CoinColor::kRed: return "red";
    case CoinColor::kBlue: return "blue";
    default: return "none";
  }
}

}  // namespace

std::uint64_t MixSeed(std::uint64_t a, std::uint64_t b) {
  // splitmix64 finalizer over a combined word.
  std::uint64_t z = a * 0x9E3779B97F4A7C15ULL + b + 0x632BE59BD9B4E019ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::shared_ptr<const Environment> Environment::Matrix(MatrixGame game, int episode_length,
                                                       double discount) {
  EnvConfig config;
  config.name = game.name();
  config.episode_length = episode_length;
  config.discount = discount;
  auto env = std::shared_ptr<Environment>(new Environment());
  env->config_ = config;
  env->episode_length_ = episode_length;
  env->discount_ = discount;
  env->BuildMatrix(std::move(game));
  return env;
}

std::shared_ptr<const Environment> Environment::Make(const EnvConfig& config) {
  if (!(config.discount >= 0.0 && config.discount < 1.0)) {
    throw std::invalid_argument("environment discount must lie in [0, 1)");
  }
  auto env = std::shared_ptr<Environment>(new Environment());
  env->config_ = config;
  env->discount_ = config.discount;
  const std::string& name = config.name;
  if (name == "CoinGame" || name == "ABCG") {
    if (config.grid_size < 2 || config.grid_size > 4) {
      throw std::invalid_argument("grid_size must be in [2, 4] for tabular gridworlds");
    }
    env->kind_ = name == "CoinGame" ? EnvKind::kCoinGame : EnvKind::kBargainingCoinGame;
    env->name_ = name;
    env->episode_length_ = config.episode_length > 0 ? config.episode_length : 100;
    env->BuildGrid();
    return env;
  }

  std::optional<MatrixGame> game;
  if (name == "IPD") game = PrisonersDilemma();
  else if (name == "IAsymBoS") game = AsymmetricBachOrStravinsky();
  else if (name == "BoS") game = BachOrStravinsky();
  else if (name == "PureCoordination") game = PureCoordination();
  else if (name == "ExtremeAsymBoS") game = ExtremeAsymmetricBachOrStravinsky();
  else throw std::invalid_argument("unknown environment '" + name + "'");

  if (!config.payoffs.empty()) {
    game = MatrixGame(game->name(), game->num_actions(), config.payoffs, game->action_names());
  }
  env->episode_length_ = config.episode_length > 0 ? config.episode_length : 20;
  env->BuildMatrix(std::move(*game));
  return env;
}

void Environment::BuildMatrix(MatrixGame game) {
  kind_ = EnvKind::kMatrix;
  name_ = game.name();
  num_actions_ = game.num_actions();
  const int joint = game.num_joint_actions();
  transitions_.assign(static_cast<std::size_t>(joint + 1) * joint, {});
  for (int s = 0; s <= joint; ++s) {
    for (int j = 0; j < joint; ++j) {
      transitions_[s * joint + j] = Transition{game.payoff(j), 1 + j, -1};
    }
  }
  initial_ = {0};
  game_ = std::move(game);
}

const MatrixGame& Environment::game() const {
  if (!game_) throw std::logic_error("environment '" + name_ + "' is not a matrix game");
  return *game_;
}

int Environment::Encode(const GridGame& grid) const {
  if (is_matrix()) throw std::logic_error("Encode: not a gridworld");
  const int n = config_.grid_size;
  const int cells = n * n;
  auto id = [n](const Cell& c) { return c.row * n + c.col; };
  const int red = id(grid.player_positions[0]);
  const int blue = id(grid.player_positions[1]);
  if (kind_ == EnvKind::kCoinGame) {
    if (grid.coins.size() != 1) throw std::invalid_argument("CoinGame: exactly one coin");
    const Coin& coin = grid.coins[0];
    const int color = coin.color == CoinColor::kRed ? 0 : 1;
    return ((red * cells + blue) * cells + id(coin.cell)) * 2 + color;
  }
  const Coin* coop = nullptr;
  const Coin* dis = nullptr;
  for (const Coin& c : grid.coins) {
    if (c.kind == CoinKind::kCooperation) coop = &c;
    if (c.kind == CoinKind::kDisagreement) dis = &c;
  }
  if (grid.coins.size() != 2 || coop == nullptr || dis == nullptr) {
    throw std::invalid_argument("ABCG: exactly one cooperation and one disagreement coin");
  }
  const int c = id(coop->cell);
  const int d = id(dis->cell);
  if (c == d) throw std::invalid_argument("ABCG: coins must occupy distinct cells");
  const int rank = d < c ? d : d - 1;
  const int color = dis->color == CoinColor::kRed ? 0 : 1;
  return (((red * cells + blue) * cells + c) * (cells - 1) + rank) * 2 + color;
}

GridGame Environment::Decode(const EnvState& state) const {
  if (is_matrix()) throw std::logic_error("Decode: not a gridworld");
  const int n = config_.grid_size;
  const int cells = n * n;
  auto cell = [n](int id) { return Cell{id / n, id % n}; };
  GridGame grid;
  grid.grid_size = n;
  grid.step_count = state.step;
  grid.episode_length = episode_length_;
  int rest = state.index;
  const CoinColor color = (rest % 2 == 0) ? CoinColor::kRed : CoinColor::kBlue;
  rest /= 2;
  if (kind_ == EnvKind::kCoinGame) {
    grid.coins.push_back({CoinKind::kPlain, color, cell(rest % cells)});
    rest /= cells;
  } else {
    const int rank = rest % (cells - 1);
    rest /= cells - 1;
    const int c = rest % cells;
    rest /= cells;
    const int d = rank < c ? rank : rank + 1;
    grid.coins.push_back({CoinKind::kCooperation, CoinColor::kNone, cell(c)});
    grid.coins.push_back({CoinKind::kDisagreement, color, cell(d)});
  }
  grid.player_positions[1] = cell(rest % cells);
  grid.player_positions[0] = cell(rest / cells);
  return grid;
}

void Environment::BuildGrid() {
  const int n = config_.grid_size;
  const int cells = n * n;
  num_actions_ = kGridActions;
  const bool bargaining = kind_ == EnvKind::kBargainingCoinGame;
  const int states = bargaining ? cells * cells * cells * (cells - 1) * 2 : cells * cells * cells * 2;
  auto cell = [n](int id) { return Cell{id / n, id % n}; };
  auto id = [n](const Cell& c) { return c.row * n + c.col; };

  // Respawn groups: fresh coin layouts on cells not occupied by a player.
  groups_.assign(cells * cells, {});
  for (int red = 0; red < cells; ++red) {
    for (int blue = 0; blue < cells; ++blue) {
      std::vector<int>& group = groups_[red * cells + blue];
      GridGame g;
      g.grid_size = n;
      g.player_positions = {cell(red), cell(blue)};
      for (int c = 0; c < cells; ++c) {
        if (c == red || c == blue) continue;
        if (!bargaining) {
          for (CoinColor color : {CoinColor::kRed, CoinColor::kBlue}) {
            g.coins = {{CoinKind::kPlain, color, cell(c)}};
            group.push_back(Encode(g));
          }
          continue;
        }
        for (int d = 0; d < cells; ++d) {
          if (d == c || d == red || d == blue) continue;
          for (CoinColor color : {CoinColor::kRed, CoinColor::kBlue}) {
            g.coins = {{CoinKind::kCooperation, CoinColor::kNone, cell(c)},
                       {CoinKind::kDisagreement, color, cell(d)}};
            group.push_back(Encode(g));
          }
        }
      }
      initial_.insert(initial_.end(), group.begin(), group.end());
    }
  }
  // Disagreement-only respawns keep the cooperation coin in place:
  // group cells^2 + (red * cells + blue) * cells + coop.
  const int dc_groups_base = static_cast<int>(groups_.size());
  if (bargaining && !config_.disagreement_respawns_all) {
    for (int red = 0; red < cells; ++red) {
      for (int blue = 0; blue < cells; ++blue) {
        for (int c = 0; c < cells; ++c) {
          std::vector<int> group;
          GridGame g;
          g.grid_size = n;
          g.player_positions = {cell(red), cell(blue)};
          for (int d = 0; d < cells; ++d) {
            if (d == c || d == red || d == blue) continue;
            for (CoinColor color : {CoinColor::kRed, CoinColor::kBlue}) {
              g.coins = {{CoinKind::kCooperation, CoinColor::kNone, cell(c)},
                         {CoinKind::kDisagreement, color, cell(d)}};
              group.push_back(Encode(g));
            }
          }
          groups_.push_back(std::move(group));
        }
      }
    }
  }

  const int joint = kGridActions * kGridActions;
  transitions_.assign(static_cast<std::size_t>(states) * joint, {});
  const Payoff coop_reward = config_.cooperation_reward;
  const double dc_reward = config_.disagreement_reward;
  const double dc_penalty = config_.disagreement_penalty;
  for (int s = 0; s < states; ++s) {
    const GridGame g = Decode({s, 0});
    for (int j = 0; j < joint; ++j) {
      const JointAction a = joint_action(j);
      GridGame next = g;
      next.player_positions[0] = Move(g.player_positions[0], a.a1, n);
      next.player_positions[1] = Move(g.player_positions[1], a.a2, n);
      const Cell& red = next.player_positions[0];
      const Cell& blue = next.player_positions[1];
      Transition t;
      bool consumed = false;
      bool dc_only = false;
      if (!bargaining) {
        const Coin& coin = g.coins[0];
        const bool red_on = red == coin.cell;
        const bool blue_on = blue == coin.cell;
        if (red_on) t.rewards.p1 += 1.0;
        if (blue_on) t.rewards.p2 += 1.0;
        if (blue_on && coin.color == CoinColor::kRed) t.rewards.p1 -= 2.0;
        if (red_on && coin.color == CoinColor::kBlue) t.rewards.p2 -= 2.0;
        consumed = red_on || blue_on;
      } else {
        const Coin& coop = g.coins[0];
        const Coin& dis = g.coins[1];
        if (red == coop.cell && blue == coop.cell) {
          t.rewards = coop_reward;
          consumed = true;
        } else if (dis.color == CoinColor::kRed && red == dis.cell) {
          t.rewards = {dc_reward, dc_penalty};
          consumed = true;
          dc_only = !config_.disagreement_respawns_all;
        } else if (dis.color == CoinColor::kBlue && blue == dis.cell) {
          t.rewards = {dc_penalty, dc_reward};
          consumed = true;
          dc_only = !config_.disagreement_respawns_all;
        }
      }
      if (dc_only) {
        t.respawn_group = dc_groups_base + (id(red) * cells + id(blue)) * cells + id(g.coins[0].cell);
      } else if (consumed) {
        t.respawn_group = id(red) * cells + id(blue);
      } else {
        t.next = Encode(next);
      }
      transitions_[static_cast<std::size_t>(s) * joint + j] = t;
    }
  }
}

const Transition& Environment::transition(int state, JointAction a) const {
  if (a.a1 < 0 || a.a1 >= num_actions_ || a.a2 < 0 || a.a2 >= num_actions_) {
    throw std::out_of_range(name_ + ": invalid joint action (" + std::to_string(a.a1) + ", " +
                            std::to_string(a.a2) + ")");
  }
  if (state < 0 || state >= num_states()) {
    throw std::out_of_range(name_ + ": invalid state index " + std::to_string(state));
  }
  return transitions_[static_cast<std::size_t>(state) * num_joint_actions() + joint_index(a)];
}

EnvState Environment::Reset(Rng& rng) const {
  if (initial_.size() == 1) return {initial_[0], 0};
  std::uniform_int_distribution<std::size_t> pick(0, initial_.size() - 1);
  return {initial_[pick(rng)], 0};
}

StepResult Environment::Advance(const EnvState& state, JointAction action, Rng& rng) const {
  const Transition& t = transition(state.index, action);
  StepResult result;
  result.rewards = t.rewards;
  result.state.step = state.step + 1;
  if (t.respawn_group >= 0) {
    const std::vector<int>& group = groups_[t.respawn_group];
    std::uniform_int_distribution<std::size_t> pick(0, group.size() - 1);
    result.state.index = group[pick(rng)];
  } else {
    result.state.index = t.next;
  }
  result.done = result.state.step >= episode_length_;
  return result;
}

StepResult Environment::Step(const EnvState& state, JointAction action, Rng& rng) const {
  if (state.step >= episode_length_) {
    throw std::logic_error(name_ + ": step called on a terminal state");
  }
  return Advance(state, action, rng);
}

std::string Environment::Fingerprint() const {
  std::ostringstream out;
  out.precision(17);
  out << name_ << "|kind=" << static_cast<int>(kind_) << "|actions=" << num_actions_
      << "|states=" << num_states() << "|gamma=" << discount_;
  if (game_) {
    out << "|payoffs=";
    for (int j = 0; j < game_->num_joint_actions(); ++j) {
      out << game_->payoff(j).p1 << "," << game_->payoff(j).p2 << ";";
    }
  } else {
    out << "|grid=" << config_.grid_size << "|coop=" << config_.cooperation_reward.p1 << ","
        << config_.cooperation_reward.p2 << "|dc=" << config_.disagreement_reward
        << "," << config_.disagreement_penalty
        << (config_.disagreement_respawns_all ? "" : "|dc_respawn=own");
  }
  return out.str();
}

std::string Environment::DescribeState(int state) const {
  std::ostringstream out;
  if (game_) {
    if (state == 0) return "start";
    const JointAction a = joint_action(state - 1);
    out << game_->action_names()[a.a1] << game_->action_names()[a.a2];
    return out.str();
  }
  const GridGame g = Decode({state, 0});
  out << "red(" << g.player_positions[0].row << "," << g.player_positions[0].col << ") blue("
      << g.player_positions[1].row << "," << g.player_positions[1].col << ")";
  for (const Coin& c : g.coins) {
    out << " " << (c.kind == CoinKind::kCooperation ? "CC" : c.kind == CoinKind::kDisagreement ? "DC" : "coin")
        << ":" << ColorName(c.color) << "(" << c.cell.row << "," << c.cell.col << ")";
  }
  return out.str();
}

Payoff Trajectory::DiscountedValue() const {
  Payoff value;
  double weight = 1.0;
  for (const TrajectoryStep& s : steps) {
    value = value + weight * s.rewards;
    weight *= discount;
  }
  return value;
}

Payoff Trajectory::AverageRewardValue(std::size_t from) const {
  if (from >= steps.size()) return {};
  Payoff total;
  for (std::size_t t = from; t < steps.size(); ++t) total = total + steps[t].rewards;
  const double scale = 1.0 / (static_cast<double>(steps.size() - from) * (1.0 - discount));
  return scale * total;
}

void RandomAgent::BeginEpisode(const Environment&, std::uint64_t public_seed) {
  rng_.seed(MixSeed(seed_base_, public_seed));
}

int RandomAgent::Act(const Environment& env, const EnvState&) {
  std::uniform_int_distribution<int> pick(0, env.num_actions() - 1);
  return pick(rng_);
}

Trajectory Rollout(const Environment& env, Agent& seat1, Agent& seat2, int length,
                   std::uint64_t seed) {
  if (length < 1) throw std::invalid_argument("Rollout: length must be at least 1");
  Rng rng(MixSeed(seed, 0x5EED));
  Trajectory trajectory;
  trajectory.discount = env.discount();
  trajectory.steps.reserve(length);
  seat1.BeginEpisode(env, seed);
  seat2.BeginEpisode(env, seed);
  EnvState state = env.Reset(rng);
  for (int t = 0; t < length; ++t) {
    const JointAction action{seat1.Act(env, state), seat2.Act(env, state)};
    const StepResult result = env.Advance(state, action, rng);
    seat1.Observe(env, state, action, result.rewards);
    seat2.Observe(env, state, action, result.rewards);
    trajectory.steps.push_back({state, action, result.rewards});
    state = result.state;
  }
  return trajectory;
}

}  // namespace bargain
