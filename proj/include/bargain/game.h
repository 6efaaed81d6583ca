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

#ifndef BARGAIN_GAME_H_
#define BARGAIN_GAME_H_

#include <array>
#include <string>
#include <vector>

namespace bargain {

// A pair of per-player quantities: stage rewards or discounted values.
struct Payoff {
  double p1 = 0.0;
  double p2 = 0.0;

  double operator[](int seat) const { return seat == 0 ? p1 : p2; }
  double& operator[](int seat) { return seat == 0 ? p1 : p2; }
  Payoff swapped() const { return {p2, p1}; }

  friend bool operator==(const Payoff&, const Payoff&) = default;
  friend Payoff operator+(Payoff a, const Payoff& b) { return {a.p1 + b.p1, a.p2 + b.p2}; }
  friend Payoff operator-(Payoff a, const Payoff& b) { return {a.p1 - b.p1, a.p2 - b.p2}; }
  friend Payoff operator*(double s, const Payoff& a) { return {s * a.p1, s * a.p2}; }
};

struct JointAction {
  int a1 = 0;
  int a2 = 0;

  int operator[](int seat) const { return seat == 0 ? a1 : a2; }
  friend bool operator==(const JointAction&, const JointAction&) = default;
};

// Taxonomy flags of a stage game. is_bargaining_problem implies the other two
// positive flags.
struct GameClass {
  bool is_mixed_motive = false;
  bool is_coordination_problem = false;
  bool is_bargaining_problem = false;
  bool is_symmetric = false;
};

// Two-player normal-form stage game with num_actions actions per player.
class MatrixGame {
 public:
  MatrixGame(std::string name, int num_actions, std::vector<Payoff> payoffs,
             std::vector<std::string> action_names = {});

  const std::string& name() const { return name_; }
  int num_actions() const { return num_actions_; }
  int num_joint_actions() const { return num_actions_ * num_actions_; }
  const std::vector<std::string>& action_names() const { return action_names_; }

  const Payoff& payoff(JointAction a) const;
  const Payoff& payoff(int joint_index) const;
  double reward(int seat, JointAction a) const { return payoff(a)[seat]; }

  int joint_index(JointAction a) const { return a.a1 * num_actions_ + a.a2; }
  JointAction joint_action(int index) const {
    return {index / num_actions_, index % num_actions_};
  }

  // Player-swapped game: the new row player is the old column player.
  MatrixGame transposed() const;

  // True if action/joint index is in range.
  bool valid(JointAction a) const;

 private:
  std::string name_;
  int num_actions_;
  std::vector<Payoff> payoffs_;
  std::vector<std::string> action_names_;
};

// Prisoner's dilemma stage payoffs from the row player's perspective.
struct PrisonersDilemmaPayoffs {
  double temptation = 0.0;
  double reward = -1.0;
  double punishment = -3.0;
  double sucker = -4.0;
};

MatrixGame PureCoordination();
MatrixGame BachOrStravinsky();
MatrixGame AsymmetricBachOrStravinsky();
// Equilibria (15, 10) and (1, 11).
MatrixGame ExtremeAsymmetricBachOrStravinsky();
MatrixGame PrisonersDilemma(const PrisonersDilemmaPayoffs& p = {});

// Pure-strategy Nash equilibria of the stage game, as joint indices.
std::vector<int> PureNashEquilibria(const MatrixGame& game);

// True if no pure outcome weakly dominates `a` with one strict improvement.
bool IsParetoOptimalOutcome(const MatrixGame& game, int joint_index);

GameClass ClassifyGame(const MatrixGame& game);

}  // namespace bargain

#endif  // BARGAIN_GAME_H_
