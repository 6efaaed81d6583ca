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

#include "bargain/game.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace bargain {

MatrixGame::MatrixGame(std::string name, int num_actions, std::vector<Payoff> payoffs,
                       std::vector<std::string> action_names)
    : name_(std::move(name)),
      num_actions_(num_actions),
      payoffs_(std::move(payoffs)),
      action_names_(std::move(action_names)) {
  if (num_actions_ < 1) throw std::invalid_argument("MatrixGame: need at least one action");
  if (static_cast<int>(payoffs_.size()) != num_actions_ * num_actions_) {
    throw std::invalid_argument("MatrixGame '" + name_ + "': expected " +
                                std::to_string(num_actions_ * num_actions_) +
                                " payoff entries, got " + std::to_string(payoffs_.size()));
  }
  for (const Payoff& p : payoffs_) {
    if (!std::isfinite(p.p1) || !std::isfinite(p.p2)) {
      throw std::invalid_argument("MatrixGame '" + name_ + "': non-finite payoff");
    }
  }
  if (action_names_.empty()) {
    for (int a = 0; a < num_actions_; ++a) action_names_.push_back(std::to_string(a));
  }
  if (static_cast<int>(action_names_.size()) != num_actions_) {
    throw std::invalid_argument("MatrixGame '" + name_ + "': action name count mismatch");
  }
}

bool MatrixGame::valid(JointAction a) const {
  return a.a1 >= 0 && a.a1 < num_actions_ && a.a2 >= 0 && a.a2 < num_actions_;
}

const Payoff& MatrixGame::payoff(JointAction a) const {
  if (!valid(a)) {
    throw std::out_of_range("MatrixGame '" + name_ + "': invalid joint action (" +
                            std::to_string(a.a1) + ", " + std::to_string(a.a2) + ")");
  }
  return payoffs_[joint_index(a)];
}

const Payoff& MatrixGame::payoff(int joint_index) const {
  if (joint_index < 0 || joint_index >= num_joint_actions()) {
    throw std::out_of_range("MatrixGame '" + name_ + "': invalid joint index");
  }
  return payoffs_[joint_index];
}

MatrixGame MatrixGame::transposed() const {
  std::vector<Payoff> swapped(payoffs_.size());
  for (int a1 = 0; a1 < num_actions_; ++a1) {
    for (int a2 = 0; a2 < num_actions_; ++a2) {
      swapped[a2 * num_actions_ + a1] = payoffs_[a1 * num_actions_ + a2].swapped();
    }
  }
  return MatrixGame(name_ + "^T", num_actions_, std::move(swapped), action_names_);
}

MatrixGame PureCoordination() {
  return MatrixGame("PureCoordination", 2, {{1, 1}, {0, 0}, {0, 0}, {1, 1}}, {"B", "S"});
}

MatrixGame BachOrStravinsky() {
  return MatrixGame("BoS", 2, {{3, 2}, {0, 0}, {0, 0}, {2, 3}}, {"B", "S"});
}

MatrixGame AsymmetricBachOrStravinsky() {
  return MatrixGame("IAsymBoS", 2, {{4, 1}, {0, 0}, {0, 0}, {2, 2}}, {"B", "S"});
}

MatrixGame ExtremeAsymmetricBachOrStravinsky() {
  return MatrixGame("ExtremeAsymBoS", 2, {{15, 10}, {0, 0}, {0, 0}, {1, 11}}, {"B", "S"});
}

MatrixGame PrisonersDilemma(const PrisonersDilemmaPayoffs& p) {
  return MatrixGame("IPD", 2,
                    {{p.reward, p.reward},
                     {p.sucker, p.temptation},
                     {p.temptation, p.sucker},
                     {p.punishment, p.punishment}},
                    {"C", "D"});
}

std::vector<int> PureNashEquilibria(const MatrixGame& game) {
  const int n = game.num_actions();
  std::vector<int> equilibria;
  for (int a1 = 0; a1 < n; ++a1) {
    for (int a2 = 0; a2 < n; ++a2) {
      const Payoff& p = game.payoff({a1, a2});
      bool stable = true;
      for (int x = 0; x < n && stable; ++x) {
        if (game.reward(0, {x, a2}) > p.p1) stable = false;
        if (game.reward(1, {a1, x}) > p.p2) stable = false;
      }
      if (stable) equilibria.push_back(game.joint_index({a1, a2}));
    }
  }
  return equilibria;
}

namespace {

bool Dominates(const Payoff& a, const Payoff& b) {
  return a.p1 >= b.p1 && a.p2 >= b.p2 && (a.p1 > b.p1 || a.p2 > b.p2);
}

}  // namespace

bool IsParetoOptimalOutcome(const MatrixGame& game, int joint_index) {
  const Payoff& p = game.payoff(joint_index);
  for (int j = 0; j < game.num_joint_actions(); ++j) {
    if (Dominates(game.payoff(j), p)) return false;
  }
  return true;
}

GameClass ClassifyGame(const MatrixGame& game) {
  GameClass result;
  const int m = game.num_joint_actions();

  for (int x = 0; x < m && !result.is_mixed_motive; ++x) {
    for (int y = 0; y < m; ++y) {
      const Payoff& px = game.payoff(x);
      const Payoff& py = game.payoff(y);
      if (px.p1 > py.p1 && px.p2 < py.p2) {
        result.is_mixed_motive = true;
        break;
      }
    }
  }

  std::vector<int> pareto_equilibria;
  for (int e : PureNashEquilibria(game)) {
    if (IsParetoOptimalOutcome(game, e)) pareto_equilibria.push_back(e);
  }
  // Distinct payoff profiles only; duplicated outcomes are one agreement.
  std::vector<Payoff> agreements;
  for (int e : pareto_equilibria) {
    const Payoff& p = game.payoff(e);
    if (std::find(agreements.begin(), agreements.end(), p) == agreements.end()) {
      agreements.push_back(p);
    }
  }
  result.is_coordination_problem = pareto_equilibria.size() >= 2;

  if (result.is_coordination_problem) {
    for (const Payoff& x : agreements) {
      for (const Payoff& y : agreements) {
        if (x.p1 > y.p1 && x.p2 < y.p2) result.is_bargaining_problem = true;
      }
    }
  }

  // Symmetric iff the set of attainable pure profiles is closed under swapping.
  result.is_symmetric = true;
  for (int x = 0; x < m && result.is_symmetric; ++x) {
    const Payoff swapped = game.payoff(x).swapped();
    bool found = false;
    for (int y = 0; y < m; ++y) {
      const Payoff& p = game.payoff(y);
      if (std::abs(p.p1 - swapped.p1) < 1e-12 && std::abs(p.p2 - swapped.p2) < 1e-12) {
        found = true;
        break;
      }
    }
    result.is_symmetric = found;
  }
  return result;
}

}  // namespace bargain
