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

#ifndef BARGAIN_LOLA_H_
#define BARGAIN_LOLA_H_

#include <cstdint>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "bargain/environment.h"
#include "bargain/game.h"

namespace bargain {

// Iterated-game policy conditioned on the previous joint action. Parameters
// are laid out as [initial logits (N), one row of N logits per previous joint
// action (N^2 rows)]; action probabilities are the softmax of a row.
class Memory1Policy {
 public:
  Memory1Policy(int num_actions, Eigen::VectorXd params);

  static int NumParams(int num_actions) {
    return num_actions + num_actions * num_actions * num_actions;
  }
  static Memory1Policy Uniform(int num_actions);
  static Memory1Policy RandomNormal(int num_actions, Rng& rng, double stddev = 1.0);
  // Plays `action` in every history with probability 1 up to rounding.
  static Memory1Policy Constant(int num_actions, int action, double margin = 60.0);

  int num_actions() const { return num_actions_; }
  const Eigen::VectorXd& params() const { return params_; }

  Eigen::VectorXd InitialProbabilities() const;
  Eigen::VectorXd ConditionalProbabilities(int previous_joint) const;

 private:
  int num_actions_;
  Eigen::VectorXd params_;
};

using PolicyPair = std::pair<Memory1Policy, Memory1Policy>;

// Markov chain over "previous joint action" states induced by a policy pair.
struct InducedChain {
  Eigen::VectorXd initial;      // distribution of the first joint action
  Eigen::MatrixXd transition;   // [previous joint][next joint]
  Eigen::VectorXd reward1;      // per joint action
  Eigen::VectorXd reward2;
};

InducedChain BuildInducedChain(const Memory1Policy& p1, const Memory1Policy& p2,
                               const MatrixGame& game);

// V_i = p0 (I - gamma P)^{-1} r_i, by linear solve.
Payoff ExactValue(const Memory1Policy& p1, const Memory1Policy& p2, const MatrixGame& game,
                  double gamma);

// First derivatives of both values with respect to both parameter vectors
// and the mixed second derivatives d/dtheta1 d/dtheta2 (rows index theta1).
struct ValueDerivatives {
  Eigen::VectorXd dv1_dtheta1;
  Eigen::VectorXd dv1_dtheta2;
  Eigen::VectorXd dv2_dtheta1;
  Eigen::VectorXd dv2_dtheta2;
  Eigen::MatrixXd d2v1_dtheta1_dtheta2;
  Eigen::MatrixXd d2v2_dtheta1_dtheta2;
};

ValueDerivatives ComputeValueDerivatives(const Memory1Policy& p1, const Memory1Policy& p2,
                                         const MatrixGame& game, double gamma);

// Simultaneous LOLA update with step size `lr` and shaping coefficient `eta`.
// Throws std::runtime_error if a derivative is non-finite.
PolicyPair LolaStep(const Memory1Policy& p1, const Memory1Policy& p2, const MatrixGame& game,
                    double gamma, double lr, double eta);

// With two actions, softmax over two logits is a sigmoid of their difference,
// and a logit step of lr moves that difference by 2*lr (the shaping term picks
// up another factor of 2). The defaults below are the two-logit equivalents of
// a sigmoid learner with step 1, shaping 1 and unit-variance initialization.
struct LolaConfig {
  double gamma = 0.96;
  double lr = 0.5;
  double eta = 2.0;
  int iterations = 2000;
  double tolerance = 1e-6;
  double init_stddev = 0.70710678118654752;
  std::uint64_t seed = 0;
};

struct LolaResult {
  PolicyPair policies;
  std::vector<Payoff> value_trace;  // values after each iteration
  int iterations_run = 0;
  bool converged = false;
};

LolaResult TrainLola(const MatrixGame& game, const LolaConfig& config);

// Samples actions from a memory-1 policy in an iterated matrix environment.
class Memory1Agent : public Agent {
 public:
  Memory1Agent(Memory1Policy policy, std::uint64_t seed)
      : policy_(std::move(policy)), seed_(seed), rng_(seed) {}
  void BeginEpisode(const Environment& env, std::uint64_t public_seed) override;
  int Act(const Environment& env, const EnvState& state) override;

 private:
  Memory1Policy policy_;
  std::uint64_t seed_;
  Rng rng_;
};

}  // namespace bargain

#endif  // BARGAIN_LOLA_H_
