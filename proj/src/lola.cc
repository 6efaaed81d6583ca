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

#include "bargain/lola.h"

#include <cmath>
#include <stdexcept>

namespace bargain {

namespace {

Eigen::VectorXd Softmax(const Eigen::VectorXd& logits) {
  const double top = logits.maxCoeff();
  Eigen::VectorXd e = (logits.array() - top).exp();
  return e / e.sum();
}

// Derivative of each parameter's effect on the chain: either the initial
// distribution or a single transition row changes.
struct ParamEffect {
  bool initial = false;
  int row = -1;               // previous joint action for conditional logits
  Eigen::VectorXd factor;     // d prob(a) / d logit, over own actions a
};

// d softmax(a) / d logit(k) = pi(a) * (1[a == k] - pi(k)).
Eigen::VectorXd SoftmaxColumn(const Eigen::VectorXd& pi, int k) {
  Eigen::VectorXd out = -pi(k) * pi;
  out(k) += pi(k);
  return out;
}

std::vector<ParamEffect> Effects(const Memory1Policy& policy) {
  const int n = policy.num_actions();
  std::vector<ParamEffect> effects;
  effects.reserve(Memory1Policy::NumParams(n));
  const Eigen::VectorXd init = policy.InitialProbabilities();
  for (int k = 0; k < n; ++k) effects.push_back({true, -1, SoftmaxColumn(init, k)});
  for (int s = 0; s < n * n; ++s) {
    const Eigen::VectorXd pi = policy.ConditionalProbabilities(s);
    for (int k = 0; k < n; ++k) effects.push_back({false, s, SoftmaxColumn(pi, k)});
  }
  return effects;
}

// Outer product over joint actions, index a1 * n + a2.
Eigen::VectorXd Joint(const Eigen::VectorXd& f1, const Eigen::VectorXd& f2) {
  const int n = static_cast<int>(f1.size());
  Eigen::VectorXd out(n * n);
  for (int a1 = 0; a1 < n; ++a1) {
    for (int a2 = 0; a2 < n; ++a2) out(a1 * n + a2) = f1(a1) * f2(a2);
  }
  return out;
}

}  // namespace

Memory1Policy::Memory1Policy(int num_actions, Eigen::VectorXd params)
    : num_actions_(num_actions), params_(std::move(params)) {
  if (num_actions_ < 1 || params_.size() != NumParams(num_actions_)) {
    throw std::invalid_argument("Memory1Policy: expected " + std::to_string(NumParams(num_actions_)) +
                                " parameters, got " + std::to_string(params_.size()));
  }
}

Memory1Policy Memory1Policy::Uniform(int num_actions) {
  return Memory1Policy(num_actions, Eigen::VectorXd::Zero(NumParams(num_actions)));
}

Memory1Policy Memory1Policy::RandomNormal(int num_actions, Rng& rng, double stddev) {
  std::normal_distribution<double> normal(0.0, stddev);
  Eigen::VectorXd params(NumParams(num_actions));
  for (Eigen::Index i = 0; i < params.size(); ++i) params(i) = normal(rng);
  return Memory1Policy(num_actions, std::move(params));
}

Memory1Policy Memory1Policy::Constant(int num_actions, int action, double margin) {
  Eigen::VectorXd params = Eigen::VectorXd::Zero(NumParams(num_actions));
  for (int row = 0; row <= num_actions * num_actions; ++row) params(row * num_actions + action) = margin;
  return Memory1Policy(num_actions, std::move(params));
}

Eigen::VectorXd Memory1Policy::InitialProbabilities() const {
  return Softmax(params_.head(num_actions_));
}

Eigen::VectorXd Memory1Policy::ConditionalProbabilities(int previous_joint) const {
  if (previous_joint < 0 || previous_joint >= num_actions_ * num_actions_) {
    throw std::out_of_range("Memory1Policy: invalid previous joint action");
  }
  return Softmax(params_.segment(num_actions_ + previous_joint * num_actions_, num_actions_));
}

InducedChain BuildInducedChain(const Memory1Policy& p1, const Memory1Policy& p2,
                               const MatrixGame& game) {
  const int n = game.num_actions();
  if (p1.num_actions() != n || p2.num_actions() != n) {
    throw std::invalid_argument("BuildInducedChain: policy/game action count mismatch");
  }
  const int m = n * n;
  InducedChain chain;
  chain.initial = Joint(p1.InitialProbabilities(), p2.InitialProbabilities());
  chain.transition.resize(m, m);
  for (int s = 0; s < m; ++s) {
    chain.transition.row(s) =
        Joint(p1.ConditionalProbabilities(s), p2.ConditionalProbabilities(s)).transpose();
  }
  chain.reward1.resize(m);
  chain.reward2.resize(m);
  for (int j = 0; j < m; ++j) {
    chain.reward1(j) = game.payoff(j).p1;
    chain.reward2(j) = game.payoff(j).p2;
  }
  return chain;
}

Payoff ExactValue(const Memory1Policy& p1, const Memory1Policy& p2, const MatrixGame& game,
                  double gamma) {
  if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument("ExactValue: gamma must lie in [0, 1)");
  const InducedChain chain = BuildInducedChain(p1, p2, game);
  const int m = static_cast<int>(chain.initial.size());
  const Eigen::MatrixXd system = Eigen::MatrixXd::Identity(m, m) - gamma * chain.transition;
  // x^T = p0^T (I - gamma P)^{-1}
  const Eigen::VectorXd occupancy = system.transpose().partialPivLu().solve(chain.initial);
  const Payoff value{occupancy.dot(chain.reward1), occupancy.dot(chain.reward2)};
  if (!std::isfinite(value.p1) || !std::isfinite(value.p2)) {
    throw std::runtime_error("ExactValue: singular linear solve");
  }
  return value;
}

ValueDerivatives ComputeValueDerivatives(const Memory1Policy& p1, const Memory1Policy& p2,
                                         const MatrixGame& game, double gamma) {
  const InducedChain chain = BuildInducedChain(p1, p2, game);
  const int n = game.num_actions();
  const int m = n * n;
  const Eigen::MatrixXd inverse =
      (Eigen::MatrixXd::Identity(m, m) - gamma * chain.transition).partialPivLu().inverse();
  const Eigen::VectorXd occupancy = inverse.transpose() * chain.initial;  // x = A^T p0
  const std::array<Eigen::VectorXd, 2> u{inverse * chain.reward1, inverse * chain.reward2};

  const Eigen::VectorXd init1 = p1.InitialProbabilities();
  const Eigen::VectorXd init2 = p2.InitialProbabilities();
  std::vector<Eigen::VectorXd> cond1(m), cond2(m);
  for (int s = 0; s < m; ++s) {
    cond1[s] = p1.ConditionalProbabilities(s);
    cond2[s] = p2.ConditionalProbabilities(s);
  }

  // For each parameter: d p0 (vector) or d P (one row), materialized densely.
  struct Dense {
    Eigen::VectorXd dp0;
    Eigen::MatrixXd dP;
  };
  auto materialize = [&](const std::vector<ParamEffect>& effects, int seat) {
    std::vector<Dense> out;
    out.reserve(effects.size());
    for (const ParamEffect& e : effects) {
      Dense d{Eigen::VectorXd::Zero(m), Eigen::MatrixXd::Zero(m, m)};
      if (e.initial) {
        d.dp0 = seat == 0 ? Joint(e.factor, init2) : Joint(init1, e.factor);
      } else {
        d.dP.row(e.row) =
            (seat == 0 ? Joint(e.factor, cond2[e.row]) : Joint(cond1[e.row], e.factor)).transpose();
      }
      out.push_back(std::move(d));
    }
    return out;
  };
  const std::vector<ParamEffect> effects1 = Effects(p1);
  const std::vector<ParamEffect> effects2 = Effects(p2);
  const std::vector<Dense> dense1 = materialize(effects1, 0);
  const std::vector<Dense> dense2 = materialize(effects2, 1);
  const int n1 = static_cast<int>(dense1.size());
  const int n2 = static_cast<int>(dense2.size());

  ValueDerivatives out;
  auto first = [&](const std::vector<Dense>& dense, int player) {
    Eigen::VectorXd g(dense.size());
    for (std::size_t k = 0; k < dense.size(); ++k) {
      g(k) = dense[k].dp0.dot(u[player]) + gamma * occupancy.dot(dense[k].dP * u[player]);
    }
    return g;
  };
  out.dv1_dtheta1 = first(dense1, 0);
  out.dv1_dtheta2 = first(dense2, 0);
  out.dv2_dtheta1 = first(dense1, 1);
  out.dv2_dtheta2 = first(dense2, 1);

  // Mixed second derivatives of V = p0^T A r with A = (I - gamma P)^{-1}:
  //   p0_ab A r + g p0_a A P_b A r + g p0_b A P_a A r + g p0 A P_ab A r
  //   + g^2 p0 A P_b A P_a A r + g^2 p0 A P_a A P_b A r
  std::vector<Eigen::RowVectorXd> q1(n1), z1(n1), q2(n2), z2(n2);
  for (int a = 0; a < n1; ++a) {
    q1[a] = dense1[a].dp0.transpose() * inverse;
    z1[a] = occupancy.transpose() * dense1[a].dP;
  }
  for (int b = 0; b < n2; ++b) {
    q2[b] = dense2[b].dp0.transpose() * inverse;
    z2[b] = occupancy.transpose() * dense2[b].dP;
  }
  for (int player = 0; player < 2; ++player) {
    Eigen::MatrixXd& cross = player == 0 ? out.d2v1_dtheta1_dtheta2 : out.d2v2_dtheta1_dtheta2;
    cross.setZero(n1, n2);
    std::vector<Eigen::VectorXd> w1(n1), w2(n2);
    for (int a = 0; a < n1; ++a) w1[a] = dense1[a].dP * u[player];
    for (int b = 0; b < n2; ++b) w2[b] = dense2[b].dP * u[player];
    for (int a = 0; a < n1; ++a) {
      const ParamEffect& ea = effects1[a];
      for (int b = 0; b < n2; ++b) {
        const ParamEffect& eb = effects2[b];
        double value = gamma * q1[a].dot(w2[b]) + gamma * q2[b].dot(w1[a]) +
                       gamma * gamma * z2[b].dot(inverse * w1[a]) +
                       gamma * gamma * z1[a].dot(inverse * w2[b]);
        if (ea.initial && eb.initial) {
          value += Joint(ea.factor, eb.factor).dot(u[player]);
        } else if (!ea.initial && !eb.initial && ea.row == eb.row) {
          value += gamma * occupancy(ea.row) * Joint(ea.factor, eb.factor).dot(u[player]);
        }
        cross(a, b) = value;
      }
    }
  }
  return out;
}

PolicyPair LolaStep(const Memory1Policy& p1, const Memory1Policy& p2, const MatrixGame& game,
                    double gamma, double lr, double eta) {
  if (lr < 0.0) throw std::invalid_argument("LolaStep: step size must be non-negative");
  if (eta < 0.0) throw std::invalid_argument("LolaStep: shaping coefficient must be non-negative");
  const ValueDerivatives d = ComputeValueDerivatives(p1, p2, game, gamma);
  const Eigen::VectorXd step1 =
      lr * d.dv1_dtheta1 + lr * eta * (d.d2v2_dtheta1_dtheta2 * d.dv1_dtheta2);
  const Eigen::VectorXd step2 =
      lr * d.dv2_dtheta2 + lr * eta * (d.d2v1_dtheta1_dtheta2.transpose() * d.dv2_dtheta1);
  if (!step1.allFinite() || !step2.allFinite()) {
    throw std::runtime_error("LolaStep: non-finite derivative in game '" + game.name() + "'");
  }
  return {Memory1Policy(p1.num_actions(), p1.params() + step1),
          Memory1Policy(p2.num_actions(), p2.params() + step2)};
}

LolaResult TrainLola(const MatrixGame& game, const LolaConfig& config) {
  if (config.iterations < 1) throw std::invalid_argument("TrainLola: iterations must be >= 1");
  Rng rng(config.seed);
  const int n = game.num_actions();
  Memory1Policy first = Memory1Policy::RandomNormal(n, rng, config.init_stddev);
  Memory1Policy second = Memory1Policy::RandomNormal(n, rng, config.init_stddev);
  LolaResult result{{first, second}, {}, 0, false};
  result.value_trace.reserve(config.iterations);
  for (int it = 0; it < config.iterations; ++it) {
    PolicyPair next = LolaStep(result.policies.first, result.policies.second, game, config.gamma,
                               config.lr, config.eta);
    const double change =
        std::max((next.first.params() - result.policies.first.params()).cwiseAbs().maxCoeff(),
                 (next.second.params() - result.policies.second.params()).cwiseAbs().maxCoeff());
    result.policies = std::move(next);
    result.value_trace.push_back(
        ExactValue(result.policies.first, result.policies.second, game, config.gamma));
    result.iterations_run = it + 1;
    if (change < config.tolerance) {
      result.converged = true;
      break;
    }
  }
  return result;
}

void Memory1Agent::BeginEpisode(const Environment&, std::uint64_t public_seed) {
  rng_.seed(MixSeed(seed_, public_seed));
}

int Memory1Agent::Act(const Environment& env, const EnvState& state) {
  if (!env.is_matrix()) throw std::logic_error("Memory1Agent requires an iterated matrix game");
  const Eigen::VectorXd probs = state.index == 0 ? policy_.InitialProbabilities()
                                                 : policy_.ConditionalProbabilities(state.index - 1);
  std::discrete_distribution<int> pick(probs.data(), probs.data() + probs.size());
  return pick(rng_);
}

}  // namespace bargain
