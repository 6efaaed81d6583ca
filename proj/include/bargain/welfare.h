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

#ifndef BARGAIN_WELFARE_H_
#define BARGAIN_WELFARE_H_

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bargain/environment.h"
#include "bargain/game.h"

namespace bargain {

enum class WelfareKind {
  kUtilitarian,
  kEgalitarian,
  kNash,
  kKalaiSmorodinsky,
  kInequityAverse,
};

// Inequality penalty `beta`, smoothing `lambda`, and the discount used by the
// smoothed reward ledgers.
struct InequityAversion {
  double beta = 1.0;
  double lambda = 0.96;
  double gamma = 0.96;

  friend bool operator==(const InequityAversion&, const InequityAversion&) = default;
};

struct WelfareSpec {
  WelfareKind kind = WelfareKind::kUtilitarian;
  Payoff disagreement;       // d; unused by utilitarian and inequity-averse
  InequityAversion ia;       // meaningful iff kind == kInequityAverse

  static WelfareSpec Utilitarian() { return {WelfareKind::kUtilitarian, {}, {}}; }
  static WelfareSpec Egalitarian(Payoff d = {}) { return {WelfareKind::kEgalitarian, d, {}}; }
  static WelfareSpec Nash(Payoff d = {}) { return {WelfareKind::kNash, d, {}}; }
  static WelfareSpec KalaiSmorodinsky(Payoff d = {}) {
    return {WelfareKind::kKalaiSmorodinsky, d, {}};
  }
  static WelfareSpec InequityAverse(InequityAversion ia = {}) {
    return {WelfareKind::kInequityAverse, {}, ia};
  }

  // "utilitarian", "egalitarian", "nash", "kalai_smorodinsky", "inequity_averse".
  std::string Label() const;
  // Label plus parameters, e.g. "inequity_averse(beta=1,lambda=0.96,gamma=0.96)".
  std::string ToString() const;
  // Inverse of ToString; also accepts the short names util, egal, ks, ia.
  // Throws std::invalid_argument on malformed input.
  static WelfareSpec Parse(std::string_view text);

  friend bool operator==(const WelfareSpec&, const WelfareSpec&) = default;
};

std::string_view WelfareKindName(WelfareKind kind);

// Calibrated beta for ABCG: the smallest value in steps of 0.25 from 1 at which
// the inequity-averse plan lets Blue consume blue disagreement coins.
inline constexpr double kBargainingCoinGameBeta = 1.5;

// Inequity-averse spec with the environment's discount and beta.
WelfareSpec DefaultInequityAverse(const Environment& env);

// Discounted value of the environment's bargaining-failure outcome: mutual
// defection forever in the prisoner's dilemma, (0, 0) elsewhere.
Payoff DisagreementProfile(const Environment& env);

// Welfare function of the given kind with the environment's disagreement
// point and inequity-aversion parameters.
WelfareSpec DefaultWelfare(const Environment& env, WelfareKind kind);

// Attainable payoff region: the convex hull of `vertices`.
class FeasibleSet {
 public:
  FeasibleSet() = default;
  explicit FeasibleSet(std::vector<Payoff> points);

  // Distinct input points.
  const std::vector<Payoff>& vertices() const { return vertices_; }
  // Extreme points of the hull in counter-clockwise order.
  const std::vector<Payoff>& hull() const { return hull_; }
  bool empty() const { return vertices_.empty(); }

  // Componentwise supremum over the set.
  Payoff Ideal() const;
  bool Contains(const Payoff& p, double tolerance = 1e-9) const;
  FeasibleSet Swapped() const;

 private:
  std::vector<Payoff> vertices_;
  std::vector<Payoff> hull_;
};

// Welfare of profile `v`. Larger is always better; Kalai-Smorodinsky returns
// the negated ratio deviation. Throws std::domain_error when Nash or
// Kalai-Smorodinsky gains are negative, or the Kalai-Smorodinsky ratio is
// undefined.
double EvaluateWelfare(const WelfareSpec& w, const Payoff& v, const FeasibleSet& feasible);

// V1 + V2 - beta * mean_t |e1_t - e2_t| with e_i_t = gamma * lambda * e_i_{t-1} + r_i_t.
double IaWelfare(const Trajectory& trajectory, double beta, double lambda);

// Pure joint-action payoffs scaled by 1 / (1 - gamma).
FeasibleSet MakeFeasibleSet(const MatrixGame& game, double gamma);

// Maximal points of the hull, sorted by V1 descending.
std::vector<Payoff> ParetoFront(const FeasibleSet& set);

struct WelfareOptimum {
  Payoff profile;
  double welfare = 0.0;
};

// Argmax of EvaluateWelfare over the hull (over the Pareto front for
// egalitarian and Kalai-Smorodinsky). Ties go to larger V1, then larger V2.
// Throws std::domain_error if no feasible point strictly improves on d for
// Nash or Kalai-Smorodinsky.
WelfareOptimum FindWelfareOptimum(const WelfareSpec& w, const FeasibleSet& set);

struct ScoredProfile {
  Payoff values;
  double normalized_score = 0.0;
  std::size_t best_welfare = 0;  // index into the welfare set
};

// max over w in `welfare_set` of (w(v) - w(d)) / (max w - w(d)).
// Members undefined at v or at the disagreement profile are skipped; throws
// std::domain_error if none remain or a denominator is degenerate.
ScoredProfile NormalizedScore(const Payoff& v, std::span<const WelfareSpec> welfare_set,
                              const Payoff& disagreement_profile, const FeasibleSet& set);

struct LabeledProfile {
  std::string label;
  Payoff profile;
};

inline constexpr std::string_view kUnclassified = "unclassified";

// Label of the nearest optimum if within `tolerance` times that optimum's
// norm, otherwise "unclassified".
std::string ClassifyConvention(const Payoff& v, std::span<const LabeledProfile> optima,
                               double tolerance = 0.15);

}  // namespace bargain

#endif  // BARGAIN_WELFARE_H_
