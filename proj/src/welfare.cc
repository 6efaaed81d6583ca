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

#include "bargain/welfare.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace bargain {

namespace {

constexpr double kPointTolerance = 1e-12;

double Cross(const Payoff& o, const Payoff& a, const Payoff& b) {
  return (a.p1 - o.p1) * (b.p2 - o.p2) - (a.p2 - o.p2) * (b.p1 - o.p1);
}

bool SamePoint(const Payoff& a, const Payoff& b) {
  const double scale = 1.0 + std::max({std::abs(a.p1), std::abs(a.p2), std::abs(b.p1), std::abs(b.p2)});
  return std::abs(a.p1 - b.p1) <= kPointTolerance * scale &&
         std::abs(a.p2 - b.p2) <= kPointTolerance * scale;
}

// Lexicographic tie-break: larger V1, then larger V2.
bool LexGreater(const Payoff& a, const Payoff& b) {
  if (a.p1 != b.p1) return a.p1 > b.p1;
  return a.p2 > b.p2;
}

double IaCoefficient(const InequityAversion& ia) {
  return ia.beta * (1.0 - ia.gamma) / (1.0 - ia.gamma * ia.lambda);
}

std::string FormatDouble(double x) {
  std::ostringstream out;
  out.precision(15);
  out << x;
  return out.str();
}

}  // namespace

std::string_view WelfareKindName(WelfareKind kind) {
  switch (kind) {
    case WelfareKind::kUtilitarian: return "utilitarian";
    case WelfareKind::kEgalitarian: return "egalitarian";
    case WelfareKind::kNash: return "nash";
    case WelfareKind::kKalaiSmorodinsky: return "kalai_smorodinsky";
    case WelfareKind::kInequityAverse: return "inequity_averse";
  }
  return "unknown";
}

std::string WelfareSpec::Label() const { return std::string(WelfareKindName(kind)); }

std::string WelfareSpec::ToString() const {
  std::string out = Label();
  switch (kind) {
    case WelfareKind::kUtilitarian:
      break;
    case WelfareKind::kInequityAverse:
      out += "(beta=" + FormatDouble(ia.beta) + ",lambda=" + FormatDouble(ia.lambda) +
             ",gamma=" + FormatDouble(ia.gamma) + ")";
      break;
    default:
      out += "(d1=" + FormatDouble(disagreement.p1) + ",d2=" + FormatDouble(disagreement.p2) + ")";
  }
  return out;
}

WelfareSpec WelfareSpec::Parse(std::string_view text) {
  auto trim = [](std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
  };
  text = trim(text);
  std::string_view name = text;
  std::string_view args;
  if (const auto open = text.find('('); open != std::string_view::npos) {
    if (text.back() != ')') throw std::invalid_argument("welfare spec: missing ')' in '" + std::string(text) + "'");
    name = trim(text.substr(0, open));
    args = text.substr(open + 1, text.size() - open - 2);
  }
  WelfareSpec spec;
  if (name == "utilitarian" || name == "util") spec.kind = WelfareKind::kUtilitarian;
  else if (name == "egalitarian" || name == "egal") spec.kind = WelfareKind::kEgalitarian;
  else if (name == "nash") spec.kind = WelfareKind::kNash;
  else if (name == "kalai_smorodinsky" || name == "ks") spec.kind = WelfareKind::kKalaiSmorodinsky;
  else if (name == "inequity_averse" || name == "ia") spec.kind = WelfareKind::kInequityAverse;
  else throw std::invalid_argument("welfare spec: unknown kind '" + std::string(name) + "'");

  while (!args.empty()) {
    const auto comma = args.find(',');
    const std::string_view item = trim(args.substr(0, comma));
    args = comma == std::string_view::npos ? std::string_view{} : args.substr(comma + 1);
    const auto eq = item.find('=');
    if (eq == std::string_view::npos) {
      throw std::invalid_argument("welfare spec: expected key=value, got '" + std::string(item) + "'");
    }
    const std::string key(trim(item.substr(0, eq)));
    const std::string value(trim(item.substr(eq + 1)));
    double x = 0.0;
    try {
      std::size_t used = 0;
      x = std::stod(value, &used);
      if (used != value.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw std::invalid_argument("welfare spec: bad number '" + value + "' for " + key);
    }
    if (key == "beta") spec.ia.beta = x;
    else if (key == "lambda") spec.ia.lambda = x;
    else if (key == "gamma") spec.ia.gamma = x;
    else if (key == "d1") spec.disagreement.p1 = x;
    else if (key == "d2") spec.disagreement.p2 = x;
    else throw std::invalid_argument("welfare spec: unknown parameter '" + key + "'");
  }
  if (spec.ia.beta < 0.0) throw std::invalid_argument("welfare spec: beta must be >= 0");
  if (spec.ia.lambda < 0.0 || spec.ia.lambda > 1.0) {
    throw std::invalid_argument("welfare spec: lambda must lie in [0, 1]");
  }
  return spec;
}

FeasibleSet::FeasibleSet(std::vector<Payoff> points) {
  for (const Payoff& p : points) {
    if (!std::isfinite(p.p1) || !std::isfinite(p.p2)) {
      throw std::invalid_argument("FeasibleSet: non-finite point");
    }
    if (std::none_of(vertices_.begin(), vertices_.end(),
                     [&](const Payoff& q) { return SamePoint(p, q); })) {
      vertices_.push_back(p);
    }
  }
  // Andrew's monotone chain; collinear points dropped.
  std::vector<Payoff> sorted = vertices_;
  std::sort(sorted.begin(), sorted.end(), [](const Payoff& a, const Payoff& b) {
    return a.p1 < b.p1 || (a.p1 == b.p1 && a.p2 < b.p2);
  });
  if (sorted.size() <= 2) {
    hull_ = sorted;
    return;
  }
  std::vector<Payoff> h(2 * sorted.size());
  std::size_t k = 0;
  for (const Payoff& p : sorted) {
    while (k >= 2 && Cross(h[k - 2], h[k - 1], p) <= 0) --k;
    h[k++] = p;
  }
  for (std::size_t i = sorted.size() - 1, lower = k + 1; i-- > 0;) {
    const Payoff& p = sorted[i];
    while (k >= lower && Cross(h[k - 2], h[k - 1], p) <= 0) --k;
    h[k++] = p;
  }
  h.resize(k - 1);
  hull_ = std::move(h);
}

Payoff FeasibleSet::Ideal() const {
  if (vertices_.empty()) throw std::logic_error("FeasibleSet::Ideal on empty set");
  Payoff ideal{-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (const Payoff& v : vertices_) {
    ideal.p1 = std::max(ideal.p1, v.p1);
    ideal.p2 = std::max(ideal.p2, v.p2);
  }
  return ideal;
}

bool FeasibleSet::Contains(const Payoff& p, double tolerance) const {
  if (hull_.empty()) return false;
  double scale = 1.0;
  for (const Payoff& v : hull_) scale = std::max({scale, std::abs(v.p1), std::abs(v.p2)});
  const double tol = tolerance * scale;
  auto segment_distance = [](const Payoff& a, const Payoff& b, const Payoff& q) {
    const double dx = b.p1 - a.p1, dy = b.p2 - a.p2;
    const double len2 = dx * dx + dy * dy;
    double s = len2 > 0 ? ((q.p1 - a.p1) * dx + (q.p2 - a.p2) * dy) / len2 : 0.0;
    s = std::clamp(s, 0.0, 1.0);
    return std::hypot(q.p1 - (a.p1 + s * dx), q.p2 - (a.p2 + s * dy));
  };
  if (hull_.size() == 1) return std::hypot(p.p1 - hull_[0].p1, p.p2 - hull_[0].p2) <= tol;
  if (hull_.size() == 2) return segment_distance(hull_[0], hull_[1], p) <= tol;
  for (std::size_t i = 0; i < hull_.size(); ++i) {
    const Payoff& a = hull_[i];
    const Payoff& b = hull_[(i + 1) % hull_.size()];
    const double len = std::hypot(b.p1 - a.p1, b.p2 - a.p2);
    if (Cross(a, b, p) < -tol * len) return false;
  }
  return true;
}

FeasibleSet FeasibleSet::Swapped() const {
  std::vector<Payoff> swapped;
  swapped.reserve(vertices_.size());
  for (const Payoff& v : vertices_) swapped.push_back(v.swapped());
  return FeasibleSet(std::move(swapped));
}

double EvaluateWelfare(const WelfareSpec& w, const Payoff& v, const FeasibleSet& feasible) {
  if (!std::isfinite(v.p1) || !std::isfinite(v.p2)) {
    throw std::invalid_argument("EvaluateWelfare: non-finite profile");
  }
  const Payoff gain = v - w.disagreement;
  switch (w.kind) {
    case WelfareKind::kUtilitarian:
      return v.p1 + v.p2;
    case WelfareKind::kEgalitarian:
      return std::min(gain.p1, gain.p2);
    case WelfareKind::kNash:
      if (gain.p1 < 0.0 || gain.p2 < 0.0) {
        throw std::domain_error("Nash welfare: profile below the disagreement point");
      }
      return gain.p1 * gain.p2;
    case WelfareKind::kKalaiSmorodinsky: {
      if (gain.p1 < 0.0 || gain.p2 < 0.0) {
        throw std::domain_error("Kalai-Smorodinsky welfare: profile below the disagreement point");
      }
      if (gain.p2 == 0.0) {
        throw std::domain_error("Kalai-Smorodinsky welfare: ratio undefined at V2 = d2");
      }
      const Payoff ideal_gain = feasible.Ideal() - w.disagreement;
      if (ideal_gain.p2 <= 0.0) {
        throw std::domain_error("Kalai-Smorodinsky welfare: no attainable gain for player 2");
      }
      return -std::abs(gain.p1 / gain.p2 - ideal_gain.p1 / ideal_gain.p2);
    }
    case WelfareKind::kInequityAverse:
      return v.p1 + v.p2 - IaCoefficient(w.ia) * std::abs(v.p1 - v.p2);
  }
  throw std::logic_error("EvaluateWelfare: unknown kind");
}

WelfareSpec DefaultInequityAverse(const Environment& env) {
  InequityAversion ia;
  ia.gamma = env.discount();
  ia.lambda = env.discount();
  ia.beta = env.config().inequity_beta.value_or(
      env.kind() == EnvKind::kBargainingCoinGame ? kBargainingCoinGameBeta : 1.0);
  return WelfareSpec::InequityAverse(ia);
}

Payoff DisagreementProfile(const Environment& env) {
  if (!env.is_matrix() || env.name() != "IPD") return {};
  const JointAction defect{1, 1};
  return (1.0 / (1.0 - env.discount())) * env.game().payoff(defect);
}

WelfareSpec DefaultWelfare(const Environment& env, WelfareKind kind) {
  if (kind == WelfareKind::kInequityAverse) return DefaultInequityAverse(env);
  return {kind, DisagreementProfile(env), {}};
}

double IaWelfare(const Trajectory& trajectory, double beta, double lambda) {
  if (beta < 0.0) throw std::invalid_argument("IaWelfare: beta must be >= 0");
  if (lambda < 0.0 || lambda > 1.0) throw std::invalid_argument("IaWelfare: lambda must lie in [0, 1]");
  if (trajectory.steps.empty()) throw std::invalid_argument("IaWelfare: empty trajectory");
  const double decay = trajectory.discount * lambda;
  double e1 = 0.0, e2 = 0.0, penalty = 0.0;
  for (const TrajectoryStep& step : trajectory.steps) {
    e1 = decay * e1 + step.rewards.p1;
    e2 = decay * e2 + step.rewards.p2;
    penalty += std::abs(e1 - e2);
  }
  const Payoff value = trajectory.DiscountedValue();
  return value.p1 + value.p2 - beta * penalty / static_cast<double>(trajectory.steps.size());
}

FeasibleSet MakeFeasibleSet(const MatrixGame& game, double gamma) {
  if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument("MakeFeasibleSet: gamma must lie in [0, 1)");
  std::vector<Payoff> points;
  for (int j = 0; j < game.num_joint_actions(); ++j) {
    points.push_back((1.0 / (1.0 - gamma)) * game.payoff(j));
  }
  return FeasibleSet(std::move(points));
}

std::vector<Payoff> ParetoFront(const FeasibleSet& set) {
  const std::vector<Payoff>& hull = set.hull();
  if (hull.empty()) return {};
  std::size_t right = 0, top = 0;
  for (std::size_t i = 1; i < hull.size(); ++i) {
    if (LexGreater(hull[i], hull[right])) right = i;
    const Payoff& a = hull[i];
    const Payoff& b = hull[top];
    if (a.p2 > b.p2 || (a.p2 == b.p2 && a.p1 > b.p1)) top = i;
  }
  std::vector<Payoff> front{hull[right]};
  // Counter-clockwise from the rightmost point climbs the upper-right chain.
  for (std::size_t i = right; i != top;) {
    i = (i + 1) % hull.size();
    front.push_back(hull[i]);
  }
  return front;
}

WelfareOptimum FindWelfareOptimum(const WelfareSpec& w, const FeasibleSet& set) {
  if (set.empty()) throw std::invalid_argument("FindWelfareOptimum: empty feasible set");
  const bool front_only =
      w.kind == WelfareKind::kEgalitarian || w.kind == WelfareKind::kKalaiSmorodinsky;
  const bool needs_gain = w.kind == WelfareKind::kNash || w.kind == WelfareKind::kKalaiSmorodinsky;

  // Piecewise candidate generation: vertices plus per-edge critical points.
  std::vector<Payoff> chain = front_only ? ParetoFront(set) : set.hull();
  std::vector<std::pair<Payoff, Payoff>> edges;
  if (chain.size() >= 2) {
    const std::size_t count = front_only || chain.size() == 2 ? chain.size() - 1 : chain.size();
    for (std::size_t i = 0; i < count; ++i) edges.emplace_back(chain[i], chain[(i + 1) % chain.size()]);
  }
  const Payoff d = w.disagreement;
  double ks_ratio = 0.0;
  if (w.kind == WelfareKind::kKalaiSmorodinsky) {
    const Payoff ideal_gain = set.Ideal() - d;
    if (ideal_gain.p1 <= 0.0 || ideal_gain.p2 <= 0.0) {
      throw std::domain_error("degenerate bargaining problem: no feasible point improves on d");
    }
    ks_ratio = ideal_gain.p1 / ideal_gain.p2;
  }

  std::vector<Payoff> candidates = chain;
  for (const auto& [p, q] : edges) {
    const Payoff a = p - d;
    const Payoff b = q - p;
    std::vector<double> params;
    switch (w.kind) {
      case WelfareKind::kUtilitarian:
        break;
      case WelfareKind::kEgalitarian:
        if (b.p1 != b.p2) params.push_back((a.p2 - a.p1) / (b.p1 - b.p2));
        break;
      case WelfareKind::kNash:
        if (b.p1 * b.p2 != 0.0) params.push_back(-(b.p1 * a.p2 + a.p1 * b.p2) / (2.0 * b.p1 * b.p2));
        break;
      case WelfareKind::kKalaiSmorodinsky:
        if (b.p1 - ks_ratio * b.p2 != 0.0) params.push_back((ks_ratio * a.p2 - a.p1) / (b.p1 - ks_ratio * b.p2));
        break;
      case WelfareKind::kInequityAverse:
        if (b.p1 != b.p2) params.push_back((p.p2 - p.p1) / (b.p1 - b.p2));
        break;
    }
    for (double s : params) {
      if (s > 0.0 && s < 1.0) candidates.push_back(p + s * b);
    }
  }

  bool found = false;
  bool strict_gain = !needs_gain;
  WelfareOptimum best;
  for (const Payoff& c : candidates) {
    if (needs_gain) {
      const Payoff gain = c - d;
      if (gain.p1 < 0.0 || gain.p2 <= 0.0) continue;
      if (gain.p1 > 0.0) strict_gain = true;
    }
    const double value = EvaluateWelfare(w, c, set);
    const double tol = 1e-9 * (1.0 + std::abs(value));
    if (!found || value > best.welfare + tol ||
        (std::abs(value - best.welfare) <= tol && LexGreater(c, best.profile))) {
      if (!found || value > best.welfare + tol) best.welfare = value;
      best.profile = c;
      found = true;
    }
  }
  if (!found || !strict_gain) {
    throw std::domain_error("degenerate bargaining problem: no feasible point improves on d");
  }
  best.welfare = EvaluateWelfare(w, best.profile, set);
  return best;
}

ScoredProfile NormalizedScore(const Payoff& v, std::span<const WelfareSpec> welfare_set,
                              const Payoff& disagreement_profile, const FeasibleSet& set) {
  if (welfare_set.empty()) throw std::invalid_argument("NormalizedScore: empty welfare set");
  ScoredProfile scored;
  scored.values = v;
  bool any = false;
  for (std::size_t i = 0; i < welfare_set.size(); ++i) {
    const WelfareSpec& w = welfare_set[i];
    double base = 0.0;
    try {
      base = EvaluateWelfare(w, disagreement_profile, set);
    } catch (const std::domain_error&) {
      continue;  // cannot be normalized, e.g. the KS ratio at d
    }
    const double top = FindWelfareOptimum(w, set).welfare;
    const double denom = top - base;
    if (!(denom > 1e-12 * (1.0 + std::abs(top)))) {
      throw std::domain_error("NormalizedScore: degenerate denominator for " + w.Label());
    }
    double value = 0.0;
    try {
      value = EvaluateWelfare(w, v, set);
    } catch (const std::domain_error&) {
      continue;  // undefined for this member
    }
    const double score = (value - base) / denom;
    if (!any || score > scored.normalized_score) {
      scored.normalized_score = score;
      scored.best_welfare = i;
      any = true;
    }
  }
  if (!any) throw std::domain_error("NormalizedScore: no welfare function defined at profile");
  return scored;
}

std::string ClassifyConvention(const Payoff& v, std::span<const LabeledProfile> optima,
                               double tolerance) {
  std::string label(kUnclassified);
  double best = std::numeric_limits<double>::infinity();
  for (const LabeledProfile& o : optima) {
    const double distance = std::hypot(v.p1 - o.profile.p1, v.p2 - o.profile.p2);
    const double radius = tolerance * std::hypot(o.profile.p1, o.profile.p2);
    if (distance <= radius && distance < best) {
      best = distance;
      label = o.label;
    }
  }
  return label;
}

}  // namespace bargain
