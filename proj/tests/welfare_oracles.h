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


// Brute-force helpers shared by the welfare tests and the acceptance suite.

#ifndef BARGAIN_TESTS_WELFARE_ORACLES_H_
#define BARGAIN_TESTS_WELFARE_ORACLES_H_

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "bargain/welfare.h"

namespace bargain {

inline const std::vector<WelfareSpec>& AllKinds() {
  static const std::vector<WelfareSpec> kinds = {
      WelfareSpec::Utilitarian(), WelfareSpec::Egalitarian(), WelfareSpec::Nash(),
      WelfareSpec::KalaiSmorodinsky(), WelfareSpec::InequityAverse()};
  return kinds;
}

inline bool Near(const Payoff& a, const Payoff& b, double tol) {
  return std::abs(a.p1 - b.p1) <= tol && std::abs(a.p2 - b.p2) <= tol;
}

// True if some point of the hull boundary weakly dominates p with a strict
// gain above `gain`. A dominating interior point implies a dominating
// boundary point, so checking edges exactly suffices.
inline bool DominatedInHull(const FeasibleSet& set, const Payoff& p, double gain = 1e-7) {
  const auto& h = set.hull();
  for (std::size_t i = 0; i < h.size(); ++i) {
    const Payoff a = h[i];
    const Payoff b = h[(i + 1) % h.size()];
    double lo = 0.0, hi = 1.0;
    for (int k = 0; k < 2; ++k) {
      // a_k + t (b_k - a_k) >= p_k
      const double slope = b[k] - a[k];
      const double need = p[k] - a[k];
      if (std::abs(slope) < 1e-15) {
        if (need > 0) lo = 2.0;
      } else if (slope > 0) {
        lo = std::max(lo, need / slope);
      } else {
        hi = std::min(hi, need / slope);
      }
    }
    if (lo > hi) continue;
    for (double t : {lo, hi}) {
      const Payoff q = a + t * (b - a);
      if (q.p1 - p.p1 > gain || q.p2 - p.p2 > gain) return true;
    }
  }
  return false;
}

inline FeasibleSet RandomSet(std::mt19937_64& rng, double lo = 0.0, double hi = 10.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::uniform_int_distribution<int> n(3, 7);
  std::vector<Payoff> pts;
  const int count = n(rng);
  for (int i = 0; i < count; ++i) pts.push_back({u(rng), u(rng)});
  return FeasibleSet(pts);
}

}  // namespace bargain

#endif  // BARGAIN_TESTS_WELFARE_ORACLES_H_
