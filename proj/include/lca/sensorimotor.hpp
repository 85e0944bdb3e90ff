// Copyright 2026 The LCA Lab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Scalar plant controlled over a quantized, delayed channel: optimal
// worst-case deviation, the rate/delay resource tradeoff, the optimal
// signaling delay, the two-loop vision model, and an interval
// reachability oracle for the warned case.

#include <algorithm>
#include <cmath>
#include <limits>

#include "lca/densemath.hpp"
#include "lca/errors.hpp"

namespace lca::sensorimotor {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct PlantScalar {
  double a = 1.0;

  void validate() const {
    if (!std::isfinite(a)) throw DomainError("PlantScalar: pole must be finite");
  }
};

// R bits per sample, actuation delay T_u and advanced warning T_w in samples.
struct ChannelSpec {
  double R = 1.0;
  double T_u = 0.0;
  double T_w = 0.0;

  double net_delay() const { return T_u - T_w; }

  void validate() const {
    if (!(R > 0)) throw DomainError("ChannelSpec: R must be positive");
    if (!(T_u >= 0 && T_w >= 0)) throw DomainError("ChannelSpec: delays must be nonnegative");
  }
};

// R = lambda T_s; the actuation delay is T_s + T_c.
struct ResourceTradeoff {
  double lambda = 0.1;
  double T_c = 0.0;

  void validate() const {
    if (!(lambda > 0)) throw DomainError("ResourceTradeoff: lambda must be positive");
    if (!(T_c >= 0)) throw DomainError("ResourceTradeoff: T_c must be nonnegative");
  }
};

struct CostTerms {
  double delay = 0.0;
  double quantization = 0.0;

  double total() const { return delay + quantization; }
};

// sum_{i=1}^{T} |a|^{i-1} extended to real T: T when |a| = 1, otherwise
// (|a|^T - 1) / (|a| - 1); zero for T <= 0.
inline double delay_sum(double abs_a, double T) {
  if (T <= 0) return 0.0;
  if (abs_a == 1.0) return T;
  return std::expm1(T * std::log(abs_a)) / (abs_a - 1.0);
}

inline CostTerms cost_terms(double a, double R, double T) {
  const double abs_a = std::abs(a);
  const double margin = std::exp2(R) - abs_a;
  if (!(margin > 0)) return {T > 0 ? delay_sum(abs_a, T) : 0.0, kInf};
  if (T <= 0) return {0.0, 1.0 / margin};
  return {delay_sum(abs_a, T), std::pow(abs_a, T) / margin};
}

// Minimal worst-case |x| over static quantizers of rate R and causal
// full-information controllers; +inf when |a| >= 2^R.
inline double optimal_cost(const PlantScalar& plant, const ChannelSpec& ch) {
  plant.validate();
  ch.validate();
  return cost_terms(plant.a, ch.R, ch.net_delay()).total();
}

inline CostTerms tradeoff_cost(const PlantScalar& plant, const ResourceTradeoff& trade, double T_s, double T_w) {
  plant.validate();
  trade.validate();
  if (!(T_s >= 0)) throw DomainError("tradeoff_cost: T_s must be nonnegative");
  if (!(T_w >= 0)) throw DomainError("tradeoff_cost: T_w must be nonnegative");
  return cost_terms(plant.a, trade.lambda * T_s, T_s + trade.T_c - T_w);
}

struct DelayOptimum {
  double T_s = 0.0;
  double R = 0.0;
  double cost = 0.0;
  CostTerms terms;
};

inline DelayOptimum optimize_delay(const PlantScalar& plant, const ResourceTradeoff& trade, double T_w,
                                   double T_min = 1e-3, double T_max = 1e3, double tol = 1e-9) {
  trade.validate();
  const auto f = [&](double T_s) { return tradeoff_cost(plant, trade, T_s, T_w).total(); };
  DelayOptimum o;
  o.T_s = densemath::minimize_scalar(f, T_min, T_max, tol);
  o.R = trade.lambda * o.T_s;
  o.terms = tradeoff_cost(plant, trade, o.T_s, T_w);
  o.cost = o.terms.total();
  return o;
}

// Reflex loop (R_L, T_L) driven by |v| <= 1 and a warned vision loop R_H
// driven by |r| <= delta.
struct LayeredVisionSpec {
  double R_L = 1.0, T_L = 0.0;
  double R_H = 1.0, T_H = 0.0;
  double delta = 1.0;

  void validate() const {
    if (!(R_L > 0 && R_H > 0)) throw DomainError("LayeredVisionSpec: rates must be positive");
    if (!(T_L >= 0 && T_H >= 0)) throw DomainError("LayeredVisionSpec: delays must be nonnegative");
    if (!(delta >= 0)) throw DomainError("LayeredVisionSpec: delta must be nonnegative");
  }
};

struct VisionCost {
  double reflex = 0.0;
  double vision = 0.0;

  double total() const { return reflex + vision; }
};

inline VisionCost layered_vision_cost(const LayeredVisionSpec& spec, const PlantScalar& plant) {
  spec.validate();
  plant.validate();
  const double abs_a = std::abs(plant.a);
  VisionCost c;
  c.reflex = cost_terms(plant.a, spec.R_L, spec.T_L).total();
  const double mH = std::exp2(spec.R_H) - abs_a;
  c.vision = !(mH > 0) ? kInf : (spec.delta == 0 ? 0.0 : spec.delta / mH);
  return c;
}

// Worst-case |x| over `horizon` steps of x(k+1) = a x + w + Q(-a x - w) with
// |w| <= 1 and x(0) = 0, for the uniform 2^R-cell midpoint quantizer on
// [-L, L], L = |a| e* + 1, e* = 1 / (2^R - |a|). Inputs outside [-L, L]
// saturate into the end cells. The reachable set is tracked as an interval
// hull, propagated cell by cell. L carries a 1e-12 relative pad: at exactly
// L the worst case sits on the saturation edge, and for |a| > 1 rounding
// past it grows without bound.
inline double warned_case_oracle(const PlantScalar& plant, double R, int horizon) {
  plant.validate();
  if (!(R > 0)) throw DomainError("warned_case_oracle: R must be positive");
  if (horizon < 1) throw DomainError("warned_case_oracle: horizon must be >= 1");
  const double abs_a = std::abs(plant.a);
  const double cells = std::exp2(R);
  if (!(cells > abs_a)) throw DomainError("warned_case_oracle: requires |a| < 2^R");
  if (cells != std::floor(cells) || cells > 1e7) throw DomainError("warned_case_oracle: 2^R must be a small integer");
  const auto N = static_cast<long>(cells);
  const double L = (abs_a / (cells - abs_a) + 1.0) * (1.0 + 1e-12);
  const double width = 2.0 * L / cells;

  double xlo = 0.0, xhi = 0.0, sup = 0.0;
  for (int k = 0; k < horizon; ++k) {
    // s = -(a x + w) ranges over an interval.
    const double ax_lo = std::min(plant.a * xlo, plant.a * xhi), ax_hi = std::max(plant.a * xlo, plant.a * xhi);
    const double slo = -(ax_hi + 1.0), shi = -(ax_lo - 1.0);
    double nlo = kInf, nhi = -kInf;
    const auto cell_of = [&](double s) { return std::clamp(static_cast<long>(std::floor((s + L) / width)), 0L, N - 1); };
    for (long j = cell_of(slo); j <= cell_of(shi); ++j) {
      const double lo = j == 0 ? -kInf : -L + width * static_cast<double>(j);
      const double hi = j == N - 1 ? kInf : -L + width * static_cast<double>(j + 1);
      const double a_ = std::max(lo, slo), b_ = std::min(hi, shi);
      if (a_ > b_) continue;
      const double mid = -L + width * (static_cast<double>(j) + 0.5);
      // x' = Q(s) - s = mid - s for s in [a_, b_].
      nlo = std::min(nlo, mid - b_);
      nhi = std::max(nhi, mid - a_);
    }
    xlo = nlo;
    xhi = nhi;
    sup = std::max({sup, std::abs(xlo), std::abs(xhi)});
  }
  return sup;
}

}  // namespace lca::sensorimotor
