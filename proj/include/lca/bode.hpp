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

// Sensitivity analysis of a delayed SISO loop P C e^{-tau s}: S and T,
// fragility, H-infinity norm on a frequency grid, the Poisson-weighted
// integral of ln|T|, and the band/peak waterbed check.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <utility>
#include <vector>

#include "lca/densemath.hpp"
#include "lca/errors.hpp"

namespace lca::bode {

using Complex = std::complex<double>;
using FrequencyResponse = std::function<Complex(double)>;  // omega -> G(j omega)

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Coefficients in ascending powers of s.
struct RationalDelayTf {
  std::vector<double> num{1.0};
  std::vector<double> den{1.0};
  double tau = 0.0;

  static RationalDelayTf gain(double k) { return {{k}, {1.0}, 0.0}; }

  void validate() const {
    if (num.empty() || den.empty()) throw DomainError("RationalDelayTf: empty polynomial");
    if (std::all_of(den.begin(), den.end(), [](double c) { return c == 0.0; }))
      throw DomainError("RationalDelayTf: zero denominator");
    if (!(tau >= 0)) throw DomainError("RationalDelayTf: delay must be nonnegative");
  }

  static Complex horner(const std::vector<double>& c, Complex s) {
    Complex v = 0.0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) v = v * s + *it;
    return v;
  }

  // Numerator including the delay factor.
  Complex numerator(Complex s) const {
    const Complex n = horner(num, s);
    return tau == 0.0 ? n : n * std::exp(-tau * s);
  }
  Complex denominator(Complex s) const { return horner(den, s); }

  Complex operator()(Complex s) const {
    const Complex d = denominator(s);
    if (d == 0.0) throw SingularityError("RationalDelayTf: evaluated at a pole");
    return numerator(s) / d;
  }
};

// Plant with unstable pole p and unstable zero q (q = inf for none) under
// controller C and loop delay tau.
struct LoopSpec {
  RationalDelayTf plant;
  RationalDelayTf controller = RationalDelayTf::gain(1.0);
  double tau = 0.0;
  double p = 1.0;
  double q = kInf;
  int open_loop_rhp_poles = 1;

  void validate() const {
    plant.validate();
    controller.validate();
    if (!(tau >= 0)) throw DomainError("LoopSpec: delay must be nonnegative");
    if (!(p > 0)) throw DomainError("LoopSpec: p must be positive");
    if (!(q > 0)) throw DomainError("LoopSpec: q must be positive or inf");
    if (p == q) throw SingularityError("LoopSpec: p equals q");
  }

  Complex loop(Complex s) const { return plant(s) * controller(s) * std::exp(-tau * s); }
};

struct Sensitivities {
  Complex S, T;
};

// Evaluated from L = n/d as S = d/(d + n), T = n/(d + n), which stays finite
// at open-loop poles.
inline Sensitivities sensitivity_at(const LoopSpec& l, Complex s) {
  const Complex n = l.plant.numerator(s) * l.controller.numerator(s) * std::exp(-l.tau * s);
  const Complex d = l.plant.denominator(s) * l.controller.denominator(s);
  const Complex r = d + n;
  if (r == 0.0) throw SingularityError("sensitivity: 1 + L vanishes (closed-loop pole on the contour)");
  return {d / r, n / r};
}

inline Sensitivities sensitivity(const LoopSpec& l, double omega) { return sensitivity_at(l, Complex(0.0, omega)); }

inline FrequencyResponse complementary(const LoopSpec& l) {
  return [l](double w) { return sensitivity(l, w).T; };
}

inline double fragility(double p, double q, double tau) {
  if (!(p > 0)) throw DomainError("fragility: p must be positive");
  if (!(q > 0)) throw DomainError("fragility: q must be positive or inf");
  if (!(tau >= 0)) throw DomainError("fragility: tau must be nonnegative");
  if (p == q) throw SingularityError("fragility: p = q makes F infinite");
  return tau * p + (std::isinf(q) ? 0.0 : std::log(std::abs((p + q) / (p - q))));
}

struct FrequencyGrid {
  double lo = 1e-4;
  double hi = 1e4;
  std::size_t points = 10000;

  std::vector<double> values() const {
    if (!(lo > 0 && lo < hi) || points < 2) throw DomainError("FrequencyGrid: need 0 < lo < hi and >= 2 points");
    std::vector<double> w(points);
    const double a = std::log(lo), b = std::log(hi);
    for (std::size_t i = 0; i < points; ++i)
      w[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(points - 1));
    return w;
  }
};

// Grid maximum of |G(j omega)| over the grid, refined by golden section
// between the neighbors of the grid argmax.
inline double band_peak(const FrequencyResponse& G, const FrequencyGrid& grid) {
  const auto w = grid.values();
  std::size_t best = 0;
  double peak = -1.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double m = std::abs(G(w[i]));
    if (m > peak) {
      peak = m;
      best = i;
    }
  }
  const double lo = w[best == 0 ? 0 : best - 1];
  const double hi = w[best + 1 == w.size() ? best : best + 1];
  if (lo < hi) {
    const double x = densemath::minimize_scalar([&](double om) { return -std::abs(G(om)); }, lo, hi, 1e-12 * hi);
    peak = std::max(peak, std::abs(G(x)));
  }
  return peak;
}

// sup over omega >= 0 of |G(j omega)|: the grid peak plus omega = 0.
inline double hinf_norm(const FrequencyResponse& G, const FrequencyGrid& grid = {}) {
  return std::max(std::abs(G(0.0)), band_peak(G, grid));
}

// Closed-loop stability by the Nyquist criterion: the counterclockwise
// winding of 1 + L(j omega) about the origin must equal the number of
// open-loop right-half-plane poles. Requires |L| < 1 at the top of the
// grid so the closing arc adds no encirclement.
inline bool nyquist_stable(const LoopSpec& l, std::size_t points = 20000, double w_max = 1e6) {
  l.validate();
  const Complex f0 = 1.0 + l.loop(0.0);
  if (std::abs(f0) < 1e-12) return false;
  const double theta0 = std::arg(f0);
  double theta = theta0;
  Complex prev = f0;
  const FrequencyGrid grid{1e-6, w_max, points};
  for (double w : grid.values()) {
    const Complex f = 1.0 + l.loop(Complex(0.0, w));
    if (std::abs(f) < 1e-12) return false;
    theta += std::arg(f / prev);
    prev = f;
  }
  if (std::abs(l.loop(Complex(0.0, w_max))) >= 1.0) return false;
  const double winding = (theta - theta0 - std::arg(prev)) / kPi;
  return std::lround(winding) == l.open_loop_rhp_poles;
}

// Plant (q - s)/(s - p), or 1/(s - p) for q = inf, under a static gain
// chosen from a log grid as the Nyquist-stable gain with the smallest
// grid peak of |T|.
inline LoopSpec stabilized_test_loop(double p, double q, double tau, std::size_t gains = 241) {
  LoopSpec l;
  l.p = p;
  l.q = q;
  l.tau = tau;
  l.plant = std::isinf(q) ? RationalDelayTf{{1.0}, {-p, 1.0}, 0.0} : RationalDelayTf{{q, -1.0}, {-p, 1.0}, 0.0};
  l.validate();
  const FrequencyGrid coarse{1e-3, 1e3, 2000};
  double best = kInf, best_k = 0.0;
  for (std::size_t i = 0; i < gains; ++i) {
    const double k = std::pow(10.0, -3.0 + 6.0 * static_cast<double>(i) / static_cast<double>(gains - 1));
    l.controller = RationalDelayTf::gain(k);
    if (!nyquist_stable(l)) continue;
    const double peak = hinf_norm(complementary(l), coarse);
    if (peak < best) {
      best = peak;
      best_k = k;
    }
  }
  if (best_k == 0.0) throw DomainError("stabilized_test_loop: no stabilizing gain on the search grid");
  l.controller = RationalDelayTf::gain(best_k);
  return l;
}

struct WeightedIntegral {
  double value = 0.0;
  bool clipped = false;  // ln|T| hit the -700 floor somewhere
};

namespace detail {

inline constexpr double kLogFloor = -700.0;

struct Simpson {
  const std::function<double(double)>& f;
  double tol;
  int max_depth;

  double run(double a, double b, double fa, double fm, double fb, double whole, int depth) const {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double diff = left + right - whole;
    if (depth >= max_depth || std::abs(diff) <= 15.0 * tol * (b - a)) return left + right + diff / 15.0;
    return run(a, m, fa, flm, fm, left, depth + 1) + run(m, b, fm, frm, fb, right, depth + 1);
  }

  double operator()(double a, double b) const {
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    return run(a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), 0);
  }
};

}  // namespace detail

// (1/pi) int ln|T(j w)| p/(p^2 + w^2) dw. With w = p tan(phi) the weight
// becomes d(phi); the integrand is even in w, so the integral is
// (2/pi) int_0^{phi_max} ln|T(j p tan phi)| d(phi), truncated where the
// remaining weight mass is below 1e-8. Adaptive Simpson on 512 panels.
inline WeightedIntegral bode_weighted_integral(const FrequencyResponse& T, double p, double mass_cutoff = 1e-8) {
  if (!(p > 0)) throw DomainError("bode_weighted_integral: p must be positive");
  WeightedIntegral out;
  const std::function<double(double)> f = [&](double phi) {
    const double m = std::abs(T(p * std::tan(phi)));
    const double v = m > 0 ? std::log(m) : -kInf;
    if (v < detail::kLogFloor) {
      out.clipped = true;
      return detail::kLogFloor;
    }
    return v;
  };
  const double phi_max = 0.5 * kPi * (1.0 - mass_cutoff);
  const detail::Simpson simpson{f, 1e-10, 30};
  const int panels = 512;
  double sum = 0.0;
  for (int i = 0; i < panels; ++i) sum += simpson(phi_max * i / panels, phi_max * (i + 1) / panels);
  out.value = 2.0 / kPi * sum;
  return out;
}

// Normalized Poisson weight mass of the band w1 <= |w| <= w2.
inline double poisson_band_mass(double p, double w1, double w2) {
  if (!(p > 0)) throw DomainError("poisson_band_mass: p must be positive");
  if (!(w1 >= 0 && w1 < w2)) throw DomainError("poisson_band_mass: need 0 <= w1 < w2");
  return 2.0 / kPi * (std::atan(w2 / p) - std::atan(w1 / p));
}

struct WaterbedResult {
  double c1 = 0.0, c2 = 0.0;
  double M1 = 0.0, M2 = 0.0;
  double lhs = 0.0;
  double F = 0.0;
  bool holds = false;
};

// c1 is the band mass of the weight and c2 = 1 - c1, so that
// c1 ln M1 + c2 ln M2 bounds the weighted integral of ln|T| from above.
inline WaterbedResult waterbed_check(const FrequencyResponse& T, double p, double w1, double w2, double F,
                                     const FrequencyGrid& grid = {}) {
  if (!(w1 > 0 && w1 < w2)) throw DomainError("waterbed_check: need 0 < w1 < w2");
  WaterbedResult r;
  r.F = F;
  r.c1 = poisson_band_mass(p, w1, w2);
  r.c2 = 1.0 - r.c1;
  r.M1 = band_peak(T, {w1, w2, 4000});
  r.M2 = std::max(hinf_norm(T, grid), r.M1);
  r.lhs = r.c1 * std::log(r.M1) + r.c2 * std::log(r.M2);
  r.holds = r.lhs >= F - 1e-3;
  return r;
}

}  // namespace lca::bode
