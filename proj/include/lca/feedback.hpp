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

// Real-time feedback layer: PD tracking, flatness-based tracking of the
// Dubins' car, CLF and CBF quadratic programs, the ACC safety filter with a
// tunable robustness term, and reduced-order safety certificates.

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lca/densemath.hpp"
#include "lca/dynamics.hpp"
#include "lca/errors.hpp"

namespace lca::feedback {

using densemath::QpProblem;
using dynamics::DubinsInput;
using dynamics::DubinsState;
using dynamics::FlatInput;
using dynamics::FlatState;
using Vector2 = Eigen::Vector2d;
using Vector3 = Eigen::Vector3d;
using Matrix2 = Eigen::Matrix2d;

inline void require_spd(const Matrix& K, const char* what) {
  if (K.rows() != K.cols()) throw DomainError(std::string(what) + " must be square");
  if ((K - K.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, K.cwiseAbs().maxCoeff()))
    throw DomainError(std::string(what) + " must be symmetric");
  Eigen::SelfAdjointEigenSolver<Matrix> es(K);
  if (es.eigenvalues().minCoeff() <= 0) throw DomainError(std::string(what) + " must be positive definite");
}

struct PdGains {
  Matrix Kp;
  Matrix Kd;

  void validate() const {
    require_spd(Kp, "K_P");
    require_spd(Kd, "K_D");
    if (Kp.rows() != Kd.rows()) throw DomainError("PdGains: K_P and K_D sizes differ");
  }
};

inline Vector pd_control(const PdGains& g, const Vector& q, const Vector& qd, const Vector& rq, const Vector& rqd,
                         const Vector& rqdd, const Vector& u_ff) {
  const Index n = q.size();
  if (qd.size() != n || rq.size() != n || rqd.size() != n || rqdd.size() != n || u_ff.size() != n ||
      g.Kp.rows() != n)
    throw DomainError("pd_control: inconsistent dimensions");
  return u_ff + rqdd - g.Kp * (q - rq) - g.Kd * (qd - rqd);
}

// Gains of the flat tracking controller. The flat PD (Kp_flat, Kd_flat) acts
// on the flat state against the planned reference; (Kp, Kd) act on the
// measured Cartesian state against the lookahead flat state.
struct FlatTrackingGains {
  Matrix2 Kp_flat = 4.0 * Matrix2::Identity();
  Matrix2 Kd_flat = 4.0 * Matrix2::Identity();
  Matrix2 Kp = 4.0 * Matrix2::Identity();
  Matrix2 Kd = 4.0 * Matrix2::Identity();
  double lookahead = dynamics::kDefaultFastStep;

  void validate() const {
    require_spd(Kp_flat, "K_P flat");
    require_spd(Kd_flat, "K_D flat");
    require_spd(Kp, "K_P");
    require_spd(Kd, "K_D");
    if (!(lookahead >= 0)) throw DomainError("FlatTrackingGains: lookahead must be nonnegative");
  }
};

struct FlatReference {
  Vector2 y = Vector2::Zero();     // reference position
  Vector2 v = Vector2::Zero();     // reference velocity
  Vector2 vdot = Vector2::Zero();  // reference acceleration
};

struct FlatTrackingResult {
  DubinsInput u;
  DubinsInput u_ff;
  DubinsInput u_fb;
  FlatInput a;
  FlatState z_look;
};

inline Vector2 finite_difference_accel(const Vector2& v_k, const Vector2& v_km1, double tau) {
  if (!(tau > 0)) throw DomainError("finite_difference_accel: tau must be positive");
  return (v_k - v_km1) / tau;
}

// z_now = (x1, x2, dx1, dx2) from measurements. `z_pred` is the lookahead
// state produced one lookahead interval earlier, i.e. the flat state the
// previous call expected for now; without it the feedback term is zero. The
// feedback PD output is a Cartesian acceleration correction c applied as an
// extra flat acceleration: u = u_flat(rollout(z, a + c, h), a + c).
inline FlatTrackingResult flat_tracking_control(const FlatTrackingGains& g, const FlatState& z_now,
                                                const FlatReference& ref, const FlatState* z_pred = nullptr) {
  FlatTrackingResult r;
  r.a = ref.vdot - g.Kp_flat * (z_now.head<2>() - ref.y) - g.Kd_flat * (z_now.tail<2>() - ref.v);
  r.z_look = dynamics::flat_rollout(z_now, r.a, g.lookahead);
  r.u_ff = dynamics::flat_to_input(r.z_look, r.a);
  if (!z_pred) {
    r.u = r.u_ff;
    return r;
  }
  const Vector2 c = -g.Kp * (z_now.head<2>() - z_pred->head<2>()) - g.Kd * (z_now.tail<2>() - z_pred->tail<2>());
  const FlatInput ac = r.a + c;
  r.u = dynamics::flat_to_input(dynamics::flat_rollout(z_now, ac, g.lookahead), ac);
  r.u_fb = {r.u.u1 - r.u_ff.u1, r.u.u2 - r.u_ff.u2};
  return r;
}

struct ClfSpec {
  double lambda = 1.0;
  double k1 = 1.0;
  double k2 = 1.0;
  double c = 2.0;

  void validate() const {
    if (!(lambda > 0)) throw DomainError("ClfSpec: lambda must be positive");
    if (!(k1 > 0 && k1 <= k2)) throw DomainError("ClfSpec: need 0 < k1 <= k2");
    if (!(c > 0)) throw DomainError("ClfSpec: exponent c must be positive");
  }
};

// V and its Lie derivatives along the control-affine dynamics:
// dV/dt = LfV + LgV u.
struct ClfValue {
  double V = 0.0;
  double LfV = 0.0;
  Vector LgV;
};

struct CbfSpec {
  double alpha = 1.0;

  void validate() const {
    if (!(alpha > 0)) throw DomainError("CbfSpec: alpha must be positive");
  }
};

// h and its Lie derivatives: dh/dt = Lfh + Lgh v.
struct BarrierValue {
  double h = 0.0;
  double Lfh = 0.0;
  Vector Lgh;
  double robustness = 0.0;  // extra margin required on the right-hand side
};

namespace detail {

inline double authority_tol(const Vector& g) { return 1e-12 * std::max(1.0, g.cwiseAbs().maxCoeff()); }

}  // namespace detail

inline constexpr double kClfSlack = 1e-12;

inline Vector clf_qp(const ClfSpec& clf, const ClfValue& V, const Vector& u_ff) {
  clf.validate();
  if (V.LgV.size() != u_ff.size()) throw DomainError("clf_qp: LgV and u_ff sizes differ");
  const double rhs = -clf.lambda * V.V - V.LfV;
  // Near V = 0 the condition is met up to rounding; the absolute slack keeps
  // round-off from reading as lost authority.
  if (V.LgV.dot(u_ff) <= rhs + kClfSlack) return u_ff;
  if (V.LgV.norm() <= detail::authority_tol(V.LgV))
    throw InfeasibleError("clf_qp: no control authority and the decrease condition is violated");
  const Index n = u_ff.size();
  QpProblem q = QpProblem::unconstrained(2.0 * Matrix::Identity(n, n), -2.0 * u_ff);
  q.Ain = V.LgV.transpose();
  q.bin = Vector::Constant(1, rhs);
  return densemath::solve_qp(q).x;
}

// min (v - v_des)' Gamma (v - v_des) s.t. Lfh + Lgh v >= -alpha h + robustness
// for every barrier.
inline Vector cbf_filter(const CbfSpec& cbf, const std::vector<BarrierValue>& barriers, const Vector& v_des,
                         const Matrix& Gamma) {
  cbf.validate();
  const Index n = v_des.size();
  if (Gamma.rows() != n) throw DomainError("cbf_filter: Gamma has the wrong size");
  require_spd(Gamma, "Gamma");
  QpProblem q = QpProblem::unconstrained(2.0 * Gamma, -2.0 * Gamma * v_des);
  q.Ain = Matrix(static_cast<Index>(barriers.size()), n);
  q.bin = Vector(static_cast<Index>(barriers.size()));
  bool violated = false;
  for (std::size_t i = 0; i < barriers.size(); ++i) {
    const auto& b = barriers[i];
    if (b.Lgh.size() != n) throw DomainError("cbf_filter: barrier gradient has the wrong size");
    const double rhs = -cbf.alpha * b.h + b.robustness - b.Lfh;
    if (b.Lgh.dot(v_des) < rhs) {
      violated = true;
      if (b.Lgh.norm() <= detail::authority_tol(b.Lgh))
        throw InfeasibleError("cbf_filter: no control authority and the barrier condition is violated");
    }
    q.Ain.row(static_cast<Index>(i)) = -b.Lgh.transpose();
    q.bin(static_cast<Index>(i)) = -rhs;
  }
  if (!violated) return v_des;
  try {
    return densemath::solve_qp(q).x;
  } catch (const InfeasibleError&) {
    throw InfeasibleError("cbf_filter: barrier constraints are jointly infeasible");
  }
}

inline Vector cbf_filter(const CbfSpec& cbf, const BarrierValue& b, const Vector& v_des, const Matrix& Gamma) {
  return cbf_filter(cbf, std::vector<BarrierValue>{b}, v_des, Gamma);
}

inline Vector cbf_filter(const CbfSpec& cbf, const BarrierValue& b, const Vector& v_des) {
  return cbf_filter(cbf, b, v_des, Matrix::Identity(v_des.size(), v_des.size()));
}

struct ClfCbfResult {
  Vector u;
  double delta = 0.0;
};

// Variables (u, delta): min ||u - u_ff||^2 + p delta^2 with the CLF decrease
// softened by delta and every barrier condition kept hard.
inline ClfCbfResult clf_cbf_qp(const ClfSpec& clf, const ClfValue& V, const CbfSpec& cbf,
                               const std::vector<BarrierValue>& barriers, const Vector& u_ff, double p) {
  clf.validate();
  cbf.validate();
  if (!(p > 0)) throw DomainError("clf_cbf_qp: penalty p must be positive");
  const Index n = u_ff.size();
  if (V.LgV.size() != n) throw DomainError("clf_cbf_qp: LgV and u_ff sizes differ");
  for (const auto& b : barriers) {
    const double rhs = -cbf.alpha * b.h + b.robustness - b.Lfh;
    if (b.Lgh.norm() <= detail::authority_tol(b.Lgh) && rhs > 0)
      throw InfeasibleError("clf_cbf_qp: barrier row has no control authority");
  }
  Matrix H = Matrix::Zero(n + 1, n + 1);
  H.topLeftCorner(n, n) = 2.0 * Matrix::Identity(n, n);
  H(n, n) = 2.0 * p;
  Vector f = Vector::Zero(n + 1);
  f.head(n) = -2.0 * u_ff;
  QpProblem q = QpProblem::unconstrained(H, f);
  const Index m = 1 + static_cast<Index>(barriers.size());
  q.Ain = Matrix::Zero(m, n + 1);
  q.bin = Vector::Zero(m);
  q.Ain.row(0).head(n) = V.LgV.transpose();
  q.Ain(0, n) = -1.0;
  q.bin(0) = -clf.lambda * V.V - V.LfV;
  for (std::size_t i = 0; i < barriers.size(); ++i) {
    const auto& b = barriers[i];
    const Index r = 1 + static_cast<Index>(i);
    q.Ain.row(r).head(n) = -b.Lgh.transpose();
    q.bin(r) = cbf.alpha * b.h - b.robustness + b.Lfh;
  }
  try {
    const auto s = densemath::solve_qp(q);
    return {s.x.head(n), s.x(n)};
  } catch (const InfeasibleError&) {
    throw InfeasibleError("clf_cbf_qp: barrier constraints are infeasible");
  }
}

// Disk obstacle for a point q with single-integrator dynamics dq/dt = v:
// h(q) = ||q - c|| - r.
inline BarrierValue single_integrator_obstacle(const Vector& q, const Vector& center, double r) {
  const Vector d = q - center;
  const double dn = d.norm();
  if (dn == 0.0) throw SingularityError("single_integrator_obstacle: gradient undefined at the center");
  return {dn - r, 0.0, d / dn, 0.0};
}

// Obstacle barrier on the Dubins' car: h = d0 - r - kappa cos(theta - theta0)
// with d0 the distance to the obstacle and theta0 the bearing toward it.
struct ObstacleBarrier {
  Vector2 center = Vector2::Zero();
  double radius = 0.1;
  double kappa = 0.05;

  void validate() const {
    if (!(radius > 0)) throw DomainError("ObstacleBarrier: radius must be positive");
    if (!(kappa > 0)) throw DomainError("ObstacleBarrier: kappa must be positive");
  }

  double value(const DubinsState& q) const {
    const double dx = center(0) - q.x1, dy = center(1) - q.x2;
    const double th0 = std::atan2(dy, dx);
    return std::hypot(dx, dy) - radius - kappa * std::cos(q.theta - th0);
  }

  // Plain clearance d0 - r.
  double clearance(const DubinsState& q) const { return std::hypot(center(0) - q.x1, center(1) - q.x2) - radius; }

  Vector3 gradient(const DubinsState& q) const {
    const double dx = center(0) - q.x1, dy = center(1) - q.x2;
    const double d2 = dx * dx + dy * dy;
    const double d0 = std::sqrt(d2);
    if (d0 == 0.0) throw SingularityError("ObstacleBarrier: gradient undefined at the obstacle center");
    const double th0 = std::atan2(dy, dx);
    const double s = kappa * std::sin(q.theta - th0);
    // d theta0 / d x1 = dy / d0^2, d theta0 / d x2 = -dx / d0^2
    return {-dx / d0 - s * dy / d2, -dy / d0 + s * dx / d2, s};
  }

  BarrierValue dubins(const DubinsState& q) const {
    const Vector3 grad = gradient(q);
    Vector Lgh(2);
    Lgh << grad(0) * std::cos(q.theta) + grad(1) * std::sin(q.theta), grad(2);
    return {value(q), 0.0, Lgh, 0.0};
  }
};

// Point-mass car following a lead vehicle at constant speed v0.
// y = (position, speed), z = gap, input u = wheel force.
struct AccSpec {
  double m = 1650.0;
  double c0 = 0.1;
  double c1 = 5.0;
  double c2 = 0.25;
  double v0 = 13.89;
  std::array<double, 6> a{0.0, 1.8, 0.0, 0.0, 0.0, 0.0};
  double eps0 = 1e6;
  double beta = 1.0;
  double alpha = 1.0;

  void validate() const {
    if (!(m > 0)) throw DomainError("AccSpec: mass must be positive");
    if (!(eps0 > 0)) throw DomainError("AccSpec: eps0 must be positive");
    if (!(beta >= 0)) throw DomainError("AccSpec: beta must be nonnegative");
    if (!(alpha > 0)) throw DomainError("AccSpec: alpha must be positive");
  }

  double rolling(double speed) const { return c0 + c1 * speed + c2 * speed * speed; }

  double barrier(const Vector2& y, double z) const {
    const double s = y(1);
    return z - (a[0] + a[1] * s + a[2] * v0 + a[3] * s * s + a[4] * s * v0 + a[5] * v0 * v0);
  }

  BarrierValue barrier_value(const Vector2& y, double z) const {
    const double s = y(1);
    const double c = a[1] + 2.0 * a[3] * s + a[4] * v0;  // d(offset)/d(speed)
    BarrierValue b;
    b.h = barrier(y, z);
    b.Lfh = (v0 - s) + c * rolling(s) / m;
    b.Lgh = Vector::Constant(1, -c / m);
    const double eps = std::isinf(eps0) ? eps0 : eps0 * std::exp(beta * b.h);
    b.robustness = std::isinf(eps) ? 0.0 : (c / m) * (c / m) / eps;
    return b;
  }
};

inline double acc_issf_filter(const AccSpec& spec, const Vector2& y, double z, double u_desired) {
  spec.validate();
  CbfSpec cbf{spec.alpha};
  return cbf_filter(cbf, spec.barrier_value(y, z), Vector::Constant(1, u_desired))(0);
}

struct SafetyCertificate {
  double K_h = 1.0;
  double M = 1.0;
  double lambda = 2.0;
  double alpha = 1.0;
};

struct CertificateResult {
  bool inside = false;
  double margin = 0.0;
};

inline CertificateResult certify_reduced_order_safety(const SafetyCertificate& c, double h, double err_norm) {
  if (!(c.lambda > c.alpha)) throw CertificateError("certify_reduced_order_safety: requires lambda > alpha");
  const double margin = h - c.K_h * c.M / (c.lambda - c.alpha) * err_norm;
  return {margin >= 0, margin};
}

struct ExponentialFit {
  double M = 1.0;
  double lambda = 0.0;
};

// Fits ||e(t)|| ~ M exp(-lambda t) ||e(0)|| by least squares on
// log ||e|| over the first `fraction` of the samples.
inline ExponentialFit fit_exponential_tracking(const std::vector<double>& t, const std::vector<double>& err,
                                               double fraction = 0.25) {
  if (t.size() != err.size() || t.size() < 2) throw DomainError("fit_exponential_tracking: need matched samples");
  if (!(err.front() > 0)) throw DomainError("fit_exponential_tracking: initial error must be positive");
  // Slope from log error over the leading window (skipping t0, where the
  // error may sit below the envelope); M is the tightest envelope constant
  // over all samples for that rate.
  const std::size_t n =
      std::min(t.size() - 1, std::max<std::size_t>(2, static_cast<std::size_t>(fraction * static_cast<double>(t.size()))));
  Matrix A(static_cast<Index>(n), 2);
  Vector b(static_cast<Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = i + 1;
    if (!(err[j] > 0)) throw DomainError("fit_exponential_tracking: error samples must be positive");
    A(static_cast<Index>(i), 0) = 1.0;
    A(static_cast<Index>(i), 1) = -(t[j] - t.front());
    b(static_cast<Index>(i)) = std::log(err[j]);
  }
  const double lambda = densemath::solve_min_norm_lls(A, b)(1);
  double M = 1.0;
  for (std::size_t i = 0; i < t.size(); ++i)
    M = std::max(M, err[i] * std::exp(lambda * (t[i] - t.front())) / err.front());
  return {M, lambda};
}

}  // namespace lca::feedback
