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

// Receding-horizon trajectory planner on a linear reduced-order model, and a
// data-driven predictor built from Hankel matrices of recorded trajectories.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "lca/decision.hpp"
#include "lca/densemath.hpp"
#include "lca/dynamics.hpp"
#include "lca/errors.hpp"

namespace lca::planning {

using densemath::QpProblem;

// y(i+1) = A y(i) + B v(i); the first `position_dims` state entries are the
// planar position constrained by the waypoint tube and the box.
struct RomSpec {
  Matrix A;
  Matrix B;
  double tau = 1.0;
  Index position_dims = 2;

  Index p() const { return A.rows(); }
  Index s() const { return B.cols(); }

  static RomSpec single_integrator(double tau) {
    auto [A, B] = dynamics::discretize_single_integrator(tau);
    return {A, B, tau, 2};
  }
  static RomSpec double_integrator(double tau) {
    auto [A, B] = dynamics::discretize_double_integrator(tau);
    return {A, B, tau, 2};
  }

  void validate() const {
    if (!(tau > 0)) throw DomainError("RomSpec: tau must be positive");
    if (A.rows() != A.cols() || B.rows() != A.rows()) throw DomainError("RomSpec: A must be p x p and B p x s");
    if (position_dims < 0 || position_dims > p()) throw DomainError("RomSpec: position_dims out of range");
  }
};

struct PlanProblem {
  int horizon = 20;
  double half_width = 1.0 / 14;  // cell half-width
  double margin = 0.05;          // tracking error budget
  double box = 0.95;             // tightened position box
  double w_smooth = 1.0;
  double w_effort = 1.0;

  double tube() const { return half_width - margin; }

  void validate() const {
    if (horizon < 1) throw DomainError("PlanProblem: horizon must be >= 1");
    if (!(box > 0)) throw DomainError("PlanProblem: box must be positive");
    if (!(w_smooth >= 0 && w_effort >= 0 && w_smooth + w_effort > 0))
      throw DomainError("PlanProblem: weights must be nonnegative and not both zero");
  }
};

struct ReferenceTrajectory {
  std::vector<Vector> y;  // horizon + 1 states
  std::vector<Vector> v;  // horizon inputs
  int start = 0;
};

namespace detail {

inline const decision::Point& waypoint_at(const decision::Waypoints& w, int i) {
  if (w.points.empty()) throw DomainError("planning: empty waypoint sequence");
  const std::size_t idx = std::min<std::size_t>(static_cast<std::size_t>(std::max(i, 0)), w.points.size() - 1);
  return w.points[idx];
}

}  // namespace detail

// Variables are stacked as [y(k) .. y(k+N), v(k) .. v(k+N-1)]. Tube and box
// rows apply to y(k+1) .. y(k+N). The state y(k) is pinned by equality to
// x_now, so it is never constrained by the tube or the box.
inline QpProblem build_plan_qp(const RomSpec& rom, const PlanProblem& prob, const decision::Waypoints& w,
                               const Vector& x_now, int k) {
  rom.validate();
  prob.validate();
  const Index p = rom.p(), s = rom.s(), N = prob.horizon, d = rom.position_dims;
  if (x_now.size() != p) throw DomainError("build_plan_qp: x_now has the wrong size");
  if (!x_now.allFinite()) throw DomainError("build_plan_qp: x_now must be finite");
  const Index ny = (N + 1) * p, n = ny + N * s;
  auto yi = [&](Index i) { return i * p; };
  auto vi = [&](Index i) { return ny + i * s; };

  QpProblem q;
  q.H = Matrix::Zero(n, n);
  q.f = Vector::Zero(n);
  for (Index i = 0; i < N; ++i) {
    // w_s ||y(i+1) - y(i)||^2
    const Matrix I = Matrix::Identity(p, p);
    q.H.block(yi(i), yi(i), p, p) += 2 * prob.w_smooth * I;
    q.H.block(yi(i + 1), yi(i + 1), p, p) += 2 * prob.w_smooth * I;
    q.H.block(yi(i), yi(i + 1), p, p) -= 2 * prob.w_smooth * I;
    q.H.block(yi(i + 1), yi(i), p, p) -= 2 * prob.w_smooth * I;
    q.H.block(vi(i), vi(i), s, s) += 2 * prob.w_effort * Matrix::Identity(s, s);
  }

  q.Aeq = Matrix::Zero(p + N * p, n);
  q.beq = Vector::Zero(p + N * p);
  q.Aeq.block(0, yi(0), p, p).setIdentity();
  q.beq.head(p) = x_now;
  for (Index i = 0; i < N; ++i) {
    const Index r = p + i * p;
    q.Aeq.block(r, yi(i + 1), p, p).setIdentity();
    q.Aeq.block(r, yi(i), p, p) -= rom.A;
    q.Aeq.block(r, vi(i), p, s) -= rom.B;
  }

  const Index rows = 4 * d * N;
  q.Ain = Matrix::Zero(rows, n);
  q.bin = Vector::Zero(rows);
  Index r = 0;
  for (Index i = 1; i <= N; ++i) {
    const auto& wp = detail::waypoint_at(w, k + static_cast<int>(i));
    for (Index j = 0; j < d; ++j) {
      const Index col = yi(i) + j;
      q.Ain(r, col) = 1.0;
      q.bin(r++) = wp(j) + prob.tube();
      q.Ain(r, col) = -1.0;
      q.bin(r++) = -(wp(j) - prob.tube());
      q.Ain(r, col) = 1.0;
      q.bin(r++) = prob.box;
      q.Ain(r, col) = -1.0;
      q.bin(r++) = prob.box;
    }
  }
  return q;
}

inline ReferenceTrajectory unpack(const RomSpec& rom, const PlanProblem& prob, const Vector& x, int k) {
  const Index p = rom.p(), s = rom.s(), N = prob.horizon;
  ReferenceTrajectory t;
  t.start = k;
  for (Index i = 0; i <= N; ++i) t.y.push_back(x.segment(i * p, p));
  for (Index i = 0; i < N; ++i) t.v.push_back(x.segment((N + 1) * p + i * s, s));
  return t;
}

inline Vector pack(const ReferenceTrajectory& t) {
  const Index p = t.y.front().size(), s = t.v.empty() ? 0 : t.v.front().size();
  Vector x(static_cast<Index>(t.y.size()) * p + static_cast<Index>(t.v.size()) * s);
  Index o = 0;
  for (const auto& y : t.y) {
    x.segment(o, p) = y;
    o += p;
  }
  for (const auto& v : t.v) {
    x.segment(o, s) = v;
    o += s;
  }
  return x;
}

inline ReferenceTrajectory solve_plan(const RomSpec& rom, const PlanProblem& prob, const decision::Waypoints& w,
                                      const Vector& x_now, int k, const ReferenceTrajectory* warm = nullptr) {
  if (prob.margin >= prob.half_width) throw InfeasibleError("solve_plan: waypoint tube is empty after tightening");
  const QpProblem q = build_plan_qp(rom, prob, w, x_now, k);
  densemath::QpOptions opt;
  if (warm) opt.warm_start = pack(*warm);
  try {
    return unpack(rom, prob, densemath::solve_qp(q, opt).x, k);
  } catch (const InfeasibleError& e) {
    throw InfeasibleError(std::string("solve_plan: planner infeasible at step ") + std::to_string(k) + ": " + e.what());
  }
}

// Shifted warm start for step k+1: drop the first sample, repeat the last
// input, and pin the first state to the new measurement.
inline ReferenceTrajectory shift(const RomSpec& rom, const ReferenceTrajectory& t, const Vector& x_next) {
  ReferenceTrajectory out;
  out.start = t.start + 1;
  out.y.assign(t.y.begin() + 1, t.y.end());
  out.v.assign(t.v.begin() + 1, t.v.end());
  out.v.push_back(t.v.back());
  out.y.front() = x_next;
  for (std::size_t i = 0; i + 1 < out.y.size(); ++i) out.y[i + 1] = rom.A * out.y[i] + rom.B * out.v[i];
  out.y.push_back(rom.A * out.y.back() + rom.B * out.v.back());
  return out;
}

struct PlanAudit {
  double dynamics_residual = 0.0;
  double initial_residual = 0.0;
  double min_tube_slack = 0.0;
  double min_box_slack = 0.0;
};

// Re-checks the raw planning constraints from the trajectory alone.
inline PlanAudit audit_plan(const RomSpec& rom, const PlanProblem& prob, const decision::Waypoints& w,
                            const Vector& x_now, const ReferenceTrajectory& t) {
  PlanAudit a;
  a.min_tube_slack = std::numeric_limits<double>::infinity();
  a.min_box_slack = std::numeric_limits<double>::infinity();
  a.initial_residual = (t.y.front() - x_now).cwiseAbs().maxCoeff();
  for (std::size_t i = 0; i < t.v.size(); ++i)
    a.dynamics_residual =
        std::max(a.dynamics_residual, (t.y[i + 1] - rom.A * t.y[i] - rom.B * t.v[i]).cwiseAbs().maxCoeff());
  for (std::size_t i = 1; i < t.y.size(); ++i) {
    const auto& wp = detail::waypoint_at(w, t.start + static_cast<int>(i));
    for (Index j = 0; j < rom.position_dims; ++j) {
      a.min_tube_slack = std::min(a.min_tube_slack, prob.tube() - std::abs(t.y[i](j) - wp(j)));
      a.min_box_slack = std::min(a.min_box_slack, prob.box - std::abs(t.y[i](j)));
    }
  }
  return a;
}

// Linear map from [v_ini; y_ini; v_future] to y_future fitted on Hankel
// windows of recorded data.
struct HankelPredictor {
  Matrix G;
  int T_ini = 1;
  int N = 1;
  Index s = 1;
  Index p = 1;
};

// Window at k uses v(k-T_ini .. k-1), y(k-T_ini+1 .. k), v(k .. k+N-1) and
// predicts y(k+1 .. k+N). v holds one input per column (s x L) and y one
// output per column (p x L+1).
inline HankelPredictor fit_hankel(const Matrix& v, const Matrix& y, int T_ini, int N) {
  if (T_ini < 1 || N < 1) throw DomainError("fit_hankel: T_ini and N must be >= 1");
  const Index s = v.rows(), p = y.rows(), L = v.cols();
  if (y.cols() != L + 1) throw DomainError("fit_hankel: y needs one more sample than v");
  if (L < (T_ini + N + 1) * (s + 1)) throw ExcitationError("fit_hankel: data record too short");
  const Index W = L - N - T_ini + 1;
  const Index rv = T_ini * s, ry = T_ini * p, rf = N * s;
  Matrix Phi(rv + ry + rf, W), Yf(N * p, W);
  for (Index c = 0; c < W; ++c) {
    const Index k = c + T_ini;
    for (Index i = 0; i < T_ini; ++i) {
      Phi.block(i * s, c, s, 1) = v.col(k - T_ini + i);
      Phi.block(rv + i * p, c, p, 1) = y.col(k - T_ini + 1 + i);
    }
    for (Index i = 0; i < N; ++i) {
      Phi.block(rv + ry + i * s, c, s, 1) = v.col(k + i);
      Yf.block(i * p, c, p, 1) = y.col(k + 1 + i);
    }
  }
  Matrix Hv(rv + rf, W);
  Hv.topRows(rv) = Phi.topRows(rv);
  Hv.bottomRows(rf) = Phi.bottomRows(rf);
  const double scale = std::max(1.0, Hv.cwiseAbs().maxCoeff());
  if (densemath::numerical_rank(Hv / scale, 1e-9) < rv + rf)
    throw ExcitationError("fit_hankel: input Hankel matrix lacks full row rank");
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(Phi.transpose());
  cod.setThreshold(1e-10);
  HankelPredictor h;
  h.G = cod.solve(Yf.transpose()).transpose();
  h.T_ini = T_ini;
  h.N = N;
  h.s = s;
  h.p = p;
  return h;
}

inline Vector predict(const HankelPredictor& h, const Vector& v_ini, const Vector& y_ini, const Vector& v_future) {
  if (v_ini.size() != h.T_ini * h.s || y_ini.size() != h.T_ini * h.p || v_future.size() != h.N * h.s)
    throw DomainError("predict: window sizes do not match the predictor");
  Vector phi(v_ini.size() + y_ini.size() + v_future.size());
  phi << v_ini, y_ini, v_future;
  return h.G * phi;
}

}  // namespace lca::planning
