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

// Dense linear algebra kernel shared by every layer: least squares, a small
// primal active-set QP solver, and golden-section scalar minimization.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lca/errors.hpp"

namespace lca {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

namespace densemath {

// argmin ||Ax - b||_2 for full-column-rank A.
inline Vector solve_lls(const Matrix& A, const Vector& b) {
  if (A.rows() != b.size()) throw DomainError("solve_lls: row count of A does not match b");
  if (A.cols() == 0) return Vector(0);
  Eigen::ColPivHouseholderQR<Matrix> qr(A);
  qr.setThreshold(1e-12);
  if (qr.rank() < A.cols()) throw SingularityError("solve_lls: A is rank deficient");
  Vector x = qr.solve(b);
  // One refinement pass keeps the residual orthogonal to range(A) at 1e-10.
  const Vector r = b - A * x;
  x += qr.solve(r);
  return x;
}

// Minimum-norm least-squares solution; accepts rank-deficient A.
inline Vector solve_min_norm_lls(const Matrix& A, const Vector& b) {
  if (A.rows() != b.size()) throw DomainError("solve_min_norm_lls: row count of A does not match b");
  if (A.cols() == 0) return Vector(0);
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(A);
  cod.setThreshold(1e-12);
  return cod.solve(b);
}

inline Index numerical_rank(const Matrix& A, double threshold = 1e-10) {
  if (A.size() == 0) return 0;
  Eigen::ColPivHouseholderQR<Matrix> qr(A);
  qr.setThreshold(threshold);
  return qr.rank();
}

// Dense convex QP:
//   minimize   0.5 x'Hx + f'x + constant
//   subject to Aeq x = beq,  Ain x <= bin
struct QpProblem {
  Matrix H;
  Vector f;
  Matrix Aeq;
  Vector beq;
  Matrix Ain;
  Vector bin;
  double constant = 0.0;

  static QpProblem unconstrained(Matrix H, Vector f) {
    QpProblem p;
    const Index n = f.size();
    p.H = std::move(H);
    p.f = std::move(f);
    p.Aeq = Matrix(0, n);
    p.beq = Vector(0);
    p.Ain = Matrix(0, n);
    p.bin = Vector(0);
    return p;
  }

  Index num_vars() const { return f.size(); }

  double objective(const Vector& x) const { return 0.5 * x.dot(H * x) + f.dot(x) + constant; }

  void validate() const {
    const Index n = f.size();
    if (H.rows() != n || H.cols() != n) throw DomainError("QpProblem: H must be n x n");
    if (Aeq.cols() != n || Aeq.rows() != beq.size())
      throw DomainError("QpProblem: equality block has inconsistent dimensions");
    if (Ain.cols() != n || Ain.rows() != bin.size())
      throw DomainError("QpProblem: inequality block has inconsistent dimensions");
    const double scale = std::max(1.0, H.cwiseAbs().maxCoeff());
    if (n > 0 && (H - H.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
      throw DomainError("QpProblem: H is not symmetric");
    if (!H.allFinite() || !f.allFinite() || !Aeq.allFinite() || !beq.allFinite() || !Ain.allFinite() ||
        !bin.allFinite())
      throw DomainError("QpProblem: non-finite entries");
  }
};

struct QpSolution {
  Vector x;
  std::vector<Index> active_set;  // rows of Ain in the final working set
  Vector eq_multipliers;
  Vector ineq_multipliers;  // one per row of Ain, zero when inactive
  double objective = 0.0;
  int iterations = 0;
};

struct QpOptions {
  int max_iterations = 5000;
  double feasibility_tol = 1e-9;
  // Optional starting point; used when it satisfies every constraint.
  std::optional<Vector> warm_start;
};

struct KktResiduals {
  double stationarity = 0.0;
  double primal = 0.0;
  double complementarity = 0.0;
  double dual = 0.0;  // most negative inequality multiplier, as a positive number
};

// Residuals of the KKT system at a reported solution; independent of how the
// solution was obtained.
inline KktResiduals kkt_residuals(const QpProblem& p, const QpSolution& s) {
  KktResiduals r;
  Vector grad = p.H * s.x + p.f;
  if (p.Aeq.rows() > 0) grad += p.Aeq.transpose() * s.eq_multipliers;
  if (p.Ain.rows() > 0) grad += p.Ain.transpose() * s.ineq_multipliers;
  r.stationarity = grad.size() ? grad.cwiseAbs().maxCoeff() : 0.0;
  if (p.Aeq.rows() > 0) r.primal = (p.Aeq * s.x - p.beq).cwiseAbs().maxCoeff();
  if (p.Ain.rows() > 0) {
    const Vector slack = p.Ain * s.x - p.bin;
    r.primal = std::max(r.primal, std::max(0.0, slack.maxCoeff()));
    r.complementarity = (s.ineq_multipliers.array() * slack.array()).abs().maxCoeff();
    r.dual = std::max(0.0, -s.ineq_multipliers.minCoeff());
  }
  return r;
}

namespace detail {

struct ActiveSetState {
  Vector x;
  std::vector<Index> working;  // indices into Ain
  Vector lam_eq;
  Vector lam_in;
  int iterations = 0;
};

inline Matrix working_matrix(const Matrix& Aeq, const Matrix& Ain, const std::vector<Index>& working) {
  Matrix A(Aeq.rows() + static_cast<Index>(working.size()), Aeq.cols());
  if (Aeq.rows() > 0) A.topRows(Aeq.rows()) = Aeq;
  for (std::size_t k = 0; k < working.size(); ++k) A.row(Aeq.rows() + static_cast<Index>(k)) = Ain.row(working[k]);
  return A;
}

// Primal active-set iterations from a feasible point. Singular reduced
// Hessians are handled exactly: a descent direction of zero curvature is
// followed until a constraint blocks it, which makes the same loop solve LPs.
// Leaving constraints and blocking ties both use the smallest index (Bland).
inline ActiveSetState active_set(const Matrix& H, const Vector& f, const Matrix& Aeq, const Matrix& Ain,
                                 const Vector& bin, Vector x, std::vector<Index> working, int max_iterations) {
  const Index n = x.size();
  const Index me = Aeq.rows();
  const double hscale = std::max(1.0, H.size() ? H.cwiseAbs().maxCoeff() : 0.0);
  std::vector<char> in_working(static_cast<std::size_t>(Ain.rows()), 0);
  for (Index i : working) in_working[static_cast<std::size_t>(i)] = 1;

  ActiveSetState st;
  for (int it = 0; it < max_iterations; ++it) {
    const Vector g = H * x + f;
    const double gscale = std::max(1.0, g.cwiseAbs().maxCoeff());
    const Matrix A = working_matrix(Aeq, Ain, working);

    Matrix Z;
    if (A.rows() == 0) {
      Z = Matrix::Identity(n, n);
    } else {
      Eigen::ColPivHouseholderQR<Matrix> qr(A.transpose());
      qr.setThreshold(1e-11);
      const Index r = qr.rank();
      const Matrix Q = qr.householderQ() * Matrix::Identity(n, n);
      Z = Q.rightCols(n - r);
    }

    Vector p = Vector::Zero(n);
    bool newton = true;
    if (Z.cols() > 0) {
      const Matrix Hz = Z.transpose() * H * Z;
      const Vector gz = Z.transpose() * g;
      Eigen::SelfAdjointEigenSolver<Matrix> es(Hz);
      const Vector& ev = es.eigenvalues();
      const Matrix& V = es.eigenvectors();
      const double curv_tol = 1e-11 * hscale;
      const Vector c = V.transpose() * gz;
      Vector zero_curv = Vector::Zero(c.size());
      Vector pz = Vector::Zero(c.size());
      for (Index i = 0; i < c.size(); ++i) {
        if (ev(i) > curv_tol)
          pz -= (c(i) / ev(i)) * V.col(i);
        else
          zero_curv -= c(i) * V.col(i);
      }
      if (zero_curv.norm() > 1e-12 * gscale) {
        p = Z * zero_curv;
        newton = false;
      } else {
        p = Z * pz;
      }
    }

    const double xscale = 1.0 + x.cwiseAbs().maxCoeff();
    if (p.cwiseAbs().maxCoeff() <= 1e-13 * xscale) {
      Vector lam = Vector::Zero(A.rows());
      if (A.rows() > 0) {
        Eigen::CompleteOrthogonalDecomposition<Matrix> cod(A.transpose());
        lam = cod.solve(-g);
      }
      Index leave = -1;
      std::size_t leave_pos = 0;
      for (std::size_t k = 0; k < working.size(); ++k) {
        const double l = lam(me + static_cast<Index>(k));
        if (l < -1e-10 * gscale && (leave < 0 || working[k] < leave)) {
          leave = working[k];
          leave_pos = k;
        }
      }
      if (leave < 0) {
        st.x = x;
        st.working = working;
        st.lam_eq = lam.head(me);
        st.lam_in = Vector::Zero(Ain.rows());
        for (std::size_t k = 0; k < working.size(); ++k)
          st.lam_in(working[k]) = std::max(0.0, lam(me + static_cast<Index>(k)));
        st.iterations = it + 1;
        return st;
      }
      in_working[static_cast<std::size_t>(leave)] = 0;
      working.erase(working.begin() + static_cast<std::ptrdiff_t>(leave_pos));
      continue;
    }

    double alpha = newton ? 1.0 : std::numeric_limits<double>::infinity();
    Index block = -1;
    const double pnorm = p.norm();
    for (Index i = 0; i < Ain.rows(); ++i) {
      if (in_working[static_cast<std::size_t>(i)]) continue;
      const double ap = Ain.row(i).dot(p);
      if (ap <= 1e-14 * Ain.row(i).norm() * pnorm) continue;
      const double ai = std::max(0.0, (bin(i) - Ain.row(i).dot(x)) / ap);
      if (ai < alpha) {
        alpha = ai;
        block = i;
      }
    }
    if (!std::isfinite(alpha)) throw UnboundedError("solve_qp: objective is unbounded below");
    x += alpha * p;
    if (block >= 0) {
      working.push_back(block);
      in_working[static_cast<std::size_t>(block)] = 1;
    }
  }
  throw Error("solve_qp: active-set iteration limit reached");
}

inline std::vector<Index> independent_subset(const Matrix& Aeq, const Matrix& Ain, const std::vector<Index>& candidates) {
  std::vector<Index> chosen;
  const Index base = numerical_rank(Aeq, 1e-11);
  for (Index i : candidates) {
    std::vector<Index> trial = chosen;
    trial.push_back(i);
    if (numerical_rank(working_matrix(Aeq, Ain, trial), 1e-11) == base + static_cast<Index>(trial.size()))
      chosen = std::move(trial);
  }
  return chosen;
}

}  // namespace detail

inline QpSolution solve_qp(const QpProblem& p, const QpOptions& opt = {}) {
  p.validate();
  const Index n = p.num_vars();
  const Index me = p.Aeq.rows();
  const Index mi = p.Ain.rows();
  const double btol = opt.feasibility_tol * (1.0 + (mi ? p.bin.cwiseAbs().maxCoeff() : 0.0));

  auto max_violation = [&](const Vector& x) {
    double v = 0.0;
    if (me) v = std::max(v, (p.Aeq * x - p.beq).cwiseAbs().maxCoeff());
    if (mi) v = std::max(v, (p.Ain * x - p.bin).maxCoeff());
    return v;
  };

  Vector x0;
  if (opt.warm_start && opt.warm_start->size() == n && max_violation(*opt.warm_start) <= btol) {
    x0 = *opt.warm_start;
  } else {
    x0 = me ? solve_min_norm_lls(p.Aeq, p.beq) : Vector::Zero(n);
    if (me && (p.Aeq * x0 - p.beq).cwiseAbs().maxCoeff() > 1e-9 * (1.0 + p.beq.cwiseAbs().maxCoeff()))
      throw InfeasibleError("solve_qp: equality constraints are inconsistent");
  }

  std::vector<Index> working;
  int phase1_iterations = 0;
  const double viol = mi ? (p.Ain * x0 - p.bin).maxCoeff() : 0.0;
  if (viol > btol) {
    // Phase 1: minimize t over (x, t) with Ain x - t <= bin, t >= 0.
    Matrix H1 = Matrix::Zero(n + 1, n + 1);
    Vector f1 = Vector::Zero(n + 1);
    f1(n) = 1.0;
    Matrix Aeq1 = Matrix::Zero(me, n + 1);
    if (me) Aeq1.leftCols(n) = p.Aeq;
    Matrix Ain1 = Matrix::Zero(mi + 1, n + 1);
    Ain1.topLeftCorner(mi, n) = p.Ain;
    Ain1.block(0, n, mi, 1).setConstant(-1.0);
    Ain1(mi, n) = -1.0;
    Vector bin1(mi + 1);
    bin1.head(mi) = p.bin;
    bin1(mi) = 0.0;
    Vector z0(n + 1);
    z0.head(n) = x0;
    z0(n) = viol;
    auto lp = detail::active_set(H1, f1, Aeq1, Ain1, bin1, z0, {}, opt.max_iterations);
    phase1_iterations = lp.iterations;
    if (lp.x(n) > btol) throw InfeasibleError("solve_qp: feasible region is empty");
    x0 = lp.x.head(n);
    std::vector<Index> tight;
    for (Index i : lp.working)
      if (i < mi) tight.push_back(i);
    std::sort(tight.begin(), tight.end());
    working = detail::independent_subset(p.Aeq, p.Ain, tight);
  }

  auto st = detail::active_set(p.H, p.f, p.Aeq, p.Ain, p.bin, x0, working, opt.max_iterations);
  QpSolution sol;
  sol.x = st.x;
  sol.active_set = st.working;
  std::sort(sol.active_set.begin(), sol.active_set.end());
  sol.eq_multipliers = st.lam_eq;
  sol.ineq_multipliers = st.lam_in;
  sol.objective = p.objective(sol.x);
  sol.iterations = phase1_iterations + st.iterations;
  return sol;
}

// Golden-section search; returns x with |x - argmin| <= tol for f unimodal
// on [lo, hi].
inline double minimize_scalar(const std::function<double(double)>& f, double lo, double hi, double tol) {
  if (!(lo < hi)) throw DomainError("minimize_scalar: require lo < hi");
  if (!(tol > 0.0)) throw DomainError("minimize_scalar: require tol > 0");
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - invphi * (b - a);
  double d = a + invphi * (b - a);
  double fc = f(c), fd = f(d);
  while ((b - a) > 2.0 * tol) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace densemath
}  // namespace lca
