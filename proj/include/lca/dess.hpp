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

// Bi-criterion analysis: weighted-sum Pareto sweeps, the minimax point, the
// sigma sweet-spot measure with its closed form for least squares with
// shared rows, the dual certificate, and the LQR state/control tradeoff.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "lca/densemath.hpp"
#include "lca/errors.hpp"
#include "lca/rng.hpp"

namespace lca::dess {

// C_i(x) = ||A_i x - b_i||^2; the first k rows of A1 and A2 coincide.
struct BiCriterionLs {
  Matrix A1, A2;
  Vector b1, b2;
  Index k = 0;

  Index m() const { return A1.rows(); }
  Index n() const { return A1.cols(); }

  double C1(const Vector& x) const { return (A1 * x - b1).squaredNorm(); }
  double C2(const Vector& x) const { return (A2 * x - b2).squaredNorm(); }

  void validate_shapes() const {
    if (A1.rows() != A2.rows() || A1.cols() != A2.cols()) throw DomainError("BiCriterionLs: A1 and A2 differ in shape");
    if (b1.size() != A1.rows() || b2.size() != A2.rows()) throw DomainError("BiCriterionLs: b sizes do not match A");
    if (k < 0 || k > m()) throw DomainError("BiCriterionLs: need 0 <= k <= m");
  }

  // Full row rank of each A_i, exact equality of the first k rows, and
  // independence of the 2m - k distinct rows.
  void validate() const {
    validate_shapes();
    if (densemath::numerical_rank(A1) < m() || densemath::numerical_rank(A2) < m())
      throw DomainError("BiCriterionLs: A1 and A2 must have full row rank");
    if (k > 0 && A1.topRows(k) != A2.topRows(k)) throw DomainError("BiCriterionLs: first k rows must be shared exactly");
    if (densemath::numerical_rank(distinct_rows()) < 2 * m() - k)
      throw DomainError("BiCriterionLs: rows beyond the shared block must be independent");
  }

  Matrix distinct_rows() const {
    Matrix S(2 * m() - k, n());
    S << A1, A2.bottomRows(m() - k);
    return S;
  }
};

struct ParetoPoint {
  double lambda1 = 0.0;
  double C1 = 0.0, C2 = 0.0;
  Vector x;
};

struct ParetoSweep {
  std::vector<ParetoPoint> points;  // ordered by increasing lambda1
};

struct MinimaxPoint {
  Vector x;
  double lambda1 = 0.5;
  double C1 = 0.0, C2 = 0.0;
  bool equalized = false;

  double value() const { return std::max(C1, C2); }
};

struct DualCertificate {
  Vector mu1, mu2;
  double lambda1 = 0.5, lambda2 = 0.5;
  double dual_value = 0.0;
  double primal_value = 0.0;
  double feasibility = 0.0;  // ||A1' mu1 - A2' mu2||_inf

  double gap() const { return primal_value - dual_value; }
};

// lambda1 = r / (1 + r) with r log-spaced in [1e-4, 1e4].
inline std::vector<double> weight_grid(std::size_t count, double ratio_min = 1e-4, double ratio_max = 1e4) {
  if (count < 2) throw DomainError("weight_grid: need at least two weights");
  if (!(ratio_min > 0 && ratio_min < ratio_max)) throw DomainError("weight_grid: need 0 < ratio_min < ratio_max");
  std::vector<double> w(count);
  const double a = std::log(ratio_min), b = std::log(ratio_max);
  for (std::size_t i = 0; i < count; ++i) {
    const double r = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1));
    w[i] = r / (1.0 + r);
  }
  return w;
}

// argmin lambda1 C1 + (1 - lambda1) C2. The stacked regressor is rank
// deficient whenever rows are shared and n = 2m, so the minimum-norm
// minimizer is returned unless `strict` asks for a unique one.
inline Vector weighted_solution(const BiCriterionLs& p, double lambda1, bool strict = false) {
  if (!(lambda1 >= 0 && lambda1 <= 1)) throw DomainError("weighted_solution: lambda1 must lie in [0, 1]");
  const double s1 = std::sqrt(lambda1), s2 = std::sqrt(1.0 - lambda1);
  Matrix A(2 * p.m(), p.n());
  A << s1 * p.A1, s2 * p.A2;
  Vector b(2 * p.m());
  b << s1 * p.b1, s2 * p.b2;
  return strict ? densemath::solve_lls(A, b) : densemath::solve_min_norm_lls(A, b);
}

inline ParetoSweep pareto_sweep(const BiCriterionLs& p, const std::vector<double>& weights, bool strict = false) {
  p.validate_shapes();
  ParetoSweep s;
  s.points.reserve(weights.size());
  for (double l1 : weights) {
    if (!(l1 > 0 && l1 < 1)) throw DomainError("pareto_sweep: weights must lie in (0, 1)");
    ParetoPoint pt;
    pt.lambda1 = l1;
    pt.x = weighted_solution(p, l1, strict);
    pt.C1 = p.C1(pt.x);
    pt.C2 = p.C2(pt.x);
    s.points.push_back(std::move(pt));
  }
  std::sort(s.points.begin(), s.points.end(), [](const auto& a, const auto& b) { return a.lambda1 < b.lambda1; });
  return s;
}

// Bisection on lambda1 for C1 = C2 (C1 - C2 is nonincreasing in lambda1).
// Without a crossing the bracket collapses onto an endpoint, which yields
// the endpoint-limit solution.
inline MinimaxPoint minimax_point(const BiCriterionLs& p, int iterations = 60) {
  p.validate_shapes();
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < iterations; ++it) {
    const double mid = 0.5 * (lo + hi);
    const Vector x = weighted_solution(p, mid);
    if (p.C1(x) > p.C2(x))
      lo = mid;
    else
      hi = mid;
  }
  MinimaxPoint mm;
  mm.lambda1 = 0.5 * (lo + hi);
  mm.x = weighted_solution(p, mm.lambda1);
  mm.C1 = p.C1(mm.x);
  mm.C2 = p.C2(mm.x);
  mm.equalized = std::abs(mm.C1 - mm.C2) <= 1e-9 * std::max(1.0, mm.value());
  return mm;
}

inline double sigma_empirical(const ParetoSweep& sweep, const MinimaxPoint& mm) {
  if (sweep.points.empty()) throw DomainError("sigma_empirical: empty sweep");
  double s = -std::numeric_limits<double>::infinity();
  for (const auto& pt : sweep.points) s = std::max({s, mm.C1 - pt.C1, mm.C2 - pt.C2});
  return s;
}

inline double sigma_closed_form(const BiCriterionLs& p) {
  p.validate();
  return 0.25 * (p.b1 - p.b2).head(p.k).squaredNorm();
}

inline DualCertificate dual_certificate(const BiCriterionLs& p, double tol = 1e-6) {
  p.validate();
  DualCertificate d;
  d.mu1 = Vector::Zero(p.m());
  d.mu1.head(p.k) = 0.25 * (p.b1 - p.b2).head(p.k);
  d.mu2 = d.mu1;
  d.dual_value = 2.0 * d.mu1.dot(p.b1) - d.mu1.squaredNorm() / d.lambda1 - 2.0 * d.mu2.dot(p.b2) -
                 d.mu2.squaredNorm() / d.lambda2;
  d.feasibility = (p.A1.transpose() * d.mu1 - p.A2.transpose() * d.mu2).cwiseAbs().maxCoeff();
  d.primal_value = minimax_point(p).value();
  if (d.feasibility > 1e-8) throw CertificateError("dual_certificate: dual point is infeasible");
  if (std::abs(d.gap()) > tol) throw CertificateError("dual_certificate: duality gap exceeds tolerance");
  return d;
}

// A1, A2 standard normal (m x 2m, first k rows shared), b1 standard normal,
// b2 = b1 + Delta with Delta ~ N(0, 100 I). Draws whose distinct-row stack
// has condition number above 1e8 are rejected. For a fixed seed the draws
// do not depend on k, so instances for k = 0..m are nested.
inline BiCriterionLs generate_shared_row_instance(std::uint64_t seed, Index m, Index k, double max_condition = 1e8) {
  if (m < 1) throw DomainError("generate_shared_row_instance: m must be positive");
  if (k < 0 || k > m) throw DomainError("generate_shared_row_instance: need 0 <= k <= m");
  Rng rng(seed);
  const Index n = 2 * m;
  for (int attempt = 0; attempt < 1000; ++attempt) {
    BiCriterionLs p;
    p.k = k;
    p.A1.resize(m, n);
    p.A2.resize(m, n);
    p.b1.resize(m);
    p.b2.resize(m);
    for (Index i = 0; i < m; ++i)
      for (Index j = 0; j < n; ++j) p.A1(i, j) = rng.normal();
    for (Index i = 0; i < m; ++i)
      for (Index j = 0; j < n; ++j) p.A2(i, j) = rng.normal();
    for (Index i = 0; i < m; ++i) p.b1(i) = rng.normal();
    for (Index i = 0; i < m; ++i) p.b2(i) = p.b1(i) + 10.0 * rng.normal();
    p.A2.topRows(k) = p.A1.topRows(k);
    const Eigen::JacobiSVD<Matrix> svd(p.distinct_rows());
    const auto& sv = svd.singularValues();
    if (sv(sv.size() - 1) > 0 && sv(0) / sv(sv.size() - 1) <= max_condition) return p;
  }
  throw SingularityError("generate_shared_row_instance: no well-conditioned draw found");
}

struct LqrCost {
  double rho = 0.0;
  double state = 0.0;    // sum_{k=0}^{N} ||x(k)||^2
  double control = 0.0;  // sum_{k=0}^{N-1} ||u(k)||^2
};

// Finite-horizon LQR for sum ||x||^2 + rho ||u||^2 + ||x(N)||^2 by the
// backward Riccati recursion, then a forward rollout from x0.
inline LqrCost lqr_costs(const Matrix& A, const Matrix& B, const Vector& x0, int N, double rho) {
  if (A.rows() != A.cols() || B.rows() != A.rows() || x0.size() != A.rows())
    throw DomainError("lqr_costs: inconsistent dimensions");
  if (N < 1) throw DomainError("lqr_costs: horizon must be >= 1");
  if (!(rho > 0)) throw DomainError("lqr_costs: rho must be positive");
  const Index n = A.rows(), m = B.cols();
  std::vector<Matrix> K(static_cast<std::size_t>(N));
  Matrix P = Matrix::Identity(n, n);
  for (int k = N - 1; k >= 0; --k) {
    const Matrix S = rho * Matrix::Identity(m, m) + B.transpose() * P * B;
    K[static_cast<std::size_t>(k)] = S.ldlt().solve(B.transpose() * P * A);
    P = Matrix::Identity(n, n) + A.transpose() * P * (A - B * K[static_cast<std::size_t>(k)]);
    P = 0.5 * (P + P.transpose());
  }
  LqrCost c;
  c.rho = rho;
  Vector x = x0;
  for (int k = 0; k < N; ++k) {
    const Vector u = -K[static_cast<std::size_t>(k)] * x;
    c.state += x.squaredNorm();
    c.control += u.squaredNorm();
    x = A * x + B * u;
  }
  c.state += x.squaredNorm();
  return c;
}

inline std::vector<LqrCost> lqr_pareto(const Matrix& A, const Matrix& B, const Vector& x0, int N,
                                       const std::vector<double>& rho_grid) {
  std::vector<LqrCost> out;
  out.reserve(rho_grid.size());
  for (double rho : rho_grid) out.push_back(lqr_costs(A, B, x0, N, rho));
  return out;
}

}  // namespace lca::dess
