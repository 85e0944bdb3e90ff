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

#include <cmath>

#include <gtest/gtest.h>

#include "lca/decision.hpp"
#include "lca/planning.hpp"
#include "lca/rng.hpp"
#include "support/qp_oracle.hpp"

using namespace lca;
using namespace lca::planning;
using lca::decision::Point;
using lca::decision::Waypoints;

namespace {

Waypoints waypoints(std::vector<Point> pts, double hw) {
  Waypoints w;
  w.points = std::move(pts);
  w.half_width = hw;
  for (std::size_t i = 0; i < w.points.size(); ++i) w.plan_index.push_back(i);
  return w;
}

void expect_audit_clean(const PlanAudit& a) {
  EXPECT_LE(a.dynamics_residual, 1e-8);
  EXPECT_LE(a.initial_residual, 1e-8);
  EXPECT_GE(a.min_tube_slack, -1e-8);
  EXPECT_GE(a.min_box_slack, -1e-8);
}

}  // namespace

TEST(BuildPlanQp, DimensionsForOneStep) {
  const RomSpec rom = RomSpec::single_integrator(1.0);
  PlanProblem prob;
  prob.horizon = 1;
  const auto w = waypoints({{0, 0}}, 1.0 / 14);
  const auto q = build_plan_qp(rom, prob, w, Vector::Zero(2), 0);
  const Index p = rom.p(), s = rom.s();
  EXPECT_EQ(q.num_vars(), 2 * p + s);
  EXPECT_EQ(q.Aeq.rows(), 2 * p);
  EXPECT_EQ(q.Ain.rows(), 8);
  q.validate();
}

TEST(SolvePlan, StationaryAtCentroid) {
  const RomSpec rom = RomSpec::single_integrator(0.5);
  PlanProblem prob;
  prob.horizon = 6;
  const Point c(0.2, -0.3);
  const auto w = waypoints({c, c, c}, 1.0 / 14);
  const Vector x0 = c;
  const auto t = solve_plan(rom, prob, w, x0, 0);
  for (const auto& v : t.v) EXPECT_LE(v.norm(), 1e-10);
  for (const auto& y : t.y) EXPECT_LE((y - x0).norm(), 1e-10);
  expect_audit_clean(audit_plan(rom, prob, w, x0, t));
}

TEST(SolvePlan, EmptyTubeIsInfeasible) {
  const RomSpec rom = RomSpec::single_integrator(1.0);
  PlanProblem prob;
  prob.margin = prob.half_width;
  const auto w = waypoints({{0, 0}}, prob.half_width);
  EXPECT_THROW(solve_plan(rom, prob, w, Vector::Zero(2), 0), InfeasibleError);
}

TEST(SolvePlan, TubeOutsideBoxIsInfeasible) {
  const RomSpec rom = RomSpec::double_integrator(0.1);
  PlanProblem prob;
  prob.horizon = 1;
  // Acceleration is free, so only the tube and box intersection matters.
  const auto w = waypoints({{0.9, 0}}, prob.half_width);
  Vector x0(4);
  x0 << 0.9, 0, 50, 0;
  EXPECT_NO_THROW(solve_plan(rom, prob, w, x0, 0));
  PlanProblem tight = prob;
  tight.box = 0.5;
  EXPECT_THROW(solve_plan(rom, tight, w, x0, 0), InfeasibleError);
}

TEST(SolvePlan, TwoStepHandKkt) {
  // Single integrator, tau = 1, unit weights: in each axis the cost is
  // 2 (y1^2 + (y2 - y1)^2) with y0 = 0. Tube half-width 0.03 around
  // waypoints 0 then 0.1 forces y2 = 0.07 and then y1 = 0.03.
  const RomSpec rom = RomSpec::single_integrator(1.0);
  PlanProblem prob;
  prob.horizon = 2;
  prob.half_width = 0.08;
  prob.margin = 0.05;
  const auto w = waypoints({{0, 0}, {0, 0}, {0.1, 0}}, prob.half_width);
  const auto t = solve_plan(rom, prob, w, Vector::Zero(2), 0);
  EXPECT_NEAR(t.y[1](0), 0.03, 1e-10);
  EXPECT_NEAR(t.y[2](0), 0.07, 1e-10);
  EXPECT_NEAR(t.v[0](0), 0.03, 1e-10);
  EXPECT_NEAR(t.v[1](0), 0.04, 1e-10);
  EXPECT_NEAR(t.y[2](1), 0.0, 1e-10);
}

TEST(SolvePlan, MatchesEnumerationOracleOnSmallInstance) {
  RomSpec rom = RomSpec::single_integrator(1.0);
  rom.A = Matrix::Identity(1, 1);
  rom.B = Matrix::Identity(1, 1);
  rom.position_dims = 1;
  PlanProblem prob;
  prob.horizon = 2;
  prob.half_width = 0.1;
  prob.margin = 0.02;
  prob.w_smooth = 0.7;
  prob.w_effort = 1.3;
  const auto w = waypoints({{0, 0}, {0.15, 0}, {0.4, 0}}, prob.half_width);
  Vector x0(1);
  x0 << 0.05;
  const auto q = build_plan_qp(rom, prob, w, x0, 0);
  const auto bf = oracle::brute_force_qp(q);
  ASSERT_TRUE(bf.feasible);
  const auto s = densemath::solve_qp(q);
  EXPECT_NEAR(s.objective, bf.objective, 1e-10);
  EXPECT_LE((s.x - bf.x).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(SolvePlan, RecedingHorizonOnGridScenario) {
  decision::GridWorld g;
  g.n = 14;
  g.start = {1, 1};
  g.S1 = decision::cells_in_region(14, decision::Region::disk({0, 0}, 0.1), decision::Membership::Intersects);
  g.S2 = decision::cells_in_region(14, decision::Region::box({0.9, 0.9}, {1, 1}), decision::Membership::Intersects);
  const auto plan = decision::plan_sequential_reachability(g);
  const auto w = decision::to_waypoints(plan, g, 1);
  const RomSpec rom = RomSpec::single_integrator(1.0);
  PlanProblem prob;
  prob.half_width = g.delta();
  Vector x = g.centroid(g.start);
  ReferenceTrajectory prev;
  for (int k = 0; k < static_cast<int>(w.points.size()) + 3; ++k) {
    const auto t = solve_plan(rom, prob, w, x, k, k ? &prev : nullptr);
    expect_audit_clean(audit_plan(rom, prob, w, x, t));
    // Shift property: the first planned state is the measured state.
    EXPECT_LE((t.y.front() - x).norm(), 1e-10);
    x = t.y[1];
    prev = shift(rom, t, x);
  }
  EXPECT_LE((x - g.centroid(plan.states.back())).cwiseAbs().maxCoeff(), prob.tube() + 1e-8);
}

TEST(Hankel, ScalarIntegratorReproducesRollout) {
  Rng rng(21);
  const int L = 60;
  Matrix v(1, L), y(1, L + 1);
  y(0, 0) = 0.3;
  for (int k = 0; k < L; ++k) {
    v(0, k) = rng.normal();
    y(0, k + 1) = y(0, k) + v(0, k);
  }
  const auto h = fit_hankel(v, y, 1, 2);
  // Training windows.
  for (int k = 1; k + 2 <= L; ++k) {
    Vector vi(1), yi(1), vf(2);
    vi << v(0, k - 1);
    yi << y(0, k);
    vf << v(0, k), v(0, k + 1);
    const Vector yf = predict(h, vi, yi, vf);
    EXPECT_NEAR(yf(0), y(0, k + 1), 1e-8);
    EXPECT_NEAR(yf(1), y(0, k + 2), 1e-8);
  }
  // Fresh trajectory.
  Vector vi(1), yi(1), vf(2);
  vi << 0.4;
  yi << -1.7;
  vf << 0.25, -0.5;
  const Vector yf = predict(h, vi, yi, vf);
  EXPECT_NEAR(yf(0), -1.45, 1e-8);
  EXPECT_NEAR(yf(1), -1.95, 1e-8);
}

TEST(Hankel, ZeroInputLacksExcitation) {
  Matrix v = Matrix::Zero(1, 40), y = Matrix::Ones(1, 41);
  EXPECT_THROW(fit_hankel(v, y, 1, 2), ExcitationError);
}

TEST(Hankel, ShortRecordLacksExcitation) {
  Matrix v = Matrix::Ones(1, 5), y = Matrix::Ones(1, 6);
  EXPECT_THROW(fit_hankel(v, y, 1, 2), ExcitationError);
}

TEST(Hankel, DoubleIntegratorHeldOutWindow) {
  Rng rng(22);
  const RomSpec rom = RomSpec::double_integrator(0.2);
  const int L = 120, N = 3;
  Matrix v(2, L), y(4, L + 1);
  y.col(0) << 0.1, -0.2, 0.0, 0.3;
  for (int k = 0; k < L; ++k) {
    v.col(k) << rng.normal(), rng.normal();
    y.col(k + 1) = rom.A * y.col(k) + rom.B * v.col(k);
  }
  const auto h = fit_hankel(v, y, 1, N);
  Vector x(4);
  x << 0.5, 0.5, -1.0, 2.0;
  Vector vi(2), vf(2 * N);
  vi << rng.normal(), rng.normal();
  for (int i = 0; i < 2 * N; ++i) vf(i) = rng.normal();
  const Vector yf = predict(h, vi, x, vf);
  Vector xr = x;
  for (int i = 0; i < N; ++i) {
    xr = rom.A * xr + rom.B * vf.segment(2 * i, 2);
    EXPECT_LE((yf.segment(4 * i, 4) - xr).cwiseAbs().maxCoeff(), 1e-6);
  }
}

TEST(Hankel, LinearityAndSizeChecks) {
  Rng rng(23);
  const int L = 50;
  Matrix v(1, L), y(1, L + 1);
  y(0, 0) = 0;
  for (int k = 0; k < L; ++k) {
    v(0, k) = rng.normal();
    y(0, k + 1) = 0.9 * y(0, k) + v(0, k);
  }
  const auto h = fit_hankel(v, y, 2, 2);
  EXPECT_LE(predict(h, Vector::Zero(2), Vector::Zero(2), Vector::Zero(2)).norm(), 1e-14);
  Vector a(2), b(2), c(2);
  a << 0.3, -0.1;
  b << 1.0, 0.2;
  c << -0.4, 0.9;
  const Vector p1 = predict(h, a, b, c);
  const Vector p2 = predict(h, 2.5 * a, 2.5 * b, 2.5 * c);
  EXPECT_LE((p2 - 2.5 * p1).norm(), 1e-12);
  EXPECT_THROW(predict(h, Vector::Zero(1), Vector::Zero(2), Vector::Zero(2)), DomainError);
}
