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

// Three-rate closed loop: the decision layer runs once, the planner every
// tau on the reduced-order model, and the feedback layer every dt on the
// Dubins' car.

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lca/decision.hpp"
#include "lca/densemath.hpp"
#include "lca/dynamics.hpp"
#include "lca/errors.hpp"
#include "lca/feedback.hpp"
#include "lca/planning.hpp"

namespace lca::multirate {

using dynamics::DubinsInput;
using dynamics::DubinsState;
using dynamics::FlatState;
using Vector2 = Eigen::Vector2d;

enum class Controller { Pd, Flat, ClfQp, ClfCbfQp };

inline const char* to_string(Controller c) {
  switch (c) {
    case Controller::Pd: return "pd";
    case Controller::Flat: return "flat";
    case Controller::ClfQp: return "clf_qp";
    case Controller::ClfCbfQp: return "clf_cbf_qp";
  }
  return "?";
}

inline std::optional<Controller> parse_controller(const std::string& s) {
  for (Controller c : {Controller::Pd, Controller::Flat, Controller::ClfQp, Controller::ClfCbfQp})
    if (s == to_string(c)) return c;
  return std::nullopt;
}

struct LayeredScenario {
  decision::GridWorld grid;
  std::optional<decision::Region> goal_region;  // completion also needs the position inside it
  int delta_steps = 1;
  planning::RomSpec rom = planning::RomSpec::single_integrator(1.0);  // rom.tau is the slow period
  planning::PlanProblem plan;
  Controller controller = Controller::Flat;
  feedback::FlatTrackingGains gains;
  feedback::ClfSpec clf{0.5, 1.0, 1.0, 2.0};
  feedback::CbfSpec cbf;
  double clf_penalty = 10.0;
  std::vector<feedback::ObstacleBarrier> obstacles;
  double dt = 1e-3;
  double timeout = 120.0;
  double initial_heading = 0.0;
  double initial_speed = 0.05;

  double tau() const { return rom.tau; }

  int steps_per_period() const { return static_cast<int>(std::lround(tau() / dt)); }

  void validate() const {
    grid.validate();
    rom.validate();
    plan.validate();
    gains.validate();
    clf.validate();
    cbf.validate();
    for (const auto& o : obstacles) o.validate();
    if (!(dt > 0)) throw DomainError("LayeredScenario: dt must be positive");
    if (!(dt < tau())) throw DomainError("LayeredScenario: dt must be < tau");
    if (std::abs(steps_per_period() * dt - tau()) > 1e-9 * tau())
      throw DomainError("LayeredScenario: tau must be an integer multiple of dt");
    if (!(timeout > 0)) throw DomainError("LayeredScenario: timeout must be positive");
    if (delta_steps < 1) throw DomainError("LayeredScenario: delta_steps must be >= 1");
    if (!(clf_penalty > 0)) throw DomainError("LayeredScenario: clf_penalty must be positive");
    if (std::abs(initial_speed) < dynamics::kMinFlatSpeed)
      throw DomainError("LayeredScenario: initial speed must be nonzero");
    if (rom.position_dims != 2 || (rom.p() != 2 && rom.p() != 4))
      throw DomainError("LayeredScenario: rom must be a planar single or double integrator");
  }
};

struct RunSample {
  double t = 0.0;
  DubinsState x;
  double speed = 0.0;
  Vector2 ref = Vector2::Zero();
  Vector2 ref_vel = Vector2::Zero();
  DubinsInput u, u_ff, u_fb;
  std::vector<double> barriers;
  Vector2 err = Vector2::Zero();
  std::optional<decision::Cell> cell;
  bool plan_solved = false;
};

struct PlanEvent {
  double t = 0.0;
  int k = 0;
  Vector2 v0 = Vector2::Zero();  // first planned input
};

struct RunLog {
  decision::GridPlan decision;
  std::vector<RunSample> samples;
  std::vector<PlanEvent> plans;
  bool completed = false;
  double completion_time = 0.0;
  double max_tracking_error = 0.0;
  double min_barrier = std::numeric_limits<double>::infinity();

  std::vector<std::optional<decision::Cell>> labels() const {
    std::vector<std::optional<decision::Cell>> out;
    out.reserve(samples.size());
    for (const auto& s : samples) out.push_back(s.cell);
    return out;
  }
};

namespace detail {

// P solving Acl' P + P Acl = -I for the flat PD closed loop.
inline Eigen::Matrix4d lyapunov_flat(const feedback::Matrix2& Kp, const feedback::Matrix2& Kd) {
  Eigen::Matrix4d Acl = Eigen::Matrix4d::Zero();
  Acl.topRightCorner<2, 2>().setIdentity();
  Acl.bottomLeftCorner<2, 2>() = -Kp;
  Acl.bottomRightCorner<2, 2>() = -Kd;
  const Eigen::Matrix4d I = Eigen::Matrix4d::Identity();
  Matrix K = Matrix::Zero(16, 16);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      K.block(4 * j, 4 * j, 4, 4) += I(j, j) * Acl.transpose();
      K.block(4 * i, 4 * j, 4, 4) += Acl(j, i) * I;
    }
  const Vector rhs = -Eigen::Map<const Vector>(I.data(), 16);
  const Vector p = densemath::solve_lls(K, rhs);
  Eigen::Matrix4d P = Eigen::Map<const Eigen::Matrix4d>(p.data());
  return 0.5 * (P + P.transpose());
}

inline Vector coupling(const planning::RomSpec& rom, const DubinsState& x, double speed) {
  Vector y(rom.p());
  y(0) = x.x1;
  y(1) = x.x2;
  if (rom.p() == 4) {
    y(2) = speed * std::cos(x.theta);
    y(3) = speed * std::sin(x.theta);
  }
  return y;
}

struct Control {
  DubinsInput u, u_ff;
};

class FeedbackLayer {
 public:
  explicit FeedbackLayer(const LayeredScenario& s) : s_(s), gains_(s.gains) {
    gains_.lookahead = s.dt;
    P_ = lyapunov_flat(gains_.Kp_flat, gains_.Kd_flat);
  }

  Control operator()(const DubinsState& x, double speed, const feedback::FlatReference& ref) {
    const FlatState z = dynamics::state_to_flat(x, speed);
    const feedback::PdGains pd{gains_.Kp_flat, gains_.Kd_flat};
    switch (s_.controller) {
      case Controller::Pd: {
        const Vector a = feedback::pd_control(pd, z.head<2>(), z.tail<2>(), ref.y, ref.v, ref.vdot, Vector::Zero(2));
        const DubinsInput u = dynamics::flat_to_input(dynamics::flat_rollout(z, a, gains_.lookahead), a);
        return {u, u};
      }
      case Controller::Flat: {
        const auto r = feedback::flat_tracking_control(gains_, z, ref, pred_ ? &*pred_ : nullptr);
        pred_ = r.z_look;
        return {r.u, r.u_ff};
      }
      case Controller::ClfQp: {
        const Vector a_pd =
            feedback::pd_control(pd, z.head<2>(), z.tail<2>(), ref.y, ref.v, ref.vdot, Vector::Zero(2));
        FlatState zref;
        zref << ref.y, ref.v;
        const FlatState e = z - zref;
        FlatState drift;
        drift << z.tail<2>() - ref.v, -ref.vdot;
        feedback::ClfValue V;
        V.V = e.dot(P_ * e);
        V.LfV = 2.0 * e.dot(P_ * drift);
        V.LgV = 2.0 * (P_ * e).tail<2>();
        const Vector a = feedback::clf_qp(s_.clf, V, a_pd);
        const DubinsInput u = dynamics::flat_to_input(dynamics::flat_rollout(z, a, gains_.lookahead), a);
        const DubinsInput u_ff = dynamics::flat_to_input(dynamics::flat_rollout(z, a_pd, gains_.lookahead), a_pd);
        return {u, u_ff};
      }
      case Controller::ClfCbfQp: {
        const auto r = feedback::flat_tracking_control(gains_, z, ref, pred_ ? &*pred_ : nullptr);
        pred_ = r.z_look;
        const Vector2 e = z.head<2>() - ref.y;
        const Vector2 heading(std::cos(x.theta), std::sin(x.theta));
        feedback::ClfValue V;
        V.V = e.squaredNorm();
        V.LfV = -2.0 * e.dot(ref.v);
        V.LgV = Vector::Zero(2);
        V.LgV(0) = 2.0 * e.dot(heading);
        std::vector<feedback::BarrierValue> bs;
        for (const auto& o : s_.obstacles) bs.push_back(o.dubins(x));
        Vector u_nom(2);
        u_nom << r.u.u1, r.u.u2;
        const auto q = feedback::clf_cbf_qp(s_.clf, V, s_.cbf, bs, u_nom, s_.clf_penalty);
        return {{q.u(0), q.u(1)}, r.u};
      }
    }
    throw DomainError("FeedbackLayer: unknown controller");
  }

 private:
  const LayeredScenario& s_;
  feedback::FlatTrackingGains gains_;
  Eigen::Matrix4d P_;
  std::optional<FlatState> pred_;
};

inline std::string at_time(double t, const std::string& what) { return "t=" + std::to_string(t) + ": " + what; }

}  // namespace detail

// Synchronous sampling: the planner re-solves at t = k tau from the measured
// state, the reference between samples is the linear interpolation of the
// planned positions with the held planned velocity, and the feedback runs
// every dt. The run stops once the trace has visited S1 and then an S2 cell
// (inside goal_region when set), or at the timeout.
inline RunLog run(const LayeredScenario& s) {
  s.validate();
  RunLog log;
  log.decision = decision::plan_sequential_reachability(s.grid);
  const auto w = decision::to_waypoints(log.decision, s.grid, s.delta_steps);
  const auto in = [](const std::vector<decision::Cell>& set, const decision::Cell& c) {
    return std::find(set.begin(), set.end(), c) != set.end();
  };

  const decision::Point p0 = s.grid.centroid(s.grid.start);
  DubinsState x{p0(0), p0(1), s.initial_heading};
  double speed = s.initial_speed;
  detail::FeedbackLayer feedback(s);
  const int steps = s.steps_per_period();
  const auto total = static_cast<long long>(std::ceil(s.timeout / s.dt - 1e-9));
  bool seen_s1 = false;
  planning::ReferenceTrajectory warm;
  long long i = 0;

  for (int k = 0;; ++k) {
    const double t_k = static_cast<double>(i) * s.dt;
    const Vector y_now = detail::coupling(s.rom, x, speed);
    planning::ReferenceTrajectory traj;
    try {
      traj = planning::solve_plan(s.rom, s.plan, w, y_now, k, k ? &warm : nullptr);
    } catch (const InfeasibleError& e) {
      throw InfeasibleError(detail::at_time(t_k, e.what()));
    }
    log.plans.push_back({t_k, k, traj.v.front().head<2>()});
    const Vector2 y0 = traj.y[0].head<2>(), y1 = traj.y[1].head<2>();
    const Vector2 vel = (y1 - y0) / s.tau();

    for (int j = 0; j < steps; ++j, ++i) {
      RunSample r;
      r.t = static_cast<double>(i) * s.dt;
      r.x = x;
      r.speed = speed;
      r.ref = y0 + (j * s.dt) * vel;
      r.ref_vel = vel;
      r.err = (Vector2(x.x1, x.x2) - r.ref).cwiseAbs();
      r.cell = s.grid.locate(Vector2(x.x1, x.x2));
      r.plan_solved = j == 0;
      for (const auto& o : s.obstacles) r.barriers.push_back(o.value(x));

      try {
        const auto c = feedback(x, speed, {r.ref, vel, Vector2::Zero()});
        r.u = c.u;
        r.u_ff = c.u_ff;
        r.u_fb = {c.u.u1 - c.u_ff.u1, c.u.u2 - c.u_ff.u2};
      } catch (const lca::Error& e) {
        throw InfeasibleError(detail::at_time(r.t, e.what()));
      }

      log.max_tracking_error = std::max(log.max_tracking_error, r.err.maxCoeff());
      for (double h : r.barriers) log.min_barrier = std::min(log.min_barrier, h);
      if (r.cell && in(s.grid.S1, *r.cell)) seen_s1 = true;
      const bool done = seen_s1 && r.cell && in(s.grid.S2, *r.cell) &&
                        (!s.goal_region || s.goal_region->contains(Vector2(x.x1, x.x2)));
      log.samples.push_back(std::move(r));
      if (done) {
        log.completed = true;
        log.completion_time = log.samples.back().t;
        return log;
      }
      if (i + 1 >= total) return log;

      x = dynamics::dubins_rk4(x, log.samples.back().u, s.dt);
      speed = log.samples.back().u.u1;
    }
    warm = planning::shift(s.rom, traj, detail::coupling(s.rom, x, speed));
  }
}

// Running example: 14x14 grid on [-1,1]^2, first visit the disk
// of radius 0.1 at the origin, then the corner box x1, x2 >= 0.9.
inline LayeredScenario gridworld_scenario() {
  LayeredScenario s;
  s.grid.n = 14;
  s.grid.start = {1, 1};
  const auto X1 = decision::Region::disk({0.0, 0.0}, 0.1);
  const auto X2 = decision::Region::box({0.9, 0.9}, {1.0, 1.0});
  s.grid.S1 = decision::cells_in_region(14, X1, decision::Membership::Intersects);
  s.grid.S2 = decision::cells_in_region(14, X2, decision::Membership::Intersects);
  s.goal_region = X2;
  s.plan.half_width = s.grid.delta();
  // One blocked cell next to the route, with a small disk obstacle at its
  // centroid.
  const decision::Cell blocked{7, 3};
  s.grid.forbidden.insert(blocked);
  s.obstacles.push_back({s.grid.centroid(blocked), 0.03, 0.02});
  return s;
}

}  // namespace lca::multirate
