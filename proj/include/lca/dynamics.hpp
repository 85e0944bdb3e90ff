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

// Dubins' car, its flat output (x1, x2), the flat double-integrator model and
// a classical RK4 step.

#include <cmath>
#include <numbers>
#include <utility>

#include <Eigen/Dense>

#include "lca/densemath.hpp"
#include "lca/errors.hpp"

namespace lca::dynamics {

using Vector2 = Eigen::Vector2d;
using Vector3 = Eigen::Vector3d;
using Vector4 = Eigen::Vector4d;
using Matrix4 = Eigen::Matrix4d;
using Matrix42 = Eigen::Matrix<double, 4, 2>;

// Flat speeds below this make the heading undefined.
inline constexpr double kMinFlatSpeed = 1e-6;
inline constexpr double kDefaultFastStep = 1e-3;

struct DubinsState {
  double x1 = 0.0;
  double x2 = 0.0;
  double theta = 0.0;  // unwrapped

  Vector3 vec() const { return {x1, x2, theta}; }
  static DubinsState from(const Vector3& v) { return {v(0), v(1), v(2)}; }
  Vector2 position() const { return {x1, x2}; }
};

struct DubinsInput {
  double u1 = 0.0;  // forward speed
  double u2 = 0.0;  // turn rate

  Vector2 vec() const { return {u1, u2}; }
};

// (xi1, xi2, dxi1, dxi2)
using FlatState = Vector4;
// (ddxi1, ddxi2)
using FlatInput = Vector2;

struct BoxConstraints {
  double position = 1.0;                  // max(|x1|, |x2|)
  double heading = std::numbers::pi / 2;  // |theta|
  double input = 1.0;                     // max(|u1|, |u2|)

  void validate() const {
    if (!(position > 0 && heading > 0 && input > 0)) throw DomainError("BoxConstraints: bounds must be positive");
  }
  double state_margin(const DubinsState& x) const {
    return position - std::max(std::abs(x.x1), std::abs(x.x2));
  }
  bool heading_ok(const DubinsState& x) const { return std::abs(x.theta) <= heading; }
  bool input_ok(const DubinsInput& u) const { return std::max(std::abs(u.u1), std::abs(u.u2)) <= input; }
};

// Smallest signed difference a - b modulo 2 pi, in (-pi, pi].
inline double angle_diff(double a, double b) {
  double d = std::remainder(a - b, 2.0 * std::numbers::pi);
  if (d <= -std::numbers::pi) d += 2.0 * std::numbers::pi;
  return d;
}

inline Vector3 dubins_derivative(const DubinsState& x, const DubinsInput& u) {
  return {u.u1 * std::cos(x.theta), u.u1 * std::sin(x.theta), u.u2};
}

inline DubinsState flat_to_state(const FlatState& z) {
  if (std::hypot(z(2), z(3)) < kMinFlatSpeed) throw SingularityError("flat_to_state: flat velocity is zero");
  return {z(0), z(1), std::atan2(z(3), z(2))};
}

inline DubinsInput flat_to_input(const FlatState& z, const FlatInput& a) {
  const double s2 = z(2) * z(2) + z(3) * z(3);
  if (std::sqrt(s2) < kMinFlatSpeed) throw SingularityError("flat_to_input: flat velocity is zero");
  return {std::sqrt(s2), (z(2) * a(1) - z(3) * a(0)) / s2};
}

// Flat lift of a Dubins state moving with speed u1.
inline FlatState state_to_flat(const DubinsState& x, double u1) {
  return {x.x1, x.x2, u1 * std::cos(x.theta), u1 * std::sin(x.theta)};
}

inline Matrix4 flat_linear_A() {
  Matrix4 A = Matrix4::Zero();
  A(0, 2) = 1.0;
  A(1, 3) = 1.0;
  return A;
}

inline Matrix42 flat_linear_B() {
  Matrix42 B = Matrix42::Zero();
  B(2, 0) = 1.0;
  B(3, 1) = 1.0;
  return B;
}

inline Vector4 flat_linear_derivative(const FlatState& z, const FlatInput& a) {
  return flat_linear_A() * z + flat_linear_B() * a;
}

// Exact zero-order-hold discretization; A_c is nilpotent so the exponential
// series stops after the linear term.
inline std::pair<Matrix, Matrix> discretize_double_integrator(double tau) {
  if (!(tau > 0.0)) throw DomainError("discretize_double_integrator: tau must be positive");
  Matrix A = Matrix::Identity(4, 4);
  A(0, 2) = tau;
  A(1, 3) = tau;
  Matrix B = Matrix::Zero(4, 2);
  B(0, 0) = 0.5 * tau * tau;
  B(1, 1) = 0.5 * tau * tau;
  B(2, 0) = tau;
  B(3, 1) = tau;
  return {A, B};
}

inline std::pair<Matrix, Matrix> discretize_single_integrator(double tau, Index dim = 2) {
  if (!(tau > 0.0)) throw DomainError("discretize_single_integrator: tau must be positive");
  return {Matrix::Identity(dim, dim), tau * Matrix::Identity(dim, dim)};
}

template <class F, class V>
V rk4_step(F&& f, const V& x, double dt) {
  const V k1 = f(x);
  const V k2 = f(V(x + 0.5 * dt * k1));
  const V k3 = f(V(x + 0.5 * dt * k2));
  const V k4 = f(V(x + dt * k3));
  return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

inline DubinsState dubins_rk4(const DubinsState& x, const DubinsInput& u, double dt) {
  const Vector3 next = rk4_step([&](const Vector3& s) { return dubins_derivative(DubinsState::from(s), u); }, x.vec(), dt);
  return DubinsState::from(next);
}

// Exact flat rollout over h under constant a.
inline FlatState flat_rollout(const FlatState& z, const FlatInput& a, double h) {
  FlatState out;
  out(0) = z(0) + h * z(2) + 0.5 * h * h * a(0);
  out(1) = z(1) + h * z(3) + 0.5 * h * h * a(1);
  out(2) = z(2) + h * a(0);
  out(3) = z(3) + h * a(1);
  return out;
}

}  // namespace lca::dynamics
