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
#include <numbers>

#include <gtest/gtest.h>

#include "lca/dynamics.hpp"
#include "lca/rng.hpp"

using namespace lca;
using namespace lca::dynamics;

TEST(DubinsDerivative, Examples) {
  Vector3 d = dubins_derivative({0, 0, 0}, {1, 0});
  EXPECT_NEAR(d(0), 1, 1e-15);
  EXPECT_NEAR(d(1), 0, 1e-15);
  EXPECT_NEAR(d(2), 0, 1e-15);
  d = dubins_derivative({0, 0, std::numbers::pi / 2}, {1, 0});
  EXPECT_NEAR(d(0), 0, 1e-15);
  EXPECT_NEAR(d(1), 1, 1e-15);
  d = dubins_derivative({0, 0, std::numbers::pi / 4}, {std::sqrt(2.0), 1});
  EXPECT_NEAR(d(0), 1, 1e-15);
  EXPECT_NEAR(d(1), 1, 1e-15);
  EXPECT_NEAR(d(2), 1, 1e-15);
}

TEST(FlatToState, Examples) {
  DubinsState s = flat_to_state(FlatState(0, 0, 1, 0));
  EXPECT_EQ(s.x1, 0);
  EXPECT_EQ(s.theta, 0);
  s = flat_to_state(FlatState(1, 2, 0, 1));
  EXPECT_EQ(s.x1, 1);
  EXPECT_EQ(s.x2, 2);
  EXPECT_NEAR(s.theta, std::numbers::pi / 2, 1e-15);
  EXPECT_THROW(flat_to_state(FlatState(0, 0, 0, 0)), SingularityError);
}

TEST(FlatToState, AllQuadrants) {
  EXPECT_NEAR(flat_to_state(FlatState(0, 0, -1, -1)).theta, -3 * std::numbers::pi / 4, 1e-15);
  EXPECT_NEAR(flat_to_state(FlatState(0, 0, -1, 1)).theta, 3 * std::numbers::pi / 4, 1e-15);
}

TEST(FlatToInput, Examples) {
  DubinsInput u = flat_to_input(FlatState(0, 0, 1, 0), FlatInput(0, 0));
  EXPECT_NEAR(u.u1, 1, 1e-15);
  EXPECT_NEAR(u.u2, 0, 1e-15);
  u = flat_to_input(FlatState(0, 0, 1, 1), FlatInput(0, 0));
  EXPECT_NEAR(u.u1, std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(u.u2, 0, 1e-15);
  u = flat_to_input(FlatState(0, 0, 1, 0), FlatInput(0, 1));
  EXPECT_NEAR(u.u1, 1, 1e-15);
  EXPECT_NEAR(u.u2, 1, 1e-15);
  EXPECT_THROW(flat_to_input(FlatState(0, 0, 5e-7, 0), FlatInput(0, 1)), SingularityError);
}

TEST(FlatLinear, DerivativeExamples) {
  EXPECT_EQ(flat_linear_derivative(FlatState(0, 0, 1, 2), FlatInput(0, 0)), Vector4(1, 2, 0, 0));
  EXPECT_EQ(flat_linear_derivative(FlatState::Zero(), FlatInput(1, 1)), Vector4(0, 0, 1, 1));
}

TEST(FlatLinear, Superposition) {
  Rng rng(5);
  FlatState z1, z2;
  FlatInput a1, a2;
  for (int i = 0; i < 4; ++i) z1(i) = rng.normal(), z2(i) = rng.normal();
  for (int i = 0; i < 2; ++i) a1(i) = rng.normal(), a2(i) = rng.normal();
  const double al = 0.7, be = -1.3;
  const Vector4 lhs = flat_linear_derivative(al * z1 + be * z2, al * a1 + be * a2);
  const Vector4 rhs = al * flat_linear_derivative(z1, a1) + be * flat_linear_derivative(z2, a2);
  EXPECT_LE((lhs - rhs).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Discretize, UnitStep) {
  const auto [A, B] = discretize_double_integrator(1.0);
  Matrix Ae(4, 4), Be(4, 2);
  Ae << 1, 0, 1, 0, 0, 1, 0, 1, 0, 0, 1, 0, 0, 0, 0, 1;
  Be << .5, 0, 0, .5, 1, 0, 0, 1;
  EXPECT_EQ(A, Ae);
  EXPECT_EQ(B, Be);
}

TEST(Discretize, SmallStepLimit) {
  const auto [A, B] = discretize_double_integrator(1e-12);
  EXPECT_LE((A - Matrix::Identity(4, 4)).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LE(B.cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_THROW(discretize_double_integrator(0.0), DomainError);
  EXPECT_THROW(discretize_double_integrator(-1.0), DomainError);
}

TEST(Discretize, MatchesRk4OfContinuousModel) {
  const double tau = 0.3;
  const auto [A, B] = discretize_double_integrator(tau);
  const FlatState z(0.1, -0.2, 0.5, 0.3);
  const FlatInput a(0.7, -0.4);
  const Vector4 exact = A * z + B * a;
  const Vector4 rk = rk4_step([&](const Vector4& s) { return flat_linear_derivative(s, a); }, Vector4(z), tau);
  EXPECT_LE((exact - rk).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Discretize, SemigroupProperty) {
  const auto [A1, B1] = discretize_double_integrator(0.25);
  const auto [A2, B2] = discretize_double_integrator(0.5);
  const auto [A3, B3] = discretize_double_integrator(0.75);
  EXPECT_EQ(A3, A1 * A2);
}

TEST(Rk4, ZeroFieldAndExponential) {
  const Vector3 x(1, 2, 3);
  EXPECT_EQ(rk4_step([](const Vector3&) { return Vector3::Zero().eval(); }, x, 0.1), x);
  const double y = rk4_step([](double s) { return s; }, 1.0, 0.1);
  EXPECT_NEAR(y, std::exp(0.1), 1e-7);
}

TEST(Rk4, FifthOrderLocalError) {
  const double e1 = std::abs(rk4_step([](double s) { return s; }, 1.0, 0.1) - std::exp(0.1));
  const double e2 = std::abs(rk4_step([](double s) { return s; }, 1.0, 0.05) - std::exp(0.05));
  EXPECT_NEAR(std::log2(e1 / e2), 5.0, 0.2);
}

namespace {

double flatness_gap(const FlatState& z, const FlatInput& a, double dt) {
  const DubinsState x = dubins_rk4(flat_to_state(z), flat_to_input(z, a), dt);
  const DubinsState xf = flat_to_state(flat_rollout(z, a, dt));
  return std::max({std::abs(x.x1 - xf.x1), std::abs(x.x2 - xf.x2), std::abs(angle_diff(x.theta, xf.theta))});
}

}  // namespace

TEST(Flatness, RoundTripOneStep) {
  Rng rng(77);
  const double dt = 1e-5;
  for (int trial = 0; trial < 1000; ++trial) {
    const double speed = rng.uniform(0.5, 2.0);
    const double hd = rng.uniform(-std::numbers::pi, std::numbers::pi);
    const FlatState z(rng.normal(), rng.normal(), speed * std::cos(hd), speed * std::sin(hd));
    const FlatInput a(rng.uniform(-0.7, 0.7), rng.uniform(-0.7, 0.7));
    EXPECT_LE(flatness_gap(z, a, dt), 1e-4 * dt) << "trial " << trial;
  }
}

TEST(Flatness, RoundTripGapIsSecondOrder) {
  const FlatState z(0.1, 0.2, 0.8, -0.3);
  const FlatInput a(0.5, 0.9);
  const double g1 = flatness_gap(z, a, 1e-2);
  const double g2 = flatness_gap(z, a, 5e-3);
  EXPECT_NEAR(std::log2(g1 / g2), 2.0, 0.1);
}

TEST(Box, Margins) {
  BoxConstraints box;
  EXPECT_NEAR(box.state_margin({0.5, -0.9, 0}), 0.1, 1e-15);
  EXPECT_TRUE(box.heading_ok({0, 0, 1.5}));
  EXPECT_FALSE(box.heading_ok({0, 0, 1.6}));
  EXPECT_FALSE(box.input_ok({1.1, 0}));
}

TEST(AngleDiff, Wraps) {
  EXPECT_NEAR(angle_diff(2 * std::numbers::pi + 0.1, 0.0), 0.1, 1e-14);
  EXPECT_NEAR(angle_diff(-0.1, 0.1), -0.2, 1e-15);
}
