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

#include "lca/rng.hpp"
#include "lca/sensorimotor.hpp"

using namespace lca;
using namespace lca::sensorimotor;

namespace {

double grid_argmin(const std::function<double(double)>& f, double lo, double hi, int n, double* best = nullptr) {
  double arg = lo, fb = kInf;
  for (int i = 0; i < n; ++i) {
    const double x = lo + (hi - lo) * i / (n - 1);
    const double v = f(x);
    if (v < fb) {
      fb = v;
      arg = x;
    }
  }
  if (best) *best = fb;
  return arg;
}

// Integer-T definition of the delay sum.
double delay_sum_loop(double abs_a, int T) {
  double s = 0;
  for (int i = 1; i <= T; ++i) s += std::pow(abs_a, i - 1);
  return s;
}

}  // namespace

TEST(OptimalCost, Examples) {
  for (double R : {1.0, 2.0, 3.5}) EXPECT_DOUBLE_EQ(optimal_cost({0.0}, {R, 0, 0}), std::exp2(-R));
  EXPECT_EQ(optimal_cost({2.0}, {1.0, 0, 0}), kInf);
  EXPECT_EQ(optimal_cost({2.0}, {1.0, 3, 0}), kInf);
  EXPECT_DOUBLE_EQ(optimal_cost({1.0}, {1.0, 2, 0}), 3.0);
  EXPECT_DOUBLE_EQ(optimal_cost({1.0}, {1.0, 2, 5}), 1.0);
}

TEST(OptimalCost, RealDelaySumMatchesIntegerSum) {
  for (double a : {0.0, 0.3, 1.0, 1.7, -1.2})
    for (int T = 0; T <= 8; ++T) EXPECT_NEAR(delay_sum(std::abs(a), T), delay_sum_loop(std::abs(a), T), 1e-12);
}

TEST(OptimalCost, MonotoneInDelayAndRate) {
  for (double a : {0.0, 0.5, 1.0, 1.5, 3.0})
    for (double R : {1.0, 2.0, 3.0})
      for (int T = -3; T <= 8; ++T) {
        if (std::abs(a) >= std::exp2(R)) continue;
        const double c = optimal_cost({a}, {R, static_cast<double>(std::max(T, 0)), static_cast<double>(std::max(-T, 0))});
        const double cT = optimal_cost({a}, {R, static_cast<double>(std::max(T + 1, 0)), static_cast<double>(std::max(-T - 1, 0))});
        const double cR = optimal_cost({a}, {R + 0.5, static_cast<double>(std::max(T, 0)), static_cast<double>(std::max(-T, 0))});
        EXPECT_GE(cT, c - 1e-12);
        EXPECT_LE(cR, c + 1e-12);
      }
}

TEST(Tradeoff, Examples) {
  const auto c = tradeoff_cost({1.0}, {0.1, 0.0}, 40.0, 0.0);
  EXPECT_NEAR(c.delay, 40.0, 1e-12);
  EXPECT_NEAR(c.quantization, 1.0 / 15.0, 1e-12);
  EXPECT_NEAR(c.total(), 40.0 + 1.0 / 15.0, 1e-12);
  EXPECT_EQ(tradeoff_cost({1.0}, {0.1, 0.0}, 0.0, 0.0).total(), kInf);
  EXPECT_GT(tradeoff_cost({1.0}, {0.1, 0.0}, 1e-6, 0.0).total(), 1e6);
}

TEST(Tradeoff, ComponentsCross) {
  const PlantScalar p{1.0};
  const ResourceTradeoff tr{0.1, 0.0};
  double prev_d = -1, prev_q = kInf;
  bool q_above = true, crossed = false;
  for (int i = 1; i <= 1000; ++i) {
    const auto c = tradeoff_cost(p, tr, 0.05 * i, 0.0);
    EXPECT_GT(c.delay, prev_d);
    EXPECT_LT(c.quantization, prev_q);
    if (q_above && c.quantization < c.delay) {
      q_above = false;
      crossed = true;
    }
    EXPECT_FALSE(!q_above && c.quantization > c.delay);
    prev_d = c.delay;
    prev_q = c.quantization;
  }
  EXPECT_TRUE(crossed);
}

TEST(Tradeoff, UnimodalOnDenseGrid) {
  const PlantScalar p{1.0};
  const ResourceTradeoff tr{0.1, 0.0};
  int changes = 0;
  double prev_sign = 0;
  double prev = tradeoff_cost(p, tr, 1e-3, 0).total();
  for (int i = 1; i < 10000; ++i) {
    const double T = 1e-3 + (1e3 - 1e-3) * i / 9999.0;
    const double f = tradeoff_cost(p, tr, T, 0).total();
    const double s = f > prev ? 1 : -1;
    if (prev_sign != 0 && s != prev_sign) ++changes;
    prev_sign = s;
    prev = f;
  }
  EXPECT_EQ(changes, 1);
}

TEST(OptimizeDelay, InteriorMinimumMatchesGrid) {
  const PlantScalar p{1.0};
  const ResourceTradeoff tr{0.1, 0.0};
  const auto o = optimize_delay(p, tr, 0.0);
  double best;
  const double arg = grid_argmin([&](double T) { return tradeoff_cost(p, tr, T, 0).total(); }, 1e-3, 1e3, 100000, &best);
  EXPECT_GT(o.T_s, 1.0);
  EXPECT_LT(o.T_s, 100.0);
  EXPECT_NEAR(o.T_s, arg, 1e-2);
  EXPECT_NEAR(o.cost, best, 1e-3);
  EXPECT_LE(o.cost, best + 1e-12);
  EXPECT_NEAR(o.R, 0.1 * o.T_s, 1e-15);
  // Stationarity: 1 = lambda ln2 2^{lambda T} / (2^{lambda T} - 1)^2.
  const double y = std::exp2(0.1 * o.T_s);
  EXPECT_NEAR(0.1 * std::log(2.0) * y / ((y - 1) * (y - 1)), 1.0, 1e-6);
}

TEST(OptimizeDelay, NoDynamicsFullyWarnedHitsUpperBound) {
  const auto o = optimize_delay({0.0}, {0.1, 0.0}, 2000.0);
  EXPECT_NEAR(o.T_s, 1e3, 1e-6);
}

TEST(OptimizeDelay, DelayedRegimeIndependentOfComputeDelay) {
  const PlantScalar p{1.0};
  const auto o0 = optimize_delay(p, {0.1, 1.0}, 0.0);
  for (int Tc = 1; Tc <= 50; ++Tc) {
    const auto o = optimize_delay(p, {0.1, static_cast<double>(Tc)}, 0.0);
    EXPECT_NEAR(o.T_s, o0.T_s, 1e-6);
    EXPECT_NEAR(o.R, o0.R, 1e-7);
  }
}

TEST(OptimizeDelay, WarnedRegimeCostVanishes) {
  const PlantScalar p{1.0};
  double prev_cost = kInf, prev_R = 0;
  for (int Tw = 1; Tw <= 50; ++Tw) {
    const auto o = optimize_delay(p, {0.1, 0.0}, Tw);
    EXPECT_LE(o.cost, prev_cost + 1e-9);
    EXPECT_GE(o.R, prev_R - 1e-6);
    prev_cost = o.cost;
    prev_R = o.R;
  }
  EXPECT_LT(prev_cost, 0.05);
}

TEST(LayeredVision, Examples) {
  const PlantScalar p{1.0};
  LayeredVisionSpec s{2.0, 3.0, 4.0, 0.0, 0.0};
  const auto c0 = layered_vision_cost(s, p);
  EXPECT_EQ(c0.vision, 0.0);
  EXPECT_DOUBLE_EQ(c0.total(), optimal_cost(p, {2.0, 3.0, 0.0}));
  s.T_L = 0;
  s.delta = 0.5;
  const auto c1 = layered_vision_cost(s, p);
  EXPECT_DOUBLE_EQ(c1.reflex, 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(c1.vision, 0.5 / 15.0);
  s.R_H = 6.0;
  EXPECT_EQ(layered_vision_cost(s, p).reflex, c1.reflex);
  s.R_L = 0.5;
  EXPECT_EQ(layered_vision_cost(s, {1.5}).total(), kInf);
}

TEST(WarnedOracle, Examples) {
  EXPECT_NEAR(warned_case_oracle({0.0}, 1, 50), 0.5, 1e-12);
  EXPECT_GE(warned_case_oracle({0.5}, 1, 100), 0.98 / 1.5);
  EXPECT_LE(warned_case_oracle({0.5}, 1, 100), 1 / 1.5 + 1e-9);
  EXPECT_GE(warned_case_oracle({1.5}, 2, 100), 0.98 * 0.4);
  EXPECT_LE(warned_case_oracle({1.5}, 2, 100), 0.4 + 1e-9);
  EXPECT_THROW(warned_case_oracle({2.0}, 1, 10), DomainError);
}

TEST(WarnedOracle, TightAgainstBound) {
  for (double a : {0.0, 0.5, 1.0, 1.5, -1.5, 3.0, 7.5})
    for (int R = 1; R <= 3; ++R) {
      if (std::abs(a) >= std::exp2(R)) continue;
      const double bound = optimal_cost({a}, {static_cast<double>(R), 0, 0});
      const double sup = warned_case_oracle({a}, R, 100);
      EXPECT_LE(sup, bound + 1e-9) << a << " " << R;
      EXPECT_GE(sup, 0.98 * bound) << a << " " << R;
    }
}

TEST(WarnedOracle, SimulatedTrajectoriesStayInside) {
  // Monte Carlo with the same quantizer never leaves the oracle's interval.
  Rng rng(5);
  for (double a : {0.5, 1.0, 1.5})
    for (int R : {1, 2, 3}) {
      if (a >= std::exp2(R)) continue;
      const double sup = warned_case_oracle({a}, R, 200);
      const double cells = std::exp2(R);
      const double L = a / (cells - a) + 1.0, width = 2 * L / cells;
      for (int trial = 0; trial < 20; ++trial) {
        double x = 0;
        for (int k = 0; k < 200; ++k) {
          const double w = rng.uniform(-1, 1);
          const double s = -(a * x + w);
          const double j = std::clamp(std::floor((s + L) / width), 0.0, cells - 1);
          x = -s + (-L + width * (j + 0.5));
          EXPECT_LE(std::abs(x), sup + 1e-12);
        }
      }
    }
}
