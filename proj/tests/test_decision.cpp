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

#include <algorithm>
#include <cstdlib>

#include <gtest/gtest.h>

#include "lca/decision.hpp"
#include "lca/rng.hpp"

using namespace lca;
using namespace lca::decision;

namespace {

GridWorld grid(int n, Cell start, std::vector<Cell> s1, std::vector<Cell> s2) {
  GridWorld g;
  g.n = n;
  g.start = start;
  g.S1 = std::move(s1);
  g.S2 = std::move(s2);
  return g;
}

// All-pairs shortest path lengths by Floyd-Warshall on the 4-neighbour graph.
std::vector<std::vector<int>> all_pairs(const GridWorld& g) {
  const int N = g.n * g.n;
  const int inf = 1 << 20;
  std::vector<std::vector<int>> d(N, std::vector<int>(N, inf));
  for (int a = 0; a < N; ++a) {
    const Cell ca{a / g.n, a % g.n};
    if (!g.passable(ca)) continue;
    d[a][a] = 0;
    for (int b = 0; b < N; ++b) {
      const Cell cb{b / g.n, b % g.n};
      if (g.passable(cb) && std::abs(ca.s1 - cb.s1) + std::abs(ca.s2 - cb.s2) == 1) d[a][b] = 1;
    }
  }
  for (int k = 0; k < N; ++k)
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j) d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);
  return d;
}

void expect_consistent(const GridWorld& g, const GridPlan& p) {
  ASSERT_EQ(p.states.size(), p.actions.size() + 1);
  EXPECT_EQ(p.states.front(), g.start);
  Cell s = g.start;
  for (std::size_t i = 0; i < p.actions.size(); ++i) {
    s = mdp_step(g, s, p.actions[i]);
    EXPECT_EQ(s, p.states[i + 1]);
  }
  EXPECT_NE(std::find(g.S1.begin(), g.S1.end(), p.states[p.s1_index]), g.S1.end());
  EXPECT_NE(std::find(g.S2.begin(), g.S2.end(), p.states.back()), g.S2.end());
}

}  // namespace

TEST(MdpStep, CaseTable) {
  const GridWorld g = grid(14, {0, 0}, {{0, 0}}, {{0, 0}});
  EXPECT_EQ(mdp_step(g, {0, 0}, Action::Right), (Cell{1, 0}));
  EXPECT_EQ(mdp_step(g, {3, 5}, Action::Null), (Cell{3, 5}));
  EXPECT_EQ(mdp_step(g, {3, 5}, Action::Up), (Cell{3, 6}));
  EXPECT_EQ(mdp_step(g, {3, 5}, Action::Down), (Cell{3, 4}));
  EXPECT_EQ(mdp_step(g, {3, 5}, Action::Left), (Cell{2, 5}));
  EXPECT_THROW(mdp_step(g, {0, 0}, Action::Left), InadmissibleActionError);
  EXPECT_THROW(mdp_step(g, {13, 13}, Action::Up), InadmissibleActionError);
}

TEST(Planner, ThreeByThree) {
  const GridWorld g = grid(3, {0, 0}, {{1, 1}}, {{2, 2}});
  const GridPlan p = plan_sequential_reachability(g);
  EXPECT_EQ(p.actions.size(), 4u);
  expect_consistent(g, p);
  EXPECT_EQ(p.states[p.s1_index], (Cell{1, 1}));
  EXPECT_EQ(p.s1_index, 2u);
  // Right is expanded first, so the path leaves the start to the right.
  EXPECT_EQ(p.states[1], (Cell{1, 0}));
}

TEST(Planner, EmptyPlanWhenAlreadyDone) {
  const GridWorld g = grid(5, {2, 2}, {{2, 2}}, {{2, 2}});
  const GridPlan p = plan_sequential_reachability(g);
  EXPECT_TRUE(p.actions.empty());
  EXPECT_EQ(p.states.size(), 1u);
}

TEST(Planner, WalledOffTargetHasNoPlan) {
  GridWorld g = grid(5, {0, 0}, {{1, 1}}, {{4, 4}});
  g.forbidden = {{3, 4}, {4, 3}, {3, 3}};
  EXPECT_THROW(plan_sequential_reachability(g), NoPlanError);
  GridWorld h = grid(5, {0, 0}, {{4, 4}}, {{0, 0}});
  h.forbidden = {{3, 4}, {4, 3}};
  EXPECT_THROW(plan_sequential_reachability(h), NoPlanError);
}

TEST(Planner, AvoidsForbiddenCells) {
  GridWorld g = grid(5, {0, 2}, {{4, 2}}, {{4, 2}});
  g.forbidden = {{2, 1}, {2, 2}, {2, 3}};
  const GridPlan p = plan_sequential_reachability(g);
  expect_consistent(g, p);
  for (const Cell& c : p.states) EXPECT_FALSE(g.forbidden.contains(c));
  EXPECT_EQ(p.actions.size(), 8u);
}

TEST(Planner, LengthMatchesExhaustiveShortestPaths) {
  Rng rng(3);
  for (int n = 1; n <= 5; ++n)
    for (int trial = 0; trial < 40; ++trial) {
      auto rc = [&] { return Cell{static_cast<int>(rng.next_u64() % n), static_cast<int>(rng.next_u64() % n)}; };
      GridWorld g = grid(n, rc(), {}, {});
      const int k1 = 1 + static_cast<int>(rng.next_u64() % 3), k2 = 1 + static_cast<int>(rng.next_u64() % 3);
      for (int i = 0; i < k1; ++i) g.S1.push_back(rc());
      for (int i = 0; i < k2; ++i) g.S2.push_back(rc());
      const GridPlan p = plan_sequential_reachability(g);
      expect_consistent(g, p);
      const auto d = all_pairs(g);
      const auto id = [&](Cell c) { return c.s1 * n + c.s2; };
      int to_s1 = 1 << 20;
      for (const Cell& c : g.S1) to_s1 = std::min(to_s1, d[id(g.start)][id(c)]);
      const Cell via = p.states[p.s1_index];
      EXPECT_EQ(static_cast<int>(p.s1_index), to_s1);
      int to_s2 = 1 << 20;
      for (const Cell& c : g.S2) to_s2 = std::min(to_s2, d[id(via)][id(c)]);
      EXPECT_EQ(static_cast<int>(p.actions.size()), to_s1 + to_s2);
      // Obstacle-free grids: shortest paths are Manhattan distances.
      EXPECT_EQ(to_s1 + to_s2, [&] {
        int m1 = 1 << 20;
        for (const Cell& c : g.S1) m1 = std::min(m1, std::abs(c.s1 - g.start.s1) + std::abs(c.s2 - g.start.s2));
        int m2 = 1 << 20;
        for (const Cell& c : g.S2) m2 = std::min(m2, std::abs(c.s1 - via.s1) + std::abs(c.s2 - via.s2));
        return m1 + m2;
      }());
    }
}

TEST(Waypoints, CentroidsAndRepetition) {
  const GridWorld g = grid(14, {0, 0}, {{1, 0}}, {{1, 1}});
  const GridPlan p = plan_sequential_reachability(g);
  const double d = 1.0 / 14;
  EXPECT_NEAR(g.centroid({0, 0})(0), -1 + d, 1e-15);
  EXPECT_NEAR(g.centroid({0, 0})(1), -1 + d, 1e-15);
  const Waypoints w1 = to_waypoints(p, g, 1);
  EXPECT_EQ(w1.points.size(), p.states.size());
  EXPECT_NEAR(w1.half_width, d, 1e-15);
  const Waypoints w3 = to_waypoints(p, g, 3);
  ASSERT_EQ(w3.points.size(), 3 * p.states.size());
  for (std::size_t i = 0; i < w3.points.size(); ++i) {
    EXPECT_EQ(w3.plan_index[i], i / 3);
    EXPECT_EQ(w3.points[i], g.centroid(p.states[i / 3]));
  }
  EXPECT_THROW(to_waypoints(p, g, 0), DomainError);
}

TEST(Membership, AllCornersIsUnderApproximation) {
  Rng rng(9);
  for (double r : {0.1, 0.2, 0.35, 0.6}) {
    const Region disk = Region::disk({0, 0}, r);
    GridWorld g;
    for (const Cell& c : cells_in_region(14, disk, Membership::AllCorners))
      for (int k = 0; k < 200; ++k) {
        const Point lo = g.cell_lo(c), hi = g.cell_hi(c);
        const Point q(rng.uniform(lo(0), hi(0)), rng.uniform(lo(1), hi(1)));
        EXPECT_TRUE(disk.contains(q));
      }
  }
}

TEST(Membership, RadiusPointOneOnFourteenGrid) {
  const Region disk = Region::disk({0, 0}, 0.1);
  // The origin is a grid vertex and the cells have side 1/7 > 0.1.
  EXPECT_TRUE(cells_in_region(14, disk, Membership::AllCorners).empty());
  EXPECT_TRUE(cells_in_region(14, disk, Membership::Centroid).empty());
  const auto s1 = cells_in_region(14, disk, Membership::Intersects);
  EXPECT_EQ(s1, (std::vector<Cell>{{6, 6}, {6, 7}, {7, 6}, {7, 7}}));
  const Region corner = Region::box({0.9, 0.9}, {1.0, 1.0});
  EXPECT_TRUE(cells_in_region(14, corner, Membership::AllCorners).empty());
  EXPECT_EQ(cells_in_region(14, corner, Membership::Intersects), (std::vector<Cell>{{13, 13}}));
}

TEST(Locate, CellLookup) {
  GridWorld g;
  EXPECT_EQ(*g.locate({-1, -1}), (Cell{0, 0}));
  EXPECT_EQ(*g.locate({1, 1}), (Cell{13, 13}));
  EXPECT_EQ(*g.locate({0, 0}), (Cell{7, 7}));
  EXPECT_EQ(*g.locate(g.centroid({3, 9})), (Cell{3, 9}));
  EXPECT_FALSE(g.locate({1.01, 0}).has_value());
}

TEST(Monitor, SequentialReachability) {
  using L = std::vector<std::optional<Cell>>;
  const std::vector<Cell> S1{{1, 1}}, S2{{2, 2}};
  EXPECT_EQ(monitor_sequential_reachability(L{Cell{0, 0}, Cell{1, 1}, Cell{2, 2}}, S1, S2), 2u);
  EXPECT_FALSE(monitor_sequential_reachability(L{Cell{2, 2}, Cell{1, 1}}, S1, S2).has_value());
  EXPECT_FALSE(monitor_sequential_reachability(L{Cell{0, 0}, std::nullopt}, S1, S2).has_value());
}
