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

// Gridworld abstraction of the square [-1, 1]^2 and a planner for the
// two-stage reachability task "eventually S1, and after that eventually S2".

#include <algorithm>
#include <array>
#include <cmath>
#include <compare>
#include <deque>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lca/errors.hpp"

namespace lca::decision {

using Point = Eigen::Vector2d;

struct Cell {
  int s1 = 0;
  int s2 = 0;
  auto operator<=>(const Cell&) const = default;
};

enum class Action { Up, Down, Left, Right, Null };

inline const char* to_string(Action a) {
  switch (a) {
    case Action::Up: return "up";
    case Action::Down: return "down";
    case Action::Left: return "left";
    case Action::Right: return "right";
    case Action::Null: return "null";
  }
  return "?";
}

inline Cell apply(Cell s, Action a) {
  switch (a) {
    case Action::Up: return {s.s1, s.s2 + 1};
    case Action::Down: return {s.s1, s.s2 - 1};
    case Action::Right: return {s.s1 + 1, s.s2};
    case Action::Left: return {s.s1 - 1, s.s2};
    case Action::Null: return s;
  }
  return s;
}

// Continuous target predicate: a closed disk or a closed axis-aligned box.
struct Region {
  enum class Kind { Disk, Box };
  Kind kind = Kind::Disk;
  Point center = Point::Zero();
  double radius = 0.0;
  Point lo = Point::Zero();
  Point hi = Point::Zero();

  static Region disk(Point c, double r) {
    Region g;
    g.kind = Kind::Disk;
    g.center = c;
    g.radius = r;
    return g;
  }
  static Region box(Point lo, Point hi) {
    Region g;
    g.kind = Kind::Box;
    g.lo = lo;
    g.hi = hi;
    return g;
  }

  bool contains(const Point& p) const {
    if (kind == Kind::Disk) return (p - center).norm() <= radius;
    return p(0) >= lo(0) && p(0) <= hi(0) && p(1) >= lo(1) && p(1) <= hi(1);
  }

  // Closed-rectangle intersection test.
  bool intersects(const Point& rlo, const Point& rhi) const {
    if (kind == Kind::Disk) {
      const Point q = center.cwiseMax(rlo).cwiseMin(rhi);
      return (q - center).norm() <= radius;
    }
    return rlo(0) <= hi(0) && rhi(0) >= lo(0) && rlo(1) <= hi(1) && rhi(1) >= lo(1);
  }
};

// How a continuous region is turned into a set of cells.
enum class Membership {
  AllCorners,  // every corner inside: under-approximation
  Centroid,    // centroid inside
  Intersects,  // cell meets the region
};

struct GridWorld {
  int n = 14;
  Cell start{};
  std::vector<Cell> S1;
  std::vector<Cell> S2;
  std::set<Cell> forbidden;

  // Half the side of a cell.
  double delta() const { return 1.0 / n; }

  bool in_grid(Cell c) const { return c.s1 >= 0 && c.s1 < n && c.s2 >= 0 && c.s2 < n; }
  bool passable(Cell c) const { return in_grid(c) && !forbidden.contains(c); }

  Point centroid(Cell c) const { return {-1.0 + delta() * (2 * c.s1 + 1), -1.0 + delta() * (2 * c.s2 + 1)}; }
  Point cell_lo(Cell c) const { return {-1.0 + 2.0 * delta() * c.s1, -1.0 + 2.0 * delta() * c.s2}; }
  Point cell_hi(Cell c) const { return {-1.0 + 2.0 * delta() * (c.s1 + 1), -1.0 + 2.0 * delta() * (c.s2 + 1)}; }

  // Cell containing p; points on shared edges go to the upper cell, the
  // outer boundary is clamped inward. Empty outside the square.
  std::optional<Cell> locate(const Point& p) const {
    if (!(std::abs(p(0)) <= 1.0 && std::abs(p(1)) <= 1.0)) return std::nullopt;
    auto idx = [&](double v) { return std::clamp(static_cast<int>(std::floor((v + 1.0) / (2.0 * delta()))), 0, n - 1); };
    return Cell{idx(p(0)), idx(p(1))};
  }

  void validate() const {
    if (n < 1) throw DomainError("GridWorld: n must be positive");
    if (!in_grid(start)) throw DomainError("GridWorld: start outside grid");
    if (S1.empty() || S2.empty()) throw DomainError("GridWorld: target sets must be nonempty");
    for (const Cell& c : S1)
      if (!in_grid(c)) throw DomainError("GridWorld: S1 cell outside grid");
    for (const Cell& c : S2)
      if (!in_grid(c)) throw DomainError("GridWorld: S2 cell outside grid");
  }
};

inline std::vector<Cell> cells_in_region(int n, const Region& region, Membership rule) {
  GridWorld g;
  g.n = n;
  std::vector<Cell> out;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const Cell c{i, j};
      const Point lo = g.cell_lo(c), hi = g.cell_hi(c);
      bool in = false;
      switch (rule) {
        case Membership::AllCorners:
          in = region.contains(lo) && region.contains(hi) && region.contains(Point(lo(0), hi(1))) &&
               region.contains(Point(hi(0), lo(1)));
          break;
        case Membership::Centroid: in = region.contains(g.centroid(c)); break;
        case Membership::Intersects: in = region.intersects(lo, hi); break;
      }
      if (in) out.push_back(c);
    }
  return out;
}

inline Cell mdp_step(const GridWorld& g, Cell s, Action a) {
  if (!g.in_grid(s)) throw DomainError("mdp_step: state outside grid");
  const Cell next = apply(s, a);
  if (!g.in_grid(next)) throw InadmissibleActionError(std::string("mdp_step: action ") + to_string(a) + " leaves the grid");
  return next;
}

struct GridPlan {
  std::vector<Cell> states;  // states.size() == actions.size() + 1
  std::vector<Action> actions;
  std::size_t s1_index = 0;  // position in states of the S1 visit
};

namespace detail {

inline constexpr std::array<Action, 4> kExpandOrder{Action::Right, Action::Up, Action::Left, Action::Down};

struct BfsPath {
  std::vector<Cell> states;
  std::vector<Action> actions;
};

inline std::optional<BfsPath> bfs(const GridWorld& g, Cell from, const std::set<Cell>& goal) {
  if (!g.passable(from)) return std::nullopt;
  const auto id = [&](Cell c) { return static_cast<std::size_t>(c.s1 * g.n + c.s2); };
  std::vector<int> parent(static_cast<std::size_t>(g.n * g.n), -2);
  std::vector<Action> via(parent.size(), Action::Null);
  std::deque<Cell> queue{from};
  parent[id(from)] = -1;
  while (!queue.empty()) {
    const Cell c = queue.front();
    queue.pop_front();
    if (goal.contains(c)) {
      BfsPath path;
      for (Cell cur = c;;) {
        path.states.push_back(cur);
        const int p = parent[id(cur)];
        if (p < 0) break;
        path.actions.push_back(via[id(cur)]);
        cur = Cell{p / g.n, p % g.n};
      }
      std::reverse(path.states.begin(), path.states.end());
      std::reverse(path.actions.begin(), path.actions.end());
      return path;
    }
    for (Action a : kExpandOrder) {
      const Cell nb = apply(c, a);
      if (!g.passable(nb) || parent[id(nb)] != -2) continue;
      parent[id(nb)] = static_cast<int>(id(c));
      via[id(nb)] = a;
      queue.push_back(nb);
    }
  }
  return std::nullopt;
}

}  // namespace detail

inline GridPlan plan_sequential_reachability(const GridWorld& g) {
  g.validate();
  const std::set<Cell> s1(g.S1.begin(), g.S1.end());
  const std::set<Cell> s2(g.S2.begin(), g.S2.end());
  const auto first = detail::bfs(g, g.start, s1);
  if (!first) throw NoPlanError("plan_sequential_reachability: S1 is unreachable from the start cell");
  const auto second = detail::bfs(g, first->states.back(), s2);
  if (!second) throw NoPlanError("plan_sequential_reachability: S2 is unreachable from the reached S1 cell");
  GridPlan plan;
  plan.states = first->states;
  plan.actions = first->actions;
  plan.s1_index = plan.states.size() - 1;
  plan.states.insert(plan.states.end(), second->states.begin() + 1, second->states.end());
  plan.actions.insert(plan.actions.end(), second->actions.begin(), second->actions.end());
  return plan;
}

struct Waypoints {
  std::vector<Point> points;
  std::vector<std::size_t> plan_index;  // plan state behind each point
  double half_width = 0.0;
  int delta_steps = 1;
};

inline Waypoints to_waypoints(const GridPlan& plan, const GridWorld& g, int delta_steps) {
  if (delta_steps <= 0) throw DomainError("to_waypoints: delta_steps must be positive");
  Waypoints w;
  w.half_width = g.delta();
  w.delta_steps = delta_steps;
  for (std::size_t i = 0; i < plan.states.size(); ++i)
    for (int r = 0; r < delta_steps; ++r) {
      w.points.push_back(g.centroid(plan.states[i]));
      w.plan_index.push_back(i);
    }
  return w;
}

// Trace monitor for "eventually S1 and then eventually S2" over a sequence of
// cell labels. Returns the index at which S2 is first reached after an S1
// visit, or nothing if the trace does not satisfy the task.
inline std::optional<std::size_t> monitor_sequential_reachability(const std::vector<std::optional<Cell>>& labels,
                                                                  const std::vector<Cell>& S1,
                                                                  const std::vector<Cell>& S2) {
  bool seen_s1 = false;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (!labels[i]) continue;
    const Cell c = *labels[i];
    if (!seen_s1 && std::find(S1.begin(), S1.end(), c) != S1.end()) seen_s1 = true;
    if (seen_s1 && std::find(S2.begin(), S2.end(), c) != S2.end()) return i;
  }
  return std::nullopt;
}

}  // namespace lca::decision
