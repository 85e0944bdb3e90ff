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

// JSON scenario files. A file names one mode and carries exactly one block
// for it; every field has a default, and every value is checked before any
// computation runs. Errors name the offending field as a dotted path.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "lca/bode.hpp"
#include "lca/decision.hpp"
#include "lca/densemath.hpp"
#include "lca/errors.hpp"
#include "lca/feedback.hpp"
#include "lca/multirate.hpp"
#include "lca/planning.hpp"

namespace lca::harness {

using json = nlohmann::json;

enum class Mode { Simulate, Pareto, Sensorimotor, Bode };

inline const char* to_string(Mode m) {
  switch (m) {
    case Mode::Simulate: return "simulate";
    case Mode::Pareto: return "pareto";
    case Mode::Sensorimotor: return "sensorimotor";
    case Mode::Bode: return "bode";
  }
  return "?";
}

inline std::optional<Mode> parse_mode(const std::string& s) {
  for (Mode m : {Mode::Simulate, Mode::Pareto, Mode::Sensorimotor, Mode::Bode})
    if (s == to_string(m)) return m;
  return std::nullopt;
}

struct ObstacleConfig {
  decision::Point center = decision::Point::Zero();
  double radius = 0.03;
  double kappa = 0.02;
};

struct SimulateConfig {
  int n = 14;
  decision::Cell start{1, 1};
  decision::Region x1 = decision::Region::disk({0.0, 0.0}, 0.1);
  decision::Region x2 = decision::Region::box({0.9, 0.9}, {1.0, 1.0});
  decision::Membership membership = decision::Membership::Intersects;
  bool goal_in_region = true;
  std::vector<decision::Cell> forbidden{{7, 3}};
  std::vector<ObstacleConfig> obstacles{{{-1.0 + 15.0 / 14.0, -1.0 + 7.0 / 14.0}, 0.03, 0.02}};
  std::string rom = "single_integrator";
  double tau = 1.0;
  int delta_steps = 1;
  int horizon = 20;
  std::optional<double> half_width;  // defaults to the cell half-width
  double margin = 0.05;
  double box = 0.95;
  double w_smooth = 1.0;
  double w_effort = 1.0;
  multirate::Controller controller = multirate::Controller::Flat;
  double kp_flat = 4.0, kd_flat = 4.0, kp = 4.0, kd = 4.0;
  double lookahead = 1e-3;
  feedback::ClfSpec clf{0.5, 1.0, 1.0, 2.0};
  double cbf_alpha = 1.0;
  double clf_penalty = 10.0;
  double dt = 1e-3;
  double timeout = 120.0;
  double initial_heading = 0.0;
  double initial_speed = 0.05;
  int log_every = 1;
  double tracking_bound = 0.05;  // summary thresholds
  double barrier_floor = -1e-3;

  multirate::LayeredScenario scenario() const {
    multirate::LayeredScenario s;
    s.grid.n = n;
    s.grid.start = start;
    s.grid.S1 = decision::cells_in_region(n, x1, membership);
    s.grid.S2 = decision::cells_in_region(n, x2, membership);
    s.grid.forbidden.insert(forbidden.begin(), forbidden.end());
    if (goal_in_region) s.goal_region = x2;
    s.delta_steps = delta_steps;
    s.rom = rom == "double_integrator" ? planning::RomSpec::double_integrator(tau)
                                       : planning::RomSpec::single_integrator(tau);
    s.plan.horizon = horizon;
    s.plan.half_width = half_width.value_or(s.grid.delta());
    s.plan.margin = margin;
    s.plan.box = box;
    s.plan.w_smooth = w_smooth;
    s.plan.w_effort = w_effort;
    s.controller = controller;
    const auto I = feedback::Matrix2::Identity();
    s.gains.Kp_flat = kp_flat * I;
    s.gains.Kd_flat = kd_flat * I;
    s.gains.Kp = kp * I;
    s.gains.Kd = kd * I;
    s.gains.lookahead = lookahead;
    s.clf = clf;
    s.cbf.alpha = cbf_alpha;
    s.clf_penalty = clf_penalty;
    for (const auto& o : obstacles) s.obstacles.push_back({o.center, o.radius, o.kappa});
    s.dt = dt;
    s.timeout = timeout;
    s.initial_heading = initial_heading;
    s.initial_speed = initial_speed;
    return s;
  }
};

struct ParetoConfig {
  int m = 5;
  int n = 10;
  std::vector<int> k_values{0, 1, 2, 3, 4, 5};
  int weights = 2000;
  double ratio_min = 1e-4;
  double ratio_max = 1e4;
  double max_condition = 1e8;
  int dual_instances = 50;
  // LQR curve
  Matrix lqr_A = (Matrix(2, 2) << 1.0, 1.0, 0.0, 1.0).finished();
  Matrix lqr_B = (Matrix(2, 1) << 0.0, 1.0).finished();
  Vector lqr_x0 = (Vector(2) << 1.0, 0.0).finished();
  int lqr_N = 20;
  double rho_min = 1e-3;
  double rho_max = 1e3;
  int rho_count = 50;
};

struct SensorimotorConfig {
  double a = 1.0;
  double lambda = 0.1;
  double T_max = 1e3;
  // kradeoff: T_c = T_w = 0, T_s on a uniform grid
  double ts_min = 0.5;
  double ts_max = 100.0;
  int ts_points = 400;
  // phasetransition: integer sweeps 1..max of T_c (T_w = 0) and T_w (T_c = 0)
  int tc_max = 50;
  int tw_max = 50;
  // vision: sweep of R_H
  double R_L = 2.0, T_L = 1.0, T_H = 10.0, delta = 1.0;
  double rh_min = 1.5, rh_max = 8.0;
  int rh_points = 27;
};

struct LoopCase {
  double p = 1.0;
  double q = bode::kInf;
  double tau = 0.0;
};

struct BodeConfig {
  std::vector<LoopCase> loops{{1.0, bode::kInf, 0.2}, {1.0, 3.0, 0.1}, {0.5, 2.0, 0.0}};
  double w_min = 1e-3;
  double w_max = 1e3;
  int table_points = 400;
  int bands = 10;
};

struct ScenarioConfig {
  Mode mode = Mode::Simulate;
  std::uint64_t seed = 1;
  std::string out = "out";
  std::variant<SimulateConfig, ParetoConfig, SensorimotorConfig, BodeConfig> block;

  const SimulateConfig& simulate() const { return std::get<SimulateConfig>(block); }
  const ParetoConfig& pareto() const { return std::get<ParetoConfig>(block); }
  const SensorimotorConfig& sensorimotor() const { return std::get<SensorimotorConfig>(block); }
  const BodeConfig& bode() const { return std::get<BodeConfig>(block); }
};

namespace detail {

// Typed access to one JSON object with unknown-key rejection.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_, "must be an object");
  }

  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  bool has(const std::string& key) const { return j_.contains(key); }
  const json& raw(const std::string& key) const { return j_.at(key); }
  Reader child(const std::string& key) const { return {j_.at(key), field(key)}; }

  void only(std::initializer_list<const char*> known) const {
    for (const auto& [k, v] : j_.items()) {
      bool ok = false;
      for (const char* n : known) ok = ok || k == n;
      if (!ok) throw ConfigError(field(k), "unknown field");
    }
  }

  void number(const std::string& key, double& out) const {
    if (!has(key)) return;
    const json& v = j_.at(key);
    if (!v.is_number() || !std::isfinite(v.get<double>())) throw ConfigError(field(key), "must be a finite number");
    out = v.get<double>();
  }
  void integer(const std::string& key, int& out) const {
    if (!has(key)) return;
    const json& v = j_.at(key);
    if (!v.is_number_integer()) throw ConfigError(field(key), "must be an integer");
    const auto x = v.get<long long>();
    if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max())
      throw ConfigError(field(key), "out of range");
    out = static_cast<int>(x);
  }
  void boolean(const std::string& key, bool& out) const {
    if (!has(key)) return;
    if (!j_.at(key).is_boolean()) throw ConfigError(field(key), "must be true or false");
    out = j_.at(key).get<bool>();
  }
  void string(const std::string& key, std::string& out) const {
    if (!has(key)) return;
    if (!j_.at(key).is_string()) throw ConfigError(field(key), "must be a string");
    out = j_.at(key).get<std::string>();
  }

 private:
  const json& j_;
  std::string path_;
};

inline std::vector<double> numbers(const json& v, const std::string& field) {
  if (!v.is_array()) throw ConfigError(field, "must be an array of numbers");
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number() || !std::isfinite(e.get<double>())) throw ConfigError(field, "must be an array of numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

inline decision::Point point(const json& v, const std::string& field) {
  const auto x = numbers(v, field);
  if (x.size() != 2) throw ConfigError(field, "must have two entries");
  return {x[0], x[1]};
}

inline decision::Cell cell(const json& v, const std::string& field) {
  if (!v.is_array() || v.size() != 2 || !v[0].is_number_integer() || !v[1].is_number_integer())
    throw ConfigError(field, "must be a pair of integers");
  return {v[0].get<int>(), v[1].get<int>()};
}

inline Matrix matrix(const json& v, const std::string& field) {
  if (!v.is_array() || v.empty()) throw ConfigError(field, "must be a nonempty array of rows");
  std::vector<std::vector<double>> rows;
  for (const auto& r : v) rows.push_back(numbers(r, field));
  const std::size_t cols = rows.front().size();
  if (cols == 0) throw ConfigError(field, "rows must be nonempty");
  Matrix M(static_cast<Index>(rows.size()), static_cast<Index>(cols));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != cols) throw ConfigError(field, "rows must have equal length");
    for (std::size_t j = 0; j < cols; ++j)
      M(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
  }
  return M;
}

inline json to_json(const decision::Point& p) { return json::array({p(0), p(1)}); }
inline json to_json(const decision::Cell& c) { return json::array({c.s1, c.s2}); }
inline json to_json(const Matrix& M) {
  json rows = json::array();
  for (Index i = 0; i < M.rows(); ++i) {
    json r = json::array();
    for (Index j = 0; j < M.cols(); ++j) r.push_back(M(i, j));
    rows.push_back(r);
  }
  return rows;
}
inline json to_json(const Vector& v) {
  json a = json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

inline decision::Region region(const Reader& r) {
  std::string type = "disk";
  r.string("type", type);
  if (type == "disk") {
    r.only({"type", "center", "radius"});
    decision::Point c = decision::Point::Zero();
    double radius = 0.0;
    if (r.has("center")) c = point(r.raw("center"), r.field("center"));
    r.number("radius", radius);
    if (!(radius > 0)) throw ConfigError(r.field("radius"), "must be positive");
    return decision::Region::disk(c, radius);
  }
  if (type == "box") {
    r.only({"type", "lo", "hi"});
    if (!r.has("lo") || !r.has("hi")) throw ConfigError(r.field("lo"), "box needs lo and hi");
    const auto lo = point(r.raw("lo"), r.field("lo")), hi = point(r.raw("hi"), r.field("hi"));
    if (!(lo(0) <= hi(0) && lo(1) <= hi(1))) throw ConfigError(r.field("hi"), "must be >= lo");
    return decision::Region::box(lo, hi);
  }
  throw ConfigError(r.field("type"), "must be \"disk\" or \"box\"");
}

inline json to_json(const decision::Region& g) {
  if (g.kind == decision::Region::Kind::Disk)
    return {{"type", "disk"}, {"center", to_json(g.center)}, {"radius", g.radius}};
  return {{"type", "box"}, {"lo", to_json(g.lo)}, {"hi", to_json(g.hi)}};
}

inline const char* to_string(decision::Membership m) {
  switch (m) {
    case decision::Membership::AllCorners: return "all_corners";
    case decision::Membership::Centroid: return "centroid";
    case decision::Membership::Intersects: return "intersects";
  }
  return "?";
}

inline void require(bool ok, const std::string& field, const std::string& what) {
  if (!ok) throw ConfigError(field, what);
}

inline SimulateConfig read_simulate(const Reader& r) {
  r.only({"grid", "obstacles", "rom", "tau", "delta_steps", "plan", "controller", "gains", "clf", "cbf_alpha",
          "clf_penalty", "dt", "timeout", "initial_heading", "initial_speed", "log_every", "tracking_bound",
          "barrier_floor"});
  SimulateConfig c;
  if (r.has("grid")) {
    const Reader g = r.child("grid");
    g.only({"n", "start", "x1", "x2", "membership", "goal_in_region", "forbidden"});
    g.integer("n", c.n);
    require(c.n >= 1, g.field("n"), "must be >= 1");
    if (g.has("start")) c.start = cell(g.raw("start"), g.field("start"));
    if (g.has("x1")) c.x1 = region(g.child("x1"));
    if (g.has("x2")) c.x2 = region(g.child("x2"));
    std::string mem = to_string(c.membership);
    g.string("membership", mem);
    if (mem == "all_corners")
      c.membership = decision::Membership::AllCorners;
    else if (mem == "centroid")
      c.membership = decision::Membership::Centroid;
    else if (mem == "intersects")
      c.membership = decision::Membership::Intersects;
    else
      throw ConfigError(g.field("membership"), "must be all_corners, centroid or intersects");
    g.boolean("goal_in_region", c.goal_in_region);
    if (g.has("forbidden")) {
      const json& f = g.raw("forbidden");
      require(f.is_array(), g.field("forbidden"), "must be an array of cells");
      c.forbidden.clear();
      for (const auto& e : f) c.forbidden.push_back(cell(e, g.field("forbidden")));
    }
  }
  if (r.has("obstacles")) {
    const json& list = r.raw("obstacles");
    require(list.is_array(), r.field("obstacles"), "must be an array");
    c.obstacles.clear();
    for (std::size_t i = 0; i < list.size(); ++i) {
      const Reader o(list[i], r.field("obstacles") + "[" + std::to_string(i) + "]");
      o.only({"center", "radius", "kappa"});
      ObstacleConfig ob;
      if (o.has("center")) ob.center = point(o.raw("center"), o.field("center"));
      o.number("radius", ob.radius);
      o.number("kappa", ob.kappa);
      require(ob.radius > 0, o.field("radius"), "must be positive");
      require(ob.kappa >= 0, o.field("kappa"), "must be nonnegative");
      c.obstacles.push_back(ob);
    }
  }
  r.string("rom", c.rom);
  require(c.rom == "single_integrator" || c.rom == "double_integrator", r.field("rom"),
          "must be single_integrator or double_integrator");
  r.number("tau", c.tau);
  r.integer("delta_steps", c.delta_steps);
  if (r.has("plan")) {
    const Reader p = r.child("plan");
    p.only({"horizon", "half_width", "margin", "box", "w_smooth", "w_effort"});
    p.integer("horizon", c.horizon);
    if (p.has("half_width")) {
      double hw = 0.0;
      p.number("half_width", hw);
      c.half_width = hw;
    }
    p.number("margin", c.margin);
    p.number("box", c.box);
    p.number("w_smooth", c.w_smooth);
    p.number("w_effort", c.w_effort);
  }
  if (r.has("controller")) {
    std::string name;
    r.string("controller", name);
    const auto ctl = multirate::parse_controller(name);
    require(ctl.has_value(), r.field("controller"), "must be pd, flat, clf_qp or clf_cbf_qp");
    c.controller = *ctl;
  }
  if (r.has("gains")) {
    const Reader g = r.child("gains");
    g.only({"kp_flat", "kd_flat", "kp", "kd", "lookahead"});
    g.number("kp_flat", c.kp_flat);
    g.number("kd_flat", c.kd_flat);
    g.number("kp", c.kp);
    g.number("kd", c.kd);
    g.number("lookahead", c.lookahead);
    require(c.kp_flat > 0, g.field("kp_flat"), "must be positive");
    require(c.kd_flat > 0, g.field("kd_flat"), "must be positive");
    require(c.kp > 0, g.field("kp"), "must be positive");
    require(c.kd > 0, g.field("kd"), "must be positive");
    require(c.lookahead >= 0, g.field("lookahead"), "must be nonnegative");
  }
  if (r.has("clf")) {
    const Reader g = r.child("clf");
    g.only({"lambda", "k1", "k2", "c"});
    g.number("lambda", c.clf.lambda);
    g.number("k1", c.clf.k1);
    g.number("k2", c.clf.k2);
    g.number("c", c.clf.c);
    require(c.clf.lambda > 0, g.field("lambda"), "must be positive");
    require(c.clf.k1 > 0 && c.clf.k1 <= c.clf.k2, g.field("k1"), "need 0 < k1 <= k2");
    require(c.clf.c > 0, g.field("c"), "must be positive");
  }
  r.number("cbf_alpha", c.cbf_alpha);
  r.number("clf_penalty", c.clf_penalty);
  r.number("dt", c.dt);
  r.number("timeout", c.timeout);
  r.number("initial_heading", c.initial_heading);
  r.number("initial_speed", c.initial_speed);
  r.integer("log_every", c.log_every);
  r.number("tracking_bound", c.tracking_bound);
  r.number("barrier_floor", c.barrier_floor);

  require(c.tau > 0, r.field("tau"), "must be positive");
  require(c.dt > 0, r.field("dt"), "must be positive");
  require(c.dt < c.tau, r.field("dt"), "dt must be < tau");
  require(std::abs(std::lround(c.tau / c.dt) * c.dt - c.tau) <= 1e-9 * c.tau, r.field("tau"),
          "must be an integer multiple of dt");
  require(c.timeout > 0, r.field("timeout"), "must be positive");
  require(c.delta_steps >= 1, r.field("delta_steps"), "must be >= 1");
  require(c.horizon >= 1, r.field("plan.horizon"), "must be >= 1");
  require(c.box > 0, r.field("plan.box"), "must be positive");
  require(c.margin >= 0, r.field("plan.margin"), "must be nonnegative");
  require(!c.half_width || *c.half_width > 0, r.field("plan.half_width"), "must be positive");
  require(c.w_smooth >= 0 && c.w_effort >= 0 && c.w_smooth + c.w_effort > 0, r.field("plan.w_smooth"),
          "weights must be nonnegative and not both zero");
  require(c.cbf_alpha > 0, r.field("cbf_alpha"), "must be positive");
  require(c.clf_penalty > 0, r.field("clf_penalty"), "must be positive");
  require(std::abs(c.initial_speed) >= dynamics::kMinFlatSpeed, r.field("initial_speed"), "must be nonzero");
  require(c.log_every >= 1, r.field("log_every"), "must be >= 1");
  const decision::GridWorld probe{c.n, c.start, {}, {}, {}};
  require(probe.in_grid(c.start), r.field("grid.start"), "must lie inside the grid");
  for (const auto& f : c.forbidden) require(probe.in_grid(f), r.field("grid.forbidden"), "cell outside the grid");
  require(!decision::cells_in_region(c.n, c.x1, c.membership).empty(), r.field("grid.x1"),
          "covers no cell under the membership rule");
  require(!decision::cells_in_region(c.n, c.x2, c.membership).empty(), r.field("grid.x2"),
          "covers no cell under the membership rule");
  try {
    c.scenario().validate();
  } catch (const DomainError& e) {
    throw ConfigError("simulate", e.what());
  }
  return c;
}

inline json write_simulate(const SimulateConfig& c) {
  json forbidden = json::array(), obstacles = json::array();
  for (const auto& f : c.forbidden) forbidden.push_back(to_json(f));
  for (const auto& o : c.obstacles)
    obstacles.push_back({{"center", to_json(o.center)}, {"radius", o.radius}, {"kappa", o.kappa}});
  json plan = {{"horizon", c.horizon}, {"margin", c.margin}, {"box", c.box}, {"w_smooth", c.w_smooth},
               {"w_effort", c.w_effort}};
  if (c.half_width) plan["half_width"] = *c.half_width;
  return {{"grid",
           {{"n", c.n},
            {"start", to_json(c.start)},
            {"x1", to_json(c.x1)},
            {"x2", to_json(c.x2)},
            {"membership", to_string(c.membership)},
            {"goal_in_region", c.goal_in_region},
            {"forbidden", forbidden}}},
          {"obstacles", obstacles},
          {"rom", c.rom},
          {"tau", c.tau},
          {"delta_steps", c.delta_steps},
          {"plan", plan},
          {"controller", multirate::to_string(c.controller)},
          {"gains", {{"kp_flat", c.kp_flat}, {"kd_flat", c.kd_flat}, {"kp", c.kp}, {"kd", c.kd}, {"lookahead", c.lookahead}}},
          {"clf", {{"lambda", c.clf.lambda}, {"k1", c.clf.k1}, {"k2", c.clf.k2}, {"c", c.clf.c}}},
          {"cbf_alpha", c.cbf_alpha},
          {"clf_penalty", c.clf_penalty},
          {"dt", c.dt},
          {"timeout", c.timeout},
          {"initial_heading", c.initial_heading},
          {"initial_speed", c.initial_speed},
          {"log_every", c.log_every},
          {"tracking_bound", c.tracking_bound},
          {"barrier_floor", c.barrier_floor}};
}

inline ParetoConfig read_pareto(const Reader& r) {
  r.only({"m", "n", "k_values", "weights", "ratio_min", "ratio_max", "max_condition", "dual_instances", "lqr"});
  ParetoConfig c;
  r.integer("m", c.m);
  c.n = 2 * c.m;
  r.integer("n", c.n);
  if (r.has("k_values")) {
    const json& v = r.raw("k_values");
    require(v.is_array() && !v.empty(), r.field("k_values"), "must be a nonempty array of integers");
    c.k_values.clear();
    for (const auto& e : v) {
      require(e.is_number_integer(), r.field("k_values"), "must be a nonempty array of integers");
      c.k_values.push_back(e.get<int>());
    }
  }
  r.integer("weights", c.weights);
  r.number("ratio_min", c.ratio_min);
  r.number("ratio_max", c.ratio_max);
  r.number("max_condition", c.max_condition);
  r.integer("dual_instances", c.dual_instances);
  if (r.has("lqr")) {
    const Reader l = r.child("lqr");
    l.only({"A", "B", "x0", "N", "rho_min", "rho_max", "rho_count"});
    if (l.has("A")) c.lqr_A = matrix(l.raw("A"), l.field("A"));
    if (l.has("B")) c.lqr_B = matrix(l.raw("B"), l.field("B"));
    if (l.has("x0")) {
      const auto x = numbers(l.raw("x0"), l.field("x0"));
      c.lqr_x0 = Eigen::Map<const Vector>(x.data(), static_cast<Index>(x.size()));
    }
    l.integer("N", c.lqr_N);
    l.number("rho_min", c.rho_min);
    l.number("rho_max", c.rho_max);
    l.integer("rho_count", c.rho_count);
    require(c.lqr_A.rows() == c.lqr_A.cols(), l.field("A"), "must be square");
    require(c.lqr_B.rows() == c.lqr_A.rows(), l.field("B"), "must have as many rows as A");
    require(c.lqr_x0.size() == c.lqr_A.rows(), l.field("x0"), "must match the size of A");
    require(c.lqr_N >= 1, l.field("N"), "must be >= 1");
    require(c.rho_min > 0 && c.rho_min < c.rho_max, l.field("rho_min"), "need 0 < rho_min < rho_max");
    require(c.rho_count >= 2, l.field("rho_count"), "must be >= 2");
  }
  require(c.m >= 1, r.field("m"), "must be >= 1");
  require(c.n == 2 * c.m, r.field("n"), "must equal 2 m");
  for (int k : c.k_values) {
    require(k >= 0, r.field("k_values"), "k must be >= 0");
    require(k <= c.m, r.field("k_values"), "k must be <= m");
  }
  require(c.weights >= 2, r.field("weights"), "must be >= 2");
  require(c.ratio_min > 0 && c.ratio_min < c.ratio_max, r.field("ratio_min"), "need 0 < ratio_min < ratio_max");
  require(c.max_condition >= 1, r.field("max_condition"), "must be >= 1");
  require(c.dual_instances >= 0, r.field("dual_instances"), "must be >= 0");
  return c;
}

inline json write_pareto(const ParetoConfig& c) {
  return {{"m", c.m},
          {"n", c.n},
          {"k_values", c.k_values},
          {"weights", c.weights},
          {"ratio_min", c.ratio_min},
          {"ratio_max", c.ratio_max},
          {"max_condition", c.max_condition},
          {"dual_instances", c.dual_instances},
          {"lqr",
           {{"A", to_json(c.lqr_A)},
            {"B", to_json(c.lqr_B)},
            {"x0", to_json(c.lqr_x0)},
            {"N", c.lqr_N},
            {"rho_min", c.rho_min},
            {"rho_max", c.rho_max},
            {"rho_count", c.rho_count}}}};
}

inline SensorimotorConfig read_sensorimotor(const Reader& r) {
  r.only({"a", "lambda", "T_max", "kradeoff", "phasetransition", "vision"});
  SensorimotorConfig c;
  r.number("a", c.a);
  r.number("lambda", c.lambda);
  r.number("T_max", c.T_max);
  if (r.has("kradeoff")) {
    const Reader k = r.child("kradeoff");
    k.only({"ts_min", "ts_max", "points"});
    k.number("ts_min", c.ts_min);
    k.number("ts_max", c.ts_max);
    k.integer("points", c.ts_points);
    require(c.ts_min > 0 && c.ts_min < c.ts_max, k.field("ts_min"), "need 0 < ts_min < ts_max");
    require(c.ts_points >= 2, k.field("points"), "must be >= 2");
  }
  if (r.has("phasetransition")) {
    const Reader p = r.child("phasetransition");
    p.only({"tc_max", "tw_max"});
    p.integer("tc_max", c.tc_max);
    p.integer("tw_max", c.tw_max);
    require(c.tc_max >= 1, p.field("tc_max"), "must be >= 1");
    require(c.tw_max >= 1, p.field("tw_max"), "must be >= 1");
  }
  if (r.has("vision")) {
    const Reader v = r.child("vision");
    v.only({"R_L", "T_L", "T_H", "delta", "rh_min", "rh_max", "points"});
    v.number("R_L", c.R_L);
    v.number("T_L", c.T_L);
    v.number("T_H", c.T_H);
    v.number("delta", c.delta);
    v.number("rh_min", c.rh_min);
    v.number("rh_max", c.rh_max);
    v.integer("points", c.rh_points);
    require(c.R_L > 0, v.field("R_L"), "must be positive");
    require(c.T_L >= 0, v.field("T_L"), "must be nonnegative");
    require(c.T_H >= 0, v.field("T_H"), "must be nonnegative");
    require(c.delta >= 0, v.field("delta"), "must be nonnegative");
    require(c.rh_min > 0 && c.rh_min < c.rh_max, v.field("rh_min"), "need 0 < rh_min < rh_max");
    require(c.rh_points >= 2, v.field("points"), "must be >= 2");
  }
  require(c.lambda > 0, r.field("lambda"), "must be positive");
  require(c.T_max > 1e-3, r.field("T_max"), "must exceed 1e-3");
  return c;
}

inline json write_sensorimotor(const SensorimotorConfig& c) {
  return {{"a", c.a},
          {"lambda", c.lambda},
          {"T_max", c.T_max},
          {"kradeoff", {{"ts_min", c.ts_min}, {"ts_max", c.ts_max}, {"points", c.ts_points}}},
          {"phasetransition", {{"tc_max", c.tc_max}, {"tw_max", c.tw_max}}},
          {"vision",
           {{"R_L", c.R_L},
            {"T_L", c.T_L},
            {"T_H", c.T_H},
            {"delta", c.delta},
            {"rh_min", c.rh_min},
            {"rh_max", c.rh_max},
            {"points", c.rh_points}}}};
}

inline BodeConfig read_bode(const Reader& r) {
  r.only({"loops", "w_min", "w_max", "table_points", "bands"});
  BodeConfig c;
  if (r.has("loops")) {
    const json& list = r.raw("loops");
    require(list.is_array() && !list.empty(), r.field("loops"), "must be a nonempty array");
    c.loops.clear();
    for (std::size_t i = 0; i < list.size(); ++i) {
      const Reader l(list[i], r.field("loops") + "[" + std::to_string(i) + "]");
      l.only({"p", "q", "tau"});
      LoopCase lc;
      l.number("p", lc.p);
      if (l.has("q") && !l.raw("q").is_null()) l.number("q", lc.q);  // null or absent: no zero
      l.number("tau", lc.tau);
      require(lc.p > 0, l.field("p"), "must be positive");
      require(lc.q > 0 && lc.q != lc.p, l.field("q"), "must be positive and differ from p");
      require(lc.tau >= 0, l.field("tau"), "must be nonnegative");
      c.loops.push_back(lc);
    }
  }
  r.number("w_min", c.w_min);
  r.number("w_max", c.w_max);
  r.integer("table_points", c.table_points);
  r.integer("bands", c.bands);
  require(c.w_min > 0 && c.w_min < c.w_max, r.field("w_min"), "need 0 < w_min < w_max");
  require(c.table_points >= 2, r.field("table_points"), "must be >= 2");
  require(c.bands >= 0, r.field("bands"), "must be >= 0");
  return c;
}

inline json write_bode(const BodeConfig& c) {
  json loops = json::array();
  for (const auto& l : c.loops)
    loops.push_back({{"p", l.p}, {"q", std::isinf(l.q) ? json(nullptr) : json(l.q)}, {"tau", l.tau}});
  return {{"loops", loops},
          {"w_min", c.w_min},
          {"w_max", c.w_max},
          {"table_points", c.table_points},
          {"bands", c.bands}};
}

}  // namespace detail

inline ScenarioConfig parse_config(const json& j) {
  const detail::Reader r(j, "");
  r.only({"mode", "seed", "out", "simulate", "pareto", "sensorimotor", "bode"});
  if (!r.has("mode")) throw ConfigError("mode", "missing");
  std::string name;
  r.string("mode", name);
  const auto mode = parse_mode(name);
  if (!mode) throw ConfigError("mode", "unknown mode '" + name + "'");
  int blocks = 0;
  for (const char* b : {"simulate", "pareto", "sensorimotor", "bode"}) blocks += r.has(b) ? 1 : 0;
  if (blocks != 1) throw ConfigError("mode", "exactly one mode block must be present");
  if (!r.has(to_string(*mode))) throw ConfigError(to_string(*mode), "block for the selected mode is missing");

  ScenarioConfig c;
  c.mode = *mode;
  if (r.has("seed")) {
    if (!r.raw("seed").is_number_unsigned()) throw ConfigError("seed", "must be a nonnegative integer");
    c.seed = r.raw("seed").get<std::uint64_t>();
  }
  r.string("out", c.out);
  if (c.out.empty()) throw ConfigError("out", "must be nonempty");
  const detail::Reader block = r.child(to_string(*mode));
  switch (*mode) {
    case Mode::Simulate: c.block = detail::read_simulate(block); break;
    case Mode::Pareto: c.block = detail::read_pareto(block); break;
    case Mode::Sensorimotor: c.block = detail::read_sensorimotor(block); break;
    case Mode::Bode: c.block = detail::read_bode(block); break;
  }
  return c;
}

inline json to_json(const ScenarioConfig& c) {
  json j = {{"mode", to_string(c.mode)}, {"seed", c.seed}, {"out", c.out}};
  switch (c.mode) {
    case Mode::Simulate: j["simulate"] = detail::write_simulate(c.simulate()); break;
    case Mode::Pareto: j["pareto"] = detail::write_pareto(c.pareto()); break;
    case Mode::Sensorimotor: j["sensorimotor"] = detail::write_sensorimotor(c.sensorimotor()); break;
    case Mode::Bode: j["bode"] = detail::write_bode(c.bode()); break;
  }
  return j;
}

inline ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("config", "cannot open " + path.string());
  json j;
  try {
    j = json::parse(f);
  } catch (const json::parse_error& e) {
    throw ConfigError("config", std::string("invalid JSON: ") + e.what());
  }
  return parse_config(j);
}

inline void save_config(const ScenarioConfig& c, const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
  f << to_json(c).dump(2) << '\n';
}

}  // namespace lca::harness
