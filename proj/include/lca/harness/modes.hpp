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

// The four CLI modes as pure functions from a config to named CSV tables
// plus human-readable report lines. Nothing here touches the file system.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "lca/bode.hpp"
#include "lca/decision.hpp"
#include "lca/dess.hpp"
#include "lca/harness/config.hpp"
#include "lca/harness/csv.hpp"
#include "lca/multirate.hpp"
#include "lca/rng.hpp"
#include "lca/sensorimotor.hpp"

namespace lca::harness {

struct ModeOutput {
  std::map<std::string, CsvTable> tables;  // file name -> table
  std::vector<std::string> report;
  std::string summary;  // one line
  bool ok = true;       // the mode's own success criterion
};

namespace detail {

inline std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

inline std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = a + (b - a) * i / (n - 1);
  return v;
}

inline std::vector<double> logspace(double a, double b, int n) {
  std::vector<double> v = linspace(std::log(a), std::log(b), n);
  for (double& x : v) x = std::exp(x);
  return v;
}

inline bool member(const std::vector<decision::Cell>& set, const decision::Cell& c) {
  return std::find(set.begin(), set.end(), c) != set.end();
}

}  // namespace detail

inline void add_table(ModeOutput& out, const std::string& name, CsvTable t) { out.tables.emplace(name, std::move(t)); }

// runlog.csv, plans.csv, grid.csv, summary.csv
inline ModeOutput run_simulate(const SimulateConfig& c) {
  const auto s = c.scenario();
  const auto log = multirate::run(s);
  const auto hit = decision::monitor_sequential_reachability(log.labels(), s.grid.S1, s.grid.S2);

  std::vector<std::string> header{"t",      "x1",     "x2",     "theta",  "speed",  "ref_x1", "ref_x2",
                                  "ref_v1", "ref_v2", "u1",     "u2",     "u1_ff",  "u2_ff",  "u1_fb",
                                  "u2_fb",  "err1",   "err2",   "cell_s1", "cell_s2", "plan_solved"};
  for (std::size_t j = 0; j < s.obstacles.size(); ++j) header.push_back("h" + std::to_string(j));
  CsvTable runlog(header);
  const std::size_t n = log.samples.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (i % static_cast<std::size_t>(c.log_every) != 0 && i + 1 != n) continue;
    const auto& r = log.samples[i];
    std::vector<double> row{r.t,        r.x.x1,     r.x.x2,     r.x.theta,  r.speed,    r.ref(0),   r.ref(1),
                            r.ref_vel(0), r.ref_vel(1), r.u.u1,  r.u.u2,     r.u_ff.u1,  r.u_ff.u2,  r.u_fb.u1,
                            r.u_fb.u2,  r.err(0),   r.err(1),   r.cell ? double(r.cell->s1) : -1.0,
                            r.cell ? double(r.cell->s2) : -1.0, r.plan_solved ? 1.0 : 0.0};
    row.insert(row.end(), r.barriers.begin(), r.barriers.end());
    runlog.add_row(std::move(row));
  }

  CsvTable plans({"t", "k", "v1", "v2"});
  for (const auto& p : log.plans) plans.add_row({p.t, double(p.k), p.v0(0), p.v0(1)});

  CsvTable grid({"s1", "s2", "cx1", "cx2", "in_S1", "in_S2", "forbidden", "path_index"});
  for (int a = 0; a < s.grid.n; ++a)
    for (int b = 0; b < s.grid.n; ++b) {
      const decision::Cell cell{a, b};
      const auto& st = log.decision.states;
      const auto it = std::find(st.begin(), st.end(), cell);
      const auto ctr = s.grid.centroid(cell);
      grid.add_row({double(a), double(b), ctr(0), ctr(1), detail::member(s.grid.S1, cell) ? 1.0 : 0.0,
                    detail::member(s.grid.S2, cell) ? 1.0 : 0.0, s.grid.forbidden.contains(cell) ? 1.0 : 0.0,
                    it == st.end() ? -1.0 : double(it - st.begin())});
    }

  const bool tracking_ok = log.max_tracking_error <= c.tracking_bound;
  const bool barrier_ok = log.min_barrier >= c.barrier_floor;
  const bool satisfied = hit.has_value() && log.completed;
  CsvTable summary({"completed", "completion_time", "monitor_index", "monitor_time", "max_tracking_error",
                    "min_barrier", "tracking_ok", "barrier_ok", "satisfied", "samples", "plans"});
  summary.add_row({log.completed ? 1.0 : 0.0, log.completed ? log.completion_time : -1.0,
                   hit ? double(*hit) : -1.0, hit ? log.samples[*hit].t : -1.0, log.max_tracking_error,
                   log.min_barrier, tracking_ok ? 1.0 : 0.0, barrier_ok ? 1.0 : 0.0, satisfied ? 1.0 : 0.0,
                   double(n), double(log.plans.size())});

  ModeOutput out;
  out.ok = satisfied && tracking_ok && barrier_ok;
  out.report.push_back(detail::fmt("decision plan: %zu cells, S1 reached at plan step %zu", log.decision.states.size(),
                                   log.decision.s1_index));
  out.report.push_back(detail::fmt("task F(S1 & F S2): %s%s", hit ? "satisfied" : "not satisfied",
                                   hit ? detail::fmt(" at t=%.3f", log.samples[*hit].t).c_str() : ""));
  out.report.push_back(detail::fmt("max per-axis tracking error %.6g (bound %.6g): %s", log.max_tracking_error,
                                   c.tracking_bound, tracking_ok ? "ok" : "violated"));
  out.report.push_back(detail::fmt("min barrier value %.6g (floor %.6g): %s", log.min_barrier, c.barrier_floor,
                                   barrier_ok ? "ok" : "violated"));
  out.summary = detail::fmt("simulate[%s]: %s, t=%.3f, max_err=%.4g, min_h=%.4g, %zu samples",
                            multirate::to_string(c.controller), out.ok ? "satisfied" : "NOT satisfied",
                            log.samples.empty() ? 0.0 : log.samples.back().t, log.max_tracking_error, log.min_barrier,
                            n);
  add_table(out, "runlog.csv", std::move(runlog));
  add_table(out, "plans.csv", std::move(plans));
  add_table(out, "grid.csv", std::move(grid));
  add_table(out, "summary.csv", std::move(summary));
  return out;
}

// pareto.csv, sigma_table.csv, dual.csv, lqr_pareto.csv
inline ModeOutput run_pareto(const ParetoConfig& c, std::uint64_t seed) {
  const auto weights = dess::weight_grid(static_cast<std::size_t>(c.weights), c.ratio_min, c.ratio_max);
  CsvTable pareto({"k", "lambda1", "C1", "C2"});
  CsvTable sigma({"k", "sigma_empirical", "sigma_closed_form", "rel_err", "minimax_lambda1", "minimax_C1",
                  "minimax_C2", "dual_gap"});
  ModeOutput out;
  double worst_rel = 0.0;
  for (int k : c.k_values) {
    const auto p = dess::generate_shared_row_instance(seed, c.m, k, c.max_condition);
    const auto sweep = dess::pareto_sweep(p, weights);
    const auto mm = dess::minimax_point(p);
    const double emp = dess::sigma_empirical(sweep, mm), cf = dess::sigma_closed_form(p);
    const double rel = std::abs(emp - cf) / std::max(cf, 1e-6);
    const auto cert = dess::dual_certificate(p, std::numeric_limits<double>::infinity());
    worst_rel = std::max(worst_rel, rel);
    for (const auto& pt : sweep.points) pareto.add_row({double(k), pt.lambda1, pt.C1, pt.C2});
    sigma.add_row({double(k), emp, cf, rel, mm.lambda1, mm.C1, mm.C2, cert.gap()});
    out.report.push_back(detail::fmt("k=%d: sigma empirical %.10g, closed form %.10g, rel err %.3g, dual gap %.3g", k,
                                     emp, cf, rel, cert.gap()));
  }

  CsvTable dual({"instance", "seed", "k", "dual_value", "primal_value", "gap", "feasibility"});
  double worst_gap = 0.0;
  for (int i = 0; i < c.dual_instances; ++i) {
    const std::uint64_t s = seed + 1 + static_cast<std::uint64_t>(i);
    const int k = i % (c.m + 1);
    const auto cert = dess::dual_certificate(dess::generate_shared_row_instance(s, c.m, k, c.max_condition),
                                             std::numeric_limits<double>::infinity());
    worst_gap = std::max(worst_gap, std::abs(cert.gap()));
    dual.add_row({double(i), double(s), double(k), cert.dual_value, cert.primal_value, cert.gap(), cert.feasibility});
  }

  CsvTable lqr({"rho", "state_cost", "control_cost"});
  for (const auto& lc : dess::lqr_pareto(c.lqr_A, c.lqr_B, c.lqr_x0, c.lqr_N,
                                         detail::logspace(c.rho_min, c.rho_max, c.rho_count)))
    lqr.add_row({lc.rho, lc.state, lc.control});

  out.ok = worst_rel <= 0.05 && worst_gap <= 1e-6;
  out.summary = detail::fmt("pareto: %zu k values x %d weights, worst sigma rel err %.3g, worst dual gap %.3g",
                            c.k_values.size(), c.weights, worst_rel, worst_gap);
  add_table(out, "pareto.csv", std::move(pareto));
  add_table(out, "sigma_table.csv", std::move(sigma));
  add_table(out, "dual.csv", std::move(dual));
  add_table(out, "lqr_pareto.csv", std::move(lqr));
  return out;
}

// kradeoff.csv, phasetransition.csv, vision.csv
inline ModeOutput run_sensorimotor(const SensorimotorConfig& c) {
  using namespace sensorimotor;
  const PlantScalar plant{c.a};
  ModeOutput out;

  CsvTable krad({"T_s", "R", "delay_cost", "quantization_cost", "total_cost"});
  const ResourceTradeoff base{c.lambda, 0.0};
  for (double ts : detail::linspace(c.ts_min, c.ts_max, c.ts_points)) {
    const auto t = tradeoff_cost(plant, base, ts, 0.0);
    krad.add_row({ts, c.lambda * ts, t.delay, t.quantization, t.total()});
  }
  const auto opt = optimize_delay(plant, base, 0.0, 1e-3, c.T_max);
  out.report.push_back(detail::fmt("T_c=T_w=0: T_s*=%.6g, R*=%.6g, cost*=%.6g (delay %.6g, quantization %.6g)",
                                   opt.T_s, opt.R, opt.cost, opt.terms.delay, opt.terms.quantization));

  CsvTable phase({"T_c", "T_w", "T_s_opt", "R_opt", "T_net", "cost", "delay_cost", "quantization_cost"});
  const auto add_phase = [&](double tc, double tw) {
    const auto o = optimize_delay(plant, {c.lambda, tc}, tw, 1e-3, c.T_max);
    phase.add_row({tc, tw, o.T_s, o.R, o.T_s + tc - tw, o.cost, o.terms.delay, o.terms.quantization});
    return o;
  };
  for (int tc = 1; tc <= c.tc_max; ++tc) add_phase(tc, 0.0);
  DelayOptimum last_w;
  for (int tw = 1; tw <= c.tw_max; ++tw) last_w = add_phase(0.0, tw);
  out.report.push_back(detail::fmt("T_w=%d: T_s*=%.6g, R*=%.6g, cost*=%.6g", c.tw_max, last_w.T_s, last_w.R,
                                   last_w.cost));

  CsvTable vision({"R_H", "R_L", "T_L", "T_H", "delta", "reflex_cost", "vision_cost", "total_cost"});
  for (double rh : detail::linspace(c.rh_min, c.rh_max, c.rh_points)) {
    const auto v = layered_vision_cost({c.R_L, c.T_L, rh, c.T_H, c.delta}, plant);
    vision.add_row({rh, c.R_L, c.T_L, c.T_H, c.delta, v.reflex, v.vision, v.total()});
  }

  out.summary = detail::fmt("sensorimotor: a=%g lambda=%g, T_s*=%.4g R*=%.4g cost*=%.4g", c.a, c.lambda, opt.T_s,
                            opt.R, opt.cost);
  add_table(out, "kradeoff.csv", std::move(krad));
  add_table(out, "phasetransition.csv", std::move(phase));
  add_table(out, "vision.csv", std::move(vision));
  return out;
}

// bode.csv, bode_report.csv, waterbed.csv
inline ModeOutput run_bode(const BodeConfig& c, std::uint64_t seed) {
  CsvTable table({"loop", "omega", "abs_S", "abs_T"});
  CsvTable report({"loop", "p", "q", "tau", "gain", "F", "ln_hinf_T", "weighted_integral", "clipped",
                   "waterbed_held", "waterbed_bands"});
  CsvTable water({"loop", "w1", "w2", "c1", "c2", "M1", "M2", "lhs", "F", "holds"});
  ModeOutput out;
  Rng rng(seed);
  const auto omegas = detail::logspace(c.w_min, c.w_max, c.table_points);
  for (std::size_t i = 0; i < c.loops.size(); ++i) {
    const auto& lc = c.loops[i];
    const auto loop = bode::stabilized_test_loop(lc.p, lc.q, lc.tau);
    const auto T = bode::complementary(loop);
    const double F = bode::fragility(lc.p, lc.q, lc.tau);
    const double lnT = std::log(bode::hinf_norm(T));
    const auto I = bode::bode_weighted_integral(T, lc.p);
    for (double w : omegas) {
      const auto st = bode::sensitivity(loop, w);
      table.add_row({double(i), w, std::abs(st.S), std::abs(st.T)});
    }
    int held = 0;
    for (int b = 0; b < c.bands; ++b) {
      const double w1 = std::pow(10.0, rng.uniform(-3, 2));
      const double w2 = w1 * std::pow(10.0, rng.uniform(0.05, 2));
      const auto r = bode::waterbed_check(T, lc.p, w1, w2, F);
      held += r.holds ? 1 : 0;
      water.add_row({double(i), w1, w2, r.c1, r.c2, r.M1, r.M2, r.lhs, r.F, r.holds ? 1.0 : 0.0});
    }
    const double gain = loop.controller.num.front();
    report.add_row({double(i), lc.p, lc.q, lc.tau, gain, F, lnT, I.value, I.clipped ? 1.0 : 0.0, double(held),
                    double(c.bands)});
    const bool ok = lnT >= F - 1e-3 && I.value >= F - 0.02 && held == c.bands;
    out.ok = out.ok && ok;
    out.report.push_back(detail::fmt("loop %zu (p=%g q=%g tau=%g, k=%.6g): F=%.6g ln||T||inf=%.6g integral=%.8g "
                                     "waterbed %d/%d",
                                     i, lc.p, lc.q, lc.tau, gain, F, lnT, I.value, held, c.bands));
  }
  out.summary = detail::fmt("bode: %zu loops, laws %s", c.loops.size(), out.ok ? "hold" : "VIOLATED");
  add_table(out, "bode.csv", std::move(table));
  add_table(out, "bode_report.csv", std::move(report));
  add_table(out, "waterbed.csv", std::move(water));
  return out;
}

inline ModeOutput run_mode(const ScenarioConfig& c) {
  switch (c.mode) {
    case Mode::Simulate: return run_simulate(c.simulate());
    case Mode::Pareto: return run_pareto(c.pareto(), c.seed);
    case Mode::Sensorimotor: return run_sensorimotor(c.sensorimotor());
    case Mode::Bode: return run_bode(c.bode(), c.seed);
  }
  return {};
}

}  // namespace lca::harness
