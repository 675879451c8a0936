// SPDX-License-Identifier: Apache-2.0

#include "stenosim/oracle.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

namespace stenosim {

ResolvedRun run_resolved(const RunConfig& cfg) {
  cfg.validate();
  if (cfg.problem != "vessel")
    throw std::invalid_argument("run_resolved: requires problem = vessel");
  const auto t_begin = std::chrono::steady_clock::now();

  ResolvedRun run;
  run.T = cfg.schedule_T;
  run.k = cfg.schedule_k;
  run.config_hash = cfg.hash();
  run.physics_hash = cfg.physics_hash();

  const double k = cfg.schedule_k;
  const long M = std::lround(1.0 / k);          // steps per period
  const long total = std::lround(cfg.schedule_T / k);
  if (total > cfg.oracle_budget)
    throw std::runtime_error("run_resolved: budget exceeded (" +
                             std::to_string(total) + " micro steps > " +
                             std::to_string(cfg.oracle_budget) + ")");
  const long refresh = cfg.oracle_map_refresh > 0 ? cfg.oracle_map_refresh : M;
  const long snap_periods = cfg.oracle_snapshot_every > 0
                                ? cfg.oracle_snapshot_every
                                : std::lround(cfg.schedule_K);

  MicroSolver solver(cfg.make_vessel_problem());
  GrowthParams gp = cfg.growth;
  gp.c_max = cfg.geometry.c_max;

  // Baseline outflow of the ungrown vessel (periodic solve at c == 0),
  // matching the multiscale normalization.
  PeriodicConfig pc = cfg.periodic;
  pc.mode = cfg.make_periodic_mode();
  pc.dt = k;
  pc.record_traces = false;
  PeriodicResult base = solve_periodic(solver, solver.zero_state(), pc);
  if (!base.report.converged)
    throw std::runtime_error("run_resolved: baseline periodic solve failed");
  run.baseline_outflow = base.last_cycle.outflow_avg;

  GrowthField c;
  c.c = solver.wall_template();
  c.time = 0.0;

  // Start the coupled integration from the ungrown periodic state: the
  // transient toward it is not part of the growth history of interest.
  FlowState s = base.state;
  s.t = 0.0;

  double period_out_acc = 0.0;
  double prev_out = solver.outflow_rate(s);
  const std::size_t nw = c.c.size();

  for (long m = 1; m <= total; ++m) {
    if ((m - 1) > 0 && (m - 1) % refresh == 0) {
      solver.set_growth(GrowthProfile::from_wall_field(c.c));
      c.c.arc = solver.wall_template().arc;
    }
    solver.theta_step(s, k);

    // instantaneous reaction, explicit micro update of the growth equation
    const WallField wss = solver.wall_shear_stress(s);
    const WallField lap = surface_laplacian(c.c);
    for (std::size_t i = 0; i < nw; ++i) {
      double ci = c.c.values[i] +
                  k * (reaction(c.c.values[i], wss.values[i], gp) +
                       gp.lambda_c * lap.values[i]);
      c.c.values[i] = std::clamp(ci, 0.0, gp.c_max);
    }
    c.time += k;

    const double out = solver.outflow_rate(s);
    period_out_acc += 0.5 * k * (prev_out + out);
    prev_out = out;
    if (m % M == 0) {
      run.jout_times.push_back(c.time);
      run.jout.push_back(outflow_functional(period_out_acc, run.baseline_outflow));
      period_out_acc = 0.0;
      const long period = m / M;
      if (period % snap_periods == 0)
        run.c_snapshots.emplace_back(c.time, c.c);
    }
  }

  run.total_micro_steps = total;
  run.c_final = c.c;
  run.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_begin)
          .count();
  return run;
}

CompareReport compare(const ResolvedRun& resolved, const MultiscaleRun& multiscale) {
  if (resolved.physics_hash != multiscale.physics_hash)
    throw std::invalid_argument("compare: config mismatch (physics hashes differ)");

  CompareReport rep;
  const WallField& a = resolved.c_final;
  const WallField& b = multiscale.c_final;
  if (a.size() != b.size()) throw std::invalid_argument("compare: wall size mismatch");

  double linf = 0.0, ref_linf = 0.0, l2 = 0.0, ref_l2 = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a.values[i] - b.values[i];
    linf = std::max(linf, std::abs(d));
    ref_linf = std::max(ref_linf, std::abs(a.values[i]));
    const double w = a.weight(i);
    l2 += w * d * d;
    ref_l2 += w * a.values[i] * a.values[i];
  }
  rep.err_c_linf = ref_linf > 0.0 ? linf / ref_linf : linf;
  rep.err_c_l2 = ref_l2 > 0.0 ? std::sqrt(l2 / ref_l2) : std::sqrt(l2);

  // J_out comparison at the multiscale macro times; the resolved trace is
  // sampled at whole periods, macro times are multiples of K >= 1 s.
  for (std::size_t n = 0; n < multiscale.times.size() && n < multiscale.jout.size();
       ++n) {
    const double t = multiscale.times[n];
    double jr;
    if (t <= 0.0) {
      jr = 1.0;
    } else {
      // the resolved period ending at the macro time
      long idx = std::lround(t) - 1;
      idx = std::min<long>(std::max<long>(idx, 0),
                           static_cast<long>(resolved.jout.size()) - 1);
      jr = resolved.jout[static_cast<std::size_t>(idx)];
    }
    rep.jout_times.push_back(t);
    rep.jout_resolved.push_back(jr);
    rep.jout_multiscale.push_back(multiscale.jout[n]);
    rep.max_jout_diff = std::max(rep.max_jout_diff,
                                 std::abs(jr - multiscale.jout[n]));
  }
  rep.speedup = multiscale.wall_seconds > 0.0
                    ? resolved.wall_seconds / multiscale.wall_seconds
                    : 0.0;
  return rep;
}

}  // namespace stenosim
