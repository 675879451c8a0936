// SPDX-License-Identifier: Apache-2.0

#include "stenosim/multiscale.hpp"

#include <chrono>
#include <cmath>

namespace stenosim {

RichardsonResult richardson_rate(double J1, double J2, double J3) {
  const double d1 = J1 - J2;
  const double d2 = J2 - J3;
  const double scale = std::abs(J1) + std::abs(J2) + std::abs(J3) + 1e-300;
  if (d1 * d2 <= 0.0 || std::abs(d2) < 1e-14 * scale) throw NonConvergentSequence();
  const double denom = J1 - 2.0 * J2 + J3;
  if (std::abs(denom) < 1e-14 * scale) throw NonConvergentSequence();
  RichardsonResult r;
  r.rate = std::log2(d1 / d2);
  r.extrapolated = (J1 * J3 - J2 * J2) / denom;
  return r;
}

double outflow_functional(double raw_outflow_avg, double baseline) {
  if (std::abs(baseline) < 1e-300) return 0.0;
  return raw_outflow_avg / baseline;
}

MultiscaleRun run_multiscale(const RunConfig& cfg) {
  cfg.validate();
  if (cfg.problem != "vessel")
    throw std::invalid_argument("run_multiscale: requires problem = vessel");
  const auto t_begin = std::chrono::steady_clock::now();

  MultiscaleRun run;
  run.T = cfg.schedule_T;
  run.K = cfg.schedule_K;
  run.k = cfg.schedule_k;
  run.N = static_cast<int>(std::lround(cfg.schedule_T / cfg.schedule_K));
  run.M = static_cast<int>(std::lround(1.0 / cfg.schedule_k));
  run.config_hash = cfg.hash();
  run.physics_hash = cfg.physics_hash();

  MicroSolver solver(cfg.make_vessel_problem());
  GrowthParams gp = cfg.growth;
  gp.c_max = cfg.geometry.c_max;
  PeriodicConfig pc = cfg.periodic;
  pc.mode = cfg.make_periodic_mode();
  pc.dt = cfg.schedule_k;
  pc.record_traces = true;
  const MacroScheme scheme = cfg.make_macro_scheme();

  GrowthField cbar;
  cbar.c = solver.wall_template();  // zeros at the ungrown wall
  cbar.time = 0.0;

  FlowState warm = solver.zero_state();
  WallField rbar_prev;  // previous averaged reaction (AB2)
  bool have_prev = false;

  run.times.push_back(0.0);
  for (int n = 1; n <= run.N + 1; ++n) {
    const bool final_solve = (n == run.N + 1);
    if (n > 1) {
      solver.set_growth(GrowthProfile::from_wall_field(cbar.c));
      cbar.c.arc = solver.wall_template().arc;  // frozen for this macro step
    }

    PeriodicResult pr = solve_periodic(solver, warm, pc);
    run.reports.push_back(pr.report);
    if (!pr.report.converged) {
      run.aborted = true;
      run.abort_reason = "periodic solve did not converge at macro step " +
                         std::to_string(n - 1);
      break;
    }
    if (n == 1) run.baseline_outflow = pr.last_cycle.outflow_avg;
    run.jout.push_back(
        outflow_functional(pr.last_cycle.outflow_avg, run.baseline_outflow));
    warm = pr.state;

    if (final_solve) break;

    WallField rbar = averaged_reaction(cbar, pr.last_cycle.wss, cfg.schedule_k, gp);
    MacroStepResult ms;
    if (scheme == MacroScheme::adams_bashforth2 && have_prev)
      ms = macro_step(cbar, rbar, cfg.schedule_K, gp,
                      MacroScheme::adams_bashforth2, &rbar_prev);
    else
      ms = macro_step(cbar, rbar, cfg.schedule_K, gp);
    run.clamped_any = run.clamped_any || ms.clamped;
    rbar_prev = rbar;
    have_prev = true;
    cbar = ms.field;
    run.times.push_back(cbar.time);

    if (cfg.snapshot_every > 0 && n % cfg.snapshot_every == 0)
      run.c_snapshots.emplace_back(n, cbar.c);
  }
  run.c_final = cbar.c;

  run.total_theta_steps = solver.counters().theta_steps;
  run.total_stationary_solves = solver.counters().stationary_solves;
  run.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_begin)
          .count();
  return run;
}

}  // namespace stenosim
