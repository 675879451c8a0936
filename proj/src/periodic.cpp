// SPDX-License-Identifier: Apache-2.0

#include "stenosim/periodic.hpp"

#include <stdexcept>

namespace stenosim {

void PeriodicConfig::validate() const {
  if (!(eps_P > 0.0)) throw std::invalid_argument("PeriodicConfig: eps_P > 0");
  if (max_cycles < 1) throw std::invalid_argument("PeriodicConfig: max_cycles >= 1");
  if (warmup_cycles < 0) throw std::invalid_argument("PeriodicConfig: warmup_cycles >= 0");
  if (!(dt > 0.0)) throw std::invalid_argument("PeriodicConfig: dt > 0");
}

double periodicity_error(const MicroSolver& solver, const FlowState& v_end,
                         const FlowState& v_start) {
  if (v_end.u.size() != v_start.u.size() || v_end.v.size() != v_start.v.size())
    throw std::invalid_argument("periodicity_error: grid mismatch");
  return solver.state_distance(v_end, v_start);
}

PeriodicResult solve_periodic(MicroSolver& solver, const FlowState& initial,
                              const PeriodicConfig& cfg) {
  cfg.validate();
  PeriodicResult res;
  res.report.mode = cfg.mode;
  const long steps0 = solver.counters().theta_steps;
  const long stat0 = solver.counters().stationary_solves;

  FlowState start = initial;
  start.t = 0.0;
  bool last_was_corrected = false;  // previous error came after a correction

  for (int cycle = 1; cycle <= cfg.max_cycles; ++cycle) {
    CycleResult cyc = solver.cycle_integrate(start, cfg.dt, cfg.record_traces);
    const double err = periodicity_error(solver, cyc.end, start);
    // Forward mode: every consecutive ratio. Averaging mode: only ratios
    // across a corrected transition (warmup cycles are excluded).
    const bool take_ratio = !res.report.error_history.empty() &&
                            (cfg.mode == PeriodicMode::forward || last_was_corrected);
    if (take_ratio)
      res.report.contraction_ratios.push_back(err /
                                              res.report.error_history.back());
    res.report.error_history.push_back(err);
    res.report.cycles = cycle;

    if (err < cfg.eps_P) {
      res.report.converged = true;
      res.state = std::move(start);
      res.last_cycle = std::move(cyc);
      break;
    }

    const bool correct = cfg.mode == PeriodicMode::averaging &&
                         cycle > cfg.warmup_cycles;
    if (correct) {
      AveragingWorkspace ws;
      ws.vbar = cyc.vbar;
      ws.defect.resize(static_cast<std::size_t>(solver.nuv()));
      for (int k = 0; k < solver.nu(); ++k)
        ws.defect[static_cast<std::size_t>(k)] =
            cyc.end.u[static_cast<std::size_t>(k)] -
            start.u[static_cast<std::size_t>(k)];
      for (int k = 0; k < solver.nv(); ++k)
        ws.defect[static_cast<std::size_t>(solver.nu() + k)] =
            cyc.end.v[static_cast<std::size_t>(k)] -
            start.v[static_cast<std::size_t>(k)];
      solver.averaging_correction(ws.defect, ws.vbar, ws.wbar, ws.qbar);
      start = cyc.end;
      for (int k = 0; k < solver.nu(); ++k)
        start.u[static_cast<std::size_t>(k)] += ws.wbar[static_cast<std::size_t>(k)];
      for (int k = 0; k < solver.nv(); ++k)
        start.v[static_cast<std::size_t>(k)] +=
            ws.wbar[static_cast<std::size_t>(solver.nu() + k)];
      last_was_corrected = true;
    } else {
      start = cyc.end;
      last_was_corrected = false;
    }
    start.t = 0.0;

    if (cycle == cfg.max_cycles) {
      // did not converge: hand back the most recent state and cycle
      res.state = start;
      res.last_cycle = solver.cycle_integrate(start, cfg.dt, cfg.record_traces);
      res.report.converged = false;
    }
  }

  res.report.theta_steps = solver.counters().theta_steps - steps0;
  res.report.stationary_solves = solver.counters().stationary_solves - stat0;
  return res;
}

}  // namespace stenosim
