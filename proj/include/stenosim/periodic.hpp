// SPDX-License-Identifier: Apache-2.0
//
// Finds the time-periodic micro solution on a frozen domain. Forward mode
// repeats cycles until the periodicity error ||v(1)-v(0)|| drops below
// eps_P. Averaging mode corrects the cycle-end state with one stationary
// solve driven by the cycle defect, contracting at a rate independent of
// viscosity and domain size on linear problems.

#pragma once

#include <vector>

#include "stenosim/microflow.hpp"

namespace stenosim {

enum class PeriodicMode { forward, averaging };

struct PeriodicConfig {
  PeriodicMode mode = PeriodicMode::averaging;
  double eps_P = 1.0e-8;
  int max_cycles = 400;
  // Plain cycles run before the first averaging correction (ignored in
  // forward mode).
  int warmup_cycles = 0;
  double dt = 0.02;
  bool record_traces = true;

  void validate() const;
};

struct PeriodicSolveReport {
  PeriodicMode mode = PeriodicMode::forward;
  int cycles = 0;
  std::vector<double> error_history;       // periodicity error per cycle
  std::vector<double> contraction_ratios;  // consecutive ratios (averaging part)
  bool converged = false;
  long stationary_solves = 0;
  long theta_steps = 0;
};

struct PeriodicResult {
  FlowState state;        // initial state of the converged periodic cycle
  CycleResult last_cycle; // the cycle integrated from `state`
  PeriodicSolveReport report;
};

// Workspace of one averaging iteration (kept for diagnostics/tests).
struct AveragingWorkspace {
  std::vector<double> vbar;    // cycle average of the velocity
  std::vector<double> defect;  // v(1) - v(0), packed velocity
  std::vector<double> wbar;    // correction velocity
  std::vector<double> qbar;    // correction pressure
};

double periodicity_error(const MicroSolver& solver, const FlowState& v_end,
                         const FlowState& v_start);

PeriodicResult solve_periodic(MicroSolver& solver, const FlowState& initial,
                              const PeriodicConfig& cfg);

}  // namespace stenosim
