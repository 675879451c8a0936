// SPDX-License-Identifier: Apache-2.0
//
// Macro driver: alternates periodic micro solves on the frozen domain with
// semi-explicit macro steps of the wall growth variable, recording the
// normalized outflow functional per macro time. Also the Aitken/Richardson
// order estimator used by the convergence studies.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "stenosim/config.hpp"
#include "stenosim/growth.hpp"
#include "stenosim/periodic.hpp"

namespace stenosim {

struct RichardsonResult {
  double rate = 0.0;          // observed order log2((J1-J2)/(J2-J3))
  double extrapolated = 0.0;  // Aitken limit
};

class NonConvergentSequence : public std::runtime_error {
 public:
  NonConvergentSequence() : std::runtime_error("non-convergent sequence") {}
};

// J1, J2, J3 at step sizes h, h/2, h/4. Throws NonConvergentSequence when
// the differences change sign or cancel.
RichardsonResult richardson_rate(double J1, double J2, double J3);

// Normalized period-averaged outflow; the ungrown configuration gives 1.
double outflow_functional(double raw_outflow_avg, double baseline);

struct MultiscaleRun {
  // schedule
  double T = 0, K = 0, k = 0;
  int N = 0, M = 0;

  std::vector<double> times;  // macro times t_0..t_N
  std::vector<double> jout;   // normalized J_out at each macro time
  std::vector<PeriodicSolveReport> reports;  // one per periodic solve (N+1)
  std::vector<std::pair<int, WallField>> c_snapshots;  // (step, field)
  WallField c_final;
  double baseline_outflow = 0.0;  // raw outflow of the ungrown vessel

  bool aborted = false;
  std::string abort_reason;
  bool clamped_any = false;

  double wall_seconds = 0.0;
  long total_theta_steps = 0;
  long total_stationary_solves = 0;
  std::uint64_t config_hash = 0;
  std::uint64_t physics_hash = 0;
};

MultiscaleRun run_multiscale(const RunConfig& cfg);

}  // namespace stenosim
