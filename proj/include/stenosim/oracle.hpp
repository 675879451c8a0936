// SPDX-License-Identifier: Apache-2.0
//
// Resolved reference run: flow and growth advance together at micro
// resolution over the whole horizon, growth updated every micro step from
// the instantaneous wall stress, the domain map refreshed on a configurable
// cadence. Ground truth for the multiscale scheme.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "stenosim/config.hpp"
#include "stenosim/multiscale.hpp"

namespace stenosim {

struct ResolvedRun {
  double T = 0, k = 0;
  long total_micro_steps = 0;

  WallField c_final;
  std::vector<std::pair<double, WallField>> c_snapshots;  // (time, field)
  std::vector<double> jout_times;  // end of each period, s
  std::vector<double> jout;        // normalized outflow per period
  double baseline_outflow = 0.0;

  double wall_seconds = 0.0;
  std::uint64_t config_hash = 0;
  std::uint64_t physics_hash = 0;
};

ResolvedRun run_resolved(const RunConfig& cfg);

struct CompareReport {
  double err_c_linf = 0.0;  // relative L-inf error of the final growth field
  double err_c_l2 = 0.0;    // relative L2 (arc-weighted)
  double max_jout_diff = 0.0;  // over the macro times
  std::vector<double> jout_times;
  std::vector<double> jout_resolved;
  std::vector<double> jout_multiscale;
  double speedup = 0.0;  // resolved wall time / multiscale wall time
};

// Requires matching physics hashes (same problem, different scheme).
CompareReport compare(const ResolvedRun& resolved, const MultiscaleRun& multiscale);

}  // namespace stenosim
