// SPDX-License-Identifier: Apache-2.0
//
// Flat key=value run configuration with dotted section names. Unknown keys
// are rejected. The canonical form (fixed key order, full precision) feeds
// a 64-bit FNV-1a hash; the physics hash covers only the keys that define
// the continuous problem, so a multiscale run and a resolved run of the
// same setup share it while scheme selectors differ.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "stenosim/geometry.hpp"
#include "stenosim/growth.hpp"
#include "stenosim/microflow.hpp"
#include "stenosim/periodic.hpp"

namespace stenosim {

struct RunConfig {
  std::string problem = "vessel";  // vessel | cavity

  GeometryParams geometry;

  int grid_nx = 140;
  int grid_ny = 16;

  FluidParams fluid;

  std::string pressure_kind = "pulsatile";  // pulsatile | constant
  double pressure_value = 10.0;             // level for constant profiles

  GrowthParams growth;

  double schedule_T = 1600.0;  // horizon, s
  double schedule_K = 100.0;   // macro step, s
  double schedule_k = 0.02;    // micro step, s

  PeriodicConfig periodic;
  std::string periodic_mode = "forward";  // forward | averaging

  std::string macro_scheme = "euler";  // euler | ab2
  int snapshot_every = 4;              // macro steps between c snapshots

  long oracle_budget = 10'000'000;  // max micro steps of a resolved run
  int oracle_map_refresh = 0;       // steps between map refreshes; 0 = 1/k
  int oracle_snapshot_every = 0;    // periods between snapshots; 0 = per macro step

  bool wss_literal_transverse_window = false;

  int threads = 0;  // 0: library default backend; 1: serial; >1: openmp
  bool deterministic = true;

  // --- derived helpers -----------------------------------------------
  void validate() const;
  PressureProfile make_pressure() const;
  PeriodicMode make_periodic_mode() const;
  MacroScheme make_macro_scheme() const;
  FlowProblem make_vessel_problem() const;
  FlowProblem make_cavity_problem() const;

  std::string canonical() const;          // all keys, fixed order
  std::string canonical_physics() const;  // problem-defining keys only
  std::uint64_t hash() const;
  std::uint64_t physics_hash() const;

  // key access (throws on unknown key / bad value)
  void set(const std::string& key, const std::string& value);
  std::string get(const std::string& key) const;
  static std::vector<std::string> keys();

  static RunConfig from_file(const std::string& path);
  void apply_overrides(const std::vector<std::string>& assignments);  // "a.b=v"
};

std::uint64_t fnv1a64(const std::string& s);

}  // namespace stenosim
