// SPDX-License-Identifier: Apache-2.0
//
// Report files: report.json carries the fully resolved configuration (so a
// run is reproducible from its own report) plus machine-readable results;
// CSV companions are plot-ready with 9 significant digits.

#pragma once

#include <nlohmann/json_fwd.hpp>
#include <string>
#include <vector>

#include "stenosim/multiscale.hpp"
#include "stenosim/oracle.hpp"

namespace stenosim {

std::string csv_num(double v);  // %.9g

void write_text(const std::string& path, const std::string& content);

nlohmann::json config_json(const RunConfig& cfg);
nlohmann::json wall_json(const WallField& w);
WallField wall_from_json(const nlohmann::json& j);

nlohmann::json periodic_report_json(const PeriodicSolveReport& rep);
nlohmann::json multiscale_json(const RunConfig& cfg, const MultiscaleRun& run);
nlohmann::json resolved_json(const RunConfig& cfg, const ResolvedRun& run);
nlohmann::json compare_json(const CompareReport& rep);

// Write the standard file set for a run into `dir`.
void write_multiscale_outputs(const std::string& dir, const RunConfig& cfg,
                              const MultiscaleRun& run);
void write_resolved_outputs(const std::string& dir, const RunConfig& cfg,
                            const ResolvedRun& run);
void write_periodic_outputs(const std::string& dir, const RunConfig& cfg,
                            const PeriodicSolveReport& rep);

// Reconstruct the pieces compare() needs from a report.json.
MultiscaleRun read_multiscale_report(const std::string& dir);
ResolvedRun read_resolved_report(const std::string& dir);

void write_wall_csv(const std::string& path, const WallField& w,
                    const std::string& value_name);
void write_error_history_csv(const std::string& path,
                             const PeriodicSolveReport& rep);
void write_jout_csv(const std::string& path, const std::vector<double>& times,
                    const std::vector<double>& jout);

}  // namespace stenosim
