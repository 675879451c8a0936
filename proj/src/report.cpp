// SPDX-License-Identifier: Apache-2.0

#include "stenosim/report.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

namespace stenosim {

using nlohmann::json;

std::string csv_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

void write_text(const std::string& path, const std::string& content) {
  std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << content;
}

json config_json(const RunConfig& cfg) {
  json j = json::object();
  for (const auto& key : RunConfig::keys()) j[key] = cfg.get(key);
  return j;
}

json wall_json(const WallField& w) {
  return json{{"axial", w.axial}, {"arc", w.arc}, {"values", w.values}};
}

WallField wall_from_json(const json& j) {
  WallField w;
  w.axial = j.at("axial").get<std::vector<double>>();
  w.arc = j.at("arc").get<std::vector<double>>();
  w.values = j.at("values").get<std::vector<double>>();
  return w;
}

json periodic_report_json(const PeriodicSolveReport& rep) {
  return json{{"mode", rep.mode == PeriodicMode::forward ? "forward" : "averaging"},
              {"cycles", rep.cycles},
              {"converged", rep.converged},
              {"error_history", rep.error_history},
              {"contraction_ratios", rep.contraction_ratios},
              {"stationary_solves", rep.stationary_solves},
              {"theta_steps", rep.theta_steps}};
}

namespace {
std::string hex64(std::uint64_t h) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "0x%016llx", static_cast<unsigned long long>(h));
  return buf;
}
}  // namespace

json multiscale_json(const RunConfig& cfg, const MultiscaleRun& run) {
  json cycles = json::array();
  for (const auto& r : run.reports) cycles.push_back(periodic_report_json(r));
  return json{{"kind", "multiscale"},
              {"config", config_json(cfg)},
              {"config_hash", hex64(run.config_hash)},
              {"physics_hash", hex64(run.physics_hash)},
              {"results",
               {{"T", run.T},
                {"K", run.K},
                {"k", run.k},
                {"N", run.N},
                {"M", run.M},
                {"times", run.times},
                {"jout", run.jout},
                {"baseline_outflow", run.baseline_outflow},
                {"aborted", run.aborted},
                {"abort_reason", run.abort_reason},
                {"clamped_any", run.clamped_any},
                {"wall_seconds", run.wall_seconds},
                {"total_theta_steps", run.total_theta_steps},
                {"total_stationary_solves", run.total_stationary_solves},
                {"periodic_solves", cycles},
                {"c_final", wall_json(run.c_final)}}}};
}

json resolved_json(const RunConfig& cfg, const ResolvedRun& run) {
  return json{{"kind", "resolved"},
              {"config", config_json(cfg)},
              {"config_hash", hex64(run.config_hash)},
              {"physics_hash", hex64(run.physics_hash)},
              {"results",
               {{"T", run.T},
                {"k", run.k},
                {"total_micro_steps", run.total_micro_steps},
                {"jout_times", run.jout_times},
                {"jout", run.jout},
                {"baseline_outflow", run.baseline_outflow},
                {"wall_seconds", run.wall_seconds},
                {"c_final", wall_json(run.c_final)}}}};
}

json compare_json(const CompareReport& rep) {
  return json{{"kind", "compare"},
              {"results",
               {{"err_c_linf", rep.err_c_linf},
                {"err_c_l2", rep.err_c_l2},
                {"max_jout_diff", rep.max_jout_diff},
                {"jout_times", rep.jout_times},
                {"jout_resolved", rep.jout_resolved},
                {"jout_multiscale", rep.jout_multiscale},
                {"speedup", rep.speedup}}}};
}

void write_wall_csv(const std::string& path, const WallField& w,
                    const std::string& value_name) {
  std::ostringstream os;
  os << "arc,x1," << value_name << "\n";
  for (std::size_t i = 0; i < w.size(); ++i)
    os << csv_num(w.arc[i]) << "," << csv_num(w.axial[i]) << ","
       << csv_num(w.values[i]) << "\n";
  write_text(path, os.str());
}

void write_error_history_csv(const std::string& path,
                             const PeriodicSolveReport& rep) {
  std::ostringstream os;
  os << "cycle,error\n";
  for (std::size_t i = 0; i < rep.error_history.size(); ++i)
    os << (i + 1) << "," << csv_num(rep.error_history[i]) << "\n";
  write_text(path, os.str());
}

void write_jout_csv(const std::string& path, const std::vector<double>& times,
                    const std::vector<double>& jout) {
  std::ostringstream os;
  os << "time,jout\n";
  const std::size_t n = std::min(times.size(), jout.size());
  for (std::size_t i = 0; i < n; ++i)
    os << csv_num(times[i]) << "," << csv_num(jout[i]) << "\n";
  write_text(path, os.str());
}

void write_multiscale_outputs(const std::string& dir, const RunConfig& cfg,
                              const MultiscaleRun& run) {
  std::filesystem::create_directories(dir);
  write_text(dir + "/report.json", multiscale_json(cfg, run).dump(2) + "\n");
  write_jout_csv(dir + "/jout.csv", run.times, run.jout);
  write_wall_csv(dir + "/c_final.csv", run.c_final, "c");
  for (const auto& [step, field] : run.c_snapshots) {
    char name[64];
    std::snprintf(name, sizeof name, "/c_step_%04d.csv", step);
    write_wall_csv(dir + name, field, "c");
  }
}

void write_resolved_outputs(const std::string& dir, const RunConfig& cfg,
                            const ResolvedRun& run) {
  std::filesystem::create_directories(dir);
  write_text(dir + "/report.json", resolved_json(cfg, run).dump(2) + "\n");
  write_jout_csv(dir + "/jout.csv", run.jout_times, run.jout);
  write_wall_csv(dir + "/c_final.csv", run.c_final, "c");
}

void write_periodic_outputs(const std::string& dir, const RunConfig& cfg,
                            const PeriodicSolveReport& rep) {
  std::filesystem::create_directories(dir);
  json j{{"kind", "periodic"},
         {"config", config_json(cfg)},
         {"config_hash", hex64(cfg.hash())},
         {"physics_hash", hex64(cfg.physics_hash())},
         {"results", periodic_report_json(rep)}};
  write_text(dir + "/report.json", j.dump(2) + "\n");
  write_error_history_csv(dir + "/error_history.csv", rep);
}

namespace {
json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  json j;
  in >> j;
  return j;
}

std::uint64_t parse_hex64(const std::string& s) {
  return std::stoull(s, nullptr, 16);
}
}  // namespace

MultiscaleRun read_multiscale_report(const std::string& dir) {
  const json j = load_json(dir + "/report.json");
  if (j.at("kind") != "multiscale")
    throw std::runtime_error(dir + ": not a multiscale report");
  MultiscaleRun run;
  const json& r = j.at("results");
  run.T = r.at("T");
  run.K = r.at("K");
  run.k = r.at("k");
  run.N = r.at("N");
  run.M = r.at("M");
  run.times = r.at("times").get<std::vector<double>>();
  run.jout = r.at("jout").get<std::vector<double>>();
  run.baseline_outflow = r.at("baseline_outflow");
  run.aborted = r.at("aborted");
  run.wall_seconds = r.at("wall_seconds");
  run.c_final = wall_from_json(r.at("c_final"));
  run.config_hash = parse_hex64(j.at("config_hash"));
  run.physics_hash = parse_hex64(j.at("physics_hash"));
  return run;
}

ResolvedRun read_resolved_report(const std::string& dir) {
  const json j = load_json(dir + "/report.json");
  if (j.at("kind") != "resolved")
    throw std::runtime_error(dir + ": not a resolved report");
  ResolvedRun run;
  const json& r = j.at("results");
  run.T = r.at("T");
  run.k = r.at("k");
  run.total_micro_steps = r.at("total_micro_steps");
  run.jout_times = r.at("jout_times").get<std::vector<double>>();
  run.jout = r.at("jout").get<std::vector<double>>();
  run.baseline_outflow = r.at("baseline_outflow");
  run.wall_seconds = r.at("wall_seconds");
  run.c_final = wall_from_json(r.at("c_final"));
  run.config_hash = parse_hex64(j.at("config_hash"));
  run.physics_hash = parse_hex64(j.at("physics_hash"));
  return run;
}

}  // namespace stenosim
