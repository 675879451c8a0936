// SPDX-License-Identifier: Apache-2.0

#include "stenosim/cli.hpp"

#include <omp.h>

#include <CLI11.hpp>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <nlohmann/json.hpp>
#include <sstream>
#include <thread>

#include "stenosim/config.hpp"
#include "stenosim/multiscale.hpp"
#include "stenosim/oracle.hpp"
#include "stenosim/report.hpp"

namespace stenosim {

namespace {

using nlohmann::json;

struct CommonOpts {
  std::string config_path;
  std::string out_dir = "out";
  std::vector<std::string> overrides;
  int workers = 1;
};

void add_common(CLI::App* cmd, CommonOpts* opts) {
  cmd->add_option("--config", opts->config_path, "configuration file (key = value)");
  cmd->add_option("--out", opts->out_dir, "output directory");
  cmd->add_option("--set", opts->overrides, "override: section.key=value");
  cmd->add_option("--workers", opts->workers, "parallel workers for sweeps");
}

RunConfig load_config(const CommonOpts& opts) {
  RunConfig cfg = opts.config_path.empty() ? RunConfig()
                                           : RunConfig::from_file(opts.config_path);
  cfg.apply_overrides(opts.overrides);
  return cfg;
}

void apply_threads(const RunConfig& cfg) {
  if (cfg.threads == 1) {
    set_default_backend(Backend::serial);
  } else if (cfg.threads > 1) {
    omp_set_num_threads(cfg.threads);
    set_default_backend(Backend::openmp);
  }
}

// Desk-scale defaults for the periodically forced box test.
void cavity_defaults(RunConfig& cfg) {
  cfg.problem = "cavity";
  cfg.grid_nx = 48;
  cfg.grid_ny = 48;
  cfg.fluid.mode = FlowMode::stokes;
  cfg.fluid.nu_f = 0.05;
  cfg.pressure_kind = "constant";
  cfg.pressure_value = 0.0;
  cfg.periodic_mode = "averaging";
}

int cmd_periodic(const CommonOpts& opts, const std::vector<std::string>& pre) {
  RunConfig cfg;
  cavity_defaults(cfg);
  if (!opts.config_path.empty()) cfg = RunConfig::from_file(opts.config_path);
  cfg.apply_overrides(pre);
  cfg.apply_overrides(opts.overrides);
  apply_threads(cfg);

  FlowProblem prob = cfg.problem == "cavity" ? cfg.make_cavity_problem()
                                             : cfg.make_vessel_problem();
  MicroSolver solver(std::move(prob));
  PeriodicConfig pc = cfg.periodic;
  pc.mode = cfg.make_periodic_mode();
  pc.dt = cfg.schedule_k;
  pc.record_traces = false;
  PeriodicResult res = solve_periodic(solver, solver.zero_state(), pc);
  write_periodic_outputs(opts.out_dir, cfg, res.report);
  std::cout << periodic_report_json(res.report).dump(2) << "\n";
  return res.report.converged ? 0 : 2;
}

int cmd_multiscale(const CommonOpts& opts, const std::vector<std::string>& pre) {
  RunConfig cfg = load_config(opts);
  cfg.apply_overrides(pre);
  apply_threads(cfg);
  MultiscaleRun run = run_multiscale(cfg);
  write_multiscale_outputs(opts.out_dir, cfg, run);
  std::cout << "multiscale: N=" << run.N << " J_out(T)="
            << (run.jout.empty() ? 0.0 : run.jout.back())
            << " wall=" << run.wall_seconds << "s"
            << (run.aborted ? " [ABORTED: " + run.abort_reason + "]" : "") << "\n";
  return run.aborted ? 2 : 0;
}

int cmd_resolve(const CommonOpts& opts, const std::vector<std::string>& pre) {
  RunConfig cfg = load_config(opts);
  cfg.apply_overrides(pre);
  apply_threads(cfg);
  ResolvedRun run = run_resolved(cfg);
  write_resolved_outputs(opts.out_dir, cfg, run);
  std::cout << "resolved: steps=" << run.total_micro_steps
            << " J_out(T)=" << (run.jout.empty() ? 0.0 : run.jout.back())
            << " wall=" << run.wall_seconds << "s\n";
  return 0;
}

int cmd_compare(const std::string& resolved_dir, const std::string& multiscale_dir,
                const std::string& out_dir) {
  ResolvedRun res = read_resolved_report(resolved_dir);
  MultiscaleRun ms = read_multiscale_report(multiscale_dir);
  CompareReport rep = compare(res, ms);
  std::filesystem::create_directories(out_dir);
  write_text(out_dir + "/compare.json", compare_json(rep).dump(2) + "\n");
  std::cout << compare_json(rep).dump(2) << "\n";
  return 0;
}

int cmd_sweep(const CommonOpts& opts, const std::string& param,
              const std::vector<std::string>& values) {
  if (values.empty()) throw std::invalid_argument("sweep: no values given");
  const RunConfig base = load_config(opts);
  apply_threads(base);

  struct Point {
    std::string value;
    MultiscaleRun run;
    RunConfig cfg;
    std::string dir;
  };
  std::vector<Point> points(values.size());
  std::mutex fail_mutex;
  std::string failure;

  std::size_t next = 0;
  std::mutex next_mutex;
  auto worker = [&]() {
    for (;;) {
      std::size_t idx;
      {
        std::lock_guard<std::mutex> lock(next_mutex);
        if (next >= values.size()) return;
        idx = next++;
      }
      try {
        RunConfig cfg = base;
        cfg.set(param, values[idx]);
        Point& pt = points[idx];
        pt.value = values[idx];
        pt.cfg = cfg;
        pt.run = run_multiscale(cfg);
        std::string tag = param + "=" + values[idx];
        for (char& c : tag)
          if (c == '/' || c == ' ') c = '_';
        pt.dir = opts.out_dir + "/" + tag;
        write_multiscale_outputs(pt.dir, cfg, pt.run);
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(fail_mutex);
        failure = e.what();
      }
    }
  };
  const int nworkers = std::max(1, opts.workers);
  std::vector<std::thread> pool;
  for (int w = 0; w < nworkers; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (!failure.empty()) throw std::runtime_error("sweep: " + failure);

  std::ostringstream os;
  os << param << ",jout_T,wall_seconds,dir\n";
  for (const auto& pt : points)
    os << pt.value << "," << csv_num(pt.run.jout.empty() ? 0.0 : pt.run.jout.back())
       << "," << csv_num(pt.run.wall_seconds) << "," << pt.dir << "\n";
  write_text(opts.out_dir + "/sweep_summary.csv", os.str());

  // successive-halving rate estimate when three or more points are given
  if (points.size() >= 3) {
    json rates = json::array();
    for (std::size_t i = 0; i + 2 < points.size(); ++i) {
      try {
        const RichardsonResult rr =
            richardson_rate(points[i].run.jout.back(), points[i + 1].run.jout.back(),
                            points[i + 2].run.jout.back());
        rates.push_back({{"triple", {points[i].value, points[i + 1].value,
                                     points[i + 2].value}},
                         {"rate", rr.rate},
                         {"extrapolated", rr.extrapolated}});
      } catch (const NonConvergentSequence&) {
        rates.push_back({{"triple", {points[i].value, points[i + 1].value,
                                     points[i + 2].value}},
                         {"rate", nullptr}});
      }
    }
    write_text(opts.out_dir + "/sweep_rates.json", rates.dump(2) + "\n");
    std::cout << rates.dump(2) << "\n";
  }
  return 0;
}

int cmd_geometry_dump(const CommonOpts& opts, double cval, int samples_x,
                      int samples_y) {
  RunConfig cfg = load_config(opts);
  const GeometryParams& gp = cfg.geometry;
  gp.validate();
  const GrowthProfile prof = GrowthProfile::constant(cval);

  std::ostringstream os;
  os << "x1,x2,T1,T2,J\n";
  const double H = gp.domain.diameter;
  for (int i = 0; i <= samples_x; ++i) {
    const double x1 = gp.domain.length * i / samples_x;
    for (int j = 0; j <= samples_y; ++j) {
      const double x2 = -0.5 * H + H * j / samples_y;
      const AleMap m = composite_map(Vec3{x1, x2, 0.0}, prof, gp);
      os << csv_num(x1) << "," << csv_num(x2) << "," << csv_num(m.x[0]) << ","
         << csv_num(m.x[1]) << "," << csv_num(m.J) << "\n";
    }
  }
  std::filesystem::create_directories(opts.out_dir);
  write_text(opts.out_dir + "/geometry.csv", os.str());
  std::cout << "geometry.csv: " << (samples_x + 1) * (samples_y + 1)
            << " samples\n";
  return 0;
}

}  // namespace

int run_command(const std::vector<std::string>& args) {
  CLI::App app{"temporal multiscale stenosis growth simulator"};
  app.require_subcommand(1);

  CommonOpts o_periodic, o_ms, o_resolve, o_sweep, o_geo;
  std::string per_mode, per_problem;
  double per_nu = -1.0;
  auto* periodic = app.add_subcommand("periodic", "periodic micro solve");
  add_common(periodic, &o_periodic);
  periodic->add_option("--mode", per_mode, "forward|averaging");
  periodic->add_option("--nu", per_nu, "kinematic viscosity");
  periodic->add_option("--problem", per_problem, "cavity|vessel");

  double ms_K = -1.0, ms_k = -1.0;
  auto* multiscale = app.add_subcommand("multiscale", "macro/micro growth run");
  add_common(multiscale, &o_ms);
  multiscale->add_option("--K", ms_K, "macro step, s");
  multiscale->add_option("--k", ms_k, "micro step, s");

  double rs_k = -1.0;
  auto* resolve = app.add_subcommand("resolve", "resolved reference run");
  add_common(resolve, &o_resolve);
  resolve->add_option("--k", rs_k, "micro step, s");

  std::string cmp_resolved, cmp_multiscale, cmp_out = "out";
  auto* cmp = app.add_subcommand("compare", "compare resolved vs multiscale runs");
  cmp->add_option("--resolved", cmp_resolved, "resolved run directory")->required();
  cmp->add_option("--multiscale", cmp_multiscale, "multiscale run directory")
      ->required();
  cmp->add_option("--out", cmp_out, "output directory");

  std::string sweep_param;
  std::string sweep_values;
  auto* sweep = app.add_subcommand("sweep", "multiscale parameter sweep");
  add_common(sweep, &o_sweep);
  sweep->add_option("--param", sweep_param, "config key to vary")->required();
  sweep->add_option("--values", sweep_values, "comma-separated values")->required();

  double geo_c = 0.0;
  int geo_sx = 140, geo_sy = 8;
  auto* geo = app.add_subcommand("geometry-dump", "sample (x, T(x), J(x)) as CSV");
  add_common(geo, &o_geo);
  geo->add_option("--c", geo_c, "uniform growth value for the dump");
  geo->add_option("--samples-x", geo_sx, "axial samples");
  geo->add_option("--samples-y", geo_sy, "transverse samples");

  std::vector<const char*> argv;
  argv.push_back("stenosim");
  for (const auto& a : args) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());

    if (periodic->parsed()) {
      std::vector<std::string> pre;
      if (!per_problem.empty()) pre.push_back("problem=" + per_problem);
      if (!per_mode.empty()) pre.push_back("periodic.mode=" + per_mode);
      if (per_nu > 0.0) pre.push_back("fluid.nu=" + csv_num(per_nu));
      return cmd_periodic(o_periodic, pre);
    }
    if (multiscale->parsed()) {
      std::vector<std::string> pre;
      if (ms_K > 0.0) pre.push_back("schedule.K=" + csv_num(ms_K));
      if (ms_k > 0.0) pre.push_back("schedule.k=" + csv_num(ms_k));
      return cmd_multiscale(o_ms, pre);
    }
    if (resolve->parsed()) {
      std::vector<std::string> pre;
      if (rs_k > 0.0) pre.push_back("schedule.k=" + csv_num(rs_k));
      return cmd_resolve(o_resolve, pre);
    }
    if (cmp->parsed()) return cmd_compare(cmp_resolved, cmp_multiscale, cmp_out);
    if (sweep->parsed()) {
      std::vector<std::string> vals;
      std::stringstream ss(sweep_values);
      std::string item;
      while (std::getline(ss, item, ',')) vals.push_back(item);
      return cmd_sweep(o_sweep, sweep_param, vals);
    }
    if (geo->parsed()) return cmd_geometry_dump(o_geo, geo_c, geo_sx, geo_sy);
    return 1;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return 0;  // --help
    nlohmann::json err{{"error", e.what()}};
    std::cerr << err.dump() << "\n";
    return e.get_exit_code();
  } catch (const std::exception& e) {
    nlohmann::json err{{"error", e.what()}};
    std::cerr << err.dump() << "\n";
    return 1;
  }
}

}  // namespace stenosim
