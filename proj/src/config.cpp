// SPDX-License-Identifier: Apache-2.0

#include "stenosim/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>

namespace stenosim {

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& key, const std::string& s) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("config: bad numeric value '" + s + "' for " + key);
  }
}

long parse_long(const std::string& key, const std::string& s) {
  try {
    std::size_t pos = 0;
    const long v = std::stol(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("config: bad integer value '" + s + "' for " + key);
  }
}

bool parse_bool(const std::string& key, const std::string& s) {
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  throw std::invalid_argument("config: bad boolean value '" + s + "' for " + key);
}

struct Field {
  std::string key;
  bool physics;  // part of the physics hash
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&)> set;
};

const std::vector<Field>& registry() {
  static const std::vector<Field> fields = [] {
    std::vector<Field> f;
    auto dbl = [&](const char* key, bool phys, auto member) {
      f.push_back({key, phys,
                   [member](const RunConfig& c) { return fmt_double(c.*member); },
                   [member, key = std::string(key)](RunConfig& c, const std::string& s) {
                     c.*member = parse_double(key, s);
                   }});
    };
    auto integer = [&](const char* key, bool phys, auto member) {
      f.push_back({key, phys,
                   [member](const RunConfig& c) { return std::to_string(c.*member); },
                   [member, key = std::string(key)](RunConfig& c, const std::string& s) {
                     c.*member = static_cast<std::remove_reference_t<decltype(std::declval<RunConfig&>().*member)>>(
                         parse_long(key, s));
                   }});
    };
    auto boolean = [&](const char* key, bool phys, auto member) {
      f.push_back({key, phys,
                   [member](const RunConfig& c) { return (c.*member) ? "true" : "false"; },
                   [member, key = std::string(key)](RunConfig& c, const std::string& s) {
                     c.*member = parse_bool(key, s);
                   }});
    };
    auto str = [&](const char* key, bool phys, auto member,
                   std::vector<std::string> allowed) {
      f.push_back({key, phys,
                   [member](const RunConfig& c) { return c.*member; },
                   [member, key = std::string(key), allowed](RunConfig& c, const std::string& s) {
                     for (const auto& a : allowed)
                       if (s == a) {
                         c.*member = s;
                         return;
                       }
                     throw std::invalid_argument("config: bad value '" + s + "' for " + key);
                   }});
    };

    str("problem", true, &RunConfig::problem, {"vessel", "cavity"});

    // nested geometry members need explicit lambdas
    auto geo_dbl = [&](const char* key, auto access) {
      f.push_back({key, true,
                   [access](const RunConfig& c) { return fmt_double(access(const_cast<RunConfig&>(c))); },
                   [access, key = std::string(key)](RunConfig& c, const std::string& s) {
                     access(c) = parse_double(key, s);
                   }});
    };
    geo_dbl("geometry.length", [](RunConfig& c) -> double& { return c.geometry.domain.length; });
    geo_dbl("geometry.diameter", [](RunConfig& c) -> double& { return c.geometry.domain.diameter; });
    f.push_back({"geometry.dimension", true,
                 [](const RunConfig& c) { return std::to_string(c.geometry.domain.dimension); },
                 [](RunConfig& c, const std::string& s) {
                   c.geometry.domain.dimension = static_cast<int>(parse_long("geometry.dimension", s));
                 }});
    geo_dbl("geometry.s0", [](RunConfig& c) -> double& { return c.geometry.domain.s0; });
    geo_dbl("geometry.s1", [](RunConfig& c) -> double& { return c.geometry.domain.s1; });
    geo_dbl("geometry.sm", [](RunConfig& c) -> double& { return c.geometry.domain.sm; });
    geo_dbl("geometry.stent.rho", [](RunConfig& c) -> double& { return c.geometry.stent.rho_stent; });
    geo_dbl("geometry.stent.gamma", [](RunConfig& c) -> double& { return c.geometry.stent.gamma_stent; });
    geo_dbl("geometry.centerline.coefficient",
            [](RunConfig& c) -> double& { return c.geometry.centerline.coefficient; });
    f.push_back({"geometry.centerline.exponent", true,
                 [](const RunConfig& c) { return std::to_string(c.geometry.centerline.exponent); },
                 [](RunConfig& c, const std::string& s) {
                   c.geometry.centerline.exponent =
                       static_cast<int>(parse_long("geometry.centerline.exponent", s));
                 }});
    geo_dbl("geometry.c_max", [](RunConfig& c) -> double& { return c.geometry.c_max; });

    integer("grid.nx", true, &RunConfig::grid_nx);
    integer("grid.ny", true, &RunConfig::grid_ny);

    geo_dbl("fluid.rho", [](RunConfig& c) -> double& { return c.fluid.rho_f; });
    geo_dbl("fluid.nu", [](RunConfig& c) -> double& { return c.fluid.nu_f; });
    geo_dbl("fluid.theta", [](RunConfig& c) -> double& { return c.fluid.theta; });
    f.push_back({"fluid.mode", true,
                 [](const RunConfig& c) {
                   return c.fluid.mode == FlowMode::stokes ? "stokes" : "navier_stokes";
                 },
                 [](RunConfig& c, const std::string& s) {
                   if (s == "stokes") c.fluid.mode = FlowMode::stokes;
                   else if (s == "navier_stokes") c.fluid.mode = FlowMode::navier_stokes;
                   else throw std::invalid_argument("config: bad value '" + s + "' for fluid.mode");
                 }});
    geo_dbl("fluid.div_tol", [](RunConfig& c) -> double& { return c.fluid.div_tol; });
    f.push_back({"fluid.newton_iters", true,
                 [](const RunConfig& c) { return std::to_string(c.fluid.newton_iters); },
                 [](RunConfig& c, const std::string& s) {
                   c.fluid.newton_iters = static_cast<int>(parse_long("fluid.newton_iters", s));
                 }});

    str("pressure.kind", true, &RunConfig::pressure_kind, {"pulsatile", "constant"});
    dbl("pressure.value", true, &RunConfig::pressure_value);

    geo_dbl("growth.alpha", [](RunConfig& c) -> double& { return c.growth.alpha; });
    geo_dbl("growth.beta", [](RunConfig& c) -> double& { return c.growth.beta; });
    geo_dbl("growth.lambda_c", [](RunConfig& c) -> double& { return c.growth.lambda_c; });
    geo_dbl("growth.sigma_min", [](RunConfig& c) -> double& { return c.growth.sigma_min; });
    geo_dbl("growth.sigma_max", [](RunConfig& c) -> double& { return c.growth.sigma_max; });

    dbl("schedule.T", true, &RunConfig::schedule_T);
    dbl("schedule.K", false, &RunConfig::schedule_K);
    dbl("schedule.k", true, &RunConfig::schedule_k);

    str("periodic.mode", false, &RunConfig::periodic_mode, {"forward", "averaging"});
    geo_dbl("periodic.eps", [](RunConfig& c) -> double& { return c.periodic.eps_P; });
    f.push_back({"periodic.max_cycles", false,
                 [](const RunConfig& c) { return std::to_string(c.periodic.max_cycles); },
                 [](RunConfig& c, const std::string& s) {
                   c.periodic.max_cycles = static_cast<int>(parse_long("periodic.max_cycles", s));
                 }});
    f.push_back({"periodic.warmup", false,
                 [](const RunConfig& c) { return std::to_string(c.periodic.warmup_cycles); },
                 [](RunConfig& c, const std::string& s) {
                   c.periodic.warmup_cycles = static_cast<int>(parse_long("periodic.warmup", s));
                 }});

    str("multiscale.scheme", false, &RunConfig::macro_scheme, {"euler", "ab2"});
    integer("multiscale.snapshot_every", false, &RunConfig::snapshot_every);

    integer("oracle.budget", false, &RunConfig::oracle_budget);
    integer("oracle.map_refresh", false, &RunConfig::oracle_map_refresh);
    integer("oracle.snapshot_every", false, &RunConfig::oracle_snapshot_every);

    boolean("wss.literal_transverse_window", true,
            &RunConfig::wss_literal_transverse_window);

    integer("run.threads", false, &RunConfig::threads);
    boolean("run.deterministic", false, &RunConfig::deterministic);
    return f;
  }();
  return fields;
}

const Field& find_field(const std::string& key) {
  for (const auto& f : registry())
    if (f.key == key) return f;
  throw std::invalid_argument("config: unknown key '" + key + "'");
}

}  // namespace

void RunConfig::validate() const {
  geometry.validate();
  fluid.validate();
  growth.validate();
  periodic.validate();
  if (grid_nx < 4 || grid_ny < 4)
    throw std::invalid_argument("config: grid.nx, grid.ny must be >= 4");
  if (!(schedule_T > 0.0) || !(schedule_K > 0.0) || !(schedule_k > 0.0))
    throw std::invalid_argument("config: schedule values must be positive");
  const double n = schedule_T / schedule_K;
  if (std::abs(n - std::round(n)) > 1e-9)
    throw std::invalid_argument("config: schedule.T must be a multiple of schedule.K");
  const double m = 1.0 / schedule_k;
  if (std::abs(m - std::round(m)) > 1e-6)
    throw std::invalid_argument("config: schedule.k must divide 1 s evenly");
  if (schedule_K < 10.0 * schedule_k)
    throw std::invalid_argument("config: schedule.K must be >> schedule.k (>= 10x)");
  if (growth.c_max > geometry.c_max)
    throw std::invalid_argument("config: growth.c_max must not exceed geometry.c_max");
}

PressureProfile RunConfig::make_pressure() const {
  if (pressure_kind == "constant") return PressureProfile::constant(pressure_value);
  return PressureProfile::default_inflow();
}

PeriodicMode RunConfig::make_periodic_mode() const {
  return periodic_mode == "averaging" ? PeriodicMode::averaging : PeriodicMode::forward;
}

MacroScheme RunConfig::make_macro_scheme() const {
  return macro_scheme == "ab2" ? MacroScheme::adams_bashforth2
                               : MacroScheme::semi_implicit_euler;
}

FlowProblem RunConfig::make_vessel_problem() const {
  FlowProblem p;
  p.grid = Grid::channel(geometry.domain.length, geometry.domain.diameter,
                         grid_nx, grid_ny);
  p.fluid = fluid;
  p.inflow = make_pressure();
  p.p_out = 0.0;
  p.mapped = true;
  p.geometry = geometry;
  p.geometry.domain.dimension = 2;  // flow runs are 2D
  p.wss_literal_transverse_window = wss_literal_transverse_window;
  return p;
}

FlowProblem RunConfig::make_cavity_problem() const {
  FlowProblem p;
  p.grid = Grid::box(-2.0, -2.0, 4.0, 4.0, grid_nx, grid_ny);
  p.fluid = fluid;
  p.inflow = PressureProfile::constant(0.0);
  p.mapped = false;
  // 2D reduction of the periodically forced box problem
  p.forcing = [](double x, double y, double t, double& fx, double& fy) {
    const double a = std::sin(2.0 * M_PI * t) / 6.0;
    fx = a * 3.0 * std::tanh(y);
    fy = a * std::tanh(x);
  };
  return p;
}

std::string RunConfig::canonical() const {
  std::ostringstream os;
  for (const auto& f : registry()) os << f.key << "=" << f.get(*this) << "\n";
  return os.str();
}

std::string RunConfig::canonical_physics() const {
  std::ostringstream os;
  for (const auto& f : registry())
    if (f.physics) os << f.key << "=" << f.get(*this) << "\n";
  return os.str();
}

std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::uint64_t RunConfig::hash() const { return fnv1a64(canonical()); }
std::uint64_t RunConfig::physics_hash() const { return fnv1a64(canonical_physics()); }

void RunConfig::set(const std::string& key, const std::string& value) {
  find_field(key).set(*this, value);
}

std::string RunConfig::get(const std::string& key) const {
  return find_field(key).get(*this);
}

std::vector<std::string> RunConfig::keys() {
  std::vector<std::string> out;
  for (const auto& f : registry()) out.push_back(f.key);
  return out;
}

RunConfig RunConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open '" + path + "'");
  RunConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash_pos = line.find('#');
    if (hash_pos != std::string::npos) line.erase(hash_pos);
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      if (b == std::string::npos) return std::string();
      const auto e = s.find_last_not_of(" \t\r");
      return s.substr(b, e - b + 1);
    };
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error("config: line " + std::to_string(lineno) +
                               ": expected key = value");
    }
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    try {
      cfg.set(key, value);
    } catch (const std::exception& e) {
      throw std::runtime_error("config: line " + std::to_string(lineno) + ": " +
                               e.what());
    }
  }
  return cfg;
}

void RunConfig::apply_overrides(const std::vector<std::string>& assignments) {
  for (const auto& a : assignments) {
    const auto eq = a.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("override must be key=value: '" + a + "'");
    set(a.substr(0, eq), a.substr(eq + 1));
  }
}

}  // namespace stenosim
