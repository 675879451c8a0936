// SPDX-License-Identifier: Apache-2.0
//
// Times the serial reference kernels against their OpenMP counterparts and
// the two backends of the solver-level hot spots (map sampling, operator
// application, a full theta step). Prints a table; --csv appends a
// machine-readable copy.

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <cstring>
#include <random>
#include <string>
#include <vector>

#include "stenosim/config.hpp"
#include "stenosim/grid.hpp"
#include "stenosim/kernels.hpp"
#include "stenosim/microflow.hpp"

using namespace stenosim;

namespace {

double now_s() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

template <class F>
double time_best_of(int reps, F&& body) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const double t0 = now_s();
    body();
    best = std::min(best, now_s() - t0);
  }
  return best;
}

struct Row {
  std::string name;
  double serial_ms, omp_ms;
};

std::vector<Row> rows;

void report(const std::string& name, double serial_s, double omp_s) {
  rows.push_back({name, serial_s * 1e3, omp_s * 1e3});
  std::printf("%-28s %10.3f ms %10.3f ms   speedup %.2fx\n", name.c_str(),
              serial_s * 1e3, omp_s * 1e3, serial_s / omp_s);
}

}  // namespace

int main(int argc, char** argv) {
  bool csv = false;
  long n = 4'000'000;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--csv") == 0) csv = true;
    if (std::strcmp(argv[i], "--n") == 0 && i + 1 < argc) n = std::atol(argv[++i]);
  }
  std::printf("threads: %d, n = %ld\n", omp_get_max_threads(), n);

  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<double> x(static_cast<std::size_t>(n)), y(static_cast<std::size_t>(n));
  for (auto& v : x) v = dist(rng);
  for (auto& v : y) v = dist(rng);

  volatile double sink = 0.0;
  auto bench_pair = [&](const char* name, auto&& body) {
    const double ts = time_best_of(5, [&] { body(Backend::serial); });
    const double to = time_best_of(5, [&] { body(Backend::openmp); });
    report(name, ts, to);
  };

  bench_pair("axpy", [&](Backend b) { kernels::axpy(0.5, x, y, b); });
  bench_pair("dot", [&](Backend b) { sink = kernels::dot(x, y, b); });
  bench_pair("norm2", [&](Backend b) { sink = kernels::norm2(x, b); });
  bench_pair("max_abs", [&](Backend b) { sink = kernels::max_abs(x, b); });

  {
    Grid g = Grid::box(0.0, 0.0, 1.0, 1.0, 512, 512);
    ScalarField f(g);
    for (int j = 0; j <= g.ny; ++j)
      for (int i = 0; i <= g.nx; ++i)
        f.at(i, j) = std::sin(3.0 * g.x(i)) * std::cos(2.0 * g.y(j));
    bench_pair("grid laplacian 512^2",
               [&](Backend b) { sink = laplacian(f, b).at(5, 5); });
  }

  {
    RunConfig cfg;
    cfg.grid_nx = 280;
    cfg.grid_ny = 32;
    MicroSolver solver(cfg.make_vessel_problem());
    FlowState s = solver.zero_state();
    const double dt = 0.02;
    // warm up the factorization so the step timing shows the per-step cost
    solver.theta_step(s, dt);
    bench_pair("theta step (vessel 280x32)", [&](Backend b) {
      set_default_backend(b);
      FlowState t = s;
      solver.theta_step(t, dt);
    });
    bench_pair("wall stress extraction", [&](Backend b) {
      set_default_backend(b);
      sink = solver.wall_shear_stress(s).values[10];
    });
    set_default_backend(Backend::openmp);
  }

  (void)sink;

  if (csv) {
    std::printf("\nname,serial_ms,omp_ms,speedup\n");
    for (const auto& r : rows)
      std::printf("%s,%.6f,%.6f,%.3f\n", r.name.c_str(), r.serial_ms, r.omp_ms,
                  r.serial_ms / r.omp_ms);
  }
  return 0;
}
