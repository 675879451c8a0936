// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "stenosim/multiscale.hpp"

using namespace stenosim;

namespace {

RunConfig fast_config() {
  RunConfig cfg;
  cfg.grid_nx = 70;
  cfg.grid_ny = 12;
  cfg.schedule_T = 100.0;
  cfg.schedule_K = 25.0;
  cfg.schedule_k = 0.02;
  cfg.growth.alpha = 4.0e-3;
  return cfg;
}

}  // namespace

TEST_CASE("richardson rate: printed-table regression") {
  // K column: 0.9359 / 0.9138 / 0.9043 -> rate 1.22, limit 0.8971
  const RichardsonResult a = richardson_rate(0.9359, 0.9138, 0.9043);
  CHECK(a.rate == doctest::Approx(1.22).epsilon(0.01));
  CHECK(a.extrapolated == doctest::Approx(0.8971).epsilon(0.00025));

  // k column: 0.9132 / 0.9138 / 0.9140 -> rate 1.58
  const RichardsonResult b = richardson_rate(0.9132, 0.9138, 0.9140);
  CHECK(b.rate == doctest::Approx(1.58).epsilon(0.0065));
}

TEST_CASE("richardson rate: exact geometric sequences are recovered") {
  for (double p : {0.7, 1.0, 1.58, 2.0}) {
    const double Jstar = 0.83, C = 0.4;
    const double J1 = Jstar + C;
    const double J2 = Jstar + C * std::pow(2.0, -p);
    const double J3 = Jstar + C * std::pow(2.0, -2.0 * p);
    const RichardsonResult r = richardson_rate(J1, J2, J3);
    CHECK(r.rate == doctest::Approx(p).epsilon(1e-12));
    CHECK(r.extrapolated == doctest::Approx(Jstar).epsilon(1e-12));
  }
}

TEST_CASE("richardson rate: non-convergent sequences are rejected") {
  CHECK_THROWS_AS(richardson_rate(1.0, 0.9, 0.95), NonConvergentSequence);
  CHECK_THROWS_AS(richardson_rate(1.0, 1.0, 1.0), NonConvergentSequence);
}

TEST_CASE("outflow functional normalization") {
  CHECK(outflow_functional(0.5, 0.5) == doctest::Approx(1.0));
  CHECK(outflow_functional(0.0, 0.0) == 0.0);  // guarded degenerate case
}

TEST_CASE("frozen slow variable: alpha = 0") {
  RunConfig cfg = fast_config();
  cfg.growth.alpha = 0.0;
  cfg.schedule_T = 75.0;
  MultiscaleRun run = run_multiscale(cfg);
  REQUIRE_FALSE(run.aborted);
  for (double v : run.c_final.values) CHECK(v == 0.0);
  for (double j : run.jout) CHECK(j == doctest::Approx(1.0).epsilon(1e-9));
  // warm start is exact after the first solve
  for (std::size_t i = 1; i < run.reports.size(); ++i)
    CHECK(run.reports[i].cycles <= 2);
}

TEST_CASE("default desk run: outflow decreases, growth sits at the tips") {
  RunConfig cfg = fast_config();
  MultiscaleRun run = run_multiscale(cfg);
  REQUIRE_FALSE(run.aborted);
  REQUIRE(run.jout.size() == static_cast<std::size_t>(run.N) + 1);
  CHECK(run.jout.front() == doctest::Approx(1.0));
  for (std::size_t i = 1; i < run.jout.size(); ++i)
    CHECK(run.jout[i] <= run.jout[i - 1] + 1e-12);
  CHECK(run.jout.back() < 0.999);

  double cmax = 0.0;
  double x_at_max = 0.0;
  for (std::size_t i = 0; i < run.c_final.size(); ++i)
    if (run.c_final.values[i] > cmax) {
      cmax = run.c_final.values[i];
      x_at_max = run.c_final.axial[i];
    }
  CHECK(cmax > 0.0);
  const double s0 = cfg.geometry.domain.s0, s1 = cfg.geometry.domain.s1;
  const bool in_windows = (std::abs(x_at_max - s0) <= 1.25) ||
                          (std::abs(x_at_max - s1) <= 1.25);
  CHECK(in_windows);
}

TEST_CASE("macro self-convergence under K halving") {
  RunConfig cfg = fast_config();
  cfg.schedule_T = 100.0;
  auto final_c = [&](double K) {
    RunConfig c2 = cfg;
    c2.schedule_K = K;
    MultiscaleRun run = run_multiscale(c2);
    REQUIRE_FALSE(run.aborted);
    return run.c_final;
  };
  const WallField c1 = final_c(50.0);
  const WallField c2 = final_c(25.0);
  const WallField c3 = final_c(12.5);
  double d12 = 0.0, d23 = 0.0;
  for (std::size_t i = 0; i < c1.size(); ++i) {
    d12 = std::max(d12, std::abs(c1.values[i] - c2.values[i]));
    d23 = std::max(d23, std::abs(c2.values[i] - c3.values[i]));
  }
  const double factor = d12 / d23;
  CHECK(factor >= 1.7);
  CHECK(factor <= 2.5);
}

TEST_CASE("reruns are bit-identical") {
  RunConfig cfg = fast_config();
  cfg.schedule_T = 50.0;
  MultiscaleRun a = run_multiscale(cfg);
  MultiscaleRun b = run_multiscale(cfg);
  REQUIRE(a.c_final.values.size() == b.c_final.values.size());
  CHECK(a.c_final.values == b.c_final.values);  // exact equality
  CHECK(a.jout == b.jout);
}

TEST_CASE("adams-bashforth macro scheme runs and stays close to euler") {
  RunConfig cfg = fast_config();
  cfg.schedule_T = 50.0;
  RunConfig ab = cfg;
  ab.macro_scheme = "ab2";
  MultiscaleRun re = run_multiscale(cfg);
  MultiscaleRun rb = run_multiscale(ab);
  REQUIRE_FALSE(rb.aborted);
  double diff = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < re.c_final.size(); ++i) {
    diff = std::max(diff, std::abs(re.c_final.values[i] - rb.c_final.values[i]));
    scale = std::max(scale, re.c_final.values[i]);
  }
  CHECK(diff <= 0.25 * scale);
  CHECK(diff > 0.0);
}
