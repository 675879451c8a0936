// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "stenosim/growth.hpp"

using namespace stenosim;

namespace {

WallField uniform_wall(int n, double length, double value) {
  WallField w;
  for (int i = 0; i < n; ++i) {
    const double x = length * i / (n - 1);
    w.axial.push_back(x);
    w.arc.push_back(x);
    w.values.push_back(value);
  }
  return w;
}

GrowthParams params() {
  GrowthParams p;
  p.alpha = 2.0e-3;
  p.beta = 1.0;
  p.lambda_c = 5.0e-7;
  return p;
}

}  // namespace

TEST_CASE("window: center value, decay, symmetry") {
  // independent evaluation of the two logistic factors at the center
  const double expected_center = std::pow(1.0 + std::exp(-2.0), -2.0);
  CHECK(window(2.0, 2.0) == doctest::Approx(expected_center).epsilon(1e-12));
  CHECK(expected_center == doctest::Approx(0.7758).epsilon(1e-3));

  CHECK(window(2.0, 12.0) < 1e-7);
  CHECK(window(2.0, -8.0) < 1e-7);

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> ud(0.0, 5.0);
  for (int i = 0; i < 50; ++i) {
    const double s = ud(rng), d = ud(rng);
    CHECK(window(s, s + d) == doctest::Approx(window(s, s - d)).epsilon(1e-12));
  }
}

TEST_CASE("clip: midpoint, activation edge, far below") {
  GrowthParams p = params();
  const double mid = 1.0 / (1.0 + std::exp(3.0 * (5.0 - 6.5))) /
                     (1.0 + std::exp(3.0 * (6.5 - 8.0)));
  CHECK(clip(6.5, p) == doctest::Approx(mid).epsilon(1e-12));
  CHECK(mid == doctest::Approx(0.9780).epsilon(1e-3));

  const double edge = 0.5 / (1.0 + std::exp(-9.0));
  CHECK(clip(5.0, p) == doctest::Approx(edge).epsilon(1e-12));
  CHECK(edge == doctest::Approx(0.49994).epsilon(1e-4));

  CHECK(clip(0.0, p) < 1e-6);
}

TEST_CASE("reaction bounds and saturation prefactor") {
  GrowthParams p = params();
  CHECK(reaction_prefactor(0.0, p) == p.alpha);
  CHECK(reaction_prefactor(1.0, p) == doctest::Approx(0.5 * p.alpha));
  CHECK(reaction(0.3, 0.0, p) == doctest::Approx(0.0).epsilon(1e-9));

  // 0 <= R <= alpha over a broad random sample
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> uc(0.0, 0.95), us(-5.0, 25.0);
  for (int i = 0; i < 300; ++i) {
    const double r = reaction(uc(rng), us(rng), p);
    CHECK(r >= 0.0);
    CHECK(r <= p.alpha);
  }

  // monotone non-increasing in c at fixed stress
  double prev = reaction(0.0, 6.5, p);
  for (double c = 0.05; c <= 0.9; c += 0.05) {
    const double r = reaction(c, 6.5, p);
    CHECK(r <= prev + 1e-15);
    prev = r;
  }
}

TEST_CASE("averaged reaction") {
  GrowthParams p = params();
  const int n = 8;
  GrowthField cbar;
  cbar.c = uniform_wall(n, 7.0, 0.2);

  const int M = 50;
  const double dt = 1.0 / M;

  SUBCASE("all traces zero -> near-zero average (clip(0) ~ 3e-7)") {
    std::vector<WallField> traces(M + 1, uniform_wall(n, 7.0, 0.0));
    WallField r = averaged_reaction(cbar, traces, dt, p);
    for (double v : r.values) CHECK(v <= p.alpha * 1e-6);
  }

  SUBCASE("time-constant trace equals the pointwise reaction") {
    std::vector<WallField> traces(M + 1, uniform_wall(n, 7.0, 6.5));
    WallField r = averaged_reaction(cbar, traces, dt, p);
    for (double v : r.values)
      CHECK(v == doctest::Approx(reaction(0.2, 6.5, p)).epsilon(1e-12));
  }

  SUBCASE("square-wave trace averages the two clip levels") {
    std::vector<WallField> traces;
    for (int m = 0; m <= M; ++m)
      traces.push_back(uniform_wall(n, 7.0, (m % 2 == 0) ? 6.5 : 0.0));
    WallField r = averaged_reaction(cbar, traces, dt, p);
    // independent trapezoid of the alternating clip values
    double integral = 0.0;
    for (int m = 0; m <= M; ++m) {
      const double w = (m == 0 || m == M) ? 0.5 * dt : dt;
      integral += w * clip((m % 2 == 0) ? 6.5 : 0.0, p);
    }
    const double expected = reaction_prefactor(0.2, p) * integral;
    for (double v : r.values) CHECK(v == doctest::Approx(expected).epsilon(1e-12));
    // close to alpha/(2 (1+beta c)) for a half-on half-off wave
    CHECK(expected == doctest::Approx(0.5 * p.alpha / 1.2).epsilon(0.03));
  }

  SUBCASE("trace/period mismatch is rejected") {
    std::vector<WallField> traces(M, uniform_wall(n, 7.0, 6.5));
    CHECK_THROWS(averaged_reaction(cbar, traces, dt, p));
  }
}

TEST_CASE("macro step: diffusion-free reduction and linear growth") {
  GrowthParams p = params();
  p.lambda_c = 0.0;
  p.beta = 0.0;
  const int n = 12;
  GrowthField c;
  c.c = uniform_wall(n, 7.0, 0.0);

  WallField rbar = uniform_wall(n, 7.0, p.alpha);  // gamma-factor 1
  const double K = 10.0;
  const int steps = 7;
  for (int s = 0; s < steps; ++s) c = macro_step(c, rbar, K, p).field;
  for (double v : c.c.values)
    CHECK(v == doctest::Approx(steps * K * p.alpha).epsilon(1e-12));
  CHECK(c.time == doctest::Approx(steps * K));
}

TEST_CASE("macro step conserves the wall mean when the reaction vanishes") {
  GrowthParams p = params();
  p.lambda_c = 1.0e-3;  // exaggerated diffusion
  const int n = 15;
  GrowthField c;
  c.c = uniform_wall(n, 7.0, 0.0);
  for (int i = 0; i < n; ++i)
    c.c.values[static_cast<std::size_t>(i)] =
        0.3 * std::exp(-2.0 * (c.c.arc[static_cast<std::size_t>(i)] - 3.0) *
                       (c.c.arc[static_cast<std::size_t>(i)] - 3.0));
  const double mean0 = c.c.mean();
  WallField zero = uniform_wall(n, 7.0, 0.0);
  GrowthParams pz = p;
  for (int s = 0; s < 5; ++s) {
    // reaction exactly zero: pass a zero field through the euler path
    MacroStepResult r = macro_step(c, zero, 50.0, pz);
    c = r.field;
  }
  CHECK(c.c.mean() == doctest::Approx(mean0).epsilon(1e-12));
}

TEST_CASE("mean never decreases for nonnegative reactions") {
  GrowthParams p = params();
  const int n = 13;
  GrowthField c;
  c.c = uniform_wall(n, 7.0, 0.1);
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> ur(0.0, p.alpha);
  for (int s = 0; s < 10; ++s) {
    WallField rbar = uniform_wall(n, 7.0, 0.0);
    for (auto& v : rbar.values) v = ur(rng);
    const double mean0 = c.c.mean();
    c = macro_step(c, rbar, 25.0, p).field;
    CHECK(c.c.mean() >= mean0 - 1e-15);
  }
}

TEST_CASE("clamping at c_max is flagged") {
  GrowthParams p = params();
  p.lambda_c = 0.0;
  const int n = 8;
  GrowthField c;
  c.c = uniform_wall(n, 7.0, 0.9);
  WallField rbar = uniform_wall(n, 7.0, 1.0);  // absurdly large reaction
  MacroStepResult r = macro_step(c, rbar, 1000.0, p);
  CHECK(r.clamped);
  for (double v : r.field.c.values) CHECK(v == p.c_max);
}

TEST_CASE("unconditional stability of the semi-implicit scheme") {
  // no K / lambda_c combination oscillates; growth stays bounded by K*alpha
  GrowthParams p = params();
  for (double lam : {0.0, 1e-6, 1e-3, 1.0}) {
    for (double K : {1.0, 100.0, 100000.0}) {
      GrowthParams q = p;
      q.lambda_c = lam;
      const int n = 16;
      GrowthField c;
      c.c = uniform_wall(n, 7.0, 0.0);
      for (int i = 0; i < n; ++i)
        c.c.values[static_cast<std::size_t>(i)] = (i % 2 == 0) ? 0.4 : 0.0;
      double prev_max = 0.4;
      for (int s = 0; s < 8; ++s) {
        WallField rbar = uniform_wall(n, 7.0, 0.5 * q.alpha);
        c = macro_step(c, rbar, K, q).field;
        double mx = 0.0;
        for (double v : c.c.values) {
          CHECK(v >= -1e-15);
          mx = std::max(mx, v);
        }
        CHECK(mx <= std::min(prev_max + K * q.alpha, static_cast<double>(q.c_max)) + 1e-12);
        prev_max = mx;
      }
    }
  }
}

TEST_CASE("AB2 is second order, backward reaction Euler first order") {
  // synthetic smooth reaction history R(t) = A cos(w t); lambda_c = 0, beta = 0
  // reduces the macro step to an ODE quadrature of c' = R(t).
  GrowthParams p = params();
  p.lambda_c = 0.0;
  p.beta = 0.0;
  p.alpha = 1.0;  // keep clamping out of the way
  const double A = 1.0e-3, w = 2.0 * M_PI / 600.0;
  const double T = 600.0;

  auto run = [&](double K, MacroScheme scheme) {
    const int N = static_cast<int>(std::lround(T / K));
    GrowthField c;
    c.c = uniform_wall(6, 7.0, 0.0);
    WallField r_prev;
    bool have_prev = false;
    for (int n2 = 1; n2 <= N; ++n2) {
      const double t = (n2 - 1) * K;
      WallField r = uniform_wall(6, 7.0, A * std::cos(w * t));
      MacroStepResult res;
      if (scheme == MacroScheme::adams_bashforth2 && have_prev)
        res = macro_step(c, r, K, p, scheme, &r_prev);
      else
        res = macro_step(c, r, K, p);
      r_prev = r;
      have_prev = true;
      c = res.field;
    }
    return c.c.values[0];
  };
  const double exact = A / w * std::sin(w * T);  // == 0 at full period; use T where nonzero
  (void)exact;

  auto order = [&](MacroScheme scheme) {
    const double c1 = run(37.5, scheme);
    const double c2 = run(18.75, scheme);
    const double c3 = run(9.375, scheme);
    return std::log2(std::abs(c1 - c2) / std::abs(c2 - c3));
  };
  const double p_euler = order(MacroScheme::semi_implicit_euler);
  const double p_ab2 = order(MacroScheme::adams_bashforth2);
  CHECK(p_euler == doctest::Approx(1.0).epsilon(0.25));
  CHECK(p_ab2 == doctest::Approx(2.0).epsilon(0.25));
}
