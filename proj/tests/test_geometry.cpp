// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "stenosim/geometry.hpp"

using namespace stenosim;

namespace {

GeometryParams default_params(int dim = 3) {
  GeometryParams p;
  p.domain.dimension = dim;
  return p;
}

// smooth analytic growth profile used where differentiability matters
GrowthProfile smooth_profile(double amp = 0.2) {
  GrowthProfile p;
  p.value = [amp](double x) { return amp * std::exp(-(x - 3.0) * (x - 3.0)); };
  p.deriv = [amp](double x) {
    return amp * -2.0 * (x - 3.0) * std::exp(-(x - 3.0) * (x - 3.0));
  };
  return p;
}

}  // namespace

TEST_CASE("stent factor at the tips and midpoint") {
  GeometryParams p = default_params();
  // at x1 = s0 the first bump is 1, the second is exp(-50*9) ~ 0
  const double f_tip = stent_factor(2.0, p.stent, p.domain);
  CHECK(f_tip == doctest::Approx(1.1).epsilon(1e-12));
  // midpoint: both bumps exp(-50*2.25), negligible
  const double f_mid = stent_factor(3.5, p.stent, p.domain);
  CHECK(f_mid == doctest::Approx(1.0).epsilon(1e-14));

  const Vec3 x{2.0, 0.07, 0.0};
  const Vec3 y = stent_map(x, p.stent, p.domain);
  CHECK(y[0] == 2.0);
  CHECK(y[1] == doctest::Approx(0.07 * f_tip));
}

TEST_CASE("zero-amplitude stent map is the identity") {
  GeometryParams p = default_params();
  p.stent.rho_stent = 0.0;
  for (double x1 : {0.3, 2.0, 4.4, 6.9}) {
    const Vec3 y = stent_map(Vec3{x1, 0.05, -0.02}, p.stent, p.domain);
    CHECK(y[0] == x1);
    CHECK(y[1] == 0.05);
    CHECK(y[2] == -0.02);
  }
}

TEST_CASE("stenosis map scales the cross-section") {
  const Vec3 y = stenosis_map(Vec3{1.5, 0.1, 0.0}, 0.5, 3);
  CHECK(y[0] == 1.5);
  CHECK(y[1] == doctest::Approx(0.05));
  // identity at c = 0
  const Vec3 z = stenosis_map(Vec3{1.5, 0.1, -0.1}, 0.0, 3);
  CHECK(z[1] == 0.1);
  CHECK(z[2] == -0.1);
  // lumen closure excluded
  CHECK_THROWS_AS(stenosis_map(Vec3{1.5, 0.1, 0.0}, 1.0, 3), GeometryError);
}

TEST_CASE("centerline map identities") {
  GeometryParams p = default_params();
  // flat at the midpoint: tau(sm) = tau'(sm) = 0
  const Vec3 y = centerline_map(Vec3{3.5, 0.08, -0.03}, p.centerline, p.domain);
  CHECK(y[0] == doctest::Approx(3.5));
  CHECK(y[1] == doctest::Approx(0.08));
  CHECK(y[2] == doctest::Approx(-0.03));

  // on the centerline, two cm past the midpoint: y = 4e-3 * 2^4
  const Vec3 z = centerline_map(Vec3{5.5, 0.0, 0.0}, p.centerline, p.domain);
  CHECK(z[0] == doctest::Approx(5.5));
  // 3D: for x1 > sm the bending plane is x/z
  CHECK(z[2] == doctest::Approx(4.0e-3 * 16.0).epsilon(1e-12));

  // 2D keeps the x/y branch on the whole axis
  GeometryParams p2 = default_params(2);
  const Vec3 w = centerline_map(Vec3{5.5, 0.0, 0.0}, p2.centerline, p2.domain);
  CHECK(w[1] == doctest::Approx(4.0e-3 * 16.0).epsilon(1e-12));

  // straight vessel when the coefficient vanishes
  GeometryParams p0 = default_params();
  p0.centerline.coefficient = 0.0;
  const Vec3 s = centerline_map(Vec3{1.2, 0.05, 0.02}, p0.centerline, p0.domain);
  CHECK(s[0] == 1.2);
  CHECK(s[1] == 0.05);
  CHECK(s[2] == 0.02);
}

TEST_CASE("composite map: identity composition") {
  GeometryParams p = default_params(2);
  p.stent.rho_stent = 0.0;
  p.centerline.coefficient = 0.0;
  const AleMap m = composite_map(Vec3{2.7, 0.04, 0.0}, GrowthProfile::zero(), p);
  CHECK(m.J == doctest::Approx(1.0).epsilon(1e-14));
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      CHECK(m.F[i][j] == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-14));
  CHECK(m.x[0] == doctest::Approx(2.7));
  CHECK(m.x[1] == doctest::Approx(0.04));
}

TEST_CASE("composite map: uniform stenosis in a straight 2D vessel") {
  GeometryParams p = default_params(2);
  p.stent.rho_stent = 0.0;
  p.centerline.coefficient = 0.0;
  const AleMap m =
      composite_map(Vec3{3.0, 0.05, 0.0}, GrowthProfile::constant(0.5), p);
  CHECK(m.J == doctest::Approx(0.5).epsilon(1e-13));
}

TEST_CASE("default 2D parameters keep J positive up to c = 0.9") {
  GeometryParams p = default_params(2);
  const GrowthProfile c = GrowthProfile::constant(0.9);
  // dense sampling across the reference rectangle
  for (int i = 0; i <= 200; ++i) {
    const double x1 = 7.0 * i / 200.0;
    for (int j = 0; j <= 8; ++j) {
      const double x2 = -0.1 + 0.2 * j / 8.0;
      const AleMap m = composite_map(Vec3{x1, x2, 0.0}, c, p);
      CHECK(m.J > 0.0);
    }
  }
}

TEST_CASE("dense 3D sampling keeps J positive for the smooth profile") {
  GeometryParams p = default_params(3);
  const GrowthProfile c = smooth_profile(0.5);
  for (int i = 0; i <= 70; ++i) {
    const double x1 = 7.0 * i / 70.0;
    for (int j = 0; j <= 4; ++j)
      for (int k = 0; k <= 4; ++k) {
        const double x2 = -0.1 + 0.2 * j / 4.0;
        const double x3 = -0.1 + 0.2 * k / 4.0;
        CHECK(composite_map(Vec3{x1, x2, x3}, c, p).J > 0.0);
      }
  }
}

TEST_CASE("analytic F matches finite differences on random points") {
  for (int dim : {2, 3}) {
    GeometryParams p = default_params(dim);
    const GrowthProfile c = smooth_profile();
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> ux(0.05, 6.95);
    std::uniform_real_distribution<double> ur(-0.095, 0.095);
    for (int trial = 0; trial < 100; ++trial) {
      const Vec3 x{ux(rng), ur(rng), dim == 3 ? ur(rng) : 0.0};
      const AleMap m = composite_map(x, c, p);
      const Mat3 fd = composite_gradient_fd(x, c, p, 1.0e-6);
      double scale = 0.0;
      for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) scale = std::max(scale, std::abs(m.F[i][j]));
      for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j)
          CHECK(std::abs(m.F[i][j] - fd[i][j]) <= 1e-6 * scale);
    }
  }
}

TEST_CASE("tip maps commute with axial translation") {
  GeometryParams p = default_params(3);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> ud(-1.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const double shift = ud(rng);
    const double x1 = 2.5 + ud(rng);
    GeometryParams q = p;
    q.domain.s0 += shift;
    q.domain.s1 += shift;
    const double f0 = stent_factor(x1, p.stent, p.domain);
    const double f1 = stent_factor(x1 + shift, q.stent, q.domain);
    CHECK(f0 == doctest::Approx(f1).epsilon(1e-13));
  }
}

TEST_CASE("wall-field profile reproduces values and is differentiable") {
  WallField w;
  const int n = 20;
  for (int i = 0; i < n; ++i) {
    const double x = 7.0 * i / (n - 1);
    w.axial.push_back(x);
    w.arc.push_back(x);
    w.values.push_back(0.25 * std::exp(-(x - 3.5) * (x - 3.5)));
  }
  const GrowthProfile p = GrowthProfile::from_wall_field(w);
  for (int i = 0; i < n; ++i)
    CHECK(p.value(w.axial[static_cast<std::size_t>(i)]) ==
          doctest::Approx(w.values[static_cast<std::size_t>(i)]).epsilon(1e-12));
  // derivative against central differences of the spline itself
  for (double x : {1.0, 2.3, 3.5, 5.1}) {
    const double h = 1e-6;
    const double fd = (p.value(x + h) - p.value(x - h)) / (2.0 * h);
    CHECK(p.deriv(x) == doctest::Approx(fd).epsilon(1e-6));
  }
}

TEST_CASE("degenerate geometry reports the offending location") {
  // a strongly bent centerline folds the tube over at the wall
  GeometryParams p = default_params(2);
  p.centerline.coefficient = 30.0;
  p.centerline.exponent = 2;
  CHECK_THROWS_WITH_AS(
      composite_map(Vec3{3.5, 0.1, 0.0}, GrowthProfile::zero(), p),
      doctest::Contains("non-positive determinant"), GeometryError);
}
