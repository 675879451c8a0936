// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "stenosim/grid.hpp"

using namespace stenosim;

namespace {

Grid unit_grid(int nx, int ny) { return Grid::box(0.0, 0.0, 1.0, 1.0, nx, ny); }

ScalarField fill_field(const Grid& g, double (*f)(double, double)) {
  ScalarField out(g);
  for (int j = 0; j <= g.ny; ++j)
    for (int i = 0; i <= g.nx; ++i) out.at(i, j) = f(g.x(i), g.y(j));
  return out;
}

}  // namespace

TEST_CASE("grid invariants") {
  CHECK_THROWS(Grid::box(0, 0, 1, 1, 3, 8));
  Grid g = Grid::channel(7.0, 0.2, 140, 16);
  CHECK(g.hx * g.nx == doctest::Approx(7.0));
  CHECK(g.hy * g.ny == doctest::Approx(0.2));
  CHECK(g.left == EdgeTag::inflow);
  CHECK(g.right == EdgeTag::outflow);
  CHECK(g.top == EdgeTag::wall);
}

TEST_CASE("gradient of a linear field is exact everywhere") {
  Grid g = unit_grid(8, 8);
  ScalarField f = fill_field(g, [](double x, double) { return x; });
  VectorField grad = gradient(f);
  for (int j = 0; j <= g.ny; ++j)
    for (int i = 0; i <= g.nx; ++i) {
      CHECK(grad.comp(0).at(i, j) == doctest::Approx(1.0).epsilon(1e-13));
      CHECK(grad.comp(1).at(i, j) == doctest::Approx(0.0).epsilon(1e-13));
    }
}

TEST_CASE("divergence of a solenoidal linear field vanishes") {
  Grid g = unit_grid(8, 8);
  VectorField v(g);
  for (int j = 0; j <= g.ny; ++j)
    for (int i = 0; i <= g.nx; ++i) {
      v.comp(0).at(i, j) = g.x(i);
      v.comp(1).at(i, j) = -g.y(j);
    }
  ScalarField d = divergence(v);
  for (int j = 0; j <= g.ny; ++j)
    for (int i = 0; i <= g.nx; ++i)
      CHECK(d.at(i, j) == doctest::Approx(0.0).epsilon(1e-13));
}

TEST_CASE("laplacian exact on quadratics, including the boundary") {
  Grid g = unit_grid(9, 7);
  ScalarField f = fill_field(g, [](double x, double y) { return x * x + y * y; });
  ScalarField lap = laplacian(f);
  for (int j = 0; j <= g.ny; ++j)
    for (int i = 0; i <= g.nx; ++i)
      CHECK(lap.at(i, j) == doctest::Approx(4.0).epsilon(1e-11));
}

TEST_CASE("div(grad f) equals laplacian(f) to machine precision") {
  Grid g = unit_grid(12, 10);
  ScalarField f = fill_field(g, [](double x, double y) {
    return std::sin(3.0 * x) * std::cos(2.0 * y) + x * y * y;
  });
  ScalarField a = divergence(gradient(f));
  ScalarField b = laplacian(f);
  for (int j = 0; j <= g.ny; ++j)
    for (int i = 0; i <= g.nx; ++i)
      CHECK(a.at(i, j) == b.at(i, j));  // identical composition
}

TEST_CASE("second-order truncation under refinement") {
  // gradient: one-sided second order holds up to the boundary
  auto grad_err = [](int n) {
    Grid g = unit_grid(n, n);
    ScalarField f = fill_field(
        g, [](double x, double y) { return std::sin(x) * std::cos(y); });
    VectorField grad = gradient(f);
    double err = 0.0;
    for (int j = 0; j <= g.ny; ++j)
      for (int i = 0; i <= g.nx; ++i) {
        err = std::max(err, std::abs(grad.comp(0).at(i, j) -
                                     std::cos(g.x(i)) * std::cos(g.y(j))));
        err = std::max(err, std::abs(grad.comp(1).at(i, j) +
                                     std::sin(g.x(i)) * std::sin(g.y(j))));
      }
    return err;
  };
  // laplacian (the div-grad composite): measured where both factors use
  // central stencils
  auto lap_err = [](int n) {
    Grid g = unit_grid(n, n);
    ScalarField f = fill_field(
        g, [](double x, double y) { return std::sin(x) * std::cos(y); });
    ScalarField lap = laplacian(f);
    double err = 0.0;
    for (int j = 2; j <= g.ny - 2; ++j)
      for (int i = 2; i <= g.nx - 2; ++i) {
        const double exact = -2.0 * std::sin(g.x(i)) * std::cos(g.y(j));
        err = std::max(err, std::abs(lap.at(i, j) - exact));
      }
    return err;
  };
  const double fg = grad_err(16) / grad_err(32);
  CHECK(fg > 3.5);
  CHECK(fg < 4.5);
  const double fl = lap_err(16) / lap_err(32);
  CHECK(fl > 3.5);
  CHECK(fl < 4.5);
}

TEST_CASE("wall field validation") {
  WallField w;
  w.axial = {0.0, 1.0, 2.0, 3.0};
  w.arc = {0.0, 1.0, 0.5, 3.0};  // not increasing
  w.values = {0.0, 0.0, 0.0, 0.0};
  CHECK_THROWS(w.validate());
}

TEST_CASE("surface laplacian kernel and quadratic exactness") {
  const int n = 11;
  WallField w;
  for (int i = 0; i < n; ++i) {
    // non-uniform arc spacing
    const double s = 0.1 * i + 0.01 * i * i;
    w.arc.push_back(s);
    w.axial.push_back(s);
    w.values.push_back(0.0);
  }

  SUBCASE("constant in kernel") {
    for (auto& v : w.values) v = 3.7;
    WallField lap = surface_laplacian(w);
    for (double v : lap.values) CHECK(v == doctest::Approx(0.0).epsilon(1e-12));
  }
  SUBCASE("linear in kernel at interior nodes") {
    for (int i = 0; i < n; ++i) w.values[i] = 2.0 * w.arc[i] - 1.0;
    WallField lap = surface_laplacian(w);
    for (int i = 1; i + 1 < n; ++i)
      CHECK(lap.values[i] == doctest::Approx(0.0).epsilon(1e-10));
  }
  SUBCASE("quadratic gives 2 at interior nodes") {
    for (int i = 0; i < n; ++i) w.values[i] = w.arc[i] * w.arc[i];
    WallField lap = surface_laplacian(w);
    for (int i = 1; i + 1 < n; ++i)
      CHECK(lap.values[i] == doctest::Approx(2.0).epsilon(1e-9));
  }
  SUBCASE("weighted sum of the output vanishes (flux telescoping)") {
    for (int i = 0; i < n; ++i) w.values[i] = std::sin(3.0 * w.arc[i]);
    WallField lap = surface_laplacian(w);
    double acc = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < lap.size(); ++i) {
      acc += lap.weight(i) * lap.values[i];
      scale += std::abs(lap.weight(i) * lap.values[i]);
    }
    CHECK(std::abs(acc) <= 1e-12 * scale);
  }
}
