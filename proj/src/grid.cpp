// SPDX-License-Identifier: Apache-2.0

#include "stenosim/grid.hpp"

#include <cmath>
#include <stdexcept>

namespace stenosim {

Grid Grid::channel(double length, double diameter, int nx, int ny) {
  Grid g;
  g.nx = nx;
  g.ny = ny;
  g.hx = length / nx;
  g.hy = diameter / ny;
  g.x0 = 0.0;
  g.y0 = -0.5 * diameter;
  g.left = EdgeTag::inflow;
  g.right = EdgeTag::outflow;
  g.bottom = g.top = EdgeTag::wall;
  g.validate();
  return g;
}

Grid Grid::box(double x0, double y0, double lx, double ly, int nx, int ny) {
  Grid g;
  g.nx = nx;
  g.ny = ny;
  g.hx = lx / nx;
  g.hy = ly / ny;
  g.x0 = x0;
  g.y0 = y0;
  g.left = g.right = g.bottom = g.top = EdgeTag::wall;
  g.validate();
  return g;
}

void Grid::validate() const {
  if (nx < 4 || ny < 4) throw std::invalid_argument("Grid: nx, ny must be >= 4");
  if (!(hx > 0.0) || !(hy > 0.0))
    throw std::invalid_argument("Grid: spacings must be positive");
}

bool ScalarField::all_finite() const {
  for (double x : v_)
    if (!std::isfinite(x)) return false;
  return true;
}

namespace {

// d/dx of row values with one-sided second-order closure.
inline double ddx(const ScalarField& f, int i, int j, int nx, double hx) {
  if (i == 0) return (-3.0 * f.at(0, j) + 4.0 * f.at(1, j) - f.at(2, j)) / (2.0 * hx);
  if (i == nx)
    return (3.0 * f.at(nx, j) - 4.0 * f.at(nx - 1, j) + f.at(nx - 2, j)) / (2.0 * hx);
  return (f.at(i + 1, j) - f.at(i - 1, j)) / (2.0 * hx);
}

inline double ddy(const ScalarField& f, int i, int j, int ny, double hy) {
  if (j == 0) return (-3.0 * f.at(i, 0) + 4.0 * f.at(i, 1) - f.at(i, 2)) / (2.0 * hy);
  if (j == ny)
    return (3.0 * f.at(i, ny) - 4.0 * f.at(i, ny - 1) + f.at(i, ny - 2)) / (2.0 * hy);
  return (f.at(i, j + 1) - f.at(i, j - 1)) / (2.0 * hy);
}

}  // namespace

VectorField gradient(const ScalarField& f, Backend b) {
  const Grid& g = f.grid();
  VectorField out(g);
  ScalarField& gx = out.comp(0);
  ScalarField& gy = out.comp(1);
  parallel_for(g.num_nodes(), b, [&](std::int64_t n) {
    const int i = static_cast<int>(n) % (g.nx + 1);
    const int j = static_cast<int>(n) / (g.nx + 1);
    gx.at(i, j) = ddx(f, i, j, g.nx, g.hx);
    gy.at(i, j) = ddy(f, i, j, g.ny, g.hy);
  });
  return out;
}

ScalarField divergence(const VectorField& v, Backend b) {
  const Grid& g = v.grid();
  ScalarField out(g);
  const ScalarField& vx = v.comp(0);
  const ScalarField& vy = v.comp(1);
  parallel_for(g.num_nodes(), b, [&](std::int64_t n) {
    const int i = static_cast<int>(n) % (g.nx + 1);
    const int j = static_cast<int>(n) / (g.nx + 1);
    out.at(i, j) = ddx(vx, i, j, g.nx, g.hx) + ddy(vy, i, j, g.ny, g.hy);
  });
  return out;
}

ScalarField laplacian(const ScalarField& f, Backend b) {
  return divergence(gradient(f, b), b);
}

void WallField::validate() const {
  if (values.size() < 4) throw std::invalid_argument("WallField: needs >= 4 stations");
  if (arc.size() != values.size() || axial.size() != values.size())
    throw std::invalid_argument("WallField: coordinate/value size mismatch");
  for (std::size_t i = 1; i < arc.size(); ++i)
    if (!(arc[i] > arc[i - 1]))
      throw std::invalid_argument("WallField: arc length must be strictly increasing");
}

double WallField::weight(std::size_t i) const {
  const std::size_t n = arc.size();
  if (i == 0) return 0.5 * (arc[1] - arc[0]);
  if (i == n - 1) return 0.5 * (arc[n - 1] - arc[n - 2]);
  return 0.5 * (arc[i + 1] - arc[i - 1]);
}

double WallField::total_measure() const { return arc.back() - arc.front(); }

double WallField::mean() const {
  double s = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) s += weight(i) * values[i];
  return s / total_measure();
}

WallField surface_laplacian(const WallField& c) {
  c.validate();
  const std::size_t n = c.size();
  WallField out = c;
  // Fluxes between stations; zero flux past the ends (homogeneous Neumann).
  std::vector<double> flux(n + 1, 0.0);
  for (std::size_t i = 1; i < n; ++i)
    flux[i] = (c.values[i] - c.values[i - 1]) / (c.arc[i] - c.arc[i - 1]);
  for (std::size_t i = 0; i < n; ++i)
    out.values[i] = (flux[i + 1] - flux[i]) / c.weight(i);
  return out;
}

}  // namespace stenosim
