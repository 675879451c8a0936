// SPDX-License-Identifier: Apache-2.0
//
// Structured tensor grid on a reference rectangle, node-based fields with
// second-order difference operators, and the wall field with its arc-length
// surface Laplacian.
//
// The discrete laplacian is defined as divergence(gradient(f)), so the
// identity div(grad f) == laplacian(f) holds to machine precision for every
// field. Both building blocks are exact on quadratics (central interior
// stencils, one-sided second-order stencils on the boundary), hence so is
// their composition.

#pragma once

#include <span>
#include <vector>

#include "stenosim/kernels.hpp"

namespace stenosim {

enum class EdgeTag { inflow, outflow, wall };

struct Grid {
  int nx = 0, ny = 0;        // cell counts
  double hx = 0.0, hy = 0.0; // spacings, cm
  double x0 = 0.0, y0 = 0.0; // origin of the rectangle
  EdgeTag left = EdgeTag::inflow;
  EdgeTag right = EdgeTag::outflow;
  EdgeTag bottom = EdgeTag::wall;
  EdgeTag top = EdgeTag::wall;

  // Channel-style grid: x in [0,length], y centered about 0 with extent
  // `diameter`, inflow left, outflow right, walls top/bottom.
  static Grid channel(double length, double diameter, int nx, int ny);
  // Enclosed box (all walls), origin at (x0,y0), side lengths lx, ly.
  static Grid box(double x0, double y0, double lx, double ly, int nx, int ny);

  int num_nodes() const { return (nx + 1) * (ny + 1); }
  int node(int i, int j) const { return j * (nx + 1) + i; }
  double x(int i) const { return x0 + i * hx; }
  double y(int j) const { return y0 + j * hy; }
  double length() const { return nx * hx; }
  double height() const { return ny * hy; }

  void validate() const; // nx,ny >= 4, positive spacings
};

class ScalarField {
 public:
  ScalarField() = default;
  explicit ScalarField(const Grid& g, double init = 0.0)
      : grid_(g), v_(static_cast<std::size_t>(g.num_nodes()), init) {}

  const Grid& grid() const { return grid_; }
  double& at(int i, int j) { return v_[static_cast<std::size_t>(grid_.node(i, j))]; }
  double at(int i, int j) const { return v_[static_cast<std::size_t>(grid_.node(i, j))]; }
  std::span<double> data() { return v_; }
  std::span<const double> data() const { return v_; }
  bool all_finite() const;

 private:
  Grid grid_;
  std::vector<double> v_;
};

class VectorField {
 public:
  VectorField() = default;
  explicit VectorField(const Grid& g) : comp_{ScalarField(g), ScalarField(g)} {}

  const Grid& grid() const { return comp_[0].grid(); }
  ScalarField& comp(int d) { return comp_[static_cast<std::size_t>(d)]; }
  const ScalarField& comp(int d) const { return comp_[static_cast<std::size_t>(d)]; }

 private:
  ScalarField comp_[2];
};

// Second-order node-based operators. Interior: central differences.
// Boundary: one-sided three-point stencils (exact on quadratics).
VectorField gradient(const ScalarField& f, Backend b = default_backend());
ScalarField divergence(const VectorField& v, Backend b = default_backend());
ScalarField laplacian(const ScalarField& f, Backend b = default_backend());

// Values attached to wall stations. `axial` holds the reference x1 of each
// station, `arc` the arc length along the mapped wall polyline (strictly
// increasing).
struct WallField {
  std::vector<double> axial;
  std::vector<double> arc;
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  void validate() const;

  // Trapezoidal measure of station i (half cells at the ends).
  double weight(std::size_t i) const;
  double total_measure() const;
  double mean() const;
};

// Arc-length surface Laplacian, finite-volume form with zero-flux ends:
//   (1/w_i) * [ (c_{i+1}-c_i)/h_i - (c_i-c_{i-1})/h_{i-1} ]
// Exact on quadratics in arc length; the w-weighted sum of the output
// vanishes identically (flux telescoping).
WallField surface_laplacian(const WallField& c);

}  // namespace stenosim
