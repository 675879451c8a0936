// SPDX-License-Identifier: Apache-2.0
//
// Reference vessel domain and the composite deformation
//   T = T_centerline ∘ T_stenosis ∘ T_stent
// with analytic Jacobians (per-factor, composed by the chain rule) and a
// finite-difference gradient path kept for cross checks.
//
// The stent map widens the vessel near both tips s0, s1 with amplitude
// rho_stent on each bump. The stenosis map shrinks the cross section by the
// local growth value c(x1). The centerline map bends the straight pipe onto
// the curve y = tau(x1) by a unit-normal offset; in 3D the bending plane
// switches from x/y to x/z at the midpoint s_m, in 2D only the x/y branch
// is active.

#pragma once

#include <array>
#include <functional>
#include <stdexcept>
#include <string>

#include "stenosim/grid.hpp"
#include "stenosim/spline.hpp"

namespace stenosim {

using Vec3 = std::array<double, 3>;
using Mat3 = std::array<std::array<double, 3>, 3>;

struct ReferenceDomain {
  double length = 7.0;    // cm
  double diameter = 0.2;  // cm
  int dimension = 2;      // 2 or 3
  double s0 = 2.0;        // stent start, cm
  double s1 = 5.0;        // stent end, cm
  double sm = 3.5;        // curvature midpoint, cm

  void validate() const;
};

struct StentParams {
  double rho_stent = 0.1;    // dimensionless bump amplitude
  double gamma_stent = 50.0; // cm^-2 bump decay

  void validate() const;
};

struct CenterlineParams {
  double coefficient = 4.0e-3; // cm^(1-exponent)
  int exponent = 4;

  void validate() const;
};

struct GeometryParams {
  ReferenceDomain domain;
  StentParams stent;
  CenterlineParams centerline;
  double c_max = 0.95; // growth cap keeping T_stenosis invertible

  void validate() const;
};

// Axial growth profile c(x1) with derivative; the wall footprint of a point
// is its axial station. Built from a WallField via a natural cubic spline,
// or supplied analytically in tests.
struct GrowthProfile {
  std::function<double(double)> value = [](double) { return 0.0; };
  std::function<double(double)> deriv = [](double) { return 0.0; };

  static GrowthProfile zero();
  static GrowthProfile constant(double c);
  static GrowthProfile from_wall_field(const WallField& w);
};

struct AleMap {
  Vec3 x_ref{};  // reference point
  Vec3 x{};      // mapped point
  Mat3 F{};      // gradient dT/dx_ref
  double J = 1.0;
};

class GeometryError : public std::runtime_error {
 public:
  explicit GeometryError(const std::string& what) : std::runtime_error(what) {}
};

// Radial widening factor of the stent map at axial position x1.
double stent_factor(double x1, const StentParams& p, const ReferenceDomain& d);

Vec3 stent_map(const Vec3& x, const StentParams& p, const ReferenceDomain& d);
// Throws GeometryError for c_at_x >= 1 (lumen collapse).
Vec3 stenosis_map(const Vec3& x, double c_at_x, int dimension = 3);
Vec3 centerline_map(const Vec3& x, const CenterlineParams& p,
                    const ReferenceDomain& d);

// Full composite with analytic gradient; throws GeometryError when the
// determinant is not positive, reporting the offending location.
AleMap composite_map(const Vec3& x, const GrowthProfile& c,
                     const GeometryParams& p);

// Gradient of the composite by central finite differences of the mapped
// point (test cross-check path).
Mat3 composite_gradient_fd(const Vec3& x, const GrowthProfile& c,
                           const GeometryParams& p, double h_fd = 1.0e-6);

double det(const Mat3& m, int dimension);

}  // namespace stenosim
