// SPDX-License-Identifier: Apache-2.0

#include "stenosim/geometry.hpp"

#include <cmath>
#include <memory>
#include <sstream>

namespace stenosim {

void ReferenceDomain::validate() const {
  if (!(length > 0.0) || !(diameter > 0.0))
    throw std::invalid_argument("ReferenceDomain: length, diameter must be positive");
  if (!(0.0 < s0 && s0 < s1 && s1 < length))
    throw std::invalid_argument("ReferenceDomain: requires 0 < s0 < s1 < length");
  if (dimension != 2 && dimension != 3)
    throw std::invalid_argument("ReferenceDomain: dimension must be 2 or 3");
}

void StentParams::validate() const {
  if (rho_stent < 0.0) throw std::invalid_argument("StentParams: rho_stent >= 0");
  if (!(gamma_stent > 0.0)) throw std::invalid_argument("StentParams: gamma_stent > 0");
}

void CenterlineParams::validate() const {
  if (coefficient < 0.0)
    throw std::invalid_argument("CenterlineParams: coefficient >= 0");
  if (exponent < 2)
    throw std::invalid_argument("CenterlineParams: exponent >= 2");
}

void GeometryParams::validate() const {
  domain.validate();
  stent.validate();
  centerline.validate();
  if (!(c_max > 0.0 && c_max < 1.0))
    throw std::invalid_argument("GeometryParams: c_max in (0,1)");
}

GrowthProfile GrowthProfile::zero() { return constant(0.0); }

GrowthProfile GrowthProfile::constant(double c) {
  GrowthProfile p;
  p.value = [c](double) { return c; };
  p.deriv = [](double) { return 0.0; };
  return p;
}

GrowthProfile GrowthProfile::from_wall_field(const WallField& w) {
  auto sp = std::make_shared<CubicSpline>(w.axial, w.values);
  GrowthProfile p;
  p.value = [sp](double x1) { return sp->value(x1); };
  p.deriv = [sp](double x1) { return sp->deriv(x1); };
  return p;
}

double stent_factor(double x1, const StentParams& p, const ReferenceDomain& d) {
  return 1.0 + p.rho_stent * std::exp(-p.gamma_stent * (x1 - d.s0) * (x1 - d.s0)) +
         p.rho_stent * std::exp(-p.gamma_stent * (x1 - d.s1) * (x1 - d.s1));
}

namespace {

double stent_factor_deriv(double x1, const StentParams& p, const ReferenceDomain& d) {
  const double a = x1 - d.s0;
  const double b = x1 - d.s1;
  return p.rho_stent * (-2.0 * p.gamma_stent * a * std::exp(-p.gamma_stent * a * a) -
                        2.0 * p.gamma_stent * b * std::exp(-p.gamma_stent * b * b));
}

Mat3 identity3() {
  return Mat3{{{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}}};
}

Mat3 matmul(const Mat3& a, const Mat3& b) {
  Mat3 r{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double s = 0.0;
      for (int k = 0; k < 3; ++k) s += a[i][k] * b[k][j];
      r[i][j] = s;
    }
  return r;
}

struct Tau {
  double v, d1, d2;  // tau, tau', tau''
};

Tau eval_tau(double x1, const CenterlineParams& p, const ReferenceDomain& d) {
  const double u = x1 - d.sm;
  const int e = p.exponent;
  Tau t;
  t.v = p.coefficient * std::pow(u, e);
  t.d1 = p.coefficient * e * std::pow(u, e - 1);
  t.d2 = p.coefficient * e * (e - 1) * std::pow(u, e - 2);
  return t;
}

// Normal-offset tube map in the plane (axial, offset). Returns the two
// mapped components and the 2x2 Jacobian wrt (x1, offset).
struct PlaneMap {
  double a, b;              // mapped (axial, transverse) pair
  double da_dx1, da_doff;
  double db_dx1, db_doff;
};

PlaneMap tube_map(double x1, double off, const Tau& t) {
  const double q = 1.0 + t.d1 * t.d1;
  const double w = 1.0 / std::sqrt(q);    // (1 + tau'^2)^(-1/2)
  const double wp = -t.d1 * t.d2 * w * w * w;
  PlaneMap m;
  m.a = x1 - t.d1 * w * off;
  m.b = t.v + w * off;
  m.da_dx1 = 1.0 - (t.d2 * w + t.d1 * wp) * off;
  m.da_doff = -t.d1 * w;
  m.db_dx1 = t.d1 + wp * off;
  m.db_doff = w;
  return m;
}

}  // namespace

Vec3 stent_map(const Vec3& x, const StentParams& p, const ReferenceDomain& d) {
  const double g = stent_factor(x[0], p, d);
  Vec3 y = x;
  y[1] = g * x[1];
  if (d.dimension == 3) y[2] = g * x[2];
  return y;
}

Vec3 stenosis_map(const Vec3& x, double c_at_x, int dimension) {
  if (c_at_x >= 1.0) {
    std::ostringstream os;
    os << "stenosis_map: growth value " << c_at_x << " at x1=" << x[0]
       << " would collapse the lumen";
    throw GeometryError(os.str());
  }
  Vec3 y = x;
  y[1] = (1.0 - c_at_x) * x[1];
  if (dimension == 3) y[2] = (1.0 - c_at_x) * x[2];
  return y;
}

Vec3 centerline_map(const Vec3& x, const CenterlineParams& p,
                    const ReferenceDomain& d) {
  const Tau t = eval_tau(x[0], p, d);
  Vec3 y = x;
  if (d.dimension == 2 || x[0] < d.sm) {
    const PlaneMap m = tube_map(x[0], x[1], t);
    y[0] = m.a;
    y[1] = m.b;
  } else {
    const PlaneMap m = tube_map(x[0], x[2], t);
    y[0] = m.a;
    y[2] = m.b;
  }
  return y;
}

AleMap composite_map(const Vec3& x, const GrowthProfile& c,
                     const GeometryParams& p) {
  const ReferenceDomain& d = p.domain;
  const int dim = d.dimension;

  // T_stent
  const double g = stent_factor(x[0], p.stent, d);
  const double gp = stent_factor_deriv(x[0], p.stent, d);
  Vec3 xs = x;
  xs[1] = g * x[1];
  if (dim == 3) xs[2] = g * x[2];
  Mat3 Fs = identity3();
  Fs[1][0] = gp * x[1];
  Fs[1][1] = g;
  if (dim == 3) {
    Fs[2][0] = gp * x[2];
    Fs[2][2] = g;
  }

  // T_stenosis (x1 unchanged by the stent map, so c is sampled at x[0])
  const double cv = c.value(x[0]);
  const double cp = c.deriv(x[0]);
  Vec3 xt = stenosis_map(xs, cv, dim);
  Mat3 Fc = identity3();
  Fc[1][0] = -cp * xs[1];
  Fc[1][1] = 1.0 - cv;
  if (dim == 3) {
    Fc[2][0] = -cp * xs[2];
    Fc[2][2] = 1.0 - cv;
  }

  // T_centerline
  const Tau t = eval_tau(xt[0], p.centerline, d);
  Vec3 xg = xt;
  Mat3 Fg = identity3();
  if (dim == 2 || xt[0] < d.sm) {
    const PlaneMap m = tube_map(xt[0], xt[1], t);
    xg[0] = m.a;
    xg[1] = m.b;
    Fg[0][0] = m.da_dx1;
    Fg[0][1] = m.da_doff;
    Fg[1][0] = m.db_dx1;
    Fg[1][1] = m.db_doff;
  } else {
    const PlaneMap m = tube_map(xt[0], xt[2], t);
    xg[0] = m.a;
    xg[2] = m.b;
    Fg[0][0] = m.da_dx1;
    Fg[0][2] = m.da_doff;
    Fg[2][0] = m.db_dx1;
    Fg[2][2] = m.db_doff;
  }

  AleMap out;
  out.x_ref = x;
  out.x = xg;
  out.F = matmul(Fg, matmul(Fc, Fs));
  out.J = det(out.F, dim);
  if (!(out.J > 0.0)) {
    std::ostringstream os;
    os << "composite_map: non-positive determinant J=" << out.J << " at x=(" << x[0]
       << ", " << x[1] << ", " << x[2] << ")";
    throw GeometryError(os.str());
  }
  return out;
}

Mat3 composite_gradient_fd(const Vec3& x, const GrowthProfile& c,
                           const GeometryParams& p, double h_fd) {
  auto apply = [&](const Vec3& q) {
    const ReferenceDomain& d = p.domain;
    Vec3 y = stent_map(q, p.stent, d);
    y = stenosis_map(y, c.value(q[0]), d.dimension);
    return centerline_map(y, p.centerline, d);
  };
  Mat3 F{};
  const int dim = p.domain.dimension;
  for (int j = 0; j < dim; ++j) {
    Vec3 xp = x, xm = x;
    xp[j] += h_fd;
    xm[j] -= h_fd;
    const Vec3 yp = apply(xp);
    const Vec3 ym = apply(xm);
    for (int i = 0; i < 3; ++i) F[i][j] = (yp[i] - ym[i]) / (2.0 * h_fd);
  }
  if (dim == 2) F[2][2] = 1.0;
  return F;
}

double det(const Mat3& m, int dimension) {
  if (dimension == 2) return m[0][0] * m[1][1] - m[0][1] * m[1][0];
  return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
         m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
         m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

}  // namespace stenosim
