// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

namespace stenosim {

// Natural cubic spline interpolant with first-derivative evaluation.
// C2 inside the knot range; evaluation outside the range extends the
// boundary cubic.
class CubicSpline {
 public:
  CubicSpline() = default;
  CubicSpline(std::vector<double> xs, std::vector<double> ys);

  double value(double x) const;
  double deriv(double x) const;

 private:
  std::size_t interval(double x) const;
  std::vector<double> x_, y_, m_;  // knots, values, second derivatives
};

}  // namespace stenosim
