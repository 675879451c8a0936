// SPDX-License-Identifier: Apache-2.0

#include "stenosim/growth.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace stenosim {

void GrowthParams::validate() const {
  if (!(alpha >= 0.0)) throw std::invalid_argument("GrowthParams: alpha >= 0");
  if (beta < 0.0) throw std::invalid_argument("GrowthParams: beta >= 0");
  if (lambda_c < 0.0) throw std::invalid_argument("GrowthParams: lambda_c >= 0");
  if (!(sigma_min < sigma_max))
    throw std::invalid_argument("GrowthParams: sigma_min < sigma_max");
  if (!(c_max > 0.0 && c_max < 1.0))
    throw std::invalid_argument("GrowthParams: c_max in (0,1)");
}

double window(double s, double x) {
  return 1.0 / (1.0 + std::exp(2.0 * (s - 1.0 - x))) /
         (1.0 + std::exp(2.0 * (x - s - 1.0)));
}

double clip(double S, const GrowthParams& p) {
  return 1.0 / (1.0 + std::exp(3.0 * (p.sigma_min - S))) /
         (1.0 + std::exp(3.0 * (S - p.sigma_max)));
}

double reaction_prefactor(double c, const GrowthParams& p) {
  return p.alpha / (1.0 + p.beta * c);
}

double reaction(double c, double sigma_wss, const GrowthParams& p) {
  return reaction_prefactor(c, p) * clip(sigma_wss, p);
}

WallField averaged_reaction(const GrowthField& cbar,
                            const std::vector<WallField>& wss_traces,
                            double dt, const GrowthParams& p) {
  const std::size_t n = cbar.c.size();
  const std::size_t steps = wss_traces.size();
  if (steps < 2) throw std::invalid_argument("averaged_reaction: needs >= 2 traces");
  const double period = dt * static_cast<double>(steps - 1);
  if (std::abs(period - 1.0) > 1.0e-9)
    throw std::invalid_argument("averaged_reaction: traces do not cover one period");
  for (const auto& t : wss_traces)
    if (t.size() != n)
      throw std::invalid_argument("averaged_reaction: trace/wall size mismatch");

  WallField out = cbar.c;
  for (std::size_t i = 0; i < n; ++i) {
    double integral = 0.0;
    for (std::size_t m = 0; m < steps; ++m) {
      const double w = (m == 0 || m == steps - 1) ? 0.5 * dt : dt;
      integral += w * clip(wss_traces[m].values[i], p);
    }
    out.values[i] = reaction_prefactor(cbar.c.values[i], p) * integral;
  }
  return out;
}

MacroStepResult macro_step(const GrowthField& prev, const WallField& rbar,
                           double K, const GrowthParams& p, MacroScheme scheme,
                           const WallField* rbar_older) {
  if (!(K > 0.0)) throw std::invalid_argument("macro_step: K > 0");
  const std::size_t n = prev.c.size();
  if (rbar.size() != n) throw std::invalid_argument("macro_step: size mismatch");

  std::vector<double> reac(n);
  if (scheme == MacroScheme::adams_bashforth2) {
    if (rbar_older == nullptr || rbar_older->size() != n)
      throw std::invalid_argument("macro_step: adams_bashforth2 needs the older reaction");
    for (std::size_t i = 0; i < n; ++i)
      reac[i] = 1.5 * rbar.values[i] - 0.5 * rbar_older->values[i];
  } else {
    reac = rbar.values;
  }

  MacroStepResult res;
  res.field.c = prev.c;
  res.field.time = prev.time + K;

  // (I + K*lambda_c*A) c_n = c_{n-1} + K*reac, A the arc-length stiffness in
  // finite-volume form with zero-flux ends. Thomas solve on the tridiagonal
  // system; row i is scaled by the station weight w_i so A stays symmetric
  // in the w-weighted inner product (wall mean exactly conserved for R̄=0).
  const auto& arc = prev.c.arc;
  std::vector<double> lower(n, 0.0), diag(n, 0.0), upper(n, 0.0), rhs(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double w = prev.c.weight(i);
    diag[i] = w / K;
    rhs[i] = w / K * prev.c.values[i] + w * reac[i];
    if (i > 0) {
      const double f = p.lambda_c / (arc[i] - arc[i - 1]);
      lower[i] -= f;
      diag[i] += f;
    }
    if (i + 1 < n) {
      const double f = p.lambda_c / (arc[i + 1] - arc[i]);
      upper[i] -= f;
      diag[i] += f;
    }
  }
  for (std::size_t i = 1; i < n; ++i) {
    if (diag[i - 1] == 0.0) throw std::runtime_error("macro_step: tridiagonal solve failed");
    const double m = lower[i] / diag[i - 1];
    diag[i] -= m * upper[i - 1];
    rhs[i] -= m * rhs[i - 1];
  }
  std::vector<double>& c = res.field.c.values;
  c[n - 1] = rhs[n - 1] / diag[n - 1];
  for (std::size_t i = n - 1; i-- > 0;)
    c[i] = (rhs[i] - upper[i] * c[i + 1]) / diag[i];

  for (double& v : c) {
    if (v < 0.0 || v > p.c_max) {
      res.clamped = true;
      v = std::clamp(v, 0.0, p.c_max);
    }
  }
  return res;
}

}  // namespace stenosim
