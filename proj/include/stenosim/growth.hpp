// SPDX-License-Identifier: Apache-2.0
//
// Slow-scale surface dynamics on the vessel wall: the stress-triggered
// reaction term with its smooth activation window and clipping, the
// cycle-averaged reaction, and the semi-implicit macro step for the
// averaged growth variable.

#pragma once

#include <vector>

#include "stenosim/grid.hpp"

namespace stenosim {

struct GrowthParams {
  double alpha = 5.0e-4;     // growth rate, s^-1 (scale separation)
  double beta = 1.0;         // saturation (dimensionless)
  double lambda_c = 5.0e-7;  // surface diffusion (stabilizer)
  double sigma_min = 5.0;    // activation band, stress units
  double sigma_max = 8.0;
  double c_max = 0.95;       // clamp bound for the growth variable

  void validate() const;
};

enum class MacroScheme { semi_implicit_euler, adams_bashforth2 };

struct GrowthField {
  WallField c;     // averaged growth variable on the wall
  double time = 0; // macro time, s
};

// Smooth plateau of half-width 1 centered at s:
//   (1+exp(2(s-1-x)))^-1 (1+exp(2(x-s-1)))^-1
double window(double s, double x);

// Activation clipping of a stress value into (0,1), ~1 inside
// (sigma_min, sigma_max) and ~0 far outside.
double clip(double S, const GrowthParams& p);

// Saturation prefactor alpha/(1+beta c).
double reaction_prefactor(double c, const GrowthParams& p);

// Pointwise reaction R = prefactor(c) * clip(sigma_wss). The tip windows are
// already part of sigma_wss (applied during wall stress extraction).
double reaction(double c, double sigma_wss, const GrowthParams& p);

// Cycle average: R̄(x) = alpha/(1+beta c̄(x)) * ∫_0^1 clip(sigma_wss(x,s)) ds
// with a trapezoidal rule over the per-step traces (traces.size() == M+1,
// M*dt == 1).
WallField averaged_reaction(const GrowthField& cbar,
                            const std::vector<WallField>& wss_traces,
                            double dt, const GrowthParams& p);

struct MacroStepResult {
  GrowthField field;
  bool clamped = false;  // some station hit [0, c_max]
};

// One macro step of (c_n - c_{n-1})/K - lambda_c * Lap_arc c_n = R̄ with
// implicit diffusion (tridiagonal solve) and explicit reaction. For
// adams_bashforth2 pass the previous step's reaction as well; the effective
// explicit term is (3 R̄_{n-1} - R̄_{n-2}) / 2.
MacroStepResult macro_step(const GrowthField& prev, const WallField& rbar,
                           double K, const GrowthParams& p,
                           MacroScheme scheme = MacroScheme::semi_implicit_euler,
                           const WallField* rbar_older = nullptr);

}  // namespace stenosim
