// SPDX-License-Identifier: Apache-2.0
//
// Unsteady incompressible flow on the frozen deformed domain, posed on the
// reference rectangle in ALE form. Staggered (MAC) velocity/pressure
// arrangement, theta time stepping, coupled saddle-point solve per step
// (sparse LU, refactorized only when the map or the convection
// linearization changes). Boundary conditions: no-slip walls, mean-traction
// (do-nothing) inflow/outflow with prescribed pressure data.
//
// The momentum operator uses the gradient form of the viscous stress, so
// the transformed diffusion acts componentwise through the metric
// G = J F^-1 F^-T and the do-nothing condition reproduces prescribed
// pressure values exactly on straight channels. The wall stress extraction
// uses the full symmetric Cauchy stress.

#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "stenosim/geometry.hpp"
#include "stenosim/grid.hpp"
#include "stenosim/growth.hpp"

namespace stenosim {

enum class FlowMode { stokes, navier_stokes };

struct FluidParams {
  double rho_f = 1.06;  // g cm^-3
  double nu_f = 0.03;   // cm^2 s^-1
  double theta = -1.0;  // <0: automatic 0.5 + dt
  FlowMode mode = FlowMode::stokes;
  double div_tol = 1.0e-8;  // relative divergence residual bound per step
  int newton_iters = 1;     // linearizations per step in navier_stokes mode
  double newton_tol = 1.0e-10;

  void validate() const;
  double effective_theta(double dt) const;
};

struct PressureProfile {
  // Piecewise-linear breakpoints (t, P) with t in [0,1]; evaluated with
  // periodic extension.
  std::vector<std::pair<double, double>> breakpoints;

  static PressureProfile default_inflow();  // the pulsatile 10/20/0 profile
  static PressureProfile constant(double P);
  double eval(double t) const;
  void validate() const;
};

// pin_eval(t) of the default inflow profile.
double pin_eval(double t);

using ForcingFn =
    std::function<void(double x, double y, double t, double& fx, double& fy)>;

struct FlowProblem {
  Grid grid;
  FluidParams fluid;
  PressureProfile inflow = PressureProfile::constant(0.0);
  double p_out = 0.0;     // outflow traction level
  ForcingFn forcing;      // optional body force density (per volume)
  bool mapped = false;    // apply the vessel geometry maps
  GeometryParams geometry;
  bool wss_literal_transverse_window = false;  // second window on x2 instead of x1
};

struct FlowState {
  std::vector<double> u, v, p;
  double t = 0.0;
};

struct CycleResult {
  FlowState end;                      // state after one period
  std::vector<double> vbar;           // cycle-average velocity (packed u,v)
  std::vector<WallField> wss;         // per-step traces, size M+1
  std::vector<double> outflow_steps;  // outflow rate per step, size M+1
  double outflow_avg = 0.0;           // trapezoidal cycle average
  double max_div_residual = 0.0;
};

struct SolverCounters {
  long theta_steps = 0;
  long stationary_solves = 0;
  long factorizations = 0;
};

class MicroSolver {
 public:
  explicit MicroSolver(FlowProblem prob);
  MicroSolver(MicroSolver&&) noexcept;
  MicroSolver& operator=(MicroSolver&&) noexcept;
  ~MicroSolver();

  const FlowProblem& problem() const { return prob_; }
  const Grid& grid() const { return prob_.grid; }
  int nu() const { return nu_; }
  int nv() const { return nv_; }
  int np() const { return np_; }
  int nuv() const { return nu_ + nv_; }

  // Rebuild the ALE coefficient cache (and drop factorizations) for a new
  // growth profile. Only meaningful for mapped problems.
  void set_growth(const GrowthProfile& c);

  FlowState zero_state() const;

  // Advance by one theta step; s.t is the time before the step.
  void theta_step(FlowState& s, double dt);

  CycleResult cycle_integrate(const FlowState& start, double dt,
                              bool record_traces = true);

  // Stationary Stokes solve with boundary/forcing data frozen at time t_data.
  FlowState steady_solve(double t_data);

  // Stationary correction solve driven by a cycle defect (packed u,v):
  //   [V (+Oseen at vbar), Bp; Bc, 0] [w, q] = [mass .* defect, 0]
  // with homogeneous boundary data. In stokes mode vbar is ignored.
  void averaging_correction(const std::vector<double>& defect,
                            const std::vector<double>& vbar,
                            std::vector<double>& w, std::vector<double>& q);

  WallField wall_shear_stress(const FlowState& s) const;

  // Relative divergence residual of the true continuity rows (the cancel-
  // free flux magnitude scales the norm).
  double divergence_residual(const FlowState& s) const;

  // Volume-weighted L2 norm of a packed velocity difference.
  double velocity_norm(const std::vector<double>& du,
                       const std::vector<double>& dv) const;
  double state_distance(const FlowState& a, const FlowState& b) const;

  // Outflow volumetric rate (contravariant flux through the right edge).
  double outflow_rate(const FlowState& s) const;

  // Wall stations of the current map (axial positions and mapped arc length,
  // values zero).
  WallField wall_template() const { return wall_template_; }

  const SolverCounters& counters() const { return counters_; }

  // Diagnostic access to the assembled operators (conservation and
  // decomposition oracles in the tests).
  std::vector<double> apply_viscous(const std::vector<double>& uv) const;
  std::vector<double> apply_pressure_gradient(const std::vector<double>& p) const;
  std::vector<double> traction_load(double p_left, double p_right) const;
  std::span<const double> mass_weights() const;
  std::span<const double> volume_weights() const;
  std::span<const char> dirichlet_mask() const;

 private:
  struct MapCache;
  struct Operators;

  void rebuild_operators();
  void assemble_step_matrix(double dt, double theta, const FlowState* lin);
  Eigen::VectorXd solve_saddle(const Eigen::SparseMatrix<double>& A,
                               const Eigen::VectorXd& rhs, const char* what);
  void build_wall_template();
  std::vector<double> convection_values(const std::vector<double>& uv) const;

  FlowProblem prob_;
  int nu_ = 0, nv_ = 0, np_ = 0;
  std::unique_ptr<MapCache> map_;
  std::unique_ptr<Operators> ops_;
  WallField wall_template_;
  SolverCounters counters_;

  // step factorization reuse (stokes mode: valid until the map changes)
  std::unique_ptr<Eigen::SparseLU<Eigen::SparseMatrix<double>>> step_lu_;
  double step_dt_ = -1.0, step_theta_ = -1.0;
  bool step_lu_valid_ = false;
  std::unique_ptr<Eigen::SparseLU<Eigen::SparseMatrix<double>>> stat_lu_;
  bool stat_lu_valid_ = false;
};

}  // namespace stenosim
