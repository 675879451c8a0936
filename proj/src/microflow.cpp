// SPDX-License-Identifier: Apache-2.0
//
// MAC discretization of the ALE-transformed flow equations.
//
// Staggered layout on the reference rectangle (nx x ny cells):
//   u(i,j)  at (x_i, y_{j+1/2}),        i in [0,nx],   j in [0,ny-1]
//   v(i,j)  at (x_{i+1/2}, y_j),        i in [0,nx-1], j in [0,ny]
//   p(i,j)  at (x_{i+1/2}, y_{j+1/2}),  i in [0,nx-1], j in [0,ny-1]
//
// With the metric G = J F^-1 F^-T, the contravariant flux matrix
// W = J F^-1 and the Piola matrix K = J F^-T (note K = W^T), the equations
// finite-volumed here read, per velocity component a:
//
//   rho J d_t v_a + rho J (F^-1 v . grad) v_a
//     - div( rho nu G grad v_a ) + div( p K_a: ) = J f_a
//   div( W v ) = 0
//
// (the pressure term uses div(p J F^-T) = J F^-T grad p, which holds by the
// Piola identity). No-slip walls enter through reflected ghost values; at
// traction edges the whole boundary stress flux is replaced by the
// prescribed mean traction -P(t) K n.

#include "stenosim/microflow.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace stenosim {

// ---------------------------------------------------------------- profiles

PressureProfile PressureProfile::default_inflow() {
  PressureProfile p;
  p.breakpoints = {{0.0, 10.0}, {0.4, 20.0}, {0.7, 0.0}, {1.0, 10.0}};
  return p;
}

PressureProfile PressureProfile::constant(double P) {
  PressureProfile p;
  p.breakpoints = {{0.0, P}, {1.0, P}};
  return p;
}

void PressureProfile::validate() const {
  if (breakpoints.size() < 2)
    throw std::invalid_argument("PressureProfile: needs >= 2 breakpoints");
  if (breakpoints.front().first != 0.0 || breakpoints.back().first != 1.0)
    throw std::invalid_argument("PressureProfile: breakpoints must span [0,1]");
  for (std::size_t i = 1; i < breakpoints.size(); ++i)
    if (!(breakpoints[i].first > breakpoints[i - 1].first))
      throw std::invalid_argument("PressureProfile: breakpoint times must increase");
  if (std::abs(breakpoints.front().second - breakpoints.back().second) > 1e-12)
    throw std::invalid_argument("PressureProfile: P(0) must equal P(1)");
}

double PressureProfile::eval(double t) const {
  double s = t - std::floor(t);
  for (std::size_t i = 1; i < breakpoints.size(); ++i) {
    if (s <= breakpoints[i].first) {
      const auto& [t0, p0] = breakpoints[i - 1];
      const auto& [t1, p1] = breakpoints[i];
      return p0 + (p1 - p0) * (s - t0) / (t1 - t0);
    }
  }
  return breakpoints.back().second;
}

double pin_eval(double t) { return PressureProfile::default_inflow().eval(t); }

void FluidParams::validate() const {
  if (!(rho_f > 0.0) || !(nu_f > 0.0))
    throw std::invalid_argument("FluidParams: rho_f, nu_f must be positive");
  if (theta >= 0.0 && !(theta >= 0.5 && theta <= 1.0))
    throw std::invalid_argument("FluidParams: theta must lie in [0.5, 1]");
  if (newton_iters < 1) throw std::invalid_argument("FluidParams: newton_iters >= 1");
}

double FluidParams::effective_theta(double dt) const {
  if (theta >= 0.0) return theta;
  return std::min(1.0, 0.5 + dt);
}

// --------------------------------------------------------------- map cache

namespace {

struct Sample {
  double J = 1.0;
  double Fi[2][2] = {{1.0, 0.0}, {0.0, 1.0}};  // inverse deformation gradient
  double G11 = 1.0, G12 = 0.0, G22 = 1.0;      // J F^-1 F^-T
  double K11 = 1.0, K12 = 0.0, K21 = 0.0, K22 = 1.0;  // J F^-T
};

Sample sample_from(const AleMap& m) {
  Sample s;
  s.J = m.J;
  const double f00 = m.F[0][0], f01 = m.F[0][1], f10 = m.F[1][0], f11 = m.F[1][1];
  const double inv = 1.0 / s.J;
  s.Fi[0][0] = f11 * inv;
  s.Fi[0][1] = -f01 * inv;
  s.Fi[1][0] = -f10 * inv;
  s.Fi[1][1] = f00 * inv;
  s.G11 = s.J * (s.Fi[0][0] * s.Fi[0][0] + s.Fi[0][1] * s.Fi[0][1]);
  s.G12 = s.J * (s.Fi[0][0] * s.Fi[1][0] + s.Fi[0][1] * s.Fi[1][1]);
  s.G22 = s.J * (s.Fi[1][0] * s.Fi[1][0] + s.Fi[1][1] * s.Fi[1][1]);
  // K = J F^-T = J Fi^T
  s.K11 = s.J * s.Fi[0][0];
  s.K12 = s.J * s.Fi[1][0];
  s.K21 = s.J * s.Fi[0][1];
  s.K22 = s.J * s.Fi[1][1];
  return s;
}

}  // namespace

struct MicroSolver::MapCache {
  std::vector<Sample> u, v, p, node;  // per-sample-family coefficients
  // wall data per station (index 0..nx), for top and bottom wall
  struct WallSide {
    std::vector<Sample> s;
    std::vector<double> nx_, ny_;   // unit physical normal
    std::vector<double> map_x, map_y;  // mapped wall points
  };
  WallSide top, bottom;
  std::vector<double> arc;  // mean arc length along the two mapped walls

  static MapCache build(const Grid& g, bool mapped, const GeometryParams& gp,
                        const GrowthProfile& c);
};

MicroSolver::MapCache MicroSolver::MapCache::build(const Grid& g, bool mapped,
                                                   const GeometryParams& gp,
                                                   const GrowthProfile& c) {
  MapCache mc;
  const int nx = g.nx, ny = g.ny;
  mc.u.resize(static_cast<std::size_t>((nx + 1) * ny));
  mc.v.resize(static_cast<std::size_t>(nx * (ny + 1)));
  mc.p.resize(static_cast<std::size_t>(nx * ny));
  mc.node.resize(static_cast<std::size_t>((nx + 1) * (ny + 1)));
  mc.top.s.resize(static_cast<std::size_t>(nx + 1));
  mc.bottom.s.resize(static_cast<std::size_t>(nx + 1));
  mc.top.nx_.assign(static_cast<std::size_t>(nx + 1), 0.0);
  mc.top.ny_.assign(static_cast<std::size_t>(nx + 1), 1.0);
  mc.bottom.nx_.assign(static_cast<std::size_t>(nx + 1), 0.0);
  mc.bottom.ny_.assign(static_cast<std::size_t>(nx + 1), -1.0);
  mc.top.map_x.resize(static_cast<std::size_t>(nx + 1));
  mc.top.map_y.resize(static_cast<std::size_t>(nx + 1));
  mc.bottom.map_x.resize(static_cast<std::size_t>(nx + 1));
  mc.bottom.map_y.resize(static_cast<std::size_t>(nx + 1));
  mc.arc.assign(static_cast<std::size_t>(nx + 1), 0.0);

  if (!mapped) {
    for (int i = 0; i <= nx; ++i) {
      mc.top.map_x[static_cast<std::size_t>(i)] = g.x(i);
      mc.top.map_y[static_cast<std::size_t>(i)] = g.y0 + g.height();
      mc.bottom.map_x[static_cast<std::size_t>(i)] = g.x(i);
      mc.bottom.map_y[static_cast<std::size_t>(i)] = g.y0;
      mc.arc[static_cast<std::size_t>(i)] = i * g.hx;
    }
    return mc;  // identity samples everywhere
  }

  auto at = [&](double x, double y) {
    return sample_from(composite_map(Vec3{x, y, 0.0}, c, gp));
  };

  parallel_for((nx + 1) * ny, [&](std::int64_t n) {
    const int i = static_cast<int>(n) % (nx + 1);
    const int j = static_cast<int>(n) / (nx + 1);
    mc.u[static_cast<std::size_t>(n)] = at(g.x(i), g.y0 + (j + 0.5) * g.hy);
  });
  parallel_for(nx * (ny + 1), [&](std::int64_t n) {
    const int i = static_cast<int>(n) % nx;
    const int j = static_cast<int>(n) / nx;
    mc.v[static_cast<std::size_t>(n)] = at(g.x0 + (i + 0.5) * g.hx, g.y(j));
  });
  parallel_for(nx * ny, [&](std::int64_t n) {
    const int i = static_cast<int>(n) % nx;
    const int j = static_cast<int>(n) / nx;
    mc.p[static_cast<std::size_t>(n)] =
        at(g.x0 + (i + 0.5) * g.hx, g.y0 + (j + 0.5) * g.hy);
  });
  parallel_for((nx + 1) * (ny + 1), [&](std::int64_t n) {
    const int i = static_cast<int>(n) % (nx + 1);
    const int j = static_cast<int>(n) / (nx + 1);
    mc.node[static_cast<std::size_t>(n)] = at(g.x(i), g.y(j));
  });

  const double ytop = g.y0 + g.height();
  for (int i = 0; i <= nx; ++i) {
    const auto k = static_cast<std::size_t>(i);
    const AleMap mt = composite_map(Vec3{g.x(i), ytop, 0.0}, c, gp);
    const AleMap mb = composite_map(Vec3{g.x(i), g.y0, 0.0}, c, gp);
    mc.top.s[k] = sample_from(mt);
    mc.bottom.s[k] = sample_from(mb);
    mc.top.map_x[k] = mt.x[0];
    mc.top.map_y[k] = mt.x[1];
    mc.bottom.map_x[k] = mb.x[0];
    mc.bottom.map_y[k] = mb.x[1];
    // physical normal direction K n_ref, normalized
    auto set_normal = [&](MapCache::WallSide& w, double refn) {
      const Sample& s = w.s[k];
      double nxv = s.K12 * refn, nyv = s.K22 * refn;
      const double len = std::hypot(nxv, nyv);
      w.nx_[k] = nxv / len;
      w.ny_[k] = nyv / len;
    };
    set_normal(mc.top, 1.0);
    set_normal(mc.bottom, -1.0);
  }
  for (int i = 1; i <= nx; ++i) {
    const auto k = static_cast<std::size_t>(i);
    const double dt_ = std::hypot(mc.top.map_x[k] - mc.top.map_x[k - 1],
                                  mc.top.map_y[k] - mc.top.map_y[k - 1]);
    const double db = std::hypot(mc.bottom.map_x[k] - mc.bottom.map_x[k - 1],
                                 mc.bottom.map_y[k] - mc.bottom.map_y[k - 1]);
    mc.arc[k] = mc.arc[k - 1] + 0.5 * (dt_ + db);
  }
  return mc;
}

// --------------------------------------------------------------- operators

struct MicroSolver::Operators {
  std::vector<Eigen::Triplet<double>> visc;   // velocity x velocity
  std::vector<Eigen::Triplet<double>> pgrad;  // velocity rows, pressure cols (local p index)
  std::vector<Eigen::Triplet<double>> cont;   // pressure rows, velocity cols
  Eigen::SparseMatrix<double> V;              // assembled viscous operator
  Eigen::SparseMatrix<double> Bc, BcAbs;      // continuity and |continuity|
  std::vector<double> volw;                   // J |CV| per velocity dof
  std::vector<double> mass;                   // rho J |CV|
  std::vector<char> dir;                      // Dirichlet flag
  std::vector<double> load_left, load_right;  // traction load per unit pressure
  std::vector<std::pair<int, double>> outflux;  // outflow rate functional
  bool pinned = false;
};

namespace {

// Index helpers shared by assembly and application code.
struct Layout {
  int nx, ny, nu, nv, np;
  bool left_wall, right_wall;

  explicit Layout(const Grid& g)
      : nx(g.nx), ny(g.ny), nu((g.nx + 1) * g.ny), nv(g.nx * (g.ny + 1)),
        np(g.nx * g.ny), left_wall(g.left == EdgeTag::wall),
        right_wall(g.right == EdgeTag::wall) {}

  int iu(int i, int j) const { return j * (nx + 1) + i; }
  int iv(int i, int j) const { return nu + j * nx + i; }
  int ip(int i, int j) const { return j * nx + i; }  // local pressure index

  bool u_dirichlet(int i) const {
    return (i == 0 && left_wall) || (i == nx && right_wall);
  }
  bool v_dirichlet(int j) const { return j == 0 || j == ny; }
};

// Accumulates stencil coefficients with ghost reflection: u reflects across
// the walls in j, v reflects across wall-type side edges in i. Reflected
// references land on the adjacent in-range dof with flipped sign (no-slip).
struct Acc {
  const Layout& L;
  std::vector<Eigen::Triplet<double>>* out;
  int row;

  void u(int i, int j, double c) {
    if (j < 0) { u(i, 0, -c); return; }
    if (j > L.ny - 1) { u(i, L.ny - 1, -c); return; }
    out->emplace_back(row, L.iu(i, j), c);
  }
  void v(int i, int j, double c) {
    if (i < 0) { v(0, j, -c); return; }
    if (i > L.nx - 1) { v(L.nx - 1, j, -c); return; }
    out->emplace_back(row, L.iv(i, j), c);
  }
};

// Reads packed velocity values with the same reflection rules.
struct Reader {
  const Layout& L;
  const std::vector<double>& uv;

  double u(int i, int j) const {
    if (j < 0) return -u(i, 0);
    if (j > L.ny - 1) return -u(i, L.ny - 1);
    return uv[static_cast<std::size_t>(L.iu(i, j))];
  }
  double v(int i, int j) const {
    if (i < 0) return -v(0, j);
    if (i > L.nx - 1) return -v(L.nx - 1, j);
    return uv[static_cast<std::size_t>(L.iv(i, j))];
  }
};

// Mean of the pressure cells around grid node (i,j), distributed as
// coefficients. Cells outside the grid are dropped (one-sided average).
template <class F>
void node_pressure_avg(const Layout& L, int i, int j, F&& emit) {
  int cells[4][2] = {{i - 1, j - 1}, {i, j - 1}, {i - 1, j}, {i, j}};
  int count = 0;
  for (auto& c : cells)
    if (c[0] >= 0 && c[0] < L.nx && c[1] >= 0 && c[1] < L.ny) ++count;
  const double w = 1.0 / count;
  for (auto& c : cells)
    if (c[0] >= 0 && c[0] < L.nx && c[1] >= 0 && c[1] < L.ny)
      emit(L.ip(c[0], c[1]), w);
}

}  // namespace

// ------------------------------------------------------------ construction

MicroSolver::MicroSolver(MicroSolver&&) noexcept = default;
MicroSolver& MicroSolver::operator=(MicroSolver&&) noexcept = default;
MicroSolver::~MicroSolver() = default;

MicroSolver::MicroSolver(FlowProblem prob) : prob_(std::move(prob)) {
  prob_.grid.validate();
  prob_.fluid.validate();
  prob_.inflow.validate();
  if (prob_.grid.bottom != EdgeTag::wall || prob_.grid.top != EdgeTag::wall)
    throw std::invalid_argument("MicroSolver: top/bottom edges must be walls");
  if (prob_.mapped) prob_.geometry.validate();
  const Grid& g = prob_.grid;
  nu_ = (g.nx + 1) * g.ny;
  nv_ = g.nx * (g.ny + 1);
  np_ = g.nx * g.ny;
  map_ = std::make_unique<MapCache>(
      MapCache::build(g, prob_.mapped, prob_.geometry, GrowthProfile::zero()));
  rebuild_operators();
}

void MicroSolver::set_growth(const GrowthProfile& c) {
  if (!prob_.mapped)
    throw std::logic_error("set_growth: problem has no geometry mapping");
  map_ = std::make_unique<MapCache>(
      MapCache::build(prob_.grid, true, prob_.geometry, c));
  rebuild_operators();
}

FlowState MicroSolver::zero_state() const {
  FlowState s;
  s.u.assign(static_cast<std::size_t>(nu_), 0.0);
  s.v.assign(static_cast<std::size_t>(nv_), 0.0);
  s.p.assign(static_cast<std::size_t>(np_), 0.0);
  return s;
}

// ----------------------------------------------------------- FV assembly

void MicroSolver::rebuild_operators() {
  const Grid& g = prob_.grid;
  const Layout L(g);
  const double hx = g.hx, hy = g.hy;
  const double rho = prob_.fluid.rho_f;
  const double mu = prob_.fluid.rho_f * prob_.fluid.nu_f;  // dynamic viscosity

  auto ops = std::make_unique<Operators>();
  ops->volw.assign(static_cast<std::size_t>(nuv()), 0.0);
  ops->mass.assign(static_cast<std::size_t>(nuv()), 0.0);
  ops->dir.assign(static_cast<std::size_t>(nuv()), 0);
  ops->load_left.assign(static_cast<std::size_t>(nuv()), 0.0);
  ops->load_right.assign(static_cast<std::size_t>(nuv()), 0.0);
  ops->pinned = L.left_wall && L.right_wall;

  const MapCache& mc = *map_;
  auto Su = [&](int i, int j) -> const Sample& {
    return mc.u[static_cast<std::size_t>(j * (L.nx + 1) + i)];
  };
  auto Sv = [&](int i, int j) -> const Sample& {
    return mc.v[static_cast<std::size_t>(j * L.nx + i)];
  };
  auto Sp = [&](int i, int j) -> const Sample& {
    return mc.p[static_cast<std::size_t>(j * L.nx + i)];
  };
  auto Sn = [&](int i, int j) -> const Sample& {
    return mc.node[static_cast<std::size_t>(j * (L.nx + 1) + i)];
  };

  // ---- u momentum rows
  for (int j = 0; j < L.ny; ++j) {
    for (int i = 0; i <= L.nx; ++i) {
      const int row = L.iu(i, j);
      const bool half_lo = (i == 0), half_hi = (i == L.nx);
      const double width = (half_lo || half_hi) ? 0.5 * hx : hx;
      const double area = width * hy;
      ops->volw[static_cast<std::size_t>(row)] = Su(i, j).J * area;
      ops->mass[static_cast<std::size_t>(row)] = rho * Su(i, j).J * area;
      if (L.u_dirichlet(i)) {
        ops->dir[static_cast<std::size_t>(row)] = 1;
        continue;
      }

      Acc a{L, &ops->visc, row};
      Acc ap{L, &ops->pgrad, row};

      // E/W viscous + pressure fluxes through faces at the p-centers.
      if (!half_hi) {  // E face at cell (i, j)
        const Sample& s = Sp(i, j);
        const double cg = mu * hy * s.G11 / hx;
        a.u(i + 1, j, -cg);
        a.u(i, j, cg);
        const double cm = mu * s.G12 / 4.0;  // hy/(4 hy) cancels
        a.u(i, j + 1, -cm);
        a.u(i + 1, j + 1, -cm);
        a.u(i, j - 1, cm);
        a.u(i + 1, j - 1, cm);
        ap.out->emplace_back(row, L.ip(i, j), s.K11 * hy);
      } else {  // boundary face, traction data
        ops->load_right[static_cast<std::size_t>(row)] -= Su(i, j).K11 * hy;
      }
      if (!half_lo) {  // W face at cell (i-1, j)
        const Sample& s = Sp(i - 1, j);
        const double cg = mu * hy * s.G11 / hx;
        a.u(i, j, cg);
        a.u(i - 1, j, -cg);
        const double cm = mu * s.G12 / 4.0;
        a.u(i - 1, j + 1, cm);
        a.u(i, j + 1, cm);
        a.u(i - 1, j - 1, -cm);
        a.u(i, j - 1, -cm);
        ap.out->emplace_back(row, L.ip(i - 1, j), -s.K11 * hy);
      } else {
        ops->load_left[static_cast<std::size_t>(row)] += Su(i, j).K11 * hy;
      }

      // N/S viscous + pressure fluxes through faces at the grid nodes.
      for (int side = 0; side < 2; ++side) {
        const int jn = (side == 0) ? j + 1 : j;  // node row of the face
        const double sgn = (side == 0) ? 1.0 : -1.0;
        const Sample& s = Sn(i, jn);
        // d/dy across the face
        const double cg = mu * width * s.G22 / hy;
        a.u(i, jn, -sgn * cg);
        a.u(i, jn - 1, sgn * cg);
        // d/dx along the face (averaged over the two adjacent u rows)
        double cmix = mu * width * s.G12;
        if (i > 0 && i < L.nx) {
          const double cm = sgn * cmix / (4.0 * hx);
          a.u(i + 1, jn, -cm);
          a.u(i + 1, jn - 1, -cm);
          a.u(i - 1, jn, cm);
          a.u(i - 1, jn - 1, cm);
        } else if (i == 0) {  // one-sided at the traction edge
          const double cm = sgn * cmix / (2.0 * hx);
          a.u(1, jn, -cm);
          a.u(1, jn - 1, -cm);
          a.u(0, jn, cm);
          a.u(0, jn - 1, cm);
        } else {
          const double cm = sgn * cmix / (2.0 * hx);
          a.u(L.nx, jn, -cm);
          a.u(L.nx, jn - 1, -cm);
          a.u(L.nx - 1, jn, cm);
          a.u(L.nx - 1, jn - 1, cm);
        }
        // pressure through the face: sgn * K12 * width * p(node)
        node_pressure_avg(L, i, jn, [&](int pcol, double w) {
          ops->pgrad.emplace_back(row, pcol, sgn * s.K12 * width * w);
        });
      }
    }
  }

  // ---- v momentum rows
  for (int j = 0; j <= L.ny; ++j) {
    for (int i = 0; i < L.nx; ++i) {
      const int row = L.iv(i, j);
      const double height = (j == 0 || j == L.ny) ? 0.5 * hy : hy;
      const double area = hx * height;
      ops->volw[static_cast<std::size_t>(row)] = Sv(i, j).J * area;
      ops->mass[static_cast<std::size_t>(row)] = rho * Sv(i, j).J * area;
      if (L.v_dirichlet(j)) {
        ops->dir[static_cast<std::size_t>(row)] = 1;
        continue;
      }

      Acc a{L, &ops->visc, row};

      // N/S viscous + pressure through faces at p-centers.
      for (int side = 0; side < 2; ++side) {
        const int jc = (side == 0) ? j : j - 1;  // cell row of the face
        const double sgn = (side == 0) ? 1.0 : -1.0;
        const Sample& s = Sp(i, jc);
        const double cg = mu * hx * s.G22 / hy;
        a.v(i, jc + 1, -sgn * cg);
        a.v(i, jc, sgn * cg);
        // d/dx across the face, averaged over v rows jc and jc+1
        const bool lo = (i == 0), hi = (i == L.nx - 1);
        const double denom = (lo && !L.left_wall) || (hi && !L.right_wall) ? 2.0 : 4.0;
        const double cm = sgn * mu * hx * s.G12 / (denom * hx);
        if ((lo && !L.left_wall)) {
          a.v(1, jc, -cm); a.v(1, jc + 1, -cm);
          a.v(0, jc, cm); a.v(0, jc + 1, cm);
        } else if (hi && !L.right_wall) {
          a.v(L.nx - 1, jc, -cm); a.v(L.nx - 1, jc + 1, -cm);
          a.v(L.nx - 2, jc, cm); a.v(L.nx - 2, jc + 1, cm);
        } else {
          a.v(i + 1, jc, -cm); a.v(i + 1, jc + 1, -cm);
          a.v(i - 1, jc, cm); a.v(i - 1, jc + 1, cm);
        }
        ops->pgrad.emplace_back(row, L.ip(i, jc), sgn * s.K22 * hx);
      }

      // E/W viscous + pressure through faces at grid nodes.
      for (int side = 0; side < 2; ++side) {
        const int in = (side == 0) ? i + 1 : i;  // node column of the face
        const double sgn = (side == 0) ? 1.0 : -1.0;
        const bool boundary_face =
            (in == 0 && !L.left_wall) || (in == L.nx && !L.right_wall);
        if (boundary_face) {
          const Sample& s = Sn(in, j);
          if (in == 0)
            ops->load_left[static_cast<std::size_t>(row)] += s.K21 * hy;
          else
            ops->load_right[static_cast<std::size_t>(row)] -= s.K21 * hy;
          continue;
        }
        const Sample& s = Sn(in, j);
        const double cg = mu * hy * s.G11 / hx;
        a.v(in, j, -sgn * cg);
        a.v(in - 1, j, sgn * cg);
        const double cm = sgn * mu * s.G12 / 4.0;  // hy/(4 hy) cancels
        a.v(in - 1, j + 1, -cm);
        a.v(in, j + 1, -cm);
        a.v(in - 1, j - 1, cm);
        a.v(in, j - 1, cm);
        node_pressure_avg(L, in, j, [&](int pcol, double w) {
          ops->pgrad.emplace_back(row, pcol, sgn * s.K21 * hy * w);
        });
      }
    }
  }

  // ---- continuity rows: div(W v) over each cell, W = J F^-1.
  for (int j = 0; j < L.ny; ++j) {
    for (int i = 0; i < L.nx; ++i) {
      const int row = L.ip(i, j);
      Acc a{L, &ops->cont, row};
      for (int side = 0; side < 2; ++side) {  // E/W faces at u-nodes
        const int iu = (side == 0) ? i + 1 : i;
        const double sgn = (side == 0) ? hy : -hy;
        const Sample& s = Su(iu, j);
        a.u(iu, j, sgn * s.J * s.Fi[0][0]);
        const double w12 = sgn * s.J * s.Fi[0][1];
        const int c0 = std::max(0, iu - 1), c1 = std::min(L.nx - 1, iu);
        const double wgt = (c0 == c1) ? 0.5 : 0.25;
        for (int c = c0; c <= c1; ++c) {
          a.v(c, j, w12 * wgt);
          a.v(c, j + 1, w12 * wgt);
        }
      }
      for (int side = 0; side < 2; ++side) {  // N/S faces at v-nodes
        const int jv = (side == 0) ? j + 1 : j;
        const double sgn = (side == 0) ? hx : -hx;
        const Sample& s = Sv(i, jv);
        a.v(i, jv, sgn * s.J * s.Fi[1][1]);
        const double w21 = sgn * s.J * s.Fi[1][0];
        const int r0 = jv - 1, r1 = jv;  // u rows around the v-node
        for (int r = r0; r <= r1; ++r) {
          a.u(i, r, w21 * 0.25);
          a.u(i + 1, r, w21 * 0.25);
        }
      }
    }
  }

  // ---- outflow functional (contravariant flux through the right edge)
  if (!L.right_wall) {
    for (int j = 0; j < L.ny; ++j) {
      const Sample& s = Su(L.nx, j);
      ops->outflux.emplace_back(L.iu(L.nx, j), hy * s.J * s.Fi[0][0]);
      const double w12 = hy * s.J * s.Fi[0][1];
      ops->outflux.emplace_back(L.iv(L.nx - 1, j), 0.5 * w12);
      ops->outflux.emplace_back(L.iv(L.nx - 1, j + 1), 0.5 * w12);
    }
  }

  ops->V.resize(nuv(), nuv());
  ops->V.setFromTriplets(ops->visc.begin(), ops->visc.end());
  ops->Bc.resize(np_, nuv());
  ops->Bc.setFromTriplets(ops->cont.begin(), ops->cont.end());
  ops->BcAbs = ops->Bc;
  for (int k = 0; k < ops->BcAbs.nonZeros(); ++k)
    ops->BcAbs.valuePtr()[k] = std::abs(ops->BcAbs.valuePtr()[k]);

  ops_ = std::move(ops);
  step_lu_valid_ = false;
  stat_lu_valid_ = false;
  build_wall_template();
}

void MicroSolver::build_wall_template() {
  const Grid& g = prob_.grid;
  wall_template_.axial.resize(static_cast<std::size_t>(g.nx + 1));
  for (int i = 0; i <= g.nx; ++i)
    wall_template_.axial[static_cast<std::size_t>(i)] = g.x(i);
  wall_template_.arc = map_->arc;
  wall_template_.values.assign(static_cast<std::size_t>(g.nx + 1), 0.0);
}

// ----------------------------------------------------------- convection

// FV-integrated advective term rho J |CV| (F^-1 v . grad)v_a per momentum
// row, evaluated at the given packed velocity. Central differences inside,
// one-sided at traction edges.
std::vector<double> MicroSolver::convection_values(
    const std::vector<double>& uv) const {
  const Grid& g = prob_.grid;
  const Layout L(g);
  const Reader r{L, uv};
  const MapCache& mc = *map_;
  const double rho = prob_.fluid.rho_f;
  std::vector<double> out(static_cast<std::size_t>(nuv()), 0.0);

  parallel_for(nu_, [&](std::int64_t n) {
    const int i = static_cast<int>(n) % (L.nx + 1);
    const int j = static_cast<int>(n) / (L.nx + 1);
    if (L.u_dirichlet(i)) return;
    const Sample& s = mc.u[static_cast<std::size_t>(n)];
    // transverse velocity at the u-node
    const int c0 = std::max(0, i - 1), c1 = std::min(L.nx - 1, i);
    double vt = 0.0;
    int cnt = 0;
    for (int c = c0; c <= c1; ++c) {
      vt += r.v(c, j) + r.v(c, j + 1);
      cnt += 2;
    }
    vt /= cnt;
    const double uval = r.u(i, j);
    const double a1 = s.Fi[0][0] * uval + s.Fi[0][1] * vt;
    const double a2 = s.Fi[1][0] * uval + s.Fi[1][1] * vt;
    double dudx;
    if (i == 0)
      dudx = (-3.0 * r.u(0, j) + 4.0 * r.u(1, j) - r.u(2, j)) / (2.0 * g.hx);
    else if (i == L.nx)
      dudx = (3.0 * r.u(L.nx, j) - 4.0 * r.u(L.nx - 1, j) + r.u(L.nx - 2, j)) /
             (2.0 * g.hx);
    else
      dudx = (r.u(i + 1, j) - r.u(i - 1, j)) / (2.0 * g.hx);
    const double dudy = (r.u(i, j + 1) - r.u(i, j - 1)) / (2.0 * g.hy);
    const double width = (i == 0 || i == L.nx) ? 0.5 * g.hx : g.hx;
    out[static_cast<std::size_t>(L.iu(i, j))] =
        rho * s.J * width * g.hy * (a1 * dudx + a2 * dudy);
  });

  parallel_for(nv_, [&](std::int64_t n) {
    const int i = static_cast<int>(n) % L.nx;
    const int j = static_cast<int>(n) / L.nx;
    if (L.v_dirichlet(j)) return;
    const Sample& s = mc.v[static_cast<std::size_t>(n)];
    const double ut =
        0.25 * (r.u(i, j - 1) + r.u(i + 1, j - 1) + r.u(i, j) + r.u(i + 1, j));
    const double vval = r.v(i, j);
    const double a1 = s.Fi[0][0] * ut + s.Fi[0][1] * vval;
    const double a2 = s.Fi[1][0] * ut + s.Fi[1][1] * vval;
    double dvdx;
    if (i == 0 && !L.left_wall)
      dvdx = (-3.0 * r.v(0, j) + 4.0 * r.v(1, j) - r.v(2, j)) / (2.0 * g.hx);
    else if (i == L.nx - 1 && !L.right_wall)
      dvdx = (3.0 * r.v(L.nx - 1, j) - 4.0 * r.v(L.nx - 2, j) +
              r.v(L.nx - 3, j)) /
             (2.0 * g.hx);
    else
      dvdx = (r.v(i + 1, j) - r.v(i - 1, j)) / (2.0 * g.hx);
    const double dvdy = (r.v(i, j + 1) - r.v(i, j - 1)) / (2.0 * g.hy);
    out[static_cast<std::size_t>(L.iv(i, j))] =
        rho * s.J * g.hx * g.hy * (a1 * dvdx + a2 * dvdy);
  });
  return out;
}

namespace {

// Newton linearization triplets of the advective term around `lin`:
// d/dv [ rho J (F^-1 v . grad) v ] = C (advection of the unknown) +
// D (unknown advecting the frozen gradient).
void convection_triplets(const Grid& g, const Layout& L, const Sample* su,
                         const Sample* sv, const std::vector<double>& lin,
                         double rho, std::vector<Eigen::Triplet<double>>* out) {
  const Reader r{L, lin};

  for (int j = 0; j < L.ny; ++j) {
    for (int i = 0; i <= L.nx; ++i) {
      if (L.u_dirichlet(i)) continue;
      const int row = L.iu(i, j);
      const Sample& s = su[j * (L.nx + 1) + i];
      const double width = (i == 0 || i == L.nx) ? 0.5 * g.hx : g.hx;
      const double w = rho * s.J * width * g.hy;
      Acc a{L, out, row};

      const int c0 = std::max(0, i - 1), c1 = std::min(L.nx - 1, i);
      double vt = 0.0;
      int cnt = 0;
      for (int c = c0; c <= c1; ++c) { vt += r.v(c, j) + r.v(c, j + 1); cnt += 2; }
      vt /= cnt;
      const double uval = r.u(i, j);
      const double a1 = s.Fi[0][0] * uval + s.Fi[0][1] * vt;
      const double a2 = s.Fi[1][0] * uval + s.Fi[1][1] * vt;

      // C: a . grad (unknown u)
      if (i == 0) {
        a.u(0, j, w * a1 * -3.0 / (2.0 * g.hx));
        a.u(1, j, w * a1 * 4.0 / (2.0 * g.hx));
        a.u(2, j, w * a1 * -1.0 / (2.0 * g.hx));
      } else if (i == L.nx) {
        a.u(L.nx, j, w * a1 * 3.0 / (2.0 * g.hx));
        a.u(L.nx - 1, j, w * a1 * -4.0 / (2.0 * g.hx));
        a.u(L.nx - 2, j, w * a1 * 1.0 / (2.0 * g.hx));
      } else {
        a.u(i + 1, j, w * a1 / (2.0 * g.hx));
        a.u(i - 1, j, -w * a1 / (2.0 * g.hx));
      }
      a.u(i, j + 1, w * a2 / (2.0 * g.hy));
      a.u(i, j - 1, -w * a2 / (2.0 * g.hy));

      // D: (F^-1 delta) . grad u_n
      double dudx;
      if (i == 0)
        dudx = (-3.0 * r.u(0, j) + 4.0 * r.u(1, j) - r.u(2, j)) / (2.0 * g.hx);
      else if (i == L.nx)
        dudx = (3.0 * r.u(L.nx, j) - 4.0 * r.u(L.nx - 1, j) + r.u(L.nx - 2, j)) /
               (2.0 * g.hx);
      else
        dudx = (r.u(i + 1, j) - r.u(i - 1, j)) / (2.0 * g.hx);
      const double dudy = (r.u(i, j + 1) - r.u(i, j - 1)) / (2.0 * g.hy);
      a.u(i, j, w * (s.Fi[0][0] * dudx + s.Fi[1][0] * dudy));
      const double cv = w * (s.Fi[0][1] * dudx + s.Fi[1][1] * dudy) / cnt;
      for (int c = c0; c <= c1; ++c) {
        a.v(c, j, cv);
        a.v(c, j + 1, cv);
      }
    }
  }

  for (int j = 0; j <= L.ny; ++j) {
    for (int i = 0; i < L.nx; ++i) {
      if (L.v_dirichlet(j)) continue;
      const int row = L.iv(i, j);
      const Sample& s = sv[j * L.nx + i];
      const double w = rho * s.J * g.hx * g.hy;
      Acc a{L, out, row};

      const double ut =
          0.25 * (r.u(i, j - 1) + r.u(i + 1, j - 1) + r.u(i, j) + r.u(i + 1, j));
      const double vval = r.v(i, j);
      const double a1 = s.Fi[0][0] * ut + s.Fi[0][1] * vval;
      const double a2 = s.Fi[1][0] * ut + s.Fi[1][1] * vval;

      if (i == 0 && !L.left_wall) {
        a.v(0, j, w * a1 * -3.0 / (2.0 * g.hx));
        a.v(1, j, w * a1 * 4.0 / (2.0 * g.hx));
        a.v(2, j, w * a1 * -1.0 / (2.0 * g.hx));
      } else if (i == L.nx - 1 && !L.right_wall) {
        a.v(L.nx - 1, j, w * a1 * 3.0 / (2.0 * g.hx));
        a.v(L.nx - 2, j, w * a1 * -4.0 / (2.0 * g.hx));
        a.v(L.nx - 3, j, w * a1 * 1.0 / (2.0 * g.hx));
      } else {
        a.v(i + 1, j, w * a1 / (2.0 * g.hx));
        a.v(i - 1, j, -w * a1 / (2.0 * g.hx));
      }
      a.v(i, j + 1, w * a2 / (2.0 * g.hy));
      a.v(i, j - 1, -w * a2 / (2.0 * g.hy));

      double dvdx;
      if (i == 0 && !L.left_wall)
        dvdx = (-3.0 * r.v(0, j) + 4.0 * r.v(1, j) - r.v(2, j)) / (2.0 * g.hx);
      else if (i == L.nx - 1 && !L.right_wall)
        dvdx = (3.0 * r.v(L.nx - 1, j) - 4.0 * r.v(L.nx - 2, j) +
                r.v(L.nx - 3, j)) /
               (2.0 * g.hx);
      else
        dvdx = (r.v(i + 1, j) - r.v(i - 1, j)) / (2.0 * g.hx);
      const double dvdy = (r.v(i, j + 1) - r.v(i, j - 1)) / (2.0 * g.hy);
      a.v(i, j, w * (s.Fi[0][1] * dvdx + s.Fi[1][1] * dvdy));
      const double cu = w * (s.Fi[0][0] * dvdx + s.Fi[1][0] * dvdy) * 0.25;
      a.u(i, j - 1, cu);
      a.u(i + 1, j - 1, cu);
      a.u(i, j, cu);
      a.u(i + 1, j, cu);
    }
  }
}

}  // namespace

// ------------------------------------------------------------- solves

namespace {

std::vector<double> pack_velocity(const FlowState& s) {
  std::vector<double> uv;
  uv.reserve(s.u.size() + s.v.size());
  uv.insert(uv.end(), s.u.begin(), s.u.end());
  uv.insert(uv.end(), s.v.begin(), s.v.end());
  return uv;
}

}  // namespace

Eigen::VectorXd MicroSolver::solve_saddle(const Eigen::SparseMatrix<double>& A,
                                          const Eigen::VectorXd& rhs,
                                          const char* what) {
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(A);
  ++counters_.factorizations;
  if (lu.info() != Eigen::Success)
    throw std::runtime_error(std::string(what) + ": factorization failed");
  Eigen::VectorXd x = lu.solve(rhs);
  if (lu.info() != Eigen::Success)
    throw std::runtime_error(std::string(what) + ": solve failed");
  return x;
}

// Builds the implicit step matrix [M/dt + theta (V + conv), Bp; Bc, 0] and
// factorizes it into step_lu_.
void MicroSolver::assemble_step_matrix(double dt, double theta,
                                       const FlowState* lin) {
  const int n = nuv() + np_;
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(ops_->visc.size() + ops_->pgrad.size() + ops_->cont.size() +
                static_cast<std::size_t>(nuv()) + 4096);

  for (int k = 0; k < nuv(); ++k) {
    if (ops_->dir[static_cast<std::size_t>(k)])
      trips.emplace_back(k, k, 1.0);
    else
      trips.emplace_back(k, k, ops_->mass[static_cast<std::size_t>(k)] / dt);
  }
  for (const auto& t : ops_->visc)
    trips.emplace_back(t.row(), t.col(), theta * t.value());
  for (const auto& t : ops_->pgrad)
    trips.emplace_back(t.row(), nuv() + t.col(), t.value());

  if (lin != nullptr) {
    std::vector<Eigen::Triplet<double>> conv;
    const Layout L(prob_.grid);
    const std::vector<double> uv = pack_velocity(*lin);
    convection_triplets(prob_.grid, L, map_->u.data(), map_->v.data(), uv,
                        prob_.fluid.rho_f, &conv);
    for (const auto& t : conv)
      trips.emplace_back(t.row(), t.col(), theta * t.value());
  }

  for (const auto& t : ops_->cont) {
    if (ops_->pinned && t.row() == 0) continue;  // pinned cell (0,0)
    trips.emplace_back(nuv() + t.row(), t.col(), t.value());
  }
  if (ops_->pinned) trips.emplace_back(nuv(), nuv(), 1.0);

  Eigen::SparseMatrix<double> A(n, n);
  A.setFromTriplets(trips.begin(), trips.end());
  step_lu_ = std::make_unique<Eigen::SparseLU<Eigen::SparseMatrix<double>>>();
  step_lu_->compute(A);
  ++counters_.factorizations;
  if (step_lu_->info() != Eigen::Success)
    throw std::runtime_error("theta_step: factorization failed");
  step_dt_ = dt;
  step_theta_ = theta;
  step_lu_valid_ = true;
}

void MicroSolver::theta_step(FlowState& s, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("theta_step: dt > 0");
  const double theta = prob_.fluid.effective_theta(dt);
  const Grid& g = prob_.grid;
  const Layout L(g);
  const int n = nuv() + np_;

  std::vector<double> uvn = pack_velocity(s);
  const bool nonzero = kernels::max_abs(uvn) > 0.0;
  const bool with_conv = prob_.fluid.mode == FlowMode::navier_stokes && nonzero;

  // Explicit side, fixed over Newton iterations.
  Eigen::Map<const Eigen::VectorXd> uvn_e(uvn.data(), nuv());
  Eigen::VectorXd expl = -(1.0 - theta) * (ops_->V * uvn_e);
  std::vector<double> conv_n;
  if (with_conv) {
    conv_n = convection_values(uvn);
    for (int k = 0; k < nuv(); ++k)
      expl[k] -= (1.0 - theta) * conv_n[static_cast<std::size_t>(k)];
  }

  const double t0 = s.t, t1 = s.t + dt;
  const double pl = theta * prob_.inflow.eval(t1) + (1.0 - theta) * prob_.inflow.eval(t0);
  const double pr = prob_.p_out;  // constant outflow level

  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  for (int k = 0; k < nuv(); ++k) {
    if (ops_->dir[static_cast<std::size_t>(k)]) continue;
    rhs[k] = ops_->mass[static_cast<std::size_t>(k)] / dt *
                 uvn[static_cast<std::size_t>(k)] +
             expl[k] + pl * ops_->load_left[static_cast<std::size_t>(k)] +
             pr * ops_->load_right[static_cast<std::size_t>(k)];
  }
  if (prob_.forcing) {
    auto add_forcing = [&](int dof, double x, double y, int comp) {
      double fx0, fy0, fx1, fy1;
      prob_.forcing(x, y, t0, fx0, fy0);
      prob_.forcing(x, y, t1, fx1, fy1);
      const double f0 = comp == 0 ? fx0 : fy0;
      const double f1 = comp == 0 ? fx1 : fy1;
      rhs[dof] += ops_->volw[static_cast<std::size_t>(dof)] *
                  (theta * f1 + (1.0 - theta) * f0);
    };
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i <= g.nx; ++i)
        if (!L.u_dirichlet(i))
          add_forcing(L.iu(i, j), g.x(i), g.y0 + (j + 0.5) * g.hy, 0);
    for (int j = 1; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i)
        add_forcing(L.iv(i, j), g.x0 + (i + 0.5) * g.hx, g.y(j), 1);
  }

  // Newton loop (a single pass unless newton_iters > 1).
  std::vector<double> lin = uvn;
  Eigen::VectorXd x;
  const int iters = with_conv ? prob_.fluid.newton_iters : 1;
  for (int it = 0; it < iters; ++it) {
    const bool lin_nonzero = with_conv && kernels::max_abs(lin) > 0.0;
    if (!step_lu_valid_ || step_dt_ != dt || step_theta_ != theta || lin_nonzero) {
      FlowState ls;
      if (lin_nonzero) {
        ls.u.assign(lin.begin(), lin.begin() + nu_);
        ls.v.assign(lin.begin() + nu_, lin.end());
      }
      assemble_step_matrix(dt, theta, lin_nonzero ? &ls : nullptr);
      if (lin_nonzero) step_lu_valid_ = false;  // next step relinearizes
    }
    Eigen::VectorXd b = rhs;
    if (lin_nonzero) {
      const std::vector<double> nlin = convection_values(lin);
      for (int k = 0; k < nuv(); ++k)
        b[k] += theta * nlin[static_cast<std::size_t>(k)];
    }
    x = step_lu_->solve(b);
    if (step_lu_->info() != Eigen::Success)
      throw std::runtime_error("theta_step: solve failed");
    if (iters > 1) {
      double delta = 0.0;
      for (int k = 0; k < nuv(); ++k)
        delta = std::max(delta, std::abs(x[k] - lin[static_cast<std::size_t>(k)]));
      std::copy(x.data(), x.data() + nuv(), lin.begin());
      if (delta < prob_.fluid.newton_tol) break;
    }
  }

  std::copy(x.data(), x.data() + nu_, s.u.begin());
  std::copy(x.data() + nu_, x.data() + nuv(), s.v.begin());
  std::copy(x.data() + nuv(), x.data() + n, s.p.begin());
  s.t = t1;
  ++counters_.theta_steps;

  const double res = divergence_residual(s);
  if (res > prob_.fluid.div_tol) {
    std::ostringstream os;
    os << "theta_step: divergence residual " << res << " exceeds tolerance "
       << prob_.fluid.div_tol;
    throw std::runtime_error(os.str());
  }
}

FlowState MicroSolver::steady_solve(double t_data) {
  const Grid& g = prob_.grid;
  const Layout L(g);
  const int n = nuv() + np_;

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(ops_->visc.size() + ops_->pgrad.size() + ops_->cont.size() + 64);
  for (int k = 0; k < nuv(); ++k)
    if (ops_->dir[static_cast<std::size_t>(k)]) trips.emplace_back(k, k, 1.0);
  for (const auto& t : ops_->visc) trips.emplace_back(t.row(), t.col(), t.value());
  for (const auto& t : ops_->pgrad)
    trips.emplace_back(t.row(), nuv() + t.col(), t.value());
  for (const auto& t : ops_->cont) {
    if (ops_->pinned && t.row() == 0) continue;
    trips.emplace_back(nuv() + t.row(), t.col(), t.value());
  }
  if (ops_->pinned) trips.emplace_back(nuv(), nuv(), 1.0);
  Eigen::SparseMatrix<double> A(n, n);
  A.setFromTriplets(trips.begin(), trips.end());

  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  const double pl = prob_.inflow.eval(t_data);
  for (int k = 0; k < nuv(); ++k) {
    if (ops_->dir[static_cast<std::size_t>(k)]) continue;
    rhs[k] = pl * ops_->load_left[static_cast<std::size_t>(k)] +
             prob_.p_out * ops_->load_right[static_cast<std::size_t>(k)];
  }
  if (prob_.forcing) {
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i <= g.nx; ++i)
        if (!L.u_dirichlet(i)) {
          double fx, fy;
          prob_.forcing(g.x(i), g.y0 + (j + 0.5) * g.hy, t_data, fx, fy);
          rhs[L.iu(i, j)] += ops_->volw[static_cast<std::size_t>(L.iu(i, j))] * fx;
        }
    for (int j = 1; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) {
        double fx, fy;
        prob_.forcing(g.x0 + (i + 0.5) * g.hx, g.y(j), t_data, fx, fy);
        rhs[L.iv(i, j)] += ops_->volw[static_cast<std::size_t>(L.iv(i, j))] * fy;
      }
  }

  Eigen::VectorXd x = solve_saddle(A, rhs, "steady_solve");
  ++counters_.stationary_solves;
  FlowState out = zero_state();
  std::copy(x.data(), x.data() + nu_, out.u.begin());
  std::copy(x.data() + nu_, x.data() + nuv(), out.v.begin());
  std::copy(x.data() + nuv(), x.data() + n, out.p.begin());
  out.t = t_data;
  return out;
}

void MicroSolver::averaging_correction(const std::vector<double>& defect,
                                       const std::vector<double>& vbar,
                                       std::vector<double>& w,
                                       std::vector<double>& q) {
  if (static_cast<int>(defect.size()) != nuv())
    throw std::invalid_argument("averaging_correction: defect size mismatch");
  const int n = nuv() + np_;
  const bool oseen = prob_.fluid.mode == FlowMode::navier_stokes;

  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  for (int k = 0; k < nuv(); ++k)
    if (!ops_->dir[static_cast<std::size_t>(k)])
      rhs[k] = ops_->mass[static_cast<std::size_t>(k)] *
               defect[static_cast<std::size_t>(k)];

  Eigen::VectorXd x;
  if (!oseen && stat_lu_valid_) {
    x = stat_lu_->solve(rhs);
    if (stat_lu_->info() != Eigen::Success)
      throw std::runtime_error("averaging_correction: solve failed");
  } else {
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(ops_->visc.size() + ops_->pgrad.size() + ops_->cont.size() + 64);
    for (int k = 0; k < nuv(); ++k)
      if (ops_->dir[static_cast<std::size_t>(k)]) trips.emplace_back(k, k, 1.0);
    for (const auto& t : ops_->visc) trips.emplace_back(t.row(), t.col(), t.value());
    if (oseen) {
      std::vector<Eigen::Triplet<double>> conv;
      const Layout L(prob_.grid);
      convection_triplets(prob_.grid, L, map_->u.data(), map_->v.data(), vbar,
                          prob_.fluid.rho_f, &conv);
      for (const auto& t : conv) trips.emplace_back(t.row(), t.col(), t.value());
    }
    for (const auto& t : ops_->pgrad)
      trips.emplace_back(t.row(), nuv() + t.col(), t.value());
    for (const auto& t : ops_->cont) {
      if (ops_->pinned && t.row() == 0) continue;
      trips.emplace_back(nuv() + t.row(), t.col(), t.value());
    }
    if (ops_->pinned) trips.emplace_back(nuv(), nuv(), 1.0);
    Eigen::SparseMatrix<double> A(n, n);
    A.setFromTriplets(trips.begin(), trips.end());
    if (!oseen) {
      stat_lu_ = std::make_unique<Eigen::SparseLU<Eigen::SparseMatrix<double>>>();
      stat_lu_->compute(A);
      ++counters_.factorizations;
      if (stat_lu_->info() != Eigen::Success)
        throw std::runtime_error("averaging_correction: factorization failed");
      stat_lu_valid_ = true;
      x = stat_lu_->solve(rhs);
      if (stat_lu_->info() != Eigen::Success)
        throw std::runtime_error("averaging_correction: solve failed");
    } else {
      x = solve_saddle(A, rhs, "averaging_correction");
    }
  }
  ++counters_.stationary_solves;

  w.assign(x.data(), x.data() + nuv());
  q.assign(x.data() + nuv(), x.data() + n);
}

// ------------------------------------------------------------ diagnostics

std::vector<double> MicroSolver::apply_viscous(const std::vector<double>& uv) const {
  Eigen::Map<const Eigen::VectorXd> x(uv.data(), nuv());
  Eigen::VectorXd y = ops_->V * x;
  return {y.data(), y.data() + nuv()};
}

std::vector<double> MicroSolver::apply_pressure_gradient(
    const std::vector<double>& p) const {
  std::vector<double> out(static_cast<std::size_t>(nuv()), 0.0);
  for (const auto& t : ops_->pgrad)
    out[static_cast<std::size_t>(t.row())] +=
        t.value() * p[static_cast<std::size_t>(t.col())];
  return out;
}

std::vector<double> MicroSolver::traction_load(double p_left,
                                               double p_right) const {
  std::vector<double> out(static_cast<std::size_t>(nuv()), 0.0);
  for (int k = 0; k < nuv(); ++k)
    out[static_cast<std::size_t>(k)] =
        p_left * ops_->load_left[static_cast<std::size_t>(k)] +
        p_right * ops_->load_right[static_cast<std::size_t>(k)];
  return out;
}

std::span<const double> MicroSolver::mass_weights() const { return ops_->mass; }
std::span<const double> MicroSolver::volume_weights() const { return ops_->volw; }
std::span<const char> MicroSolver::dirichlet_mask() const { return ops_->dir; }

double MicroSolver::divergence_residual(const FlowState& s) const {
  std::vector<double> uv = pack_velocity(s);
  Eigen::Map<const Eigen::VectorXd> x(uv.data(), nuv());
  Eigen::VectorXd r = ops_->Bc * x;
  Eigen::VectorXd scale = ops_->BcAbs * x.cwiseAbs();
  const double num = r.norm();
  const double den = scale.norm();
  if (den < 1e-300) return 0.0;
  return num / den;
}

double MicroSolver::velocity_norm(const std::vector<double>& du,
                                  const std::vector<double>& dv) const {
  double s = 0.0;
  for (int k = 0; k < nu_; ++k)
    s += ops_->volw[static_cast<std::size_t>(k)] * du[static_cast<std::size_t>(k)] *
         du[static_cast<std::size_t>(k)];
  for (int k = 0; k < nv_; ++k)
    s += ops_->volw[static_cast<std::size_t>(nu_ + k)] *
         dv[static_cast<std::size_t>(k)] * dv[static_cast<std::size_t>(k)];
  return std::sqrt(s);
}

double MicroSolver::state_distance(const FlowState& a, const FlowState& b) const {
  std::vector<double> du(a.u.size()), dv(a.v.size());
  for (std::size_t k = 0; k < du.size(); ++k) du[k] = a.u[k] - b.u[k];
  for (std::size_t k = 0; k < dv.size(); ++k) dv[k] = a.v[k] - b.v[k];
  return velocity_norm(du, dv);
}

double MicroSolver::outflow_rate(const FlowState& s) const {
  std::vector<double> uv = pack_velocity(s);
  double q = 0.0;
  for (const auto& [dof, coef] : ops_->outflux)
    q += coef * uv[static_cast<std::size_t>(dof)];
  return q;
}

WallField MicroSolver::wall_shear_stress(const FlowState& s) const {
  const Grid& g = prob_.grid;
  const Layout L(g);
  const double mu = prob_.fluid.rho_f * prob_.fluid.nu_f;
  WallField out = wall_template_;
  const double s0 = prob_.geometry.domain.s0;
  const double s1 = prob_.geometry.domain.s1;

  auto column_p = [&](int i, int jc) {
    // pressure averaged onto station x_i at cell row jc
    const int c0 = std::max(0, i - 1), c1 = std::min(L.nx - 1, i);
    double acc = 0.0;
    int cnt = 0;
    for (int c = c0; c <= c1; ++c) {
      acc += s.p[static_cast<std::size_t>(L.ip(c, jc))];
      ++cnt;
    }
    return acc / cnt;
  };
  auto column_v = [&](int i, int jv) {
    const int c0 = std::max(0, i - 1), c1 = std::min(L.nx - 1, i);
    double acc = 0.0;
    int cnt = 0;
    for (int c = c0; c <= c1; ++c) {
      acc += s.v[static_cast<std::size_t>(L.iv(c, jv) - nu_)];
      ++cnt;
    }
    return acc / cnt;
  };

  parallel_for(g.nx + 1, [&](std::int64_t n) {
    const int i = static_cast<int>(n);
    const auto k = static_cast<std::size_t>(i);
    double acc = 0.0;
    for (int side = 0; side < 2; ++side) {
      const bool top = (side == 0);
      const auto& ws = top ? map_->top : map_->bottom;
      // one-sided second-order normal derivatives at the wall
      double dudy, dvdy;
      if (top) {
        const double ua = s.u[static_cast<std::size_t>(L.iu(i, g.ny - 1))];
        const double ub = s.u[static_cast<std::size_t>(L.iu(i, g.ny - 2))];
        dudy = -(9.0 * ua - ub) / (3.0 * g.hy);
        const double va = column_v(i, g.ny - 1);
        const double vb = column_v(i, g.ny - 2);
        dvdy = (vb - 4.0 * va) / (2.0 * g.hy);  // v(wall)=0, right-end stencil
      } else {
        const double ua = s.u[static_cast<std::size_t>(L.iu(i, 0))];
        const double ub = s.u[static_cast<std::size_t>(L.iu(i, 1))];
        dudy = (9.0 * ua - ub) / (3.0 * g.hy);
        const double va = column_v(i, 1);
        const double vb = column_v(i, 2);
        dvdy = (4.0 * va - vb) / (2.0 * g.hy);  // v(wall)=0, left-end stencil
      }
      // pressure extrapolated to the wall
      double pw;
      if (top)
        pw = 1.5 * column_p(i, g.ny - 1) - 0.5 * column_p(i, g.ny - 2);
      else
        pw = 1.5 * column_p(i, 0) - 0.5 * column_p(i, 1);

      // grad v in physical coordinates: (grad_ref v) F^-1; tangential
      // derivatives vanish along the no-slip wall.
      const Sample& sm = ws.s[k];
      const double g00 = dudy * sm.Fi[1][0];
      const double g01 = dudy * sm.Fi[1][1];
      const double g10 = dvdy * sm.Fi[1][0];
      const double g11 = dvdy * sm.Fi[1][1];
      const double nx_ = ws.nx_[k], ny_ = ws.ny_[k];
      const double ndn = nx_ * (g00 * nx_ + 0.5 * (g01 + g10) * ny_) +
                         ny_ * (0.5 * (g01 + g10) * nx_ + g11 * ny_);
      const double snn = 2.0 * mu * ndn - pw;

      double win;
      if (prob_.wss_literal_transverse_window)
        win = window(s0, g.x(i)) + window(s1, ws.map_y[k]);
      else
        win = window(s0, g.x(i)) + window(s1, g.x(i));
      acc += std::abs(snn) * win;
    }
    out.values[k] = 0.5 * acc;
  });
  return out;
}

// ------------------------------------------------------------- cycles

CycleResult MicroSolver::cycle_integrate(const FlowState& start, double dt,
                                         bool record_traces) {
  const int M = static_cast<int>(std::lround(1.0 / dt));
  if (M < 1 || std::abs(M * dt - 1.0) > 1e-9)
    throw std::invalid_argument("cycle_integrate: dt must divide 1 s evenly");

  CycleResult res;
  res.vbar.assign(static_cast<std::size_t>(nuv()), 0.0);
  res.outflow_steps.reserve(static_cast<std::size_t>(M) + 1);
  if (record_traces) res.wss.reserve(static_cast<std::size_t>(M) + 1);

  FlowState s = start;
  auto accumulate = [&](const FlowState& st, double w) {
    for (int k = 0; k < nu_; ++k)
      res.vbar[static_cast<std::size_t>(k)] += w * st.u[static_cast<std::size_t>(k)];
    for (int k = 0; k < nv_; ++k)
      res.vbar[static_cast<std::size_t>(nu_ + k)] +=
          w * st.v[static_cast<std::size_t>(k)];
  };

  accumulate(s, 0.5 * dt);
  res.outflow_steps.push_back(outflow_rate(s));
  if (record_traces) res.wss.push_back(wall_shear_stress(s));

  for (int m = 1; m <= M; ++m) {
    theta_step(s, dt);
    const double w = (m == M) ? 0.5 * dt : dt;
    accumulate(s, w);
    res.outflow_steps.push_back(outflow_rate(s));
    if (record_traces) res.wss.push_back(wall_shear_stress(s));
    res.max_div_residual = std::max(res.max_div_residual, divergence_residual(s));
  }

  double q = 0.0;
  for (int m = 0; m <= M; ++m) {
    const double w = (m == 0 || m == M) ? 0.5 * dt : dt;
    q += w * res.outflow_steps[static_cast<std::size_t>(m)];
  }
  res.outflow_avg = q;
  res.end = std::move(s);
  return res;
}

}  // namespace stenosim
