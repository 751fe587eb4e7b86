#pragma once

// lcHDW residuals and integrators.
//
// For a section phi(x) = (x, sigma^a(x), p^i_a(x)) the locally conformal
// HDW equations read
//   r1^a_i = d sigma^a / dx^i - dH/dp^i_a o phi = 0
//   r2_a   = d p^i_a / dx^i + dH/du^a o phi - theta_i p^i_a = 0.

#include <cstdint>
#include <string>
#include <vector>

#include "lcms/bundle.hpp"

namespace lcms {

struct ResidualComponent {
  std::string name;
  Expr expr;             ///< symbolic residual (zero Expr for numeric ones)
  double max_abs = 0.0;  ///< max-norm for numeric residuals
};

struct Residual {
  bool symbolic = false;
  std::vector<ResidualComponent> components;

  [[nodiscard]] double max_norm() const;
  /// Symbolic: every component canonicalizes to zero.  Numeric: max-norm <= tol.
  [[nodiscard]] bool is_zero(double tol = 0.0) const;
  [[nodiscard]] const ResidualComponent& at(const std::string& name) const;
};

/// Section of J1pi* -> M given symbolically: a SectionMap from the base chart
/// to the dual-jet chart.
SectionMap field_section(const ChartFamily& family, const std::vector<Expr>& sigma,
                         const std::vector<std::vector<Expr>>& momenta);

/// Components are named "r1[a,i]" and "r2[a]" using coordinate names.
Residual lchdw_residual(const SectionMap& phi, const HamiltonianData& h, const LeeForm& theta);
/// Residual of the multisymplectic HDW equations obtained by contracting the
/// coordinate vector fields d/du^a and d/dp^i_a into Omega_h and pulling back
/// by phi; names match lchdw_residual.
Residual hdw_residual(const SectionMap& phi, const HamiltonianData& h);

/// Section sampled on a uniform grid of the base (row-major, x^0 slowest).
struct GridSection {
  std::vector<int> nodes;        ///< per base dimension
  std::vector<double> origin;    ///< coordinate of node 0
  std::vector<double> spacing;   ///< step per dimension
  std::vector<bool> periodic;    ///< wrap-around in that dimension
  std::vector<std::vector<double>> sigma;                ///< [a][node]
  std::vector<std::vector<std::vector<double>>> momenta; ///< [i][a][node]

  [[nodiscard]] std::size_t size() const;
  [[nodiscard]] std::vector<double> coordinate(std::size_t node) const;
};

/// Samples a symbolic section on a grid.
GridSection sample_section(const SectionMap& phi, const std::vector<int>& nodes, const std::vector<double>& origin,
                           const std::vector<double>& spacing, const std::vector<bool>& periodic);

/// Numeric lcHDW residual with central differences of the given order (2 or
/// 4).  Non-periodic dimensions skip nodes whose stencil leaves the grid.
Residual lchdw_residual(const GridSection& phi, const HamiltonianData& h, const LeeForm& theta, int fd_order = 2);

struct MechTrajectory {
  std::vector<double> t;
  std::vector<std::vector<double>> sigma;  ///< [a][k]
  std::vector<std::vector<double>> p;      ///< [a][k]
};

/// RK4 on d sigma/dt = dH/dp, dp/dt = -dH/du + theta_t p (m = 1).
MechTrajectory integrate_mechanics(const HamiltonianData& h, const LeeForm& theta, const std::vector<double>& sigma0,
                                   const std::vector<double>& p0, double t0, double t1, double dt);

/// Trajectory as a GridSection over t (non-periodic) for residual checks.
GridSection as_grid_section(const MechTrajectory& traj);

/// Closed-form solution for H = p^2/2 and constant theta:
/// p = p0 e^{theta T}, sigma = sigma0 + p0 (e^{theta T} - 1)/theta.
struct MechanicsClosedForm {
  double sigma;
  double p;
};
MechanicsClosedForm mechanics_closed_form(double theta, double sigma0, double p0, double duration);

/// Periodic grid on [0,1)^n with quadrature weight (1/nodes)^n.
struct GridSpec {
  int n = 1;
  int nodes = 64;

  [[nodiscard]] std::size_t size() const;
  [[nodiscard]] double dx() const { return 1.0 / nodes; }
  [[nodiscard]] double weight() const;
  [[nodiscard]] std::vector<double> coordinate(std::size_t node) const;
  /// Linear index of the neighbour shifted by `shift` along `dim`.
  [[nodiscard]] std::size_t shifted(std::size_t node, int dim, int shift) const;
};

/// Field values on a Cauchy slice at time t.  Base coordinates are
/// (t, x^1..x^n) with x^0 = t.
struct FieldState {
  GridSpec grid;
  double t = 0.0;
  std::vector<std::vector<double>> sigma;                ///< [a][node]
  std::vector<std::vector<double>> pt;                   ///< [a][node]
  std::vector<std::vector<std::vector<double>>> px;      ///< [i][a][node], i spatial

  static FieldState zeros(const GridSpec& grid, int n_fields);
  [[nodiscard]] int n_fields() const { return static_cast<int>(sigma.size()); }
  [[nodiscard]] double max_abs() const;
};

/// Periodic second-order central difference along spatial dimension `dim`.
std::vector<double> central_difference(const GridSpec& grid, const std::vector<double>& f, int dim);

/// Solves dH/dp^i_a = D_i sigma^a for the spatial momenta, node by node
/// (Newton with the exact Hessian).  Uses state.px as initial guess.
void solve_spatial_momenta(const HamiltonianData& h, FieldState& state);

/// Method of lines: RK4 in t for (sigma, p^t) with the spatial momenta slaved
/// to the constraints.  Returns the states at t0, t0 + k*stride*dt, ..., t1.
std::vector<FieldState> integrate_cauchy(const HamiltonianData& h, const LeeForm& theta, const FieldState& init,
                                         double t1, double dt, int stride = 1);

}  // namespace lcms
