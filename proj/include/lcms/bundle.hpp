#pragma once

// Geometric objects of the theory on a concrete chart family: canonical
// forms, conformal deformations, Hamiltonian sections and connections.

#include <vector>

#include "lcms/chart.hpp"
#include "lcms/forms.hpp"
#include "lcms/symexpr.hpp"

namespace lcms {

/// Closed one-form theta = theta_i dx^i on M, pulled back verbatim to E,
/// J1pi* and the multimomentum bundle.
class LeeForm {
 public:
  /// Components may depend on base coordinates and free parameters only.
  LeeForm(const ChartFamily& family, std::vector<Expr> components);
  static LeeForm zero(const ChartFamily& family);

  [[nodiscard]] const std::vector<Expr>& components() const { return components_; }
  [[nodiscard]] const Expr& component(int i) const { return components_.at(static_cast<std::size_t>(i)); }
  [[nodiscard]] const ChartPtr& base() const { return base_; }
  [[nodiscard]] bool is_zero() const;
  [[nodiscard]] bool is_closed() const;
  /// Throws ValidationError unless closed.
  void require_closed() const;
  /// theta as a one-form on any chart of the family.
  [[nodiscard]] DifferentialForm on(const ChartPtr& chart) const;
  /// theta_i p^i_a on J1pi* (or the multimomentum bundle).
  [[nodiscard]] Expr contract_momenta(const ChartPtr& chart, int a) const;

 private:
  ChartPtr base_;
  std::vector<Expr> components_;
};

/// Hamiltonian function H(x, u, p^i_a).  The density is p + H.
class HamiltonianData {
 public:
  HamiltonianData(ChartFamily family, Expr h);

  [[nodiscard]] const ChartFamily& family() const { return family_; }
  [[nodiscard]] const Expr& expr() const { return h_; }
  [[nodiscard]] int m() const { return family_.m(); }
  [[nodiscard]] int n_fields() const { return family_.n_fields(); }
  [[nodiscard]] Expr du(int a) const;
  [[nodiscard]] Expr dp(int i, int a) const;
  /// p + H on the multimomentum chart.
  [[nodiscard]] Expr density() const;

 private:
  ChartFamily family_;
  Expr h_;
};

/// H = 1/2 g_ij p^i_a p^j_a / sqrt|det g| for N free scalar fields.
HamiltonianData scalar_field_hamiltonian(const ChartFamily& family);

/// exp(-sigma) trivializes theta on a chart: d sigma = theta.
struct ConformalFactor {
  Expr sigma;
};

struct CanonicalForms {
  DifferentialForm theta2;
  DifferentialForm omega2;
};

/// Theta_2 = p d_m x + p^i_a du^a ^ (d_i -| d_m x), Omega_2 = -d Theta_2.
CanonicalForms canonical_forms(const ChartPtr& multimomentum);
/// Tautological k-form sum_I k_I dy^I on a forms-bundle chart.
DifferentialForm tautological_form(const ChartPtr& forms_bundle);
/// -d of the tautological form.
DifferentialForm canonical_omega(const ChartPtr& forms_bundle);
/// A section of the forms bundle read as a k-form on its base.
DifferentialForm section_as_form(const SectionMap& kappa);

/// Omega_{2,theta} = -d_theta Theta_2 = Omega_2 + theta ^ Theta_2.
DifferentialForm lcms_form(const ChartPtr& multimomentum, const LeeForm& theta);

/// (x, u, p^i_a) -> (x, u, p = -H, p^i_a).
SectionMap hamiltonian_section(const HamiltonianData& h);
/// Theta_h = h* Theta_2 on J1pi*.
DifferentialForm theta_h(const HamiltonianData& h);
/// (Omega_theta)_h = h* Omega_{2,theta} on J1pi*.
DifferentialForm omega_h(const HamiltonianData& h, const LeeForm& theta);
/// dH ^ d_m x - dp^i_a ^ du^a ^ (d_i -| d_m x), assembled term by term
/// without pullbacks (multisymplectic reference).
DifferentialForm multisymplectic_omega_h(const HamiltonianData& h);

/// G^a_i = dH/dp^i_a, G^i_{aj} = delta^i_j (-dH/du^a + theta_k p^k_a) / m.
Connection connection_from_hamiltonian(const HamiltonianData& h, const LeeForm& theta);
/// i_h (Omega_theta)_h - (m-1)(Omega_theta)_h.
DifferentialForm check_connection_condition(const Connection& c, const HamiltonianData& h, const LeeForm& theta);

/// Connection on E -> M induced by a section gamma : E -> J1pi*.
struct ReducedConnection {
  ChartPtr chart;  ///< total-space chart
  /// fiber_part[a][j] = G^a_j o gamma
  std::vector<std::vector<Expr>> fiber_part;

  [[nodiscard]] VectorField lift(int j) const;
  /// R^a_ij for i < j, flattened as [a][pair].
  [[nodiscard]] std::vector<Expr> curvature() const;
  [[nodiscard]] bool is_flat() const;
};

ReducedConnection reduce_connection(const Connection& c, const SectionMap& gamma);
/// T nu (h (Y o gamma)) for a vector field Y on J1pi*; depends on Y only
/// through its projection to E.
VectorField reduced_lift(const Connection& c, const SectionMap& gamma, const VectorField& y);

/// d(exp(-sigma) Omega); throws ValidationError unless d sigma = theta.
DifferentialForm local_rescaling_check(const DifferentialForm& omega_theta, const ConformalFactor& sigma,
                                       const LeeForm& theta);
/// d(exp(-sigma) Omega) without validating sigma.
DifferentialForm rescaled_differential(const DifferentialForm& omega_theta, const ConformalFactor& sigma);

/// gamma_bar : E -> multimomentum bundle; true iff d_theta(gamma_bar) = 0.
bool lagrangian_check(const SectionMap& gamma_bar, const LeeForm& theta);

/// True iff i_V Omega = 0 forces V = 0 at `at` (numeric rank test).
bool is_one_nondegenerate(const DifferentialForm& omega, const Point& at);

}  // namespace lcms
