#pragma once

// Hamilton-Jacobi verification for locally conformal HDW dynamics.
//
// A candidate gamma: E -> J1pi* (p^i_a = gamma^i_a(x, u)) solves the conformal
// HJ problem when the m-form h o gamma on E is closed for d_theta.  In
// coordinates
//   d_theta(h o gamma) = -r_a du^a ^ d^m x
//                        + sum_{b<a} s^i_ab du^b ^ du^a ^ (d_i _| d^m x)
// with
//   r_a    = dH/dp^i_b(gamma) d gamma^i_b/du^a + d gamma^i_a/dx^i
//            - theta_i gamma^i_a + dH/du^a(gamma)
//   s^i_ab = d gamma^i_a/du^b - d gamma^i_b/du^a.

#include <optional>
#include <string>
#include <vector>

#include "lcms/dynamics.hpp"

namespace lcms {

class GammaSection {
 public:
  /// gamma indexed [i][a]; rho is the p-component of the lift to the
  /// multimomentum bundle, when known.  Throws ValidationError when an
  /// expression depends on a momentum coordinate.
  GammaSection(ChartFamily family, std::vector<std::vector<Expr>> gamma, std::optional<Expr> rho = std::nullopt);

  [[nodiscard]] const ChartFamily& family() const { return family_; }
  [[nodiscard]] const Expr& gamma(int i, int a) const;
  [[nodiscard]] const std::optional<Expr>& rho() const { return rho_; }

  /// gamma as a map E -> J1pi*.
  [[nodiscard]] SectionMap as_dual_jet_section() const;
  /// gamma-bar as a map E -> multimomentum bundle (requires rho).
  [[nodiscard]] SectionMap lift() const;
  /// h o gamma as a map E -> multimomentum bundle (p = -H o gamma).
  [[nodiscard]] SectionMap hamiltonian_lift(const HamiltonianData& h) const;

 private:
  ChartFamily family_;
  std::vector<std::vector<Expr>> gamma_;
  std::optional<Expr> rho_;
};

/// Components "closed[a]" = d rho/du^a - d gamma^i_a/dx^i and
/// "sym[i,a,b]" (a before b).  Throws ValidationError without rho.
Residual check_closed(const GammaSection& gbar);

/// Components "r[a]" and "sym[i,a,b]".  Cross-checked against the
/// coefficients of hj_form; throws std::logic_error if they disagree.
Residual hj_residual(const GammaSection& g, const HamiltonianData& h, const LeeForm& theta);

/// d_theta of the pullback of the Liouville form by h o gamma.
DifferentialForm hj_form(const GammaSection& g, const HamiltonianData& h, const LeeForm& theta);

/// d(gamma^* Theta_h): the multisymplectic HJ form, built from the
/// Hamiltonian Liouville form on J1pi*.
DifferentialForm multisymplectic_hj_form(const GammaSection& g, const HamiltonianData& h);

/// gamma-bar^* Omega_{2,theta} + d_theta(gamma-bar^* Theta_2); zero for every
/// gamma-bar.  Requires rho.
DifferentialForm lift_identity(const GammaSection& gbar, const LeeForm& theta);

struct ReducedHJResult {
  Residual residual;
  Expr f;
  /// f was not supplied: it is the u-independent part of the left-hand side
  /// and the residual is only meaningful modulo functions of x.
  bool f_inferred = false;
};

/// d S^i/dx^i + H(x, u, dS^i/du^a) - f for S^i on E.
ReducedHJResult reduced_hj_residual(const ChartFamily& family, const std::vector<Expr>& s, const HamiltonianData& h,
                                    std::optional<Expr> f = std::nullopt);

struct RoundtripOptions {
  /// Values of sigma at the box origin; one integral section per entry.
  std::vector<std::vector<double>> initial;
  double start = 0.0;  ///< box [start, stop]^m in base coordinates
  double stop = 1.0;
  double step = 1e-3;
  double hj_tolerance = 1e-10;
  double roundtrip_tolerance = 1e-6;
};

struct HJReport {
  std::optional<Residual> closedness;  ///< present when rho is supplied
  Residual hj;                         ///< symbolic r[a], sym[i,a,b]
  bool symbolic_hj_zero = false;
  double hj_norm = 0.0;         ///< max |hj residual| over the integral sections
  double roundtrip_norm = 0.0;  ///< max lcHDW residual of gamma o sigma
  bool closed = true;
  bool flat = true;
  bool hj_holds = false;
  bool roundtrip_holds = false;
  std::size_t samples = 0;

  /// Both sides agree and the hypotheses hold.
  [[nodiscard]] bool consistent() const { return closed && flat && hj_holds == roundtrip_holds; }
  /// key: value lines.
  [[nodiscard]] std::string to_text() const;
};

/// Integrates the integral sections of the reduced connection from each
/// initial value (RK4 along coordinate lines of the box), composes with gamma
/// and evaluates the lcHDW residual with fourth-order differences.
HJReport roundtrip_verify(const GammaSection& g, const HamiltonianData& h, const LeeForm& theta,
                          const RoundtripOptions& options);

}  // namespace lcms
