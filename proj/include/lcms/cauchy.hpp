#pragma once

// Space of Cauchy data.  A FieldState at time t is read as an embedding
// phi_Sigma(t): Sigma -> J1pi*, y -> (t, y, sigma(y), p^t(y), p^i(y)) of the
// periodic unit cube.  A (k + n)-form alpha on J1pi* integrates to a k-form on
// the space of embeddings,
//   alpha~(X_1..X_k) = int_Sigma alpha(X_1..X_k, d_1 phi, .., d_n phi) d^n y,
// evaluated with the grid quadrature and central differences for d_j phi.

#include <cstdint>
#include <vector>

#include "lcms/dynamics.hpp"
#include "lcms/hj.hpp"

namespace lcms {

struct EmbeddingState {
  ChartFamily family;
  FieldState field;

  /// Throws ValidationError unless the grid and field count match the family.
  EmbeddingState(ChartFamily family, FieldState field);

  /// Dual-jet coordinates of the image of grid node k.
  [[nodiscard]] std::vector<double> point(std::size_t node) const;
  [[nodiscard]] std::size_t size() const { return field.grid.size(); }
};

/// Per-node vectors into T J1pi*: components[coordinate index][node].
struct TangentField {
  std::vector<std::vector<double>> components;

  static TangentField zero(const EmbeddingState& state);
  TangentField& operator+=(const TangentField& other);
  friend TangentField operator+(TangentField a, const TangentField& b) { return a += b; }
  friend TangentField operator*(double s, TangentField a);
};

/// d phi / dy^j for spatial dimension j (0-based over Sigma).
TangentField spatial_tangent(const EmbeddingState& state, int dim);

/// Throws ValidationError unless deg(alpha) = tangents.size() + n.
double integrate_form(const DifferentialForm& alpha, const EmbeddingState& state,
                      const std::vector<TangentField>& tangents);

/// d/dt + G^a_0 d/du^a + G^t_{a0} d/dp^t_a at every node, where
/// G^a_0 = dH/dp^t_a and G^t_{a0} = -dH/du^a + theta_k p^k_a - D_i p^i_a
/// (spatial momenta along the lift are left unchanged).
TangentField horizontal_lift_tangent(const HamiltonianData& h, const LeeForm& theta, const EmbeddingState& state);

enum class ProbeKind {
  Vertical,  ///< u and p directions (tau-vertical)
  Momentum,  ///< p directions only (nu-vertical)
  Field,     ///< u directions only
};

/// Reproducible periodic Gaussian bumps in one random vertical coordinate each.
std::vector<TangentField> make_probes(const EmbeddingState& state, ProbeKind kind, int count, std::uint64_t seed);

/// Components "probe[k]" = |(Omega_theta)_h~(X^h, Z_k)| and
/// "eta" = |eta~(X^h) - 1|.
Residual check_precosymplectic(const HamiltonianData& h, const LeeForm& theta, const EmbeddingState& state,
                               const std::vector<TangentField>& probes);

/// Time derivative of a trajectory of states by central differences
/// (one-sided second order at the ends), with unit d/dt component.
std::vector<TangentField> trajectory_velocity(const std::vector<EmbeddingState>& traj);

/// Components "t[k]" = max over probes of |(Omega_theta)_h~(phi-dot, Z)| at
/// sample k.  Needs at least three equally spaced samples.
Residual infinite_hdw_residual(const std::vector<EmbeddingState>& traj, const HamiltonianData& h,
                               const LeeForm& theta, const std::vector<TangentField>& probes);

/// The state with momenta replaced by gamma(x, sigma).
EmbeddingState compose_gamma(const GammaSection& g, const EmbeddingState& state);

struct HJInfiniteResult {
  /// max over states and probe pairs of |(Omega_theta)_h~(T gamma V, T gamma W)|
  /// with V, W from {d/dt} and the u-parts of the probes.
  double pullback = 0.0;
  /// max over states and probes of |(Omega_theta)_h~(T gamma X^{h gamma}, Z)|.
  double lift = 0.0;
  /// The same contraction from the coordinate expansion
  ///   -Z_u^a r_a + Z_{p^t_a}(G^a_0 - dH/dp^t_a) + Z_{p^i_a}(D_i sigma^a - dH/dp^i_a).
  double lift_coordinate = 0.0;
  /// max |quadrature - coordinate expansion| over states and probes.
  double coordinate_gap = 0.0;
};

HJInfiniteResult hj_infinite_check(const GammaSection& g, const HamiltonianData& h, const LeeForm& theta,
                                   const std::vector<EmbeddingState>& states, const std::vector<TangentField>& probes);

struct CommutationCheck {
  double integrated_derivative = 0.0;  ///< (d alpha)~(X, Y, Z)
  double state_derivative = 0.0;       ///< d(alpha~)(X, Y, Z) by central differences in the state
};

/// For a (2 + n)-form alpha and constant vertical fields X, Y, Z on the state
/// space: d(alpha~)(X,Y,Z) = X alpha~(Y,Z) - Y alpha~(X,Z) + Z alpha~(X,Y).
CommutationCheck dtilde_commutation(const DifferentialForm& alpha, const EmbeddingState& state,
                                     const TangentField& x, const TangentField& y, const TangentField& z,
                                     double eps = 1e-4);

}  // namespace lcms
