#include "lcms/cauchy.hpp"

#include <algorithm>
#include <cmath>
#include <Eigen/Dense>
#include <random>

#include "lcms/errors.hpp"
#include "numeric.hpp"

namespace lcms {

using detail::Compiled;

EmbeddingState::EmbeddingState(ChartFamily fam, FieldState f) : family(std::move(fam)), field(std::move(f)) {
  if (family.m() != field.grid.n + 1) throw ValidationError("embedding state: grid dimension must be m - 1");
  if (family.n_fields() != field.n_fields()) throw ValidationError("embedding state: field count mismatch");
  const std::size_t size = field.grid.size();
  auto check = [&](const std::vector<std::vector<double>>& arr) {
    for (const auto& v : arr) {
      if (v.size() != size) throw ValidationError("embedding state: array does not match the grid");
      for (double x : v) detail::require_finite(x, "embedding state");
    }
  };
  check(field.sigma);
  check(field.pt);
  if (static_cast<int>(field.px.size()) != field.grid.n) throw ValidationError("embedding state: missing spatial momenta");
  for (const auto& p : field.px) check(p);
}

std::vector<double> EmbeddingState::point(std::size_t node) const {
  const auto& c = *family.dual_jet;
  std::vector<double> x(static_cast<std::size_t>(c.dim()));
  const auto y = field.grid.coordinate(node);
  x[static_cast<std::size_t>(c.base_index(0))] = field.t;
  for (int i = 1; i < c.base_dim(); ++i) x[static_cast<std::size_t>(c.base_index(i))] = y[static_cast<std::size_t>(i - 1)];
  for (int a = 0; a < c.fiber_dim(); ++a) {
    const auto aa = static_cast<std::size_t>(a);
    x[static_cast<std::size_t>(c.fiber_index(a))] = field.sigma[aa][node];
    x[static_cast<std::size_t>(c.momentum_index(0, a))] = field.pt[aa][node];
    for (int i = 1; i < c.base_dim(); ++i) {
      x[static_cast<std::size_t>(c.momentum_index(i, a))] = field.px[static_cast<std::size_t>(i - 1)][aa][node];
    }
  }
  return x;
}

TangentField TangentField::zero(const EmbeddingState& state) {
  return {std::vector<std::vector<double>>(static_cast<std::size_t>(state.family.dual_jet->dim()),
                                           std::vector<double>(state.size(), 0.0))};
}

TangentField& TangentField::operator+=(const TangentField& other) {
  for (std::size_t c = 0; c < components.size(); ++c) {
    for (std::size_t k = 0; k < components[c].size(); ++k) components[c][k] += other.components[c][k];
  }
  return *this;
}

TangentField operator*(double s, TangentField a) {
  for (auto& row : a.components) {
    for (double& v : row) v *= s;
  }
  return a;
}

namespace {

/// Per-coordinate arrays of the embedding (base coordinates included).
std::vector<std::vector<double>> coordinate_arrays(const EmbeddingState& state) {
  const auto& c = *state.family.dual_jet;
  std::vector<std::vector<double>> out(static_cast<std::size_t>(c.dim()), std::vector<double>(state.size()));
  for (std::size_t k = 0; k < state.size(); ++k) {
    const auto x = state.point(k);
    for (std::size_t j = 0; j < x.size(); ++j) out[j][k] = x[j];
  }
  return out;
}

EmbeddingState shifted(const EmbeddingState& state, const TangentField& v, double eps) {
  const auto& c = *state.family.dual_jet;
  FieldState f = state.field;
  for (int a = 0; a < c.fiber_dim(); ++a) {
    const auto aa = static_cast<std::size_t>(a);
    for (std::size_t k = 0; k < state.size(); ++k) {
      f.sigma[aa][k] += eps * v.components[static_cast<std::size_t>(c.fiber_index(a))][k];
      f.pt[aa][k] += eps * v.components[static_cast<std::size_t>(c.momentum_index(0, a))][k];
      for (int i = 1; i < c.base_dim(); ++i) {
        f.px[static_cast<std::size_t>(i - 1)][aa][k] += eps * v.components[static_cast<std::size_t>(c.momentum_index(i, a))][k];
      }
    }
  }
  return EmbeddingState(state.family, std::move(f));
}

}  // namespace

TangentField spatial_tangent(const EmbeddingState& state, int dim) {
  const auto& c = *state.family.dual_jet;
  if (dim < 0 || dim >= state.field.grid.n) throw ValidationError("spatial_tangent: dimension out of range");
  const auto arrays = coordinate_arrays(state);
  TangentField out = TangentField::zero(state);
  for (int j = 0; j < c.dim(); ++j) {
    if (j == c.base_index(dim + 1)) {
      std::fill(out.components[static_cast<std::size_t>(j)].begin(), out.components[static_cast<std::size_t>(j)].end(), 1.0);
    } else if (std::find(c.base_names().begin(), c.base_names().end(), c.name(j)) == c.base_names().end()) {
      out.components[static_cast<std::size_t>(j)] = central_difference(state.field.grid, arrays[static_cast<std::size_t>(j)], dim);
    }
  }
  return out;
}

double integrate_form(const DifferentialForm& alpha, const EmbeddingState& state,
                      const std::vector<TangentField>& tangents) {
  const ChartPtr& c = state.family.dual_jet;
  const int n = state.field.grid.n;
  const int k = static_cast<int>(tangents.size());
  if (alpha.degree() != k + n) throw ValidationError("integrate_form: degree must equal the number of tangents plus n");
  const DifferentialForm a = alpha.chart()->same_as(*c) ? alpha : transfer(alpha, c);
  if (a.is_zero()) return 0.0;

  std::vector<TangentField> vectors = tangents;
  for (int j = 0; j < n; ++j) vectors.push_back(spatial_tangent(state, j));
  for (const auto& v : vectors) {
    if (static_cast<int>(v.components.size()) != c->dim()) throw ValidationError("integrate_form: tangent has wrong dimension");
  }
  std::vector<BasisIndex> basis;
  std::vector<Expr> coeffs;
  for (const auto& [idx, e] : a.terms()) {
    basis.push_back(idx);
    coeffs.push_back(e);
  }
  const Compiled f(coeffs, c->names());
  const int deg = k + n;
  std::vector<double> integrand(state.size());
  Eigen::MatrixXd mat(deg, deg);
  for (std::size_t node = 0; node < state.size(); ++node) {
    const auto x = state.point(node);
    double sum = 0.0;
    for (std::size_t t = 0; t < basis.size(); ++t) {
      for (int r = 0; r < deg; ++r) {
        for (int s = 0; s < deg; ++s) {
          mat(r, s) = vectors[static_cast<std::size_t>(s)].components[static_cast<std::size_t>(basis[t][static_cast<std::size_t>(r)])][node];
        }
      }
      const double det = deg == 0 ? 1.0 : mat.determinant();
      if (det != 0.0) sum += f(t, x.data()) * det;
    }
    integrand[node] = sum;
  }
  return detail::pairwise_sum(integrand) * state.field.grid.weight();
}

TangentField horizontal_lift_tangent(const HamiltonianData& h, const LeeForm& theta, const EmbeddingState& state) {
  const auto& c = *state.family.dual_jet;
  const int n = c.fiber_dim();
  const int m = c.base_dim();
  std::vector<Expr> exprs;
  for (int a = 0; a < n; ++a) exprs.push_back(h.dp(0, a));
  for (int a = 0; a < n; ++a) exprs.push_back(theta.contract_momenta(state.family.dual_jet, a) - h.du(a));
  const Compiled f(exprs, c.names());
  TangentField out = TangentField::zero(state);
  std::fill(out.components[static_cast<std::size_t>(c.base_index(0))].begin(),
            out.components[static_cast<std::size_t>(c.base_index(0))].end(), 1.0);
  std::vector<std::vector<double>> div(static_cast<std::size_t>(n), std::vector<double>(state.size(), 0.0));
  for (int i = 1; i < m; ++i) {
    for (int a = 0; a < n; ++a) {
      const auto d = central_difference(state.field.grid, state.field.px[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(a)], i - 1);
      for (std::size_t k = 0; k < state.size(); ++k) div[static_cast<std::size_t>(a)][k] += d[k];
    }
  }
  for (std::size_t k = 0; k < state.size(); ++k) {
    const auto x = state.point(k);
    for (int a = 0; a < n; ++a) {
      out.components[static_cast<std::size_t>(c.fiber_index(a))][k] = f(static_cast<std::size_t>(a), x.data());
      out.components[static_cast<std::size_t>(c.momentum_index(0, a))][k] =
          f(static_cast<std::size_t>(n + a), x.data()) - div[static_cast<std::size_t>(a)][k];
    }
  }
  return out;
}

std::vector<TangentField> make_probes(const EmbeddingState& state, ProbeKind kind, int count, std::uint64_t seed) {
  const auto& c = *state.family.dual_jet;
  std::vector<int> coords;
  for (int a = 0; a < c.fiber_dim(); ++a) {
    if (kind != ProbeKind::Momentum) coords.push_back(c.fiber_index(a));
    if (kind != ProbeKind::Field) {
      for (int i = 0; i < c.base_dim(); ++i) coords.push_back(c.momentum_index(i, a));
    }
  }
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, coords.size() - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto& grid = state.field.grid;
  std::vector<TangentField> out;
  for (int p = 0; p < count; ++p) {
    const int coord = coords[pick(rng)];
    std::vector<double> centre(static_cast<std::size_t>(grid.n));
    for (auto& x : centre) x = unit(rng);
    const double width = 0.08 + 0.12 * unit(rng);
    const double amp = unit(rng) < 0.5 ? -1.0 : 1.0;
    TangentField z = TangentField::zero(state);
    for (std::size_t k = 0; k < state.size(); ++k) {
      const auto y = grid.coordinate(k);
      double r2 = 0.0;
      for (int d = 0; d < grid.n; ++d) {
        double dist = std::abs(y[static_cast<std::size_t>(d)] - centre[static_cast<std::size_t>(d)]);
        dist = std::min(dist, 1.0 - dist);
        r2 += dist * dist;
      }
      z.components[static_cast<std::size_t>(coord)][k] = amp * std::exp(-r2 / (2.0 * width * width));
    }
    out.push_back(std::move(z));
  }
  return out;
}

Residual check_precosymplectic(const HamiltonianData& h, const LeeForm& theta, const EmbeddingState& state,
                               const std::vector<TangentField>& probes) {
  const DifferentialForm w = omega_h(h, theta);
  const TangentField lift = horizontal_lift_tangent(h, theta, state);
  Residual out;
  for (std::size_t k = 0; k < probes.size(); ++k) {
    out.components.push_back({"probe[" + std::to_string(k) + "]", Expr(), std::abs(integrate_form(w, state, {lift, probes[k]}))});
  }
  const double eta = integrate_form(volume_form(state.family.dual_jet), state, {lift});
  out.components.push_back({"eta", Expr(), std::abs(eta - 1.0)});
  return out;
}

std::vector<TangentField> trajectory_velocity(const std::vector<EmbeddingState>& traj) {
  if (traj.size() < 3) throw ValidationError("trajectory needs at least three samples");
  const double dt = traj[1].field.t - traj[0].field.t;
  if (!(dt > 0.0)) throw ValidationError("trajectory times must increase");
  for (std::size_t s = 1; s < traj.size(); ++s) {
    if (std::abs(traj[s].field.t - traj[s - 1].field.t - dt) > 1e-9 * std::max(1.0, dt)) {
      throw ValidationError("trajectory time step is not uniform");
    }
  }
  std::vector<std::vector<std::vector<double>>> arrays;
  for (const auto& s : traj) arrays.push_back(coordinate_arrays(s));
  const ChartSpec& c = *traj.front().family.dual_jet;
  const std::size_t last = traj.size() - 1;
  std::vector<TangentField> out;
  for (std::size_t s = 0; s < traj.size(); ++s) {
    TangentField v = TangentField::zero(traj[s]);
    for (int j = 0; j < c.dim(); ++j) {
      const auto jj = static_cast<std::size_t>(j);
      const bool is_base = std::find(c.base_names().begin(), c.base_names().end(), c.name(j)) != c.base_names().end();
      for (std::size_t k = 0; k < traj[s].size(); ++k) {
        double d;
        if (j == c.base_index(0)) {
          d = 1.0;
        } else if (is_base) {
          d = 0.0;
        } else if (s == 0) {
          d = (-3.0 * arrays[0][jj][k] + 4.0 * arrays[1][jj][k] - arrays[2][jj][k]) / (2.0 * dt);
        } else if (s == last) {
          d = (3.0 * arrays[last][jj][k] - 4.0 * arrays[last - 1][jj][k] + arrays[last - 2][jj][k]) / (2.0 * dt);
        } else {
          d = (arrays[s + 1][jj][k] - arrays[s - 1][jj][k]) / (2.0 * dt);
        }
        v.components[jj][k] = d;
      }
    }
    out.push_back(std::move(v));
  }
  return out;
}

Residual infinite_hdw_residual(const std::vector<EmbeddingState>& traj, const HamiltonianData& h,
                               const LeeForm& theta, const std::vector<TangentField>& probes) {
  const auto velocity = trajectory_velocity(traj);
  const DifferentialForm w = omega_h(h, theta);
  Residual out;
  for (std::size_t s = 0; s < traj.size(); ++s) {
    double worst = 0.0;
    for (const auto& z : probes) worst = std::max(worst, std::abs(integrate_form(w, traj[s], {velocity[s], z})));
    out.components.push_back({"t[" + std::to_string(s) + "]", Expr(), worst});
  }
  return out;
}

EmbeddingState compose_gamma(const GammaSection& g, const EmbeddingState& state) {
  const auto& e = *g.family().total;
  const int m = e.base_dim();
  const int n = e.fiber_dim();
  std::vector<Expr> exprs;
  for (int i = 0; i < m; ++i) {
    for (int a = 0; a < n; ++a) exprs.push_back(g.gamma(i, a));
  }
  const Compiled f(exprs, e.names());
  const auto& jet = *state.family.dual_jet;
  FieldState field = state.field;
  std::vector<double> point(static_cast<std::size_t>(e.dim()));
  for (std::size_t k = 0; k < state.size(); ++k) {
    const auto x = state.point(k);
    for (int j = 0; j < e.dim(); ++j) point[static_cast<std::size_t>(j)] = x[static_cast<std::size_t>(jet.index_of(e.name(j)))];
    for (int a = 0; a < n; ++a) {
      field.pt[static_cast<std::size_t>(a)][k] = f(static_cast<std::size_t>(a), point.data());
      for (int i = 1; i < m; ++i) {
        field.px[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(a)][k] = f(static_cast<std::size_t>(i * n + a), point.data());
      }
    }
  }
  return EmbeddingState(state.family, std::move(field));
}

HJInfiniteResult hj_infinite_check(const GammaSection& g, const HamiltonianData& h, const LeeForm& theta,
                                   const std::vector<EmbeddingState>& states, const std::vector<TangentField>& probes) {
  const auto& fam = g.family();
  const ChartPtr& jet = fam.dual_jet;
  const auto& e = *fam.total;
  const int m = fam.m();
  const int n = fam.n_fields();
  const DifferentialForm w = omega_h(h, theta);
  const Residual hj = hj_residual(g, h, theta);
  const ReducedConnection rc = reduce_connection(connection_from_hamiltonian(h, theta), g.as_dual_jet_section());

  // T gamma of d/dt and d/du^b, and the reduced lift G^a_0 on E.
  std::vector<Expr> exprs;
  for (int i = 0; i < m; ++i) {
    for (int a = 0; a < n; ++a) exprs.push_back(diff(g.gamma(i, a), e.base_name(0)));
  }
  for (int b = 0; b < n; ++b) {
    for (int i = 0; i < m; ++i) {
      for (int a = 0; a < n; ++a) exprs.push_back(diff(g.gamma(i, a), e.fiber_name(b)));
    }
  }
  for (int a = 0; a < n; ++a) exprs.push_back(rc.fiber_part[static_cast<std::size_t>(a)][0]);
  for (int a = 0; a < n; ++a) exprs.push_back(hj.components[static_cast<std::size_t>(a)].expr);
  const Compiled f(exprs, e.names());
  const std::size_t dgdt = 0;
  const auto dgdu = static_cast<std::size_t>(m * n);
  const auto lift0 = dgdu + static_cast<std::size_t>(n * m * n);
  const auto rr = lift0 + static_cast<std::size_t>(n);

  std::vector<Expr> hp;
  for (int i = 0; i < m; ++i) {
    for (int a = 0; a < n; ++a) hp.push_back(h.dp(i, a));
  }
  const Compiled fh(hp, jet->names());

  HJInfiniteResult out;
  for (const auto& raw : states) {
    const EmbeddingState s = compose_gamma(g, raw);
    const std::size_t size = s.size();
    std::vector<double> point(static_cast<std::size_t>(e.dim()));
    auto load = [&](std::size_t k) {
      const auto x = s.point(k);
      for (int j = 0; j < e.dim(); ++j) point[static_cast<std::size_t>(j)] = x[static_cast<std::size_t>(jet->index_of(e.name(j)))];
      return x;
    };
    // u-directions lifted by gamma: V^b d/du^b + V^b dgamma/du^b d/dp.
    auto lift_vertical = [&](const TangentField& z) {
      TangentField v = TangentField::zero(s);
      for (std::size_t k = 0; k < size; ++k) {
        load(k);
        for (int b = 0; b < n; ++b) {
          const double vb = z.components[static_cast<std::size_t>(jet->fiber_index(b))][k];
          v.components[static_cast<std::size_t>(jet->fiber_index(b))][k] = vb;
          for (int i = 0; i < m; ++i) {
            for (int a = 0; a < n; ++a) {
              v.components[static_cast<std::size_t>(jet->momentum_index(i, a))][k] +=
                  vb * f(dgdu + static_cast<std::size_t>((b * m + i) * n + a), point.data());
            }
          }
        }
      }
      return v;
    };
    TangentField time = TangentField::zero(s);
    TangentField lift = TangentField::zero(s);
    for (std::size_t k = 0; k < size; ++k) {
      load(k);
      time.components[static_cast<std::size_t>(jet->base_index(0))][k] = 1.0;
      lift.components[static_cast<std::size_t>(jet->base_index(0))][k] = 1.0;
      for (int i = 0; i < m; ++i) {
        for (int a = 0; a < n; ++a) {
          const double dt = f(dgdt + static_cast<std::size_t>(i * n + a), point.data());
          time.components[static_cast<std::size_t>(jet->momentum_index(i, a))][k] = dt;
          double dp = dt;
          for (int b = 0; b < n; ++b) {
            dp += f(dgdu + static_cast<std::size_t>((b * m + i) * n + a), point.data()) * f(lift0 + static_cast<std::size_t>(b), point.data());
          }
          lift.components[static_cast<std::size_t>(jet->momentum_index(i, a))][k] = dp;
        }
      }
      for (int b = 0; b < n; ++b) {
        lift.components[static_cast<std::size_t>(jet->fiber_index(b))][k] = f(lift0 + static_cast<std::size_t>(b), point.data());
      }
    }

    std::vector<TangentField> lifted{time};
    for (const auto& z : probes) lifted.push_back(lift_vertical(z));
    for (std::size_t p = 0; p < lifted.size(); ++p) {
      for (std::size_t q = p + 1; q < lifted.size(); ++q) {
        out.pullback = std::max(out.pullback, std::abs(integrate_form(w, s, {lifted[p], lifted[q]})));
      }
    }

    std::vector<std::vector<double>> dsigma;
    for (int i = 1; i < m; ++i) {
      for (int a = 0; a < n; ++a) dsigma.push_back(central_difference(s.field.grid, s.field.sigma[static_cast<std::size_t>(a)], i - 1));
    }
    for (const auto& z : probes) {
      const double quad = integrate_form(w, s, {lift, z});
      std::vector<double> integrand(size);
      for (std::size_t k = 0; k < size; ++k) {
        const auto x = load(k);
        double v = 0.0;
        for (int a = 0; a < n; ++a) {
          v -= z.components[static_cast<std::size_t>(jet->fiber_index(a))][k] * f(rr + static_cast<std::size_t>(a), point.data());
          v += z.components[static_cast<std::size_t>(jet->momentum_index(0, a))][k] *
               (f(lift0 + static_cast<std::size_t>(a), point.data()) - fh(static_cast<std::size_t>(a), x.data()));
          for (int i = 1; i < m; ++i) {
            v += z.components[static_cast<std::size_t>(jet->momentum_index(i, a))][k] *
                 (dsigma[static_cast<std::size_t>((i - 1) * n + a)][k] - fh(static_cast<std::size_t>(i * n + a), x.data()));
          }
        }
        integrand[k] = v;
      }
      const double coord = detail::pairwise_sum(integrand) * s.field.grid.weight();
      out.lift = std::max(out.lift, std::abs(quad));
      out.lift_coordinate = std::max(out.lift_coordinate, std::abs(coord));
      out.coordinate_gap = std::max(out.coordinate_gap, std::abs(quad - coord));
    }
  }
  return out;
}

CommutationCheck dtilde_commutation(const DifferentialForm& alpha, const EmbeddingState& state,
                                     const TangentField& x, const TangentField& y, const TangentField& z, double eps) {
  const int n = state.field.grid.n;
  if (alpha.degree() != n + 2) throw ValidationError("dtilde_commutation needs a (2 + n)-form");
  CommutationCheck out;
  out.integrated_derivative = integrate_form(exterior_derivative(alpha), state, {x, y, z});
  auto deriv = [&](const TangentField& dir, const TangentField& a, const TangentField& b) {
    const double plus = integrate_form(alpha, shifted(state, dir, eps), {a, b});
    const double minus = integrate_form(alpha, shifted(state, dir, -eps), {a, b});
    return (plus - minus) / (2.0 * eps);
  };
  out.state_derivative = deriv(x, y, z) - deriv(y, x, z) + deriv(z, x, y);
  return out;
}

}  // namespace lcms
