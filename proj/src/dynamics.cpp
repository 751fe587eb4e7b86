#include "lcms/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <Eigen/Dense>

#include "lcms/errors.hpp"
#include "numeric.hpp"

namespace lcms {

using detail::Compiled;
using detail::require_finite;

double Residual::max_norm() const {
  double out = 0.0;
  for (const auto& c : components) out = std::max(out, c.max_abs);
  return out;
}

bool Residual::is_zero(double tol) const {
  if (symbolic) {
    return std::all_of(components.begin(), components.end(), [](const auto& c) { return c.expr.is_zero(); });
  }
  return max_norm() <= tol;
}

const ResidualComponent& Residual::at(const std::string& name) const {
  for (const auto& c : components) {
    if (c.name == name) return c;
  }
  throw VariableError("no residual component '" + name + "'");
}

namespace {

std::string r1_name(const ChartSpec& c, int a, int i) { return "r1[" + c.fiber_name(a) + "," + c.base_name(i) + "]"; }
std::string r2_name(const ChartSpec& c, int a) { return "r2[" + c.fiber_name(a) + "]"; }

void require_section(const SectionMap& phi, const HamiltonianData& h) {
  if (phi.source()->kind() != BundleKind::Base || !phi.target()->same_as(*h.family().dual_jet)) {
    throw ChartMismatch("expected a section of J1pi* over M");
  }
}

}  // namespace

SectionMap field_section(const ChartFamily& family, const std::vector<Expr>& sigma,
                         const std::vector<std::vector<Expr>>& momenta) {
  const auto& c = *family.dual_jet;
  if (static_cast<int>(sigma.size()) != family.n_fields()) throw ValidationError("missing field component");
  if (static_cast<int>(momenta.size()) != family.m()) throw ValidationError("missing momentum component");
  std::map<std::string, Expr> images;
  for (int a = 0; a < family.n_fields(); ++a) images.emplace(c.fiber_name(a), sigma[static_cast<std::size_t>(a)]);
  for (int i = 0; i < family.m(); ++i) {
    if (static_cast<int>(momenta[static_cast<std::size_t>(i)].size()) != family.n_fields()) {
      throw ValidationError("missing momentum component");
    }
    for (int a = 0; a < family.n_fields(); ++a) {
      images.emplace(c.momentum_name(i, a), momenta[static_cast<std::size_t>(i)][static_cast<std::size_t>(a)]);
    }
  }
  return SectionMap(family.base, family.dual_jet, images);
}

Residual lchdw_residual(const SectionMap& phi, const HamiltonianData& h, const LeeForm& theta) {
  require_section(phi, h);
  const auto& c = *h.family().dual_jet;
  const auto sub = phi.substitution();
  Residual out;
  out.symbolic = true;
  for (int a = 0; a < h.n_fields(); ++a) {
    for (int i = 0; i < h.m(); ++i) {
      const Expr r = diff(phi.image(c.fiber_name(a)), c.base_name(i)) - substitute(h.dp(i, a), sub);
      out.components.push_back({r1_name(c, a, i), r, 0.0});
    }
  }
  for (int a = 0; a < h.n_fields(); ++a) {
    Expr r = substitute(h.du(a), sub);
    for (int i = 0; i < h.m(); ++i) {
      const Expr& pia = phi.image(c.momentum_name(i, a));
      r += diff(pia, c.base_name(i)) - theta.component(i) * pia;
    }
    out.components.push_back({r2_name(c, a), r, 0.0});
  }
  return out;
}

Residual hdw_residual(const SectionMap& phi, const HamiltonianData& h) {
  require_section(phi, h);
  const ChartPtr& c = h.family().dual_jet;
  const ChartPtr& base = phi.source();
  const DifferentialForm w = multisymplectic_omega_h(h);
  BasisIndex vol;
  for (int i = 0; i < base->base_dim(); ++i) vol.push_back(i);
  auto pulled = [&](const std::string& coord) {
    VectorField x(c);
    x.set(coord, Expr(1));
    return pullback(phi, interior_product(x, w)).coefficient_at(vol);
  };
  Residual out;
  out.symbolic = true;
  for (int a = 0; a < h.n_fields(); ++a) {
    for (int i = 0; i < h.m(); ++i) out.components.push_back({r1_name(*c, a, i), -pulled(c->momentum_name(i, a)), 0.0});
  }
  for (int a = 0; a < h.n_fields(); ++a) out.components.push_back({r2_name(*c, a), pulled(c->fiber_name(a)), 0.0});
  return out;
}

std::size_t GridSection::size() const {
  std::size_t s = 1;
  for (int n : nodes) s *= static_cast<std::size_t>(n);
  return s;
}

std::vector<double> GridSection::coordinate(std::size_t node) const {
  std::vector<double> x(nodes.size());
  for (std::size_t d = nodes.size(); d-- > 0;) {
    const auto n = static_cast<std::size_t>(nodes[d]);
    x[d] = origin[d] + spacing[d] * static_cast<double>(node % n);
    node /= n;
  }
  return x;
}

GridSection sample_section(const SectionMap& phi, const std::vector<int>& nodes, const std::vector<double>& origin,
                           const std::vector<double>& spacing, const std::vector<bool>& periodic) {
  const ChartPtr& base = phi.source();
  const ChartPtr& c = phi.target();
  const int m = c->base_dim();
  const int n = c->fiber_dim();
  if (static_cast<int>(nodes.size()) != m || origin.size() != nodes.size() || spacing.size() != nodes.size() ||
      periodic.size() != nodes.size()) {
    throw ValidationError("grid description does not match base dimension");
  }
  GridSection g{nodes, origin, spacing, periodic, {}, {}};
  std::vector<Expr> exprs;
  for (int a = 0; a < n; ++a) exprs.push_back(phi.image(c->fiber_name(a)));
  for (int i = 0; i < m; ++i) {
    for (int a = 0; a < n; ++a) exprs.push_back(phi.image(c->momentum_name(i, a)));
  }
  const Compiled f(exprs, base->names());
  const std::size_t size = g.size();
  g.sigma.assign(static_cast<std::size_t>(n), std::vector<double>(size));
  g.momenta.assign(static_cast<std::size_t>(m), std::vector<std::vector<double>>(static_cast<std::size_t>(n), std::vector<double>(size)));
  for (std::size_t k = 0; k < size; ++k) {
    const auto x = g.coordinate(k);
    std::size_t e = 0;
    for (int a = 0; a < n; ++a) g.sigma[static_cast<std::size_t>(a)][k] = f(e++, x.data());
    for (int i = 0; i < m; ++i) {
      for (int a = 0; a < n; ++a) g.momenta[static_cast<std::size_t>(i)][static_cast<std::size_t>(a)][k] = f(e++, x.data());
    }
  }
  return g;
}

Residual lchdw_residual(const GridSection& phi, const HamiltonianData& h, const LeeForm& theta, int fd_order) {
  if (fd_order != 2 && fd_order != 4) throw ValidationError("finite-difference order must be 2 or 4");
  const auto& c = *h.family().dual_jet;
  const int m = h.m();
  const int n = h.n_fields();
  if (static_cast<int>(phi.nodes.size()) != m || static_cast<int>(phi.sigma.size()) != n ||
      static_cast<int>(phi.momenta.size()) != m) {
    throw ValidationError("missing field component");
  }
  std::vector<Expr> exprs;
  for (int a = 0; a < n; ++a) {
    for (int i = 0; i < m; ++i) exprs.push_back(h.dp(i, a));
  }
  for (int a = 0; a < n; ++a) exprs.push_back(h.du(a));
  for (int i = 0; i < m; ++i) exprs.push_back(theta.component(i));
  const Compiled f(exprs, c.names());

  const int reach = fd_order / 2;
  std::vector<std::size_t> stride(static_cast<std::size_t>(m), 1);
  for (int d = m - 2; d >= 0; --d) {
    stride[static_cast<std::size_t>(d)] = stride[static_cast<std::size_t>(d + 1)] * static_cast<std::size_t>(phi.nodes[static_cast<std::size_t>(d + 1)]);
  }
  std::vector<double> r1(static_cast<std::size_t>(n * m), 0.0);
  std::vector<double> r2(static_cast<std::size_t>(n), 0.0);
  std::vector<double> point(static_cast<std::size_t>(c.dim()));
  std::vector<int> idx(static_cast<std::size_t>(m));
  const std::size_t size = phi.size();
  for (std::size_t k = 0; k < size; ++k) {
    std::size_t rest = k;
    bool interior = true;
    for (int d = m - 1; d >= 0; --d) {
      const int nd = phi.nodes[static_cast<std::size_t>(d)];
      idx[static_cast<std::size_t>(d)] = static_cast<int>(rest % static_cast<std::size_t>(nd));
      rest /= static_cast<std::size_t>(nd);
      if (!phi.periodic[static_cast<std::size_t>(d)] &&
          (idx[static_cast<std::size_t>(d)] < reach || idx[static_cast<std::size_t>(d)] >= nd - reach)) {
        interior = false;
      }
    }
    if (!interior) continue;
    auto shifted = [&](int d, int s) {
      const int nd = phi.nodes[static_cast<std::size_t>(d)];
      const int j = ((idx[static_cast<std::size_t>(d)] + s) % nd + nd) % nd;
      return k + (static_cast<std::size_t>(j) - static_cast<std::size_t>(idx[static_cast<std::size_t>(d)])) * stride[static_cast<std::size_t>(d)];
    };
    auto deriv = [&](const std::vector<double>& v, int d) {
      const double hd = phi.spacing[static_cast<std::size_t>(d)];
      if (fd_order == 2) return (v[shifted(d, 1)] - v[shifted(d, -1)]) / (2.0 * hd);
      return (-v[shifted(d, 2)] + 8.0 * v[shifted(d, 1)] - 8.0 * v[shifted(d, -1)] + v[shifted(d, -2)]) / (12.0 * hd);
    };
    const auto x = phi.coordinate(k);
    for (int i = 0; i < m; ++i) point[static_cast<std::size_t>(c.base_index(i))] = x[static_cast<std::size_t>(i)];
    for (int a = 0; a < n; ++a) point[static_cast<std::size_t>(c.fiber_index(a))] = phi.sigma[static_cast<std::size_t>(a)][k];
    for (int i = 0; i < m; ++i) {
      for (int a = 0; a < n; ++a) {
        point[static_cast<std::size_t>(c.momentum_index(i, a))] = phi.momenta[static_cast<std::size_t>(i)][static_cast<std::size_t>(a)][k];
      }
    }
    std::size_t e = 0;
    for (int a = 0; a < n; ++a) {
      for (int i = 0; i < m; ++i) {
        const double r = deriv(phi.sigma[static_cast<std::size_t>(a)], i) - f(e++, point.data());
        auto& slot = r1[static_cast<std::size_t>(a * m + i)];
        slot = std::max(slot, std::abs(r));
      }
    }
    for (int a = 0; a < n; ++a) {
      double r = f(e + static_cast<std::size_t>(a), point.data());
      for (int i = 0; i < m; ++i) {
        const auto& pia = phi.momenta[static_cast<std::size_t>(i)][static_cast<std::size_t>(a)];
        r += deriv(pia, i) - f(e + static_cast<std::size_t>(n + i), point.data()) * pia[k];
      }
      r2[static_cast<std::size_t>(a)] = std::max(r2[static_cast<std::size_t>(a)], std::abs(r));
    }
  }
  Residual out;
  for (int a = 0; a < n; ++a) {
    for (int i = 0; i < m; ++i) out.components.push_back({r1_name(c, a, i), Expr(), r1[static_cast<std::size_t>(a * m + i)]});
  }
  for (int a = 0; a < n; ++a) out.components.push_back({r2_name(c, a), Expr(), r2[static_cast<std::size_t>(a)]});
  return out;
}

MechTrajectory integrate_mechanics(const HamiltonianData& h, const LeeForm& theta, const std::vector<double>& sigma0,
                                   const std::vector<double>& p0, double t0, double t1, double dt) {
  if (h.m() != 1) throw ValidationError("integrate_mechanics requires m = 1");
  if (!(dt > 0.0) || !(t1 > t0)) throw ValidationError("integrate_mechanics requires dt > 0 and t1 > t0");
  const int n = h.n_fields();
  if (static_cast<int>(sigma0.size()) != n || static_cast<int>(p0.size()) != n) {
    throw ValidationError("initial data must have one entry per field");
  }
  const auto& c = *h.family().dual_jet;
  std::vector<Expr> exprs;
  for (int a = 0; a < n; ++a) exprs.push_back(h.dp(0, a));
  for (int a = 0; a < n; ++a) exprs.push_back(-h.du(a) + theta.component(0) * c.var(c.momentum_name(0, a)));
  const Compiled f(exprs, c.names());

  const auto steps = static_cast<long>(std::llround((t1 - t0) / dt));
  if (steps < 1) throw ValidationError("time span shorter than one step");
  const double h_step = (t1 - t0) / static_cast<double>(steps);
  const std::size_t dim = static_cast<std::size_t>(c.dim());
  const int ti = c.base_index(0);

  // state layout follows the chart: y[fiber_index], y[momentum_index]
  auto rhs = [&](double t, const std::vector<double>& y, std::vector<double>& dy) {
    std::vector<double> point = y;
    point[static_cast<std::size_t>(ti)] = t;
    dy.assign(dim, 0.0);
    for (int a = 0; a < n; ++a) {
      dy[static_cast<std::size_t>(c.fiber_index(a))] = f(static_cast<std::size_t>(a), point.data());
      dy[static_cast<std::size_t>(c.momentum_index(0, a))] = f(static_cast<std::size_t>(n + a), point.data());
    }
  };

  MechTrajectory traj;
  traj.sigma.assign(static_cast<std::size_t>(n), {});
  traj.p.assign(static_cast<std::size_t>(n), {});
  std::vector<double> y(dim, 0.0);
  for (int a = 0; a < n; ++a) {
    y[static_cast<std::size_t>(c.fiber_index(a))] = sigma0[static_cast<std::size_t>(a)];
    y[static_cast<std::size_t>(c.momentum_index(0, a))] = p0[static_cast<std::size_t>(a)];
  }
  auto record = [&](double t) {
    traj.t.push_back(t);
    for (int a = 0; a < n; ++a) {
      traj.sigma[static_cast<std::size_t>(a)].push_back(y[static_cast<std::size_t>(c.fiber_index(a))]);
      traj.p[static_cast<std::size_t>(a)].push_back(y[static_cast<std::size_t>(c.momentum_index(0, a))]);
    }
  };
  record(t0);
  std::vector<double> k1, k2, k3, k4, tmp(dim);
  for (long s = 0; s < steps; ++s) {
    const double t = t0 + static_cast<double>(s) * h_step;
    rhs(t, y, k1);
    for (std::size_t j = 0; j < dim; ++j) tmp[j] = y[j] + 0.5 * h_step * k1[j];
    rhs(t + 0.5 * h_step, tmp, k2);
    for (std::size_t j = 0; j < dim; ++j) tmp[j] = y[j] + 0.5 * h_step * k2[j];
    rhs(t + 0.5 * h_step, tmp, k3);
    for (std::size_t j = 0; j < dim; ++j) tmp[j] = y[j] + h_step * k3[j];
    rhs(t + h_step, tmp, k4);
    for (std::size_t j = 0; j < dim; ++j) {
      y[j] += h_step / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
      require_finite(y[j], "integrate_mechanics");
    }
    record(t0 + static_cast<double>(s + 1) * h_step);
  }
  return traj;
}

GridSection as_grid_section(const MechTrajectory& traj) {
  GridSection g;
  const auto k = traj.t.size();
  g.nodes = {static_cast<int>(k)};
  g.origin = {traj.t.front()};
  g.spacing = {k > 1 ? (traj.t.back() - traj.t.front()) / static_cast<double>(k - 1) : 1.0};
  g.periodic = {false};
  g.sigma = traj.sigma;
  g.momenta = {traj.p};
  return g;
}

MechanicsClosedForm mechanics_closed_form(double theta, double sigma0, double p0, double duration) {
  const double x = theta * duration;
  const double growth = std::abs(theta) < 1e-8 ? duration * (1.0 + x / 2.0 + x * x / 6.0) : std::expm1(x) / theta;
  return {sigma0 + p0 * growth, p0 * std::exp(x)};
}

std::size_t GridSpec::size() const {
  std::size_t s = 1;
  for (int d = 0; d < n; ++d) s *= static_cast<std::size_t>(nodes);
  return s;
}

double GridSpec::weight() const { return std::pow(dx(), n); }

std::vector<double> GridSpec::coordinate(std::size_t node) const {
  std::vector<double> x(static_cast<std::size_t>(n));
  for (int d = n - 1; d >= 0; --d) {
    x[static_cast<std::size_t>(d)] = static_cast<double>(node % static_cast<std::size_t>(nodes)) * dx();
    node /= static_cast<std::size_t>(nodes);
  }
  return x;
}

std::size_t GridSpec::shifted(std::size_t node, int dim, int shift) const {
  std::size_t stride = 1;
  for (int d = n - 1; d > dim; --d) stride *= static_cast<std::size_t>(nodes);
  const auto i = static_cast<int>((node / stride) % static_cast<std::size_t>(nodes));
  const int j = ((i + shift) % nodes + nodes) % nodes;
  return node + static_cast<std::size_t>(j) * stride - static_cast<std::size_t>(i) * stride;
}

FieldState FieldState::zeros(const GridSpec& grid, int n_fields) {
  FieldState s;
  s.grid = grid;
  const auto nf = static_cast<std::size_t>(n_fields);
  s.sigma.assign(nf, std::vector<double>(grid.size(), 0.0));
  s.pt = s.sigma;
  s.px.assign(static_cast<std::size_t>(grid.n), s.sigma);
  return s;
}

double FieldState::max_abs() const {
  double out = 0.0;
  auto scan = [&](const std::vector<std::vector<double>>& arr) {
    for (const auto& v : arr) {
      for (double x : v) out = std::max(out, std::abs(x));
    }
  };
  scan(sigma);
  scan(pt);
  for (const auto& p : px) scan(p);
  return out;
}

std::vector<double> central_difference(const GridSpec& grid, const std::vector<double>& f, int dim) {
  std::vector<double> out(f.size());
  const double inv = 1.0 / (2.0 * grid.dx());
  for (std::size_t k = 0; k < f.size(); ++k) out[k] = (f[grid.shifted(k, dim, 1)] - f[grid.shifted(k, dim, -1)]) * inv;
  return out;
}

namespace {

void require_sliced(const HamiltonianData& h, const FieldState& s) {
  if (h.m() != s.grid.n + 1) throw ValidationError("Cauchy grid dimension must be m - 1");
  if (h.n_fields() != s.n_fields()) throw ValidationError("field count does not match the Hamiltonian");
}

// Expressions for the slaved spatial momenta: residual dH/dp^i_a and its
// Jacobian in the unknowns p^i_a (i spatial).
struct ConstraintSystem {
  Compiled grad;  // [i-1][a] flattened
  Compiled hess;  // [(i,a),(j,b)] flattened
  int unknowns = 0;
};

ConstraintSystem constraint_system(const HamiltonianData& h) {
  const auto& c = *h.family().dual_jet;
  ConstraintSystem sys;
  const int n = h.n_fields();
  std::vector<std::string> vars;
  std::vector<Expr> grad;
  for (int i = 1; i < h.m(); ++i) {
    for (int a = 0; a < n; ++a) {
      vars.push_back(c.momentum_name(i, a));
      grad.push_back(h.dp(i, a));
    }
  }
  std::vector<Expr> hess;
  for (const auto& g : grad) {
    for (const auto& v : vars) hess.push_back(diff(g, v));
  }
  sys.grad = Compiled(grad, c.names());
  sys.hess = Compiled(hess, c.names());
  sys.unknowns = static_cast<int>(vars.size());
  return sys;
}

void fill_point(const ChartSpec& c, const FieldState& s, std::size_t k, std::vector<double>& point) {
  const int n = s.n_fields();
  const auto x = s.grid.coordinate(k);
  point[static_cast<std::size_t>(c.base_index(0))] = s.t;
  for (int i = 1; i < c.base_dim(); ++i) point[static_cast<std::size_t>(c.base_index(i))] = x[static_cast<std::size_t>(i - 1)];
  for (int a = 0; a < n; ++a) {
    const auto aa = static_cast<std::size_t>(a);
    point[static_cast<std::size_t>(c.fiber_index(a))] = s.sigma[aa][k];
    point[static_cast<std::size_t>(c.momentum_index(0, a))] = s.pt[aa][k];
    for (int i = 1; i < c.base_dim(); ++i) {
      point[static_cast<std::size_t>(c.momentum_index(i, a))] = s.px[static_cast<std::size_t>(i - 1)][aa][k];
    }
  }
}

void solve_momenta(const HamiltonianData& h, const ConstraintSystem& sys, FieldState& s) {
  const auto& c = *h.family().dual_jet;
  const int n = s.n_fields();
  const int q = sys.unknowns;
  if (q == 0) return;
  std::vector<std::vector<std::vector<double>>> grads(static_cast<std::size_t>(s.grid.n));
  for (int i = 0; i < s.grid.n; ++i) {
    for (int a = 0; a < n; ++a) grads[static_cast<std::size_t>(i)].push_back(central_difference(s.grid, s.sigma[static_cast<std::size_t>(a)], i));
  }
  std::vector<double> point(static_cast<std::size_t>(c.dim()));
  Eigen::VectorXd r(q);
  Eigen::MatrixXd jac(q, q);
  for (std::size_t k = 0; k < s.grid.size(); ++k) {
    for (int iter = 0; iter < 50; ++iter) {
      fill_point(c, s, k, point);
      double scale = 1.0;
      for (int e = 0; e < q; ++e) {
        const int i = e / n, a = e % n;
        const double target = grads[static_cast<std::size_t>(i)][static_cast<std::size_t>(a)][k];
        r(e) = sys.grad(static_cast<std::size_t>(e), point.data()) - target;
        scale = std::max(scale, std::abs(target));
        for (int e2 = 0; e2 < q; ++e2) jac(e, e2) = sys.hess(static_cast<std::size_t>(e * q + e2), point.data());
      }
      if (r.lpNorm<Eigen::Infinity>() <= 1e-14 * scale && iter > 0) break;
      Eigen::FullPivLU<Eigen::MatrixXd> lu(jac);
      if (!lu.isInvertible()) throw NumericAbort("spatial momenta: singular Hessian of H");
      const Eigen::VectorXd delta = lu.solve(r);
      for (int e = 0; e < q; ++e) {
        auto& v = s.px[static_cast<std::size_t>(e / n)][static_cast<std::size_t>(e % n)][k];
        v -= delta(e);
        require_finite(v, "spatial momentum solve");
      }
      if (delta.lpNorm<Eigen::Infinity>() <= 1e-15 * scale) break;
    }
  }
}

}  // namespace

void solve_spatial_momenta(const HamiltonianData& h, FieldState& state) {
  require_sliced(h, state);
  solve_momenta(h, constraint_system(h), state);
}

std::vector<FieldState> integrate_cauchy(const HamiltonianData& h, const LeeForm& theta, const FieldState& init,
                                         double t1, double dt, int stride) {
  require_sliced(h, init);
  if (!(dt > 0.0) || !(t1 > init.t)) throw ValidationError("integrate_cauchy requires dt > 0 and t1 > t0");
  if (stride < 1) throw ValidationError("stride must be positive");
  const auto& c = *h.family().dual_jet;
  const int n = init.n_fields();
  const int m = h.m();
  const ConstraintSystem sys = constraint_system(h);
  std::vector<Expr> exprs;
  for (int a = 0; a < n; ++a) exprs.push_back(h.dp(0, a));
  for (int a = 0; a < n; ++a) exprs.push_back(theta.contract_momenta(h.family().dual_jet, a) - h.du(a));
  const Compiled f(exprs, c.names());

  const auto steps = static_cast<long>(std::llround((t1 - init.t) / dt));
  if (steps < 1) throw ValidationError("time span shorter than one step");
  const double hs = (t1 - init.t) / static_cast<double>(steps);
  const std::size_t size = init.grid.size();

  struct Rate {
    std::vector<std::vector<double>> sigma, pt;
  };
  std::vector<double> point(static_cast<std::size_t>(c.dim()));
  auto rate = [&](FieldState& s) {
    solve_momenta(h, sys, s);
    Rate out{std::vector<std::vector<double>>(static_cast<std::size_t>(n), std::vector<double>(size)), {}};
    out.pt = out.sigma;
    std::vector<std::vector<double>> div(static_cast<std::size_t>(n), std::vector<double>(size, 0.0));
    for (int i = 1; i < m; ++i) {
      for (int a = 0; a < n; ++a) {
        const auto d = central_difference(s.grid, s.px[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(a)], i - 1);
        for (std::size_t k = 0; k < size; ++k) div[static_cast<std::size_t>(a)][k] += d[k];
      }
    }
    for (std::size_t k = 0; k < size; ++k) {
      fill_point(c, s, k, point);
      for (int a = 0; a < n; ++a) {
        const auto aa = static_cast<std::size_t>(a);
        out.sigma[aa][k] = f(aa, point.data());
        out.pt[aa][k] = f(static_cast<std::size_t>(n) + aa, point.data()) - div[aa][k];
      }
    }
    return out;
  };
  auto advance = [&](const FieldState& base, const Rate& r, double factor, FieldState& out) {
    out.t = base.t + factor;
    for (int a = 0; a < n; ++a) {
      const auto aa = static_cast<std::size_t>(a);
      for (std::size_t k = 0; k < size; ++k) {
        out.sigma[aa][k] = base.sigma[aa][k] + factor * r.sigma[aa][k];
        out.pt[aa][k] = base.pt[aa][k] + factor * r.pt[aa][k];
      }
    }
  };

  FieldState y = init;
  solve_momenta(h, sys, y);
  const double limit = 1e6 * std::max(1.0, y.max_abs());
  std::vector<FieldState> out{y};
  FieldState stage = y;
  for (long s = 0; s < steps; ++s) {
    const double t0 = init.t + static_cast<double>(s) * hs;
    y.t = t0;
    const Rate k1 = rate(y);
    stage.px = y.px;
    advance(y, k1, 0.5 * hs, stage);
    const Rate k2 = rate(stage);
    advance(y, k2, 0.5 * hs, stage);
    const Rate k3 = rate(stage);
    advance(y, k3, hs, stage);
    const Rate k4 = rate(stage);
    for (int a = 0; a < n; ++a) {
      const auto aa = static_cast<std::size_t>(a);
      for (std::size_t k = 0; k < size; ++k) {
        y.sigma[aa][k] += hs / 6.0 * (k1.sigma[aa][k] + 2.0 * k2.sigma[aa][k] + 2.0 * k3.sigma[aa][k] + k4.sigma[aa][k]);
        y.pt[aa][k] += hs / 6.0 * (k1.pt[aa][k] + 2.0 * k2.pt[aa][k] + 2.0 * k3.pt[aa][k] + k4.pt[aa][k]);
      }
    }
    y.t = init.t + static_cast<double>(s + 1) * hs;
    solve_momenta(h, sys, y);
    const double norm = y.max_abs();
    require_finite(norm, "integrate_cauchy");
    if (norm > limit) {
      throw NumericAbort("integrate_cauchy: solution norm grew beyond 1e6 x initial at t = " + std::to_string(y.t) +
                         " (step too large for the grid?)");
    }
    if ((s + 1) % stride == 0 || s + 1 == steps) out.push_back(y);
  }
  return out;
}

}  // namespace lcms
