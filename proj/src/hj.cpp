#include "lcms/hj.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "lcms/errors.hpp"
#include "numeric.hpp"

namespace lcms {

using detail::Compiled;

GammaSection::GammaSection(ChartFamily family, std::vector<std::vector<Expr>> gamma, std::optional<Expr> rho)
    : family_(std::move(family)), gamma_(std::move(gamma)), rho_(std::move(rho)) {
  const auto& total = *family_.total;
  const auto& mm = *family_.multimomentum;
  if (static_cast<int>(gamma_.size()) != family_.m()) throw ValidationError("gamma needs one row per base coordinate");
  auto check = [&](const Expr& e) {
    for (const auto& v : e.free_variables()) {
      if (mm.has(v) && !total.has(v)) throw ValidationError("gamma depends on momentum coordinate '" + v + "'");
    }
  };
  for (const auto& row : gamma_) {
    if (static_cast<int>(row.size()) != family_.n_fields()) throw ValidationError("gamma needs one entry per field");
    for (const auto& e : row) check(e);
  }
  if (rho_) check(*rho_);
}

const Expr& GammaSection::gamma(int i, int a) const {
  return gamma_.at(static_cast<std::size_t>(i)).at(static_cast<std::size_t>(a));
}

SectionMap GammaSection::as_dual_jet_section() const {
  const auto& c = *family_.dual_jet;
  std::map<std::string, Expr> images;
  for (int i = 0; i < family_.m(); ++i) {
    for (int a = 0; a < family_.n_fields(); ++a) images.emplace(c.momentum_name(i, a), gamma(i, a));
  }
  return SectionMap(family_.total, family_.dual_jet, images);
}

namespace {

SectionMap lift_with(const GammaSection& g, const Expr& energy) {
  const auto& f = g.family();
  const auto& mm = *f.multimomentum;
  std::map<std::string, Expr> images{{mm.energy_name(), energy}};
  for (int i = 0; i < f.m(); ++i) {
    for (int a = 0; a < f.n_fields(); ++a) images.emplace(mm.momentum_name(i, a), g.gamma(i, a));
  }
  return SectionMap(f.total, f.multimomentum, images);
}

std::string sym_name(const ChartSpec& c, int i, int a, int b) {
  return "sym[" + c.base_name(i) + "," + c.fiber_name(a) + "," + c.fiber_name(b) + "]";
}

void append_symmetry(const GammaSection& g, Residual& out) {
  const auto& c = *g.family().total;
  for (int i = 0; i < c.base_dim(); ++i) {
    for (int a = 0; a < c.fiber_dim(); ++a) {
      for (int b = a + 1; b < c.fiber_dim(); ++b) {
        const Expr s = diff(g.gamma(i, a), c.fiber_name(b)) - diff(g.gamma(i, b), c.fiber_name(a));
        out.components.push_back({sym_name(c, i, a, b), s, 0.0});
      }
    }
  }
}

/// -sum_a r_a du^a ^ vol - sum_{i, a<b} s^i_ab du^a ^ du^b ^ (d_i _| vol)
DifferentialForm assemble(const ChartPtr& c, const Residual& r) {
  DifferentialForm out(c, c->base_dim() + 1);
  const DifferentialForm vol = volume_form(c);
  std::size_t k = 0;
  for (int a = 0; a < c->fiber_dim(); ++a, ++k) {
    out -= r.components[k].expr * wedge(DifferentialForm::differential(c, c->fiber_name(a)), vol);
  }
  for (int i = 0; i < c->base_dim(); ++i) {
    const DifferentialForm iv = contracted_volume(c, i);
    for (int a = 0; a < c->fiber_dim(); ++a) {
      for (int b = a + 1; b < c->fiber_dim(); ++b, ++k) {
        out -= r.components[k].expr *
               wedge(DifferentialForm::monomial(c, Expr(1), {c->fiber_name(a), c->fiber_name(b)}), iv);
      }
    }
  }
  return out;
}

}  // namespace

SectionMap GammaSection::lift() const {
  if (!rho_) throw ValidationError("gamma-bar needs its p-component rho");
  return lift_with(*this, *rho_);
}

SectionMap GammaSection::hamiltonian_lift(const HamiltonianData& h) const {
  return lift_with(*this, -substitute(h.expr(), as_dual_jet_section().substitution()));
}

Residual check_closed(const GammaSection& gbar) {
  if (!gbar.rho()) throw ValidationError("check_closed needs rho");
  const auto& c = *gbar.family().total;
  Residual out;
  out.symbolic = true;
  for (int a = 0; a < c.fiber_dim(); ++a) {
    Expr r = diff(*gbar.rho(), c.fiber_name(a));
    for (int i = 0; i < c.base_dim(); ++i) r -= diff(gbar.gamma(i, a), c.base_name(i));
    out.components.push_back({"closed[" + c.fiber_name(a) + "]", r, 0.0});
  }
  append_symmetry(gbar, out);
  return out;
}

DifferentialForm hj_form(const GammaSection& g, const HamiltonianData& h, const LeeForm& theta) {
  const DifferentialForm beta = pullback(g.hamiltonian_lift(h), canonical_forms(g.family().multimomentum).theta2);
  return lichnerowicz(beta, theta.on(g.family().total));
}

DifferentialForm multisymplectic_hj_form(const GammaSection& g, const HamiltonianData& h) {
  return exterior_derivative(pullback(g.as_dual_jet_section(), theta_h(h)));
}

DifferentialForm lift_identity(const GammaSection& gbar, const LeeForm& theta) {
  const SectionMap lift = gbar.lift();
  const ChartPtr& mm = gbar.family().multimomentum;
  const DifferentialForm beta = pullback(lift, canonical_forms(mm).theta2);
  return pullback(lift, lcms_form(mm, theta)) + lichnerowicz(beta, theta.on(gbar.family().total));
}

Residual hj_residual(const GammaSection& g, const HamiltonianData& h, const LeeForm& theta) {
  const auto& f = g.family();
  const auto& c = *f.total;
  const auto sub = g.as_dual_jet_section().substitution();
  Residual out;
  out.symbolic = true;
  for (int a = 0; a < f.n_fields(); ++a) {
    Expr r = substitute(h.du(a), sub);
    for (int i = 0; i < f.m(); ++i) {
      for (int b = 0; b < f.n_fields(); ++b) r += substitute(h.dp(i, b), sub) * diff(g.gamma(i, b), c.fiber_name(a));
      r += diff(g.gamma(i, a), c.base_name(i)) - theta.component(i) * g.gamma(i, a);
    }
    out.components.push_back({"r[" + c.fiber_name(a) + "]", r, 0.0});
  }
  append_symmetry(g, out);
  if (!(hj_form(g, h, theta) - assemble(f.total, out)).is_zero()) {
    throw std::logic_error("hj_residual: coordinate residual disagrees with d_theta(h o gamma)");
  }
  return out;
}

ReducedHJResult reduced_hj_residual(const ChartFamily& family, const std::vector<Expr>& s, const HamiltonianData& h,
                                    std::optional<Expr> f) {
  const auto& e = *family.total;
  const auto& jet = *family.dual_jet;
  if (static_cast<int>(s.size()) != family.m()) throw ValidationError("S needs one component per base coordinate");
  std::map<std::string, Expr> sub;
  Expr lhs;
  for (int i = 0; i < family.m(); ++i) {
    lhs += diff(s[static_cast<std::size_t>(i)], e.base_name(i));
    for (int a = 0; a < family.n_fields(); ++a) {
      sub.emplace(jet.momentum_name(i, a), diff(s[static_cast<std::size_t>(i)], e.fiber_name(a)));
    }
  }
  lhs += substitute(h.expr(), sub);
  ReducedHJResult out;
  if (f) {
    out.f = *f;
  } else {
    out.f_inferred = true;
    auto at = [&](int value) {
      std::map<std::string, Expr> fiber;
      for (int a = 0; a < family.n_fields(); ++a) fiber.emplace(e.fiber_name(a), Expr(value));
      return substitute(lhs, fiber);
    };
    try {
      out.f = at(0);
    } catch (const DomainError&) {
      out.f = at(1);
    }
  }
  out.residual.symbolic = true;
  out.residual.components.push_back({"hj", lhs - out.f, 0.0});
  return out;
}

std::string HJReport::to_text() const {
  std::ostringstream os;
  os.precision(17);
  os << "closed: " << (closed ? "yes" : "no") << "\n";
  if (closedness) os << "closedness_norm_zero: " << (closedness->is_zero() ? "yes" : "no") << "\n";
  os << "flat: " << (flat ? "yes" : "no") << "\n";
  os << "hj_symbolic_zero: " << (symbolic_hj_zero ? "yes" : "no") << "\n";
  os << "hj_norm: " << hj_norm << "\n";
  os << "roundtrip_norm: " << roundtrip_norm << "\n";
  os << "hj_holds: " << (hj_holds ? "yes" : "no") << "\n";
  os << "roundtrip_holds: " << (roundtrip_holds ? "yes" : "no") << "\n";
  os << "samples: " << samples << "\n";
  os << "consistent: " << (consistent() ? "yes" : "no") << "\n";
  return os.str();
}

HJReport roundtrip_verify(const GammaSection& g, const HamiltonianData& h, const LeeForm& theta,
                          const RoundtripOptions& options) {
  const auto& f = g.family();
  const ChartPtr& e = f.total;
  const int m = f.m();
  const int n = f.n_fields();
  if (options.initial.empty()) throw ValidationError("roundtrip needs at least one initial value");
  if (!(options.step > 0.0) || !(options.stop > options.start)) throw ValidationError("roundtrip box is empty");

  HJReport report;
  if (g.rho()) {
    report.closedness = check_closed(g);
    report.closed = report.closedness->is_zero();
  }
  report.hj = hj_residual(g, h, theta);
  report.symbolic_hj_zero = report.hj.is_zero();
  const ReducedConnection rc = reduce_connection(connection_from_hamiltonian(h, theta), g.as_dual_jet_section());
  report.flat = m == 1 || rc.is_flat();

  std::vector<Expr> slope;
  for (int a = 0; a < n; ++a) {
    for (int d = 0; d < m; ++d) slope.push_back(rc.fiber_part[static_cast<std::size_t>(a)][static_cast<std::size_t>(d)]);
  }
  std::vector<Expr> gamma;
  for (int i = 0; i < m; ++i) {
    for (int a = 0; a < n; ++a) gamma.push_back(g.gamma(i, a));
  }
  std::vector<Expr> hj;
  for (const auto& comp : report.hj.components) hj.push_back(comp.expr);
  const Compiled slope_fn(slope, e->names());
  const Compiled gamma_fn(gamma, e->names());
  const Compiled hj_fn(hj, e->names());

  const auto cells = static_cast<int>(std::llround((options.stop - options.start) / options.step));
  if (cells < 4) throw ValidationError("roundtrip box needs at least four steps per dimension");
  const double hstep = (options.stop - options.start) / cells;
  const int nodes = cells + 1;

  std::vector<double> point(static_cast<std::size_t>(e->dim()));
  auto set_point = [&](const std::vector<double>& x, const double* u) {
    for (int i = 0; i < m; ++i) point[static_cast<std::size_t>(e->base_index(i))] = x[static_cast<std::size_t>(i)];
    for (int a = 0; a < n; ++a) point[static_cast<std::size_t>(e->fiber_index(a))] = u[a];
  };
  // du^a/dx^d = G^a_d(x, u) along one coordinate line.
  auto rate = [&](int d, const std::vector<double>& x, const std::vector<double>& u, std::vector<double>& out) {
    set_point(x, u.data());
    for (int a = 0; a < n; ++a) out[static_cast<std::size_t>(a)] = slope_fn(static_cast<std::size_t>(a * m + d), point.data());
  };

  for (const auto& init : options.initial) {
    if (static_cast<int>(init.size()) != n) throw ValidationError("initial value needs one entry per field");
    // sigma[node][a], filled one dimension at a time (x^0 slowest).
    std::vector<std::vector<double>> sigma{init};
    std::vector<double> k1(static_cast<std::size_t>(n)), k2(k1), k3(k1), k4(k1), tmp(k1);
    for (int d = 0; d < m; ++d) {
      std::vector<std::vector<double>> next(sigma.size() * static_cast<std::size_t>(nodes));
      for (std::size_t o = 0; o < sigma.size(); ++o) {
        std::vector<double> x(static_cast<std::size_t>(m), options.start);
        std::size_t rest = o;
        for (int j = d - 1; j >= 0; --j) {
          x[static_cast<std::size_t>(j)] = options.start + hstep * static_cast<double>(rest % static_cast<std::size_t>(nodes));
          rest /= static_cast<std::size_t>(nodes);
        }
        std::vector<double> u = sigma[o];
        next[o * static_cast<std::size_t>(nodes)] = u;
        for (int s = 1; s < nodes; ++s) {
          auto& xd = x[static_cast<std::size_t>(d)];
          const double x0 = xd;
          rate(d, x, u, k1);
          for (int a = 0; a < n; ++a) tmp[static_cast<std::size_t>(a)] = u[static_cast<std::size_t>(a)] + 0.5 * hstep * k1[static_cast<std::size_t>(a)];
          xd = x0 + 0.5 * hstep;
          rate(d, x, tmp, k2);
          for (int a = 0; a < n; ++a) tmp[static_cast<std::size_t>(a)] = u[static_cast<std::size_t>(a)] + 0.5 * hstep * k2[static_cast<std::size_t>(a)];
          rate(d, x, tmp, k3);
          for (int a = 0; a < n; ++a) tmp[static_cast<std::size_t>(a)] = u[static_cast<std::size_t>(a)] + hstep * k3[static_cast<std::size_t>(a)];
          xd = options.start + hstep * s;
          rate(d, x, tmp, k4);
          for (int a = 0; a < n; ++a) {
            const auto aa = static_cast<std::size_t>(a);
            u[aa] += hstep / 6.0 * (k1[aa] + 2.0 * k2[aa] + 2.0 * k3[aa] + k4[aa]);
            detail::require_finite(u[aa], "roundtrip integration");
          }
          next[o * static_cast<std::size_t>(nodes) + static_cast<std::size_t>(s)] = u;
        }
      }
      sigma = std::move(next);
    }

    GridSection grid;
    grid.nodes.assign(static_cast<std::size_t>(m), nodes);
    grid.origin.assign(static_cast<std::size_t>(m), options.start);
    grid.spacing.assign(static_cast<std::size_t>(m), hstep);
    grid.periodic.assign(static_cast<std::size_t>(m), false);
    const std::size_t size = grid.size();
    grid.sigma.assign(static_cast<std::size_t>(n), std::vector<double>(size));
    grid.momenta.assign(static_cast<std::size_t>(m),
                        std::vector<std::vector<double>>(static_cast<std::size_t>(n), std::vector<double>(size)));
    for (std::size_t k = 0; k < size; ++k) {
      set_point(grid.coordinate(k), sigma[k].data());
      for (int a = 0; a < n; ++a) grid.sigma[static_cast<std::size_t>(a)][k] = sigma[k][static_cast<std::size_t>(a)];
      for (int i = 0; i < m; ++i) {
        for (int a = 0; a < n; ++a) {
          grid.momenta[static_cast<std::size_t>(i)][static_cast<std::size_t>(a)][k] =
              gamma_fn(static_cast<std::size_t>(i * n + a), point.data());
        }
      }
      for (std::size_t c = 0; c < hj_fn.size(); ++c) report.hj_norm = std::max(report.hj_norm, std::abs(hj_fn(c, point.data())));
    }
    report.samples += size;
    report.roundtrip_norm = std::max(report.roundtrip_norm, lchdw_residual(grid, h, theta, 4).max_norm());
  }
  report.hj_holds = report.hj_norm < options.hj_tolerance;
  report.roundtrip_holds = report.roundtrip_norm < options.roundtrip_tolerance;
  return report;
}

}  // namespace lcms
