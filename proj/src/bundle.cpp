#include "lcms/bundle.hpp"

#include "lcms/errors.hpp"

namespace lcms {

namespace {

void require_kind(const ChartPtr& chart, BundleKind kind, const char* what) {
  if (chart->kind() != kind) throw ValidationError(std::string(what) + ": wrong chart kind");
}

}  // namespace

LeeForm::LeeForm(const ChartFamily& family, std::vector<Expr> components)
    : base_(family.base), components_(std::move(components)) {
  if (static_cast<int>(components_.size()) != family.m()) {
    throw ValidationError("Lee form needs one component per base coordinate");
  }
  for (const auto& c : components_) {
    for (const auto& v : c.free_variables()) {
      if (family.multimomentum->has(v) && !base_->has(v)) {
        throw ValidationError("Lee form component depends on non-base coordinate '" + v + "'");
      }
    }
  }
}

LeeForm LeeForm::zero(const ChartFamily& family) {
  return LeeForm(family, std::vector<Expr>(static_cast<std::size_t>(family.m())));
}

bool LeeForm::is_zero() const {
  for (const auto& c : components_) {
    if (!c.is_zero()) return false;
  }
  return true;
}

bool LeeForm::is_closed() const {
  const int m = base_->base_dim();
  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j) {
      if (!(diff(component(i), base_->base_name(j)) - diff(component(j), base_->base_name(i))).is_zero()) return false;
    }
  }
  return true;
}

void LeeForm::require_closed() const {
  if (!is_closed()) throw ValidationError("Lee form is not closed");
}

DifferentialForm LeeForm::on(const ChartPtr& chart) const {
  DifferentialForm out(chart, 1);
  for (int i = 0; i < base_->base_dim(); ++i) {
    out.add({chart->index_of(base_->base_name(i))}, component(i));
  }
  return out;
}

Expr LeeForm::contract_momenta(const ChartPtr& chart, int a) const {
  Expr out;
  for (int i = 0; i < base_->base_dim(); ++i) out += component(i) * chart->var(chart->momentum_name(i, a));
  return out;
}

HamiltonianData::HamiltonianData(ChartFamily family, Expr h) : family_(std::move(family)), h_(std::move(h)) {
  const auto& mm = *family_.multimomentum;
  for (const auto& v : h_.free_variables()) {
    if (v == mm.energy_name()) throw ValidationError("Hamiltonian must not depend on the energy coordinate '" + v + "'");
    if (mm.has(v) && !family_.dual_jet->has(v)) throw ValidationError("Hamiltonian depends on '" + v + "'");
  }
}

Expr HamiltonianData::du(int a) const { return diff(h_, family_.dual_jet->fiber_name(a)); }

Expr HamiltonianData::dp(int i, int a) const { return diff(h_, family_.dual_jet->momentum_name(i, a)); }

Expr HamiltonianData::density() const {
  return Expr::variable(family_.multimomentum->energy_name()) + h_;
}

HamiltonianData scalar_field_hamiltonian(const ChartFamily& family) {
  const auto& c = *family.dual_jet;
  Expr sum;
  for (int a = 0; a < family.n_fields(); ++a) {
    for (int i = 0; i < family.m(); ++i) {
      for (int j = 0; j < family.m(); ++j) {
        sum += c.metric(i, j) * c.var(c.momentum_name(i, a)) * c.var(c.momentum_name(j, a));
      }
    }
  }
  return HamiltonianData(family, Expr(Number::rational(1, 2)) * sum / c.volume());
}

CanonicalForms canonical_forms(const ChartPtr& mm) {
  require_kind(mm, BundleKind::MultiMomentum, "canonical_forms");
  DifferentialForm theta2 = mm->var(mm->energy_name()) * volume_form(mm);
  for (int i = 0; i < mm->base_dim(); ++i) {
    const DifferentialForm iv = contracted_volume(mm, i);
    for (int a = 0; a < mm->fiber_dim(); ++a) {
      theta2 += mm->var(mm->momentum_name(i, a)) * wedge(DifferentialForm::differential(mm, mm->fiber_name(a)), iv);
    }
  }
  DifferentialForm omega2 = -exterior_derivative(theta2);
  return {std::move(theta2), std::move(omega2)};
}

DifferentialForm tautological_form(const ChartPtr& fb) {
  require_kind(fb, BundleKind::FormsBundle, "tautological_form");
  DifferentialForm out(fb, fb->form_degree());
  for (const auto& [subset, name] : fb->form_coordinates()) {
    BasisIndex idx;
    for (int i : subset) idx.push_back(fb->base_index(i));
    out.add(std::move(idx), fb->var(name));
  }
  return out;
}

DifferentialForm canonical_omega(const ChartPtr& fb) { return -exterior_derivative(tautological_form(fb)); }

DifferentialForm section_as_form(const SectionMap& kappa) {
  const ChartPtr& fb = kappa.target();
  require_kind(fb, BundleKind::FormsBundle, "section_as_form");
  const ChartPtr& src = kappa.source();
  DifferentialForm out(src, fb->form_degree());
  for (const auto& [subset, name] : fb->form_coordinates()) {
    BasisIndex idx;
    for (int i : subset) idx.push_back(src->index_of(fb->base_name(i)));
    out.add(std::move(idx), kappa.image(name));
  }
  return out;
}

DifferentialForm lcms_form(const ChartPtr& mm, const LeeForm& theta) {
  theta.require_closed();
  return -lichnerowicz(canonical_forms(mm).theta2, theta.on(mm));
}

SectionMap hamiltonian_section(const HamiltonianData& h) {
  const auto& f = h.family();
  return SectionMap(f.dual_jet, f.multimomentum, {{f.multimomentum->energy_name(), -h.expr()}});
}

DifferentialForm theta_h(const HamiltonianData& h) {
  return pullback(hamiltonian_section(h), canonical_forms(h.family().multimomentum).theta2);
}

DifferentialForm omega_h(const HamiltonianData& h, const LeeForm& theta) {
  return pullback(hamiltonian_section(h), lcms_form(h.family().multimomentum, theta));
}

DifferentialForm multisymplectic_omega_h(const HamiltonianData& h) {
  const ChartPtr& c = h.family().dual_jet;
  DifferentialForm out = wedge(exterior_derivative(DifferentialForm::function(c, h.expr())), volume_form(c));
  for (int i = 0; i < c->base_dim(); ++i) {
    const DifferentialForm iv = contracted_volume(c, i);
    for (int a = 0; a < c->fiber_dim(); ++a) {
      out -= wedge(DifferentialForm::monomial(c, Expr(1), {c->momentum_name(i, a), c->fiber_name(a)}), iv);
    }
  }
  return out;
}

Connection connection_from_hamiltonian(const HamiltonianData& h, const LeeForm& theta) {
  theta.require_closed();
  const ChartPtr& c = h.family().dual_jet;
  const int m = h.m();
  Connection out = Connection::zero(c);
  for (int a = 0; a < h.n_fields(); ++a) {
    const Expr trace_share = (theta.contract_momenta(c, a) - h.du(a)) * Expr(Number::rational(1, m));
    for (int i = 0; i < m; ++i) {
      out.fiber_part[static_cast<std::size_t>(a)][static_cast<std::size_t>(i)] = h.dp(i, a);
      out.momentum_part[static_cast<std::size_t>(i)][static_cast<std::size_t>(a)][static_cast<std::size_t>(i)] =
          trace_share;
    }
  }
  return out;
}

DifferentialForm check_connection_condition(const Connection& c, const HamiltonianData& h, const LeeForm& theta) {
  const DifferentialForm w = omega_h(h, theta);
  return contract_connection(c, w) - Expr(h.m() - 1) * w;
}

VectorField ReducedConnection::lift(int j) const {
  VectorField v(chart);
  v.set(chart->base_name(j), Expr(1));
  for (int a = 0; a < chart->fiber_dim(); ++a) {
    v.set(chart->fiber_name(a), fiber_part.at(static_cast<std::size_t>(a)).at(static_cast<std::size_t>(j)));
  }
  return v;
}

std::vector<Expr> ReducedConnection::curvature() const {
  const int m = chart->base_dim();
  const int n = chart->fiber_dim();
  auto g = [&](int a, int j) -> const Expr& {
    return fiber_part[static_cast<std::size_t>(a)][static_cast<std::size_t>(j)];
  };
  std::vector<Expr> out;
  for (int a = 0; a < n; ++a) {
    for (int i = 0; i < m; ++i) {
      for (int j = i + 1; j < m; ++j) {
        Expr r = diff(g(a, j), chart->base_name(i)) - diff(g(a, i), chart->base_name(j));
        for (int b = 0; b < n; ++b) {
          r += g(b, i) * diff(g(a, j), chart->fiber_name(b)) - g(b, j) * diff(g(a, i), chart->fiber_name(b));
        }
        out.push_back(r);
      }
    }
  }
  return out;
}

bool ReducedConnection::is_flat() const {
  for (const auto& r : curvature()) {
    if (!r.is_zero()) return false;
  }
  return true;
}

ReducedConnection reduce_connection(const Connection& c, const SectionMap& gamma) {
  require_kind(gamma.source(), BundleKind::Total, "reduce_connection");
  if (!gamma.target()->same_as(*c.chart)) throw ChartMismatch("reduce_connection: section does not land on J1pi*");
  const auto sub = gamma.substitution();
  ReducedConnection out{gamma.source(), c.fiber_part};
  for (auto& row : out.fiber_part) {
    for (auto& e : row) e = substitute(e, sub);
  }
  return out;
}

VectorField reduced_lift(const Connection& c, const SectionMap& gamma, const VectorField& y) {
  const ReducedConnection r = reduce_connection(c, gamma);
  const auto sub = gamma.substitution();
  const ChartPtr& e = r.chart;
  std::vector<Expr> comps(static_cast<std::size_t>(e->dim()));
  for (int j = 0; j < e->base_dim(); ++j) {
    const Expr yj = substitute(y.component(c.chart->base_index(j)), sub);
    if (yj.is_zero()) continue;
    const VectorField lift = r.lift(j);
    for (const auto& [k, v] : lift.components()) comps[static_cast<std::size_t>(k)] += yj * v;
  }
  VectorField out(e);
  for (int k = 0; k < e->dim(); ++k) out.set(e->name(k), comps[static_cast<std::size_t>(k)]);
  return out;
}

DifferentialForm rescaled_differential(const DifferentialForm& omega_theta, const ConformalFactor& sigma) {
  return exterior_derivative(exp(-sigma.sigma) * omega_theta);
}

DifferentialForm local_rescaling_check(const DifferentialForm& omega_theta, const ConformalFactor& sigma,
                                       const LeeForm& theta) {
  const ChartPtr& base = theta.base();
  for (const auto& v : sigma.sigma.free_variables()) {
    if (omega_theta.chart()->has(v) && !base->has(v)) {
      throw ValidationError("conformal factor depends on non-base coordinate '" + v + "'");
    }
  }
  for (int i = 0; i < base->base_dim(); ++i) {
    if (!(diff(sigma.sigma, base->base_name(i)) - theta.component(i)).is_zero()) {
      throw ValidationError("d sigma does not equal the Lee form");
    }
  }
  return rescaled_differential(omega_theta, sigma);
}

bool lagrangian_check(const SectionMap& gamma_bar, const LeeForm& theta) {
  require_kind(gamma_bar.target(), BundleKind::MultiMomentum, "lagrangian_check");
  const DifferentialForm form = pullback(gamma_bar, canonical_forms(gamma_bar.target()).theta2);
  return lichnerowicz(form, theta.on(gamma_bar.source())).is_zero();
}

bool is_one_nondegenerate(const DifferentialForm& omega, const Point& at) {
  return contraction_rank(omega, at) == omega.chart()->dim();
}

}  // namespace lcms
