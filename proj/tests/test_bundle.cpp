#include <random>

#include "doctest.h"
#include "lcms/bundle.hpp"
#include "lcms/errors.hpp"
#include "lcms/identities.hpp"

using namespace lcms;

namespace {

DifferentialForm d(const ChartPtr& c, const std::string& name) { return DifferentialForm::differential(c, name); }

DifferentialForm dd(const ChartPtr& c, const std::vector<std::string>& names) {
  return DifferentialForm::monomial(c, Expr(1), names);
}

ChartFamily euclid2() {
  ChartLayout l;
  l.base = {"x", "y"};
  l.fiber = {"u"};
  return ChartFamily::make(l);
}

}  // namespace

TEST_CASE("canonical forms") {
  const ChartFamily f1 = ChartFamily::make(default_layout(1, 1));
  const ChartPtr c = f1.multimomentum;
  const auto cf = canonical_forms(c);
  CHECK((cf.theta2 - (c->var("p") * d(c, "t") + c->var("p_t_u") * d(c, "u"))).is_zero());

  const ChartPtr c2 = euclid2().multimomentum;
  const auto t2 = canonical_forms(c2).theta2;
  const auto oracle = c2->var("p") * dd(c2, {"x", "y"}) + c2->var("p_x_u") * dd(c2, {"u", "y"}) -
                      c2->var("p_y_u") * dd(c2, {"u", "x"});
  CHECK((t2 - oracle).is_zero());

  for (int m = 1; m <= 3; ++m) {
    for (int n = 1; n <= 2; ++n) {
      const auto f = ChartFamily::make(default_layout(m, n));
      const auto forms = canonical_forms(f.multimomentum);
      CHECK((forms.omega2 + exterior_derivative(forms.theta2)).is_zero());
      Point at;
      for (const auto& name : f.multimomentum->names()) at[name] = 0.3;
      CHECK(is_one_nondegenerate(forms.omega2, at));
      CHECK(contraction_rank(forms.theta2, at) < f.multimomentum->dim());
    }
  }
  CHECK_THROWS_AS(canonical_forms(f1.dual_jet), ValidationError);
}

TEST_CASE("Lee form validation") {
  const ChartFamily f = euclid2();
  CHECK(LeeForm(f, {parse("y"), parse("x")}).is_closed());
  CHECK_FALSE(LeeForm(f, {parse("y"), parse("-x")}).is_closed());
  CHECK_THROWS_AS(LeeForm(f, {parse("u"), Expr()}), ValidationError);
  CHECK_THROWS_AS(LeeForm(f, {Expr()}), ValidationError);
  CHECK_THROWS_AS(lcms_form(f.multimomentum, LeeForm(f, {parse("y"), parse("-x")})), ValidationError);
}

TEST_CASE("lcms form examples") {
  const ChartFamily f1 = ChartFamily::make(default_layout(1, 1));
  const ChartPtr c = f1.multimomentum;
  CHECK((lcms_form(c, LeeForm::zero(f1)) - canonical_forms(c).omega2).is_zero());

  const Expr th = Expr::variable("th");
  const auto w = lcms_form(c, LeeForm(f1, {th}));
  const auto oracle1 = -dd(c, {"p", "t"}) - dd(c, {"p_t_u", "u"}) - th * c->var("p_t_u") * dd(c, {"u", "t"});
  CHECK((w - oracle1).is_zero());

  const ChartFamily f2 = euclid2();
  const ChartPtr c2 = f2.multimomentum;
  const Expr a = Expr::variable("a"), b = Expr::variable("b");
  const auto w2 = lcms_form(c2, LeeForm(f2, {a, b}));
  const auto vol = volume_form(c2);
  DifferentialForm oracle2 = -wedge(d(c2, "p"), vol);
  const std::vector<std::string> xs{"x", "y"};
  for (int i = 0; i < 2; ++i) {
    const std::string pi = c2->momentum_name(i, 0);
    oracle2 -= wedge(dd(c2, {pi, "u"}), contracted_volume(c2, i));
  }
  oracle2 -= (a * c2->var("p_x_u") + b * c2->var("p_y_u")) * wedge(d(c2, "u"), vol);
  CHECK((w2 - oracle2).is_zero());
  // same form written as Omega_2 + theta ^ Theta_2
  const auto cf = canonical_forms(c2);
  CHECK((w2 - cf.omega2 - wedge(LeeForm(f2, {a, b}).on(c2), cf.theta2)).is_zero());
}

TEST_CASE("Hamiltonian sections") {
  const ChartFamily f1 = ChartFamily::make(default_layout(1, 2));
  const HamiltonianData h(f1, parse("1/2*(p_t_u0^2 + p_t_u1^2)"));
  CHECK(hamiltonian_section(h).image("p") == parse("-1/2*(p_t_u0^2 + p_t_u1^2)"));
  CHECK(hamiltonian_section(HamiltonianData(f1, Expr())).image("p").is_zero());
  CHECK_THROWS_AS(HamiltonianData(f1, parse("p*u0")), ValidationError);

  ChartLayout l;
  l.base = {"x", "y"};
  l.fiber = {"u"};
  l.metric = {{Expr(2), Expr()}, {Expr(), Expr(8)}};
  const ChartFamily f2 = ChartFamily::make(l);
  CHECK(f2.dual_jet->volume() == Expr(4));
  const HamiltonianData s = scalar_field_hamiltonian(f2);
  CHECK(hamiltonian_section(s).image("p") == parse("-1/8*(2*p_x_u^2 + 8*p_y_u^2)"));
}

TEST_CASE("omega_h") {
  const ChartFamily f1 = ChartFamily::make(default_layout(1, 1));
  const ChartPtr j = f1.dual_jet;
  const HamiltonianData h(f1, parse("1/2*p_t_u^2"));
  const auto w = omega_h(h, LeeForm::zero(f1));
  CHECK((w - (j->var("p_t_u") * dd(j, {"p_t_u", "t"}) - dd(j, {"p_t_u", "u"}))).is_zero());
  CHECK((w - multisymplectic_omega_h(h)).is_zero());

  const ChartFamily f2 = ChartFamily::make(default_layout(2, 2));
  const HamiltonianData zero(f2, Expr());
  CHECK((omega_h(zero, LeeForm::zero(f2)) - multisymplectic_omega_h(zero)).is_zero());

  // coordinate expansion with the adopted sign of the conformal term
  std::mt19937_64 rng(17);
  for (int m = 1; m <= 3; ++m) {
    const ChartFamily f = ChartFamily::make(default_layout(m, 2));
    const ChartPtr c = f.dual_jet;
    const HamiltonianData hh(f, random_polynomial(rng, c->names(), 3, 2));
    const LeeForm theta = random_closed_lee_form(rng, f);
    const auto vol = volume_form(c);
    DifferentialForm oracle(c, m + 1);
    for (int a = 0; a < 2; ++a) {
      const std::string u = c->fiber_name(a);
      oracle += (hh.du(a) - theta.contract_momenta(c, a)) * wedge(d(c, u), vol);
      for (int i = 0; i < m; ++i) {
        const std::string p = c->momentum_name(i, a);
        oracle += hh.dp(i, a) * wedge(d(c, p), vol);
        oracle -= wedge(dd(c, {p, u}), contracted_volume(c, i));
      }
    }
    CHECK((omega_h(hh, theta) - oracle).is_zero());
    // (Omega_theta)_h = -d_theta Theta_h
    CHECK((omega_h(hh, theta) + lichnerowicz(theta_h(hh), theta.on(c))).is_zero());
  }
}

TEST_CASE("connection from Hamiltonian") {
  const ChartFamily f1 = ChartFamily::make(default_layout(1, 1));
  const Expr th = Expr::variable("th");
  const HamiltonianData h(f1, parse("1/2*p_t_u^2"));
  const Connection c = connection_from_hamiltonian(h, LeeForm(f1, {th}));
  CHECK(c.fiber_part[0][0] == parse("p_t_u"));
  CHECK(c.momentum_part[0][0][0] == th * parse("p_t_u"));
  CHECK(check_connection_condition(c, h, LeeForm(f1, {th})).is_zero());

  const Connection z = connection_from_hamiltonian(HamiltonianData(f1, Expr()), LeeForm::zero(f1));
  CHECK(z.fiber_part[0][0].is_zero());
  CHECK(z.momentum_part[0][0][0].is_zero());

  const auto bad = check_connection_condition(Connection::zero(f1.dual_jet), h, LeeForm(f1, {th}));
  CHECK_FALSE(bad.is_zero());
  // only the slot dt ^ i_{d/dt} survives: (dH/du - th p) du ^ dt
  CHECK(bad.coefficient({"u", "t"}) == -th * parse("p_t_u"));

  ChartLayout l;
  l.base = {"x", "y"};
  l.fiber = {"u"};
  l.metric = {{Expr(1), Expr()}, {Expr(), Expr(4)}};
  const ChartFamily f2 = ChartFamily::make(l);
  const HamiltonianData s = scalar_field_hamiltonian(f2);
  const LeeForm theta(f2, {Expr::variable("a"), Expr::variable("b")});
  const Connection cs = connection_from_hamiltonian(s, theta);
  CHECK(cs.fiber_part[0][0] == parse("1/2*p_x_u"));
  CHECK(cs.fiber_part[0][1] == parse("2*p_y_u"));
  CHECK(cs.momentum_part[0][0][0] + cs.momentum_part[1][0][1] == parse("a*p_x_u + b*p_y_u"));
  CHECK(check_connection_condition(cs, s, theta).is_zero());
  CHECK_FALSE(check_connection_condition(Connection::zero(f2.dual_jet), s, theta).is_zero());

  for (int m = 1; m <= 3; ++m) {
    const ChartFamily f = ChartFamily::make(default_layout(m, 1));
    const HamiltonianData sf = scalar_field_hamiltonian(f);
    const Connection hdw = connection_from_hamiltonian(sf, LeeForm::zero(f));
    const auto w = multisymplectic_omega_h(sf);
    CHECK((contract_connection(hdw, w) - Expr(m - 1) * w).is_zero());
  }
}

TEST_CASE("trace split: only the trace enters the condition") {
  const ChartFamily f = euclid2();
  const HamiltonianData s = scalar_field_hamiltonian(f);
  const LeeForm theta(f, {Expr(1), Expr()});
  Connection c = connection_from_hamiltonian(s, theta);
  // move weight between diagonal entries and add an off-diagonal term
  c.momentum_part[0][0][0] += parse("u^2");
  c.momentum_part[1][0][1] -= parse("u^2");
  c.momentum_part[0][0][1] += parse("x*y");
  CHECK(check_connection_condition(c, s, theta).is_zero());
}

TEST_CASE("reduced connection") {
  const ChartFamily f1 = ChartFamily::make(default_layout(1, 1));
  const Expr th = Expr::variable("th");
  const HamiltonianData h(f1, parse("1/2*p_t_u^2"));
  const Connection c = connection_from_hamiltonian(h, LeeForm(f1, {th}));
  const Expr gamma = Expr::variable("c") * exp(th * Expr::variable("t"));
  const SectionMap g(f1.total, f1.dual_jet, {{"p_t_u", gamma}});
  const ReducedConnection r = reduce_connection(c, g);
  CHECK(r.fiber_part[0][0] == gamma);
  CHECK(r.is_flat());
  const SectionMap g0(f1.total, f1.dual_jet, {{"p_t_u", Expr()}});
  CHECK(reduce_connection(c, g0).fiber_part[0][0].is_zero());

  VectorField y1(f1.dual_jet), y2(f1.dual_jet);
  y1.set("t", parse("1 + u^2")).set("u", Expr(3));
  y2.set("t", parse("1 + u^2")).set("u", Expr(3)).set("p_t_u", parse("t*p_t_u + 7"));
  const VectorField l1 = reduced_lift(c, g, y1), l2 = reduced_lift(c, g, y2);
  for (int k = 0; k < f1.total->dim(); ++k) CHECK(l1.component(k) == l2.component(k));

  // m = 2: a flat and a curved reduced connection
  const ChartFamily f2 = euclid2();
  const HamiltonianData s = scalar_field_hamiltonian(f2);
  const Connection cs = connection_from_hamiltonian(s, LeeForm(f2, {Expr::variable("k"), Expr()}));
  const SectionMap flat(f2.total, f2.dual_jet, {{"p_x_u", parse("a*exp(k*x)")}, {"p_y_u", parse("b")}});
  CHECK(reduce_connection(cs, flat).is_flat());
  const SectionMap curved(f2.total, f2.dual_jet, {{"p_x_u", parse("u")}, {"p_y_u", parse("x")}});
  CHECK_FALSE(reduce_connection(cs, curved).is_flat());
}

TEST_CASE("local rescaling") {
  const ChartFamily f1 = ChartFamily::make(default_layout(1, 1));
  const ChartPtr c = f1.multimomentum;
  CHECK(local_rescaling_check(canonical_forms(c).omega2, {Expr()}, LeeForm::zero(f1)).is_zero());
  const Expr th = Expr::variable("th");
  const LeeForm theta(f1, {th});
  const auto w = lcms_form(c, theta);
  CHECK(local_rescaling_check(w, {th * parse("t")}, theta).is_zero());
  CHECK_THROWS_AS(local_rescaling_check(w, {Expr(2) * th * parse("t")}, theta), ValidationError);
  CHECK_FALSE(rescaled_differential(w, {Expr(2) * th * parse("t")}).is_zero());
  CHECK_FALSE(exterior_derivative(w).is_zero());
}

TEST_CASE("Lagrangian check") {
  const ChartFamily f1 = ChartFamily::make(default_layout(1, 1));
  CHECK(lagrangian_check(SectionMap(f1.total, f1.multimomentum, {{"p", Expr(2)}, {"p_t_u", Expr(3)}}), LeeForm::zero(f1)));
  const SectionMap g(f1.total, f1.multimomentum, {{"p", parse("c*th*exp(th*t)*u")}, {"p_t_u", parse("c*exp(th*t)")}});
  CHECK(lagrangian_check(g, LeeForm::zero(f1)));
  CHECK_FALSE(lagrangian_check(g, LeeForm(f1, {Expr::variable("th")})));
  const SectionMap gc(f1.total, f1.multimomentum, {{"p", Expr()}, {"p_t_u", parse("c*exp(th*t)")}});
  CHECK(lagrangian_check(gc, LeeForm(f1, {Expr::variable("th")})));
  ChartLayout l;
  l.base = {"t"};
  l.fiber = {"u", "v"};
  const ChartFamily f2 = ChartFamily::make(l);
  CHECK_FALSE(lagrangian_check(SectionMap(f2.total, f2.multimomentum, {{"p", Expr()}, {"p_t_u", Expr()}, {"p_t_v", parse("u^2")}}),
                               LeeForm::zero(f2)));
}
