#include <cmath>
#include <numbers>

#include "doctest.h"
#include "lcms/cauchy.hpp"
#include "lcms/errors.hpp"

using namespace lcms;

namespace {

constexpr double kPi = std::numbers::pi;

ChartFamily lorentz() {
  ChartLayout l;
  l.base = {"t", "x"};
  l.fiber = {"u"};
  l.metric = {{Expr(1), Expr()}, {Expr(), Expr(-1)}};
  l.time_sliced = true;
  return ChartFamily::make(l);
}

LeeForm lee(const ChartFamily& f, const std::vector<std::string>& text) {
  std::vector<Expr> c;
  for (const auto& s : text) c.push_back(parse(s));
  return LeeForm(f, c);
}

/// Exact plane wave sigma = sin(2 pi (x - t)) with its momenta.
EmbeddingState plane_wave(const ChartFamily& f, int nodes, double t) {
  FieldState s = FieldState::zeros({1, nodes}, 1);
  s.t = t;
  for (std::size_t k = 0; k < s.grid.size(); ++k) {
    const double phase = 2 * kPi * (s.grid.coordinate(k)[0] - t);
    s.sigma[0][k] = std::sin(phase);
    s.pt[0][k] = -2 * kPi * std::cos(phase);
    s.px[0][0][k] = -2 * kPi * std::cos(phase);
  }
  return {f, s};
}

EmbeddingState constant_state(const ChartFamily& f, int nodes, double t, double sigma, double p) {
  FieldState s = FieldState::zeros({1, nodes}, 1);
  s.t = t;
  for (std::size_t k = 0; k < s.grid.size(); ++k) {
    s.sigma[0][k] = sigma;
    s.pt[0][k] = p;
  }
  return {f, s};
}

TangentField constant_tangent(const EmbeddingState& s, const std::string& name, double value) {
  TangentField v = TangentField::zero(s);
  for (auto& x : v.components[static_cast<std::size_t>(s.family.dual_jet->index_of(name))]) x = value;
  return v;
}

std::vector<EmbeddingState> as_states(const ChartFamily& f, const std::vector<FieldState>& traj) {
  std::vector<EmbeddingState> out;
  for (const auto& s : traj) out.emplace_back(f, s);
  return out;
}

}  // namespace

TEST_CASE("integrate_form") {
  const ChartFamily f = lorentz();
  const ChartPtr c = f.dual_jet;
  const EmbeddingState s = plane_wave(f, 32, 0.1);

  double total = 0.0;
  for (std::size_t k = 0; k < s.size(); ++k) total += s.field.grid.weight();
  CHECK(std::abs(total - 1.0) <= 1e-12);
  CHECK(std::abs(GridSpec{2, 16}.weight() * 256 - 1.0) <= 1e-12);

  const DifferentialForm eta = volume_form(c);
  const TangentField dt = constant_tangent(s, "t", 1.0);
  CHECK(integrate_form(Expr(3) * eta, s, {dt}) == doctest::Approx(3.0).epsilon(1e-14));

  SUBCASE("linearity") {
    const DifferentialForm w = omega_h(scalar_field_hamiltonian(f), lee(f, {"1/2", "0"}));
    const auto probes = make_probes(s, ProbeKind::Vertical, 3, 5);
    const TangentField lift = horizontal_lift_tangent(scalar_field_hamiltonian(f), lee(f, {"1/2", "0"}), s);
    const double lhs = integrate_form(w, s, {lift, probes[0] + probes[1]});
    const double rhs = integrate_form(w, s, {lift, probes[0]}) + integrate_form(w, s, {lift, probes[1]});
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    CHECK(integrate_form(w, s, {probes[2], lift}) == doctest::Approx(-integrate_form(w, s, {lift, probes[2]})));
  }
  SUBCASE("trigonometric integrands are exact") {
    const DifferentialForm mode = parse("cos(4*pi*x)^2 + sin(6*pi*x)") * eta;
    for (int nodes : {8, 16, 64}) {
      const EmbeddingState zs(f, FieldState::zeros({1, nodes}, 1));
      CHECK(std::abs(integrate_form(mode, zs, {constant_tangent(zs, "t", 1.0)}) - 0.5) <= 1e-12);
    }
  }
  SUBCASE("second order for derivative integrands") {
    auto value = [&](int nodes) {
      FieldState z = FieldState::zeros({1, nodes}, 1);
      for (std::size_t k = 0; k < z.grid.size(); ++k) {
        z.sigma[0][k] = std::sin(2 * kPi * z.grid.coordinate(k)[0]);
        z.pt[0][k] = std::cos(2 * kPi * z.grid.coordinate(k)[0]);
      }
      return integrate_form(c->var("p_t_u") * DifferentialForm::differential(c, "u"), EmbeddingState(f, z), {});
    };
    const double e16 = std::abs(value(16) - kPi), e32 = std::abs(value(32) - kPi);
    CHECK(e16 / e32 == doctest::Approx(4.0).epsilon(0.05));
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(integrate_form(eta, s, {}), ValidationError);
    CHECK_THROWS_AS(EmbeddingState(f, FieldState::zeros({2, 4}, 1)), ValidationError);
  }
}

TEST_CASE("horizontal_lift_tangent") {
  const ChartFamily f = lorentz();
  const ChartPtr c = f.dual_jet;
  const auto h = scalar_field_hamiltonian(f);

  SUBCASE("zero Hamiltonian") {
    const HamiltonianData zero(f, Expr());
    EmbeddingState s = constant_state(f, 16, 0.0, 0.3, 2.0);
    const TangentField v = horizontal_lift_tangent(zero, LeeForm::zero(f), s);
    for (int j = 0; j < c->dim(); ++j) {
      for (double x : v.components[static_cast<std::size_t>(j)]) CHECK(x == (j == c->index_of("t") ? 1.0 : 0.0));
    }
  }
  SUBCASE("spatially constant state follows mechanics") {
    const EmbeddingState s = constant_state(f, 16, 0.2, 0.3, 1.5);
    const TangentField v = horizontal_lift_tangent(h, lee(f, {"1/2", "0"}), s);
    for (std::size_t k = 0; k < s.size(); ++k) {
      CHECK(v.components[static_cast<std::size_t>(c->index_of("u"))][k] == doctest::Approx(1.5));
      CHECK(v.components[static_cast<std::size_t>(c->index_of("p_t_u"))][k] == doctest::Approx(0.75));
    }
  }
  SUBCASE("plane wave") {
    const EmbeddingState s = plane_wave(f, 32, 0.0);
    const TangentField v = horizontal_lift_tangent(h, LeeForm::zero(f), s);
    for (std::size_t k = 0; k < s.size(); ++k) {
      CHECK(v.components[static_cast<std::size_t>(c->index_of("u"))][k] == s.field.pt[0][k]);
    }
  }
}

TEST_CASE("check_precosymplectic") {
  const ChartFamily f = lorentz();
  const auto h = scalar_field_hamiltonian(f);

  SUBCASE("spatially constant mechanics state") {
    const EmbeddingState s = constant_state(f, 32, 0.4, 0.7, 1.2);
    const Residual r = check_precosymplectic(h, lee(f, {"1/2", "0"}), s, make_probes(s, ProbeKind::Vertical, 12, 3));
    CHECK(r.max_norm() < 1e-10);
    CHECK(r.at("eta").max_abs <= 1e-12);
  }
  SUBCASE("plane wave converges at second order") {
    auto worst = [&](int nodes) {
      const EmbeddingState s = plane_wave(f, nodes, 0.3);
      const Residual r = check_precosymplectic(h, LeeForm::zero(f), s, make_probes(s, ProbeKind::Momentum, 12, 9));
      CHECK(r.at("eta").max_abs <= 1e-12);
      return r.max_norm();
    };
    const double r32 = worst(32), r64 = worst(64);
    CHECK(r32 > 0.0);
    CHECK(r32 / r64 == doctest::Approx(4.0).epsilon(0.25));
  }
}

TEST_CASE("infinite_hdw_residual") {
  const ChartFamily f = lorentz();
  const auto h = scalar_field_hamiltonian(f);

  SUBCASE("free field refines") {
    auto residual = [&](int nodes) {
      const EmbeddingState init = plane_wave(f, nodes, 0.0);
      const auto traj = as_states(f, integrate_cauchy(h, LeeForm::zero(f), init.field, 0.1, 0.5 / nodes));
      return infinite_hdw_residual(traj, h, LeeForm::zero(f), make_probes(init, ProbeKind::Vertical, 8, 1)).max_norm();
    };
    const double r32 = residual(32), r64 = residual(64);
    CHECK(r32 / r64 == doctest::Approx(4.0).epsilon(0.25));
    CHECK(r64 < 1e-2);
  }
  SUBCASE("conformal mechanics and a negative control") {
    const LeeForm theta = lee(f, {"1/2", "0"});
    const EmbeddingState init = constant_state(f, 8, 0.0, 0.0, 2.0);
    const auto fields = integrate_cauchy(h, theta, init.field, 0.05, 1e-3);
    const auto probes = make_probes(init, ProbeKind::Vertical, 8, 2);
    CHECK(infinite_hdw_residual(as_states(f, fields), h, theta, probes).max_norm() < 1e-6);

    auto scaled = fields;
    for (auto& s : scaled) {
      for (auto& v : s.sigma[0]) v *= 1.1;
    }
    CHECK(infinite_hdw_residual(as_states(f, scaled), h, theta, probes).max_norm() > 1e-2);
    CHECK_THROWS_AS(infinite_hdw_residual(as_states(f, {fields[0], fields[1]}), h, theta, probes), ValidationError);
  }
}

TEST_CASE("hj_infinite_check") {
  const ChartFamily f = lorentz();
  const auto h = scalar_field_hamiltonian(f);
  const LeeForm theta = lee(f, {"1/2", "0"});
  std::vector<EmbeddingState> states;
  for (double t : {0.0, 0.3, 0.7}) states.push_back(constant_state(f, 16, t, 0.4 + t, 0.0));
  const auto probes = make_probes(states[0], ProbeKind::Vertical, 8, 4);

  SUBCASE("HJ solution") {
    const GammaSection g(f, {{parse("2*exp(1/2*t)")}, {Expr()}});
    REQUIRE(hj_residual(g, h, theta).is_zero());
    const auto r = hj_infinite_check(g, h, theta, states, probes);
    CHECK(r.pullback < 1e-8);
    CHECK(r.lift < 1e-8);
    CHECK(r.coordinate_gap < 1e-12);
  }
  SUBCASE("zero section") {
    const GammaSection g(f, {{Expr()}, {Expr()}});
    const auto r = hj_infinite_check(g, h, LeeForm::zero(f), states, probes);
    CHECK(r.pullback == 0.0);
    CHECK(r.lift == 0.0);
  }
  SUBCASE("perturbed section") {
    const GammaSection g(f, {{parse("2*exp(1/2*t) + 1/10*u")}, {Expr()}});
    const auto r = hj_infinite_check(g, h, theta, states, make_probes(states[0], ProbeKind::Field, 4, 4));
    CHECK(r.lift > 1e-3);
    CHECK(r.pullback > 1e-3);
    CHECK(r.lift == doctest::Approx(r.lift_coordinate).epsilon(1e-10));
    CHECK(r.coordinate_gap < 1e-12);
  }
}

TEST_CASE("integration commutes with d") {
  const ChartFamily f = lorentz();
  const ChartPtr c = f.dual_jet;
  const auto h = scalar_field_hamiltonian(f);
  auto term = [&](const std::string& coeff, const std::vector<std::string>& names) {
    return parse(coeff) * DifferentialForm::monomial(c, Expr(1), names);
  };
  const DifferentialForm alpha = omega_h(h, LeeForm(f, {Expr(Number::rational(1, 2)), Expr()})) +
                                 term("u*p_t_u + sin(p_x_u)", {"u", "p_t_u", "x"}) +
                                 term("u^2*cos(2*pi*x)", {"p_t_u", "p_x_u", "x"}) +
                                 term("u*p_x_u", {"u", "p_t_u", "p_x_u"});
  auto bundle = [](const std::vector<TangentField>& p, std::size_t first) {
    return p[first] + p[first + 1] + p[first + 2];
  };
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    auto gap = [&](int nodes) {
      const EmbeddingState s = plane_wave(f, nodes, 0.2);
      const auto p = make_probes(s, ProbeKind::Vertical, 9, seed);
      const auto r = dtilde_commutation(alpha, s, bundle(p, 0), bundle(p, 3), bundle(p, 6));
      return std::pair{r.integrated_derivative, std::abs(r.integrated_derivative - r.state_derivative)};
    };
    const auto [v64, g64] = gap(64);
    const auto [v128, g128] = gap(128);
    CHECK(std::abs(v128) > 1e-3);
    CHECK(std::abs(v64 - v128) < 1e-4);
    CHECK(g64 / g128 == doctest::Approx(4.0).epsilon(0.25));
    CHECK(g128 < 5e-3);
  }
}
