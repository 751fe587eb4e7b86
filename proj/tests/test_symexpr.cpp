#include <cmath>
#include <random>

#include "doctest.h"
#include "lcms/errors.hpp"
#include "lcms/symexpr.hpp"

using namespace lcms;

namespace {

Expr random_polynomial(std::mt19937_64& rng, const std::vector<std::string>& vars) {
  std::uniform_int_distribution<int> coeff(-5, 5);
  std::uniform_int_distribution<int> power(0, 3);
  std::uniform_int_distribution<int> nterms(1, 5);
  Expr e;
  const int n = nterms(rng);
  for (int k = 0; k < n; ++k) {
    Expr t(coeff(rng));
    for (const auto& v : vars) t *= pow(Expr::variable(v), power(rng));
    e += t;
  }
  return e;
}

Point random_point(std::mt19937_64& rng, const std::vector<std::string>& vars) {
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  Point p;
  for (const auto& v : vars) p[v] = u(rng);
  return p;
}

}  // namespace

TEST_CASE("diff examples") {
  const Expr x = Expr::variable("x"), u = Expr::variable("u"), t = Expr::variable("t"), c = Expr::variable("c");
  CHECK(diff(x * u * u, "u") == Expr(2) * x * u);
  CHECK(is_zero(diff(exp(c * t), "t") - c * exp(c * t)));
  const Expr p = Expr::variable("p");
  CHECK(diff(parse("1/2*p^2"), "p") == p);
  CHECK(is_zero(diff(Expr(7), "x")));
  CHECK_THROWS_AS(diff(x, "y", {"x", "u"}), VariableError);
}

TEST_CASE("eval examples") {
  CHECK(eval(exp(parse("0.5*t")), {{"t", 1.0}}) == doctest::Approx(1.6487212707001282).epsilon(1e-15));
  CHECK(eval(Expr(), {}) == 0.0);
  CHECK(eval(parse("u^2 - t"), {{"u", 2.0}, {"t", 1.0}}) == 3.0);
  CHECK_THROWS_AS(eval(parse("u"), {}), VariableError);
  CHECK_THROWS_AS(eval(parse("u^-1"), {{"u", 0.0}}), DomainError);
}

TEST_CASE("is_zero examples") {
  const Expr u = Expr::variable("u"), t = Expr::variable("t");
  CHECK(is_zero(u - u));
  const Expr e = exp(t) * exp(-t) - Expr(1);
  CHECK(is_zero(e));
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> d(-3, 3);
  const Expr lhs = exp(t) * exp(-t);
  for (int k = 0; k < 20; ++k) CHECK(std::abs(eval(lhs, {{"t", d(rng)}}) - 1.0) < 1e-12);
  CHECK_FALSE(is_zero(u * u - u));
}

TEST_CASE("parse and print round trip") {
  for (const char* s : {"0.5*p^2", "exp(2*t)*u - 3/4*x^-2", "sin(x - t)^2 + cos(t - x)^2", "(a+b)^3"}) {
    const Expr e = parse(s);
    CHECK(parse(e.to_string()) == e);
  }
  // reals print with 17 significant digits and re-parse as exact decimals
  const Expr r = parse("sqrt(4)*pi*x");
  CHECK(eval(parse(r.to_string()), {{"x", 1.0}}) == eval(r, {{"x", 1.0}}));
  CHECK(parse("sqrt(4)") == Expr(2));
  CHECK(parse("sin(t - x)") == -parse("sin(x - t)"));
  CHECK(parse("cos(t - x)") == parse("cos(x - t)"));
  CHECK_THROWS_AS(parse("1 +"), ParseError);
  CHECK_THROWS_AS(parse("foo(x)"), ParseError);
  CHECK_THROWS_AS(parse("1/(x+y)"), ParseError);
}

TEST_CASE("exact rational arithmetic") {
  CHECK(parse("1/3 + 1/6") == parse("1/2"));
  CHECK(parse("0.1 + 0.2") == parse("3/10"));
  CHECK(Expr::real(0.1) + Expr::real(0.2) - Expr::real(0.3) == Expr());
}

TEST_CASE("property: derivative matches finite differences") {
  std::mt19937_64 rng(42);
  const std::vector<std::string> vars{"x", "y", "u"};
  for (int k = 0; k < 100; ++k) {
    const Expr e = random_polynomial(rng, vars);
    const std::string& v = vars[static_cast<std::size_t>(k) % vars.size()];
    Point pt = random_point(rng, vars);
    const double exact = eval(diff(e, v), pt);
    const double h = 1e-6;
    Point pp = pt, pm = pt;
    pp[v] += h;
    pm[v] -= h;
    const double fd = (eval(e, pp) - eval(e, pm)) / (2 * h);
    CHECK(std::abs(exact - fd) <= 1e-5 * (1 + std::abs(exact)));
  }
}

TEST_CASE("property: diff is additive and zero test is sound") {
  std::mt19937_64 rng(7);
  const std::vector<std::string> vars{"x", "u"};
  for (int k = 0; k < 50; ++k) {
    const Expr a = random_polynomial(rng, vars) * exp(parse("2*x"));
    const Expr b = random_polynomial(rng, vars) * sin(parse("x - u"));
    CHECK(is_zero(diff(a + b, "x") - (diff(a, "x") + diff(b, "x"))));
    const Expr z = (a + b) * (a - b) - (a * a - b * b);
    REQUIRE(is_zero(z));
    for (int j = 0; j < 50; ++j) CHECK(std::abs(eval(z, random_point(rng, vars))) <= 1e-12);
  }
}

TEST_CASE("canonicalization is idempotent") {
  std::mt19937_64 rng(3);
  for (int k = 0; k < 30; ++k) {
    const Expr e = random_polynomial(rng, {"x", "y"}) * exp(parse("x - y"));
    CHECK(parse(e.to_string()) == e);
    CHECK(e + Expr() == e);
    CHECK(e * Expr(1) == e);
  }
}

TEST_CASE("compiled expressions agree with eval") {
  const Expr e = parse("3*x^2*exp(y) - sin(2*x)*cos(y) + x^-1");
  const CompiledExpr f(e, {"x", "y"});
  const double v[2] = {0.7, -0.3};
  CHECK(f(v) == doctest::Approx(eval(e, {{"x", 0.7}, {"y", -0.3}})).epsilon(1e-14));
}
