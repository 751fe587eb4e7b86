#include "lcms/identities.hpp"

#include <algorithm>
#include <chrono>
#include <functional>

namespace lcms {

namespace {

int uniform(std::mt19937_64& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

ChartFamily random_family(std::mt19937_64& rng, int max_m = 3) {
  return ChartFamily::make(default_layout(uniform(rng, 1, max_m), uniform(rng, 1, 2)));
}

std::vector<std::string> pick(std::mt19937_64& rng, const std::vector<std::string>& from, int count) {
  std::vector<std::string> out;
  for (int k = 0; k < count && !from.empty(); ++k) {
    out.push_back(from[static_cast<std::size_t>(uniform(rng, 0, static_cast<int>(from.size()) - 1))]);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace

Expr random_polynomial(std::mt19937_64& rng, const std::vector<std::string>& vars, int max_terms, int max_degree) {
  Expr e;
  const int n = uniform(rng, 1, max_terms);
  for (int k = 0; k < n; ++k) {
    int c = 0;
    while (c == 0) c = uniform(rng, -4, 4);
    Expr t(c);
    for (const auto& v : vars) t *= pow(Expr::variable(v), uniform(rng, 0, max_degree));
    e += t;
  }
  return e;
}

DifferentialForm random_form(std::mt19937_64& rng, const ChartPtr& chart, int degree, int max_terms) {
  DifferentialForm out(chart, degree);
  const int dim = chart->dim();
  if (degree > dim) return out;
  const int n = uniform(rng, 1, max_terms);
  for (int k = 0; k < n; ++k) {
    std::vector<int> all(static_cast<std::size_t>(dim));
    for (int i = 0; i < dim; ++i) all[static_cast<std::size_t>(i)] = i;
    std::shuffle(all.begin(), all.end(), rng);
    BasisIndex idx(all.begin(), all.begin() + degree);
    out.add(std::move(idx), random_polynomial(rng, pick(rng, chart->names(), 3)));
  }
  return out;
}

LeeForm random_closed_lee_form(std::mt19937_64& rng, const ChartFamily& family) {
  const Expr f = random_polynomial(rng, family.base->base_names(), 2, 2);
  std::vector<Expr> comps;
  for (int i = 0; i < family.m(); ++i) comps.push_back(diff(f, family.base->base_name(i)) + Expr(uniform(rng, -3, 3)));
  return LeeForm(family, std::move(comps));
}

std::vector<IdentityResult> run_identity_suite(std::uint64_t seed, int cases) {
  using Check = std::function<bool(std::mt19937_64&)>;
  const std::vector<std::pair<std::string, Check>> identities = {
      {"d o d = 0",
       [](std::mt19937_64& rng) {
         const ChartFamily f = random_family(rng);
         const DifferentialForm a = random_form(rng, f.dual_jet, uniform(rng, 0, 2));
         return exterior_derivative(exterior_derivative(a)).is_zero();
       }},
      {"graded Leibniz",
       [](std::mt19937_64& rng) {
         const ChartFamily f = random_family(rng);
         const int j = uniform(rng, 0, 2);
         const DifferentialForm a = random_form(rng, f.dual_jet, j);
         const DifferentialForm b = random_form(rng, f.dual_jet, uniform(rng, 0, 2));
         const DifferentialForm lhs = exterior_derivative(wedge(a, b));
         const DifferentialForm rhs = wedge(exterior_derivative(a), b) +
                                      Expr(j % 2 == 0 ? 1 : -1) * wedge(a, exterior_derivative(b));
         return (lhs - rhs).is_zero();
       }},
      {"graded commutativity",
       [](std::mt19937_64& rng) {
         const ChartFamily f = random_family(rng);
         const int j = uniform(rng, 0, 3);
         const int k = uniform(rng, 0, 3);
         const DifferentialForm a = random_form(rng, f.dual_jet, j);
         const DifferentialForm b = random_form(rng, f.dual_jet, k);
         return (wedge(a, b) - Expr((j * k) % 2 == 0 ? 1 : -1) * wedge(b, a)).is_zero();
       }},
      {"Lichnerowicz square = 0",
       [](std::mt19937_64& rng) {
         const ChartFamily f = random_family(rng);
         const LeeForm theta = random_closed_lee_form(rng, f);
         const DifferentialForm t = theta.on(f.dual_jet);
         const DifferentialForm a = random_form(rng, f.dual_jet, uniform(rng, 0, 2));
         return lichnerowicz(lichnerowicz(a, t), t).is_zero();
       }},
      {"d Omega_2,theta = theta ^ Omega_2,theta",
       [](std::mt19937_64& rng) {
         const ChartFamily f = random_family(rng);
         const LeeForm theta = random_closed_lee_form(rng, f);
         const DifferentialForm w = lcms_form(f.multimomentum, theta);
         return (exterior_derivative(w) - wedge(theta.on(f.multimomentum), w)).is_zero();
       }},
      {"kappa* Theta = kappa",
       [](std::mt19937_64& rng) {
         const int n = uniform(rng, 1, 4);
         std::vector<std::string> ys;
         for (int i = 0; i < n; ++i) ys.push_back("y" + std::to_string(i));
         const ChartPtr fb = make_forms_bundle(ys, uniform(rng, 0, n));
         const ChartPtr base = make_base_chart(ys);
         std::map<std::string, Expr> images;
         for (const auto& [subset, name] : fb->form_coordinates()) images.emplace(name, random_polynomial(rng, pick(rng, ys, 2)));
         const SectionMap kappa(base, fb, images);
         return (pullback(kappa, tautological_form(fb)) - section_as_form(kappa)).is_zero();
       }},
      {"kappa* Omega = -d kappa",
       [](std::mt19937_64& rng) {
         const int n = uniform(rng, 1, 4);
         std::vector<std::string> ys;
         for (int i = 0; i < n; ++i) ys.push_back("y" + std::to_string(i));
         const ChartPtr fb = make_forms_bundle(ys, uniform(rng, 0, n));
         const ChartPtr base = make_base_chart(ys);
         std::map<std::string, Expr> images;
         for (const auto& [subset, name] : fb->form_coordinates()) images.emplace(name, random_polynomial(rng, pick(rng, ys, 2)));
         const SectionMap kappa(base, fb, images);
         return (pullback(kappa, canonical_omega(fb)) + exterior_derivative(section_as_form(kappa))).is_zero();
       }},
      {"gamma_bar* Omega_2,theta = -d_theta gamma_bar",
       [](std::mt19937_64& rng) {
         const ChartFamily f = random_family(rng);
         const LeeForm theta = random_closed_lee_form(rng, f);
         const auto& mm = *f.multimomentum;
         std::map<std::string, Expr> images;
         const auto coords = f.total->names();
         images.emplace(mm.energy_name(), random_polynomial(rng, pick(rng, coords, 2)));
         for (int i = 0; i < f.m(); ++i) {
           for (int a = 0; a < f.n_fields(); ++a) images.emplace(mm.momentum_name(i, a), random_polynomial(rng, pick(rng, coords, 2)));
         }
         const SectionMap gbar(f.total, f.multimomentum, images);
         const DifferentialForm g = pullback(gbar, canonical_forms(f.multimomentum).theta2);
         return (pullback(gbar, lcms_form(f.multimomentum, theta)) + lichnerowicz(g, theta.on(f.total))).is_zero();
       }},
      {"pullback functoriality",
       [](std::mt19937_64& rng) {
         const ChartFamily f = random_family(rng, 2);
         std::map<std::string, Expr> gamma;
         for (int i = 0; i < f.m(); ++i) {
           for (int a = 0; a < f.n_fields(); ++a) {
             gamma.emplace(f.dual_jet->momentum_name(i, a), random_polynomial(rng, pick(rng, f.total->names(), 2)));
           }
         }
         const SectionMap s1(f.total, f.dual_jet, gamma);
         const SectionMap s2(f.dual_jet, f.multimomentum,
                             {{f.multimomentum->energy_name(), random_polynomial(rng, pick(rng, f.dual_jet->names(), 2))}});
         const DifferentialForm a = random_form(rng, f.multimomentum, uniform(rng, 0, 2));
         return (pullback(s1, pullback(s2, a)) - pullback(compose(s2, s1), a)).is_zero();
       }},
  };

  std::vector<IdentityResult> results;
  std::mt19937_64 rng(seed);
  for (const auto& [name, check] : identities) {
    IdentityResult r;
    r.name = name;
    const auto start = std::chrono::steady_clock::now();
    for (int k = 0; k < cases; ++k) {
      ++r.cases;
      if (!check(rng)) ++r.failures;
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    results.push_back(r);
  }
  return results;
}

}  // namespace lcms
