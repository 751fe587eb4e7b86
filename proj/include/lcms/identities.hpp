#pragma once

// Randomized symbolic identity suite and the generators it is built from.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "lcms/bundle.hpp"
#include "lcms/forms.hpp"

namespace lcms {

/// Random polynomial with small integer coefficients.
Expr random_polynomial(std::mt19937_64& rng, const std::vector<std::string>& vars, int max_terms = 3,
                       int max_degree = 2);
/// Random k-form on `chart` with polynomial coefficients in all coordinates.
DifferentialForm random_form(std::mt19937_64& rng, const ChartPtr& chart, int degree, int max_terms = 3);
/// theta = df + c with f a random polynomial on M and c constant.
LeeForm random_closed_lee_form(std::mt19937_64& rng, const ChartFamily& family);

struct IdentityResult {
  std::string name;
  int cases = 0;
  int failures = 0;
  double seconds = 0.0;
  [[nodiscard]] bool pass() const { return cases > 0 && failures == 0; }
};

/// Runs every identity on `cases` random instances each.
std::vector<IdentityResult> run_identity_suite(std::uint64_t seed, int cases = 50);

}  // namespace lcms
