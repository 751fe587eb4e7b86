#pragma once

// Internal helpers for evaluating families of expressions at many points.

#include <cmath>
#include <string>
#include <vector>

#include "lcms/chart.hpp"
#include "lcms/errors.hpp"
#include "lcms/symexpr.hpp"

namespace lcms::detail {

/// A list of expressions compiled against the coordinate order of a chart.
class Compiled {
 public:
  Compiled() = default;
  Compiled(const std::vector<Expr>& exprs, const std::vector<std::string>& slots) {
    for (const auto& e : exprs) fns_.emplace_back(e, slots);
  }
  [[nodiscard]] double operator()(std::size_t k, const double* x) const { return fns_[k](x); }
  [[nodiscard]] std::size_t size() const { return fns_.size(); }

 private:
  std::vector<CompiledExpr> fns_;
};

inline void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw NumericAbort(std::string("non-finite value in ") + what);
}

/// Pairwise (cascade) summation.
inline double pairwise_sum(const double* v, std::size_t n) {
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k) s += v[k];
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(v, half) + pairwise_sum(v + half, n - half);
}

inline double pairwise_sum(const std::vector<double>& v) { return pairwise_sum(v.data(), v.size()); }

}  // namespace lcms::detail
