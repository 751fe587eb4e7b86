#pragma once

// Exterior algebra on a single coordinate chart.  Forms are stored fully
// expanded in the coordinate basis dx^{i1} ^ ... ^ dx^{ik} with i1 < ... < ik.

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "lcms/chart.hpp"
#include "lcms/symexpr.hpp"

namespace lcms {

/// Strictly increasing list of chart coordinate indices.
using BasisIndex = std::vector<int>;

class DifferentialForm {
 public:
  DifferentialForm(ChartPtr chart, int degree);

  static DifferentialForm zero(ChartPtr chart, int degree) { return {std::move(chart), degree}; }
  static DifferentialForm function(ChartPtr chart, const Expr& f);
  /// d(name) as a one-form.
  static DifferentialForm differential(ChartPtr chart, const std::string& name);
  /// coeff * d(names[0]) ^ d(names[1]) ^ ... (any order; sign is tracked).
  static DifferentialForm monomial(ChartPtr chart, const Expr& coeff, const std::vector<std::string>& names);

  [[nodiscard]] const ChartPtr& chart() const { return chart_; }
  [[nodiscard]] int degree() const { return degree_; }
  [[nodiscard]] const std::map<BasisIndex, Expr>& terms() const { return terms_; }
  [[nodiscard]] bool is_zero() const { return terms_.empty(); }

  /// Coefficient of d(names...) with the permutation sign applied.
  [[nodiscard]] Expr coefficient(const std::vector<std::string>& names) const;
  [[nodiscard]] Expr coefficient_at(const BasisIndex& index) const;

  /// Adds coeff * dx^{index...}; index need not be sorted.
  void add(BasisIndex index, const Expr& coeff);

  DifferentialForm& operator+=(const DifferentialForm& other);
  DifferentialForm& operator-=(const DifferentialForm& other);
  friend DifferentialForm operator+(DifferentialForm a, const DifferentialForm& b) { return a += b; }
  friend DifferentialForm operator-(DifferentialForm a, const DifferentialForm& b) { return a -= b; }
  friend DifferentialForm operator*(const Expr& f, const DifferentialForm& a);
  DifferentialForm operator-() const;

  /// Applies `fn` to each coefficient, dropping zeros.
  template <typename Fn>
  [[nodiscard]] DifferentialForm map(Fn&& fn) const {
    DifferentialForm out(chart_, degree_);
    for (const auto& [idx, c] : terms_) out.add(idx, fn(c));
    return out;
  }

  /// Report serialization: one "(d x ^ d y): coeff" entry per term.
  [[nodiscard]] std::vector<std::pair<std::string, std::string>> serialize() const;
  [[nodiscard]] std::string to_string() const;

 private:
  ChartPtr chart_;
  int degree_;
  std::map<BasisIndex, Expr> terms_;
};

/// Vector field with Expr components keyed by chart coordinate index.
class VectorField {
 public:
  explicit VectorField(ChartPtr chart) : chart_(std::move(chart)) {}

  VectorField& set(const std::string& name, const Expr& component);
  [[nodiscard]] Expr component(int index) const;
  [[nodiscard]] const ChartPtr& chart() const { return chart_; }
  [[nodiscard]] const std::map<int, Expr>& components() const { return components_; }

 private:
  ChartPtr chart_;
  std::map<int, Expr> components_;
};

/// Smooth map between two charts given by the images of the target
/// coordinates as expressions in the source coordinates.
class SectionMap {
 public:
  /// Coordinates of `target` not listed in `images` map to the source
  /// coordinate of the same name.  Base coordinates must map identically.
  SectionMap(ChartPtr source, ChartPtr target, const std::map<std::string, Expr>& images);

  [[nodiscard]] const ChartPtr& source() const { return source_; }
  [[nodiscard]] const ChartPtr& target() const { return target_; }
  [[nodiscard]] const Expr& image(int target_index) const { return images_.at(static_cast<std::size_t>(target_index)); }
  [[nodiscard]] const Expr& image(const std::string& target_name) const { return image(target_->index_of(target_name)); }
  /// Substitution map target-name -> image, for composing expressions.
  [[nodiscard]] std::map<std::string, Expr> substitution() const;

 private:
  ChartPtr source_;
  ChartPtr target_;
  std::vector<Expr> images_;
};

/// Composition outer o inner (inner applied first).
SectionMap compose(const SectionMap& outer, const SectionMap& inner);

/// Ehresmann connection on J1pi* -> M in coordinates:
///   h = dx^j (x) (d/dx^j + G^a_j d/du^a + G^i_{aj} d/dp^i_a).
struct Connection {
  ChartPtr chart;  ///< dual-jet chart
  /// fiber_part[a][j] = G^a_j
  std::vector<std::vector<Expr>> fiber_part;
  /// momentum_part[i][a][j] = G^i_{aj}
  std::vector<std::vector<std::vector<Expr>>> momentum_part;

  static Connection zero(ChartPtr dual_jet_chart);
  /// Horizontal lift h_j of d/dx^j.
  [[nodiscard]] VectorField lift(int j) const;
};

DifferentialForm wedge(const DifferentialForm& a, const DifferentialForm& b);
DifferentialForm exterior_derivative(const DifferentialForm& a);
/// Contraction in the first slot; throws ValidationError on a 0-form.
DifferentialForm interior_product(const VectorField& v, const DifferentialForm& a);
/// d_theta(a) = d a - theta ^ a.
DifferentialForm lichnerowicz(const DifferentialForm& a, const DifferentialForm& theta);
DifferentialForm pullback(const SectionMap& s, const DifferentialForm& a);
/// Re-expresses `a` on `chart` by coordinate name, e.g. a Lee form on M
/// pulled back verbatim to a total space.  Throws ChartMismatch when a
/// coordinate is missing.
DifferentialForm transfer(const DifferentialForm& a, const ChartPtr& chart);
/// sum_j dx^j ^ i_{h_j} a.
DifferentialForm contract_connection(const Connection& h, const DifferentialForm& a);

/// d_m x = dx^0 ^ ... ^ dx^{m-1} on any chart of the family.
DifferentialForm volume_form(const ChartPtr& chart);
/// d/dx^i contracted into d_m x.
DifferentialForm contracted_volume(const ChartPtr& chart, int i);

/// True when every coefficient is the zero expression.
inline bool is_zero(const DifferentialForm& a) { return a.is_zero(); }

/// Rank of the map V -> i_V a at a point, evaluated numerically; equals
/// chart dimension iff a is 1-nondegenerate there.
int contraction_rank(const DifferentialForm& a, const Point& at);

}  // namespace lcms
