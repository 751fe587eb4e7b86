#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "lcms/symexpr.hpp"

namespace lcms {

/// Which manifold a chart models.
enum class BundleKind {
  Base,            ///< M: (x^i)
  Total,           ///< E: (x^i, u^a)
  DualJet,         ///< J1pi*: (x^i, u^a, p^i_a)
  MultiMomentum,   ///< two-horizontal m-forms on E: (x^i, u^a, p, p^i_a)
  FormsBundle,     ///< k-forms on N: (y^a, p_I) for increasing k-subsets I
};

/// Naming and geometry shared by the charts of one fibered family.
struct ChartLayout {
  std::vector<std::string> base;   ///< x^0..x^{m-1}; x^0 is time when sliced
  std::vector<std::string> fiber;  ///< u^1..u^N
  /// g_ij; empty means the identity.
  std::vector<std::vector<Expr>> metric;
  /// sqrt|det g|; derived from a constant metric when absent.
  std::optional<Expr> volume;
  std::string energy = "p";
  /// p^i_a names indexed [i][a]; empty means "p_<x^i>_<u^a>".
  std::vector<std::vector<std::string>> momenta;
  bool time_sliced = false;
};

/// Coordinate chart of one manifold in the family. Immutable.
class ChartSpec {
 public:
  [[nodiscard]] BundleKind kind() const { return kind_; }
  [[nodiscard]] int base_dim() const { return static_cast<int>(base_.size()); }
  [[nodiscard]] int fiber_dim() const { return static_cast<int>(fiber_.size()); }
  [[nodiscard]] int dim() const { return static_cast<int>(names_.size()); }
  [[nodiscard]] bool time_sliced() const { return time_sliced_; }

  [[nodiscard]] const std::vector<std::string>& names() const { return names_; }
  [[nodiscard]] const std::string& name(int index) const { return names_.at(static_cast<std::size_t>(index)); }
  [[nodiscard]] bool has(const std::string& name) const { return index_.count(name) > 0; }
  /// Throws VariableError for undeclared names.
  [[nodiscard]] int index_of(const std::string& name) const;

  [[nodiscard]] const std::string& base_name(int i) const { return base_.at(static_cast<std::size_t>(i)); }
  [[nodiscard]] const std::string& fiber_name(int a) const { return fiber_.at(static_cast<std::size_t>(a)); }
  [[nodiscard]] const std::string& momentum_name(int i, int a) const;
  [[nodiscard]] const std::string& energy_name() const { return energy_; }
  [[nodiscard]] const std::vector<std::string>& base_names() const { return base_; }
  [[nodiscard]] const std::vector<std::string>& fiber_names() const { return fiber_; }

  [[nodiscard]] int base_index(int i) const { return index_of(base_name(i)); }
  [[nodiscard]] int fiber_index(int a) const { return index_of(fiber_name(a)); }
  [[nodiscard]] int momentum_index(int i, int a) const { return index_of(momentum_name(i, a)); }
  [[nodiscard]] int energy_index() const { return index_of(energy_); }

  [[nodiscard]] const Expr& metric(int i, int j) const;
  [[nodiscard]] const Expr& volume() const { return volume_; }

  /// Forms bundle only: degree k and the coordinate attached to subset I.
  [[nodiscard]] int form_degree() const { return form_degree_; }
  [[nodiscard]] const std::map<std::vector<int>, std::string>& form_coordinates() const { return form_coords_; }

  [[nodiscard]] Expr var(const std::string& name) const;

  /// Same coordinate names in the same order.
  [[nodiscard]] bool same_as(const ChartSpec& other) const { return names_ == other.names_; }

 private:
  friend struct ChartFamily;
  friend std::shared_ptr<const ChartSpec> make_forms_bundle(const std::vector<std::string>& base, int degree);
  void finish();

  BundleKind kind_ = BundleKind::Base;
  std::vector<std::string> names_;
  std::map<std::string, int> index_;
  std::vector<std::string> base_;
  std::vector<std::string> fiber_;
  std::vector<std::vector<std::string>> momenta_;
  std::string energy_;
  std::vector<std::vector<Expr>> metric_;
  Expr volume_;
  bool time_sliced_ = false;
  int form_degree_ = 0;
  std::map<std::vector<int>, std::string> form_coords_;
};

using ChartPtr = std::shared_ptr<const ChartSpec>;

/// The charts M, E, J1pi* and the multimomentum bundle built from one layout.
struct ChartFamily {
  ChartPtr base;
  ChartPtr total;
  ChartPtr dual_jet;
  ChartPtr multimomentum;

  [[nodiscard]] int m() const { return base->base_dim(); }
  [[nodiscard]] int n_fields() const { return total->fiber_dim(); }

  /// Validates the layout (distinct names, symmetric metric, ...).
  static ChartFamily make(const ChartLayout& layout);
};

/// Chart of the bundle of k-forms over a manifold with coordinates `base`.
/// Fiber coordinates are named "k_<i1>_<i2>..." by index.
ChartPtr make_forms_bundle(const std::vector<std::string>& base, int degree);

/// Chart with the given coordinates only (e.g. the base N of a forms bundle).
ChartPtr make_base_chart(const std::vector<std::string>& names);

/// Convenience layout with base names x0..x{m-1} (or t for m == 1) and fiber
/// names u (N == 1) or u0..u{N-1}.
ChartLayout default_layout(int m, int n_fields);

}  // namespace lcms
