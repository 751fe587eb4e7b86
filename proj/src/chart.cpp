#include "lcms/chart.hpp"

#include <cctype>
#include <cmath>
#include <functional>
#include <set>

#include "lcms/errors.hpp"

namespace lcms {

namespace {

Expr determinant(const std::vector<std::vector<Expr>>& a) {
  const std::size_t n = a.size();
  if (n == 0) return Expr(1);
  if (n == 1) return a[0][0];
  Expr det;
  for (std::size_t col = 0; col < n; ++col) {
    if (a[0][col].is_zero()) continue;
    std::vector<std::vector<Expr>> minor;
    for (std::size_t r = 1; r < n; ++r) {
      std::vector<Expr> row;
      for (std::size_t c = 0; c < n; ++c) {
        if (c != col) row.push_back(a[r][c]);
      }
      minor.push_back(std::move(row));
    }
    const Expr term = a[0][col] * determinant(minor);
    det = (col % 2 == 0) ? det + term : det - term;
  }
  return det;
}

}  // namespace

int ChartSpec::index_of(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw VariableError("chart does not declare '" + name + "'");
  return it->second;
}

const std::string& ChartSpec::momentum_name(int i, int a) const {
  if (momenta_.empty()) throw VariableError("chart has no momentum coordinates");
  return momenta_.at(static_cast<std::size_t>(i)).at(static_cast<std::size_t>(a));
}

const Expr& ChartSpec::metric(int i, int j) const {
  return metric_.at(static_cast<std::size_t>(i)).at(static_cast<std::size_t>(j));
}

Expr ChartSpec::var(const std::string& name) const {
  (void)index_of(name);
  return Expr::variable(name);
}

void ChartSpec::finish() {
  index_.clear();
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (!index_.emplace(names_[i], static_cast<int>(i)).second) {
      throw ValidationError("duplicate coordinate name '" + names_[i] + "'");
    }
  }
}

ChartFamily ChartFamily::make(const ChartLayout& layout) {
  const std::size_t m = layout.base.size();
  const std::size_t n = layout.fiber.size();
  if (m == 0) throw ValidationError("base dimension must be at least 1");

  std::vector<std::vector<std::string>> momenta = layout.momenta;
  if (momenta.empty()) {
    for (const auto& x : layout.base) {
      std::vector<std::string> row;
      for (const auto& u : layout.fiber) row.push_back("p_" + x + "_" + u);
      momenta.push_back(std::move(row));
    }
  }
  if (momenta.size() != m) throw ValidationError("momentum names must have one row per base coordinate");
  for (const auto& row : momenta) {
    if (row.size() != n) throw ValidationError("momentum names must have one entry per fiber coordinate");
  }

  std::vector<std::vector<Expr>> metric = layout.metric;
  if (metric.empty()) {
    metric.assign(m, std::vector<Expr>(m));
    for (std::size_t i = 0; i < m; ++i) metric[i][i] = Expr(1);
  }
  if (metric.size() != m) throw ValidationError("metric must be m x m");
  for (const auto& row : metric) {
    if (row.size() != m) throw ValidationError("metric must be m x m");
  }
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      if (!(metric[i][j] - metric[j][i]).is_zero()) throw ValidationError("metric is not symmetric");
    }
  }

  Expr volume;
  if (layout.volume) {
    volume = *layout.volume;
  } else {
    const Expr det = determinant(metric);
    if (!det.is_constant()) throw ValidationError("non-constant metric requires an explicit volume factor");
    const Number d = det.constant_value();
    const Number ad = d.negative() ? -d : d;
    volume = parse("sqrt(" + ad.to_string() + ")");
  }
  if (volume.is_constant() && !(volume.constant_value().value() > 0.0)) {
    throw ValidationError("volume factor must be positive");
  }

  auto build = [&](BundleKind kind) {
    auto c = std::make_shared<ChartSpec>();
    c->kind_ = kind;
    c->base_ = layout.base;
    c->metric_ = metric;
    c->volume_ = volume;
    c->time_sliced_ = layout.time_sliced;
    c->names_ = layout.base;
    if (kind != BundleKind::Base) {
      c->fiber_ = layout.fiber;
      c->names_.insert(c->names_.end(), layout.fiber.begin(), layout.fiber.end());
    }
    if (kind == BundleKind::MultiMomentum) {
      c->energy_ = layout.energy;
      c->names_.push_back(layout.energy);
    }
    if (kind == BundleKind::DualJet || kind == BundleKind::MultiMomentum) {
      c->momenta_ = momenta;
      for (const auto& row : momenta) c->names_.insert(c->names_.end(), row.begin(), row.end());
    }
    c->finish();
    return std::const_pointer_cast<const ChartSpec>(c);
  };

  ChartFamily f;
  f.base = build(BundleKind::Base);
  f.total = build(BundleKind::Total);
  f.dual_jet = build(BundleKind::DualJet);
  f.multimomentum = build(BundleKind::MultiMomentum);
  for (const auto& name : f.multimomentum->names()) {
    for (const char c : name) {
      if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) {
        throw ValidationError("coordinate name '" + name + "' is not an identifier");
      }
    }
  }
  return f;
}

ChartPtr make_forms_bundle(const std::vector<std::string>& base, int degree) {
  const int n = static_cast<int>(base.size());
  if (degree < 0 || degree > n) throw ValidationError("form degree out of range");
  auto c = std::make_shared<ChartSpec>();
  c->kind_ = BundleKind::FormsBundle;
  c->base_ = base;
  c->names_ = base;
  c->form_degree_ = degree;
  c->volume_ = Expr(1);
  std::vector<int> subset(static_cast<std::size_t>(degree));
  // enumerate increasing subsets in lexicographic order
  std::function<void(int, int)> rec = [&](int pos, int start) {
    if (pos == degree) {
      std::string name = "k";
      for (int i : subset) name += "_" + std::to_string(i);
      c->form_coords_.emplace(subset, name);
      c->fiber_.push_back(name);
      c->names_.push_back(name);
      return;
    }
    for (int i = start; i < n; ++i) {
      subset[static_cast<std::size_t>(pos)] = i;
      rec(pos + 1, i + 1);
    }
  };
  rec(0, 0);
  c->finish();
  return c;
}

ChartPtr make_base_chart(const std::vector<std::string>& names) {
  ChartLayout layout;
  layout.base = names;
  return ChartFamily::make(layout).base;
}

ChartLayout default_layout(int m, int n_fields) {
  ChartLayout layout;
  if (m == 1) {
    layout.base = {"t"};
  } else {
    for (int i = 0; i < m; ++i) layout.base.push_back("x" + std::to_string(i));
  }
  if (n_fields == 1) {
    layout.fiber = {"u"};
  } else {
    for (int a = 0; a < n_fields; ++a) layout.fiber.push_back("u" + std::to_string(a));
  }
  return layout;
}

}  // namespace lcms
