#include "lcms/forms.hpp"

#include <algorithm>
#include <cmath>
#include <Eigen/Dense>

#include "lcms/errors.hpp"

namespace lcms {

namespace {

void require_same_chart(const ChartPtr& a, const ChartPtr& b, const char* what) {
  if (a == b) return;
  if (!a || !b || !a->same_as(*b)) throw ChartMismatch(std::string(what) + ": forms live on different charts");
}

// Sorts in place and returns the permutation sign, or 0 on a repeated index.
int sort_with_sign(BasisIndex& idx) {
  int sign = 1;
  for (std::size_t i = 1; i < idx.size(); ++i) {
    for (std::size_t j = i; j > 0 && idx[j - 1] >= idx[j]; --j) {
      if (idx[j - 1] == idx[j]) return 0;
      std::swap(idx[j - 1], idx[j]);
      sign = -sign;
    }
  }
  for (std::size_t i = 1; i < idx.size(); ++i) {
    if (idx[i - 1] == idx[i]) return 0;
  }
  return sign;
}

}  // namespace

DifferentialForm::DifferentialForm(ChartPtr chart, int degree) : chart_(std::move(chart)), degree_(degree) {
  if (!chart_) throw ValidationError("form requires a chart");
  if (degree < 0) throw ValidationError("negative form degree");
}

DifferentialForm DifferentialForm::function(ChartPtr chart, const Expr& f) {
  DifferentialForm out(std::move(chart), 0);
  out.add({}, f);
  return out;
}

DifferentialForm DifferentialForm::differential(ChartPtr chart, const std::string& name) {
  const int i = chart->index_of(name);
  DifferentialForm out(std::move(chart), 1);
  out.add({i}, Expr(1));
  return out;
}

DifferentialForm DifferentialForm::monomial(ChartPtr chart, const Expr& coeff, const std::vector<std::string>& names) {
  BasisIndex idx;
  for (const auto& n : names) idx.push_back(chart->index_of(n));
  DifferentialForm out(std::move(chart), static_cast<int>(names.size()));
  out.add(std::move(idx), coeff);
  return out;
}

Expr DifferentialForm::coefficient(const std::vector<std::string>& names) const {
  BasisIndex idx;
  for (const auto& n : names) idx.push_back(chart_->index_of(n));
  return coefficient_at(idx);
}

Expr DifferentialForm::coefficient_at(const BasisIndex& index) const {
  BasisIndex idx = index;
  const int sign = sort_with_sign(idx);
  if (sign == 0) return Expr();
  auto it = terms_.find(idx);
  if (it == terms_.end()) return Expr();
  return sign > 0 ? it->second : -it->second;
}

void DifferentialForm::add(BasisIndex index, const Expr& coeff) {
  if (static_cast<int>(index.size()) != degree_) throw ValidationError("basis index has wrong length for form degree");
  for (int i : index) {
    if (i < 0 || i >= chart_->dim()) throw ValidationError("basis index outside chart");
  }
  if (coeff.is_zero()) return;
  const int sign = sort_with_sign(index);
  if (sign == 0) return;
  auto [it, inserted] = terms_.try_emplace(index, sign > 0 ? coeff : -coeff);
  if (!inserted) {
    it->second = sign > 0 ? it->second + coeff : it->second - coeff;
    if (it->second.is_zero()) terms_.erase(it);
  }
}

DifferentialForm& DifferentialForm::operator+=(const DifferentialForm& other) {
  require_same_chart(chart_, other.chart_, "form sum");
  if (degree_ != other.degree_) throw ValidationError("cannot add forms of different degree");
  for (const auto& [idx, c] : other.terms_) add(idx, c);
  return *this;
}

DifferentialForm& DifferentialForm::operator-=(const DifferentialForm& other) {
  require_same_chart(chart_, other.chart_, "form difference");
  if (degree_ != other.degree_) throw ValidationError("cannot subtract forms of different degree");
  for (const auto& [idx, c] : other.terms_) add(idx, -c);
  return *this;
}

DifferentialForm operator*(const Expr& f, const DifferentialForm& a) {
  return a.map([&](const Expr& c) { return f * c; });
}

DifferentialForm DifferentialForm::operator-() const {
  return map([](const Expr& c) { return -c; });
}

std::vector<std::pair<std::string, std::string>> DifferentialForm::serialize() const {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& [idx, c] : terms_) {
    std::string basis;
    for (std::size_t k = 0; k < idx.size(); ++k) {
      if (k) basis += "^";
      basis += "d" + chart_->name(idx[k]);
    }
    if (basis.empty()) basis = "1";
    out.emplace_back(basis, c.to_string());
  }
  return out;
}

std::string DifferentialForm::to_string() const {
  if (terms_.empty()) return "0";
  std::string s;
  for (const auto& [basis, coeff] : serialize()) {
    if (!s.empty()) s += " + ";
    s += "(" + coeff + ")";
    if (basis != "1") s += " " + basis;
  }
  return s;
}

VectorField& VectorField::set(const std::string& name, const Expr& component) {
  const int i = chart_->index_of(name);
  if (component.is_zero()) {
    components_.erase(i);
  } else {
    components_[i] = component;
  }
  return *this;
}

Expr VectorField::component(int index) const {
  auto it = components_.find(index);
  return it == components_.end() ? Expr() : it->second;
}

SectionMap::SectionMap(ChartPtr source, ChartPtr target, const std::map<std::string, Expr>& images)
    : source_(std::move(source)), target_(std::move(target)) {
  for (const auto& [name, e] : images) (void)target_->index_of(name);
  for (int k = 0; k < target_->dim(); ++k) {
    const std::string& name = target_->name(k);
    auto it = images.find(name);
    if (it != images.end()) {
      images_.push_back(it->second);
    } else if (source_->has(name)) {
      images_.push_back(Expr::variable(name));
    } else {
      throw ValidationError("section map gives no image for '" + name + "'");
    }
  }
  for (int i = 0; i < target_->base_dim(); ++i) {
    const std::string& x = target_->base_name(i);
    if (!source_->has(x) || !(images_[static_cast<std::size_t>(target_->index_of(x))] == Expr::variable(x))) {
      throw ValidationError("section map must fix base coordinate '" + x + "'");
    }
  }
}

std::map<std::string, Expr> SectionMap::substitution() const {
  std::map<std::string, Expr> out;
  for (int k = 0; k < target_->dim(); ++k) out.emplace(target_->name(k), images_[static_cast<std::size_t>(k)]);
  return out;
}

SectionMap compose(const SectionMap& outer, const SectionMap& inner) {
  require_same_chart(outer.source(), inner.target(), "compose");
  const auto sub = inner.substitution();
  std::map<std::string, Expr> images;
  for (int k = 0; k < outer.target()->dim(); ++k) {
    images.emplace(outer.target()->name(k), substitute(outer.image(k), sub));
  }
  return SectionMap(inner.source(), outer.target(), images);
}

Connection Connection::zero(ChartPtr dual_jet_chart) {
  Connection c;
  const auto m = static_cast<std::size_t>(dual_jet_chart->base_dim());
  const auto n = static_cast<std::size_t>(dual_jet_chart->fiber_dim());
  c.chart = std::move(dual_jet_chart);
  c.fiber_part.assign(n, std::vector<Expr>(m));
  c.momentum_part.assign(m, std::vector<std::vector<Expr>>(n, std::vector<Expr>(m)));
  return c;
}

VectorField Connection::lift(int j) const {
  VectorField v(chart);
  v.set(chart->base_name(j), Expr(1));
  const auto jj = static_cast<std::size_t>(j);
  for (int a = 0; a < chart->fiber_dim(); ++a) {
    v.set(chart->fiber_name(a), fiber_part.at(static_cast<std::size_t>(a)).at(jj));
  }
  for (int i = 0; i < chart->base_dim(); ++i) {
    for (int a = 0; a < chart->fiber_dim(); ++a) {
      v.set(chart->momentum_name(i, a),
            momentum_part.at(static_cast<std::size_t>(i)).at(static_cast<std::size_t>(a)).at(jj));
    }
  }
  return v;
}

DifferentialForm wedge(const DifferentialForm& a, const DifferentialForm& b) {
  require_same_chart(a.chart(), b.chart(), "wedge");
  DifferentialForm out(a.chart(), a.degree() + b.degree());
  if (out.degree() > a.chart()->dim()) return out;
  for (const auto& [ia, ca] : a.terms()) {
    for (const auto& [ib, cb] : b.terms()) {
      BasisIndex idx = ia;
      idx.insert(idx.end(), ib.begin(), ib.end());
      out.add(std::move(idx), ca * cb);
    }
  }
  return out;
}

DifferentialForm exterior_derivative(const DifferentialForm& a) {
  const ChartPtr& chart = a.chart();
  DifferentialForm out(chart, a.degree() + 1);
  for (const auto& [idx, c] : a.terms()) {
    for (const auto& v : c.free_variables()) {
      if (!chart->has(v)) continue;  // parameters are constants
      BasisIndex full{chart->index_of(v)};
      full.insert(full.end(), idx.begin(), idx.end());
      out.add(std::move(full), diff(c, v));
    }
  }
  return out;
}

DifferentialForm interior_product(const VectorField& v, const DifferentialForm& a) {
  if (a.degree() == 0) throw ValidationError("interior product of a 0-form");
  require_same_chart(v.chart(), a.chart(), "interior product");
  DifferentialForm out(a.chart(), a.degree() - 1);
  for (const auto& [idx, c] : a.terms()) {
    for (std::size_t k = 0; k < idx.size(); ++k) {
      const Expr vk = v.component(idx[k]);
      if (vk.is_zero()) continue;
      BasisIndex rest = idx;
      rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(k));
      out.add(std::move(rest), (k % 2 == 0) ? vk * c : -(vk * c));
    }
  }
  return out;
}

DifferentialForm lichnerowicz(const DifferentialForm& a, const DifferentialForm& theta) {
  if (theta.degree() != 1) throw ValidationError("Lee form must have degree 1");
  return exterior_derivative(a) - wedge(transfer(theta, a.chart()), a);
}

DifferentialForm transfer(const DifferentialForm& a, const ChartPtr& chart) {
  if (a.chart() == chart) return a;
  std::vector<int> remap(static_cast<std::size_t>(a.chart()->dim()), -1);
  DifferentialForm out(chart, a.degree());
  for (const auto& [idx, c] : a.terms()) {
    BasisIndex mapped;
    for (int i : idx) {
      auto& r = remap[static_cast<std::size_t>(i)];
      if (r < 0) {
        const std::string& name = a.chart()->name(i);
        if (!chart->has(name)) throw ChartMismatch("coordinate '" + name + "' not present on target chart");
        r = chart->index_of(name);
      }
      mapped.push_back(r);
    }
    for (const auto& v : c.free_variables()) {
      if (a.chart()->has(v) && !chart->has(v)) {
        throw ChartMismatch("coefficient depends on '" + v + "', absent from target chart");
      }
    }
    out.add(std::move(mapped), c);
  }
  return out;
}

DifferentialForm pullback(const SectionMap& s, const DifferentialForm& a) {
  require_same_chart(s.target(), a.chart(), "pullback");
  const auto sub = s.substitution();
  std::map<int, DifferentialForm> differentials;
  auto d_image = [&](int k) -> const DifferentialForm& {
    auto it = differentials.find(k);
    if (it == differentials.end()) {
      it = differentials.emplace(k, exterior_derivative(DifferentialForm::function(s.source(), s.image(k)))).first;
    }
    return it->second;
  };
  DifferentialForm out(s.source(), a.degree());
  for (const auto& [idx, c] : a.terms()) {
    DifferentialForm term = DifferentialForm::function(s.source(), substitute(c, sub));
    for (int k : idx) {
      term = wedge(term, d_image(k));
      if (term.is_zero()) break;
    }
    if (term.degree() == a.degree()) out += term;
  }
  return out;
}

DifferentialForm contract_connection(const Connection& h, const DifferentialForm& a) {
  require_same_chart(h.chart, a.chart(), "contract_connection");
  if (a.degree() == 0) throw ValidationError("connection contraction of a 0-form");
  DifferentialForm out(a.chart(), a.degree());
  for (int j = 0; j < a.chart()->base_dim(); ++j) {
    const auto dxj = DifferentialForm::differential(a.chart(), a.chart()->base_name(j));
    out += wedge(dxj, interior_product(h.lift(j), a));
  }
  return out;
}

DifferentialForm volume_form(const ChartPtr& chart) {
  DifferentialForm out(chart, chart->base_dim());
  BasisIndex idx;
  for (int i = 0; i < chart->base_dim(); ++i) idx.push_back(chart->base_index(i));
  out.add(std::move(idx), Expr(1));
  return out;
}

DifferentialForm contracted_volume(const ChartPtr& chart, int i) {
  VectorField v(chart);
  v.set(chart->base_name(i), Expr(1));
  return interior_product(v, volume_form(chart));
}

int contraction_rank(const DifferentialForm& a, const Point& at) {
  const ChartPtr& chart = a.chart();
  const int dim = chart->dim();
  if (a.degree() == 0) return 0;
  // rows: basis elements of degree k-1 that occur; columns: coordinate vectors
  std::map<BasisIndex, int> rows;
  std::vector<std::vector<std::pair<int, double>>> cols(static_cast<std::size_t>(dim));
  for (int k = 0; k < dim; ++k) {
    VectorField e(chart);
    e.set(chart->name(k), Expr(1));
    const DifferentialForm contracted = interior_product(e, a);
    for (const auto& [idx, c] : contracted.terms()) {
      auto [it, inserted] = rows.try_emplace(idx, static_cast<int>(rows.size()));
      cols[static_cast<std::size_t>(k)].emplace_back(it->second, eval(c, at));
    }
  }
  Eigen::MatrixXd mat = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows.size()), dim);
  for (int k = 0; k < dim; ++k) {
    for (const auto& [r, v] : cols[static_cast<std::size_t>(k)]) mat(r, k) = v;
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(mat);
  lu.setThreshold(1e-10);
  return static_cast<int>(lu.rank());
}

}  // namespace lcms
