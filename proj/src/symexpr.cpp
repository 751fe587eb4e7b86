#include "lcms/symexpr.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <numeric>
#include <optional>
#include <sstream>

#include "lcms/errors.hpp"

namespace lcms {

// ---------------------------------------------------------------- Number --

namespace {

using i128 = __int128;

constexpr double kRealCancellation = 1e-12;

bool fits64(i128 v) {
  return v >= static_cast<i128>(std::numeric_limits<long long>::min()) &&
         v <= static_cast<i128>(std::numeric_limits<long long>::max());
}

i128 gcd128(i128 a, i128 b) {
  if (a < 0) a = -a;
  if (b < 0) b = -b;
  while (b != 0) {
    i128 t = a % b;
    a = b;
    b = t;
  }
  return a;
}

Number from128(i128 num, i128 den) {
  if (den < 0) {
    num = -num;
    den = -den;
  }
  const i128 g = gcd128(num, den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
  if (fits64(num) && fits64(den)) {
    return Number::rational(static_cast<long long>(num), static_cast<long long>(den));
  }
  return Number::real(static_cast<double>(num) / static_cast<double>(den));
}

}  // namespace

Number Number::rational(long long num, long long den) {
  if (den == 0) throw DomainError("rational with zero denominator");
  Number out;
  i128 n = num;
  i128 d = den;
  if (d < 0) {
    n = -n;
    d = -d;
  }
  const i128 g = gcd128(n, d);
  if (g > 1) {
    n /= g;
    d /= g;
  }
  if (!fits64(n) || !fits64(d)) return real(static_cast<double>(n) / static_cast<double>(d));
  out.num_ = static_cast<long long>(n);
  out.den_ = static_cast<long long>(d);
  return out;
}

Number Number::real(double value) {
  Number out;
  out.exact_ = false;
  out.real_ = value;
  return out;
}

double Number::value() const {
  return exact_ ? static_cast<double>(num_) / static_cast<double>(den_) : real_;
}

bool Number::is_zero() const { return exact_ ? num_ == 0 : real_ == 0.0; }

Number Number::operator-() const {
  if (exact_) {
    if (num_ == std::numeric_limits<long long>::min()) return real(-value());
    return rational(-num_, den_);
  }
  return real(-real_);
}

Number operator+(const Number& a, const Number& b) {
  if (a.exact_ && b.exact_) {
    return from128(static_cast<i128>(a.num_) * b.den_ + static_cast<i128>(b.num_) * a.den_,
                   static_cast<i128>(a.den_) * b.den_);
  }
  const double x = a.value();
  const double y = b.value();
  const double s = x + y;
  if (std::abs(s) <= kRealCancellation * std::max(std::abs(x), std::abs(y))) return Number(0);
  return Number::real(s);
}

Number operator-(const Number& a, const Number& b) { return a + (-b); }

Number operator*(const Number& a, const Number& b) {
  if (a.exact_ && b.exact_) {
    return from128(static_cast<i128>(a.num_) * b.num_, static_cast<i128>(a.den_) * b.den_);
  }
  if ((a.exact_ && a.num_ == 0) || (b.exact_ && b.num_ == 0)) return Number(0);
  return Number::real(a.value() * b.value());
}

Number operator/(const Number& a, const Number& b) {
  if (b.is_zero()) throw DomainError("division by zero constant");
  if (a.exact_ && b.exact_) {
    return from128(static_cast<i128>(a.num_) * b.den_, static_cast<i128>(a.den_) * b.num_);
  }
  return Number::real(a.value() / b.value());
}

int compare(const Number& a, const Number& b) {
  if (a.exact_ != b.exact_) return a.exact_ ? -1 : 1;
  if (a.exact_) {
    const i128 l = static_cast<i128>(a.num_) * b.den_;
    const i128 r = static_cast<i128>(b.num_) * a.den_;
    return l < r ? -1 : (l > r ? 1 : 0);
  }
  return a.real_ < b.real_ ? -1 : (a.real_ > b.real_ ? 1 : 0);
}

std::string Number::to_string() const {
  if (exact_) {
    if (den_ == 1) return std::to_string(num_);
    return std::to_string(num_) + "/" + std::to_string(den_);
  }
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", real_);
  return buf;
}

// -------------------------------------------------------------- Monomial --

namespace {

int compare_powers(const std::vector<std::pair<std::string, int>>& a,
                   const std::vector<std::pair<std::string, int>>& b) {
  const std::size_t n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (int c = a[i].first.compare(b[i].first); c != 0) return c < 0 ? -1 : 1;
    if (a[i].second != b[i].second) return a[i].second < b[i].second ? -1 : 1;
  }
  if (a.size() != b.size()) return a.size() < b.size() ? -1 : 1;
  return 0;
}

int compare_trig(const TrigFactor& a, const TrigFactor& b) {
  if (a.kind != b.kind) return a.kind < b.kind ? -1 : 1;
  if (int c = compare(a.arg, b.arg); c != 0) return c;
  if (a.power != b.power) return a.power < b.power ? -1 : 1;
  return 0;
}

// Trig ordering ignoring the power; used to merge factors.
int compare_trig_base(const TrigFactor& a, const TrigFactor& b) {
  if (a.kind != b.kind) return a.kind < b.kind ? -1 : 1;
  return compare(a.arg, b.arg);
}

}  // namespace

int compare(const Monomial& a, const Monomial& b) {
  if (int c = compare_powers(a.powers, b.powers); c != 0) return c;
  if (int c = compare(a.exp_arg, b.exp_arg); c != 0) return c;
  const std::size_t n = std::min(a.trig.size(), b.trig.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (int c = compare_trig(a.trig[i], b.trig[i]); c != 0) return c;
  }
  if (a.trig.size() != b.trig.size()) return a.trig.size() < b.trig.size() ? -1 : 1;
  return 0;
}

// ------------------------------------------------------------------ Expr --

namespace {

const std::shared_ptr<const TermMap>& empty_terms() {
  static const auto empty = std::make_shared<const TermMap>();
  return empty;
}

void accumulate(TermMap& m, const Monomial& mono, const Number& c) {
  if (c.is_zero()) return;
  auto it = m.find(mono);
  if (it == m.end()) {
    m.emplace(mono, c);
    return;
  }
  Number sum = it->second + c;
  if (sum.is_zero()) {
    m.erase(it);
  } else {
    it->second = sum;
  }
}

Expr make(TermMap&& m) {
  if (m.empty()) return Expr();
  return Expr(std::make_shared<const TermMap>(std::move(m)));
}

Expr single(const Monomial& mono, const Number& c) {
  TermMap m;
  accumulate(m, mono, c);
  return make(std::move(m));
}

Monomial multiply(const Monomial& a, const Monomial& b) {
  Monomial out;
  // powers: sorted merge
  auto ia = a.powers.begin();
  auto ib = b.powers.begin();
  while (ia != a.powers.end() || ib != b.powers.end()) {
    if (ib == b.powers.end() || (ia != a.powers.end() && ia->first < ib->first)) {
      out.powers.push_back(*ia++);
    } else if (ia == a.powers.end() || ib->first < ia->first) {
      out.powers.push_back(*ib++);
    } else {
      const int k = ia->second + ib->second;
      if (k != 0) out.powers.emplace_back(ia->first, k);
      ++ia;
      ++ib;
    }
  }
  out.exp_arg = a.exp_arg + b.exp_arg;
  // trig: sorted merge on (kind, arg)
  auto ta = a.trig.begin();
  auto tb = b.trig.begin();
  while (ta != a.trig.end() || tb != b.trig.end()) {
    int c = 0;
    if (ta == a.trig.end()) {
      c = 1;
    } else if (tb == b.trig.end()) {
      c = -1;
    } else {
      c = compare_trig_base(*ta, *tb);
    }
    if (c < 0) {
      out.trig.push_back(*ta++);
    } else if (c > 0) {
      out.trig.push_back(*tb++);
    } else {
      out.trig.push_back({ta->kind, ta->arg, ta->power + tb->power});
      ++ta;
      ++tb;
    }
  }
  return out;
}

// Coefficient of the unit monomial.
Number constant_term(const Expr& e) {
  const auto& t = e.terms();
  if (!t.empty() && t.begin()->first.is_unit()) return t.begin()->second;
  return Number(0);
}

Expr trig_factor(TrigKind kind, const Expr& normalized_arg, int power) {
  Monomial m;
  m.trig.push_back({kind, normalized_arg, power});
  return single(m, Number(1));
}

}  // namespace

Expr::Expr() : terms_(empty_terms()) {}

Expr::Expr(long long value) : Expr(Number(value)) {}

Expr::Expr(const Number& value) : terms_(empty_terms()) {
  if (!value.is_zero()) {
    TermMap m;
    m.emplace(Monomial{}, value);
    terms_ = std::make_shared<const TermMap>(std::move(m));
  }
}

Expr Expr::variable(std::string name) {
  if (name.empty()) throw VariableError("empty variable name");
  Monomial m;
  m.powers.emplace_back(std::move(name), 1);
  return single(m, Number(1));
}

bool Expr::is_zero() const { return terms_->empty(); }

bool Expr::is_constant() const {
  return terms_->empty() || (terms_->size() == 1 && terms_->begin()->first.is_unit());
}

Number Expr::constant_value() const {
  if (!is_constant()) throw DomainError("expression is not constant: " + to_string());
  return terms_->empty() ? Number(0) : terms_->begin()->second;
}

bool Expr::is_algebraic() const {
  return std::all_of(terms_->begin(), terms_->end(), [](const auto& kv) {
    return kv.first.exp_arg.is_zero() && kv.first.trig.empty();
  });
}

std::size_t Expr::term_count() const { return terms_->size(); }

std::set<std::string> Expr::free_variables() const {
  std::set<std::string> out;
  for (const auto& [mono, c] : *terms_) {
    for (const auto& [name, k] : mono.powers) out.insert(name);
    auto sub = mono.exp_arg.free_variables();
    out.insert(sub.begin(), sub.end());
    for (const auto& t : mono.trig) {
      auto s = t.arg.free_variables();
      out.insert(s.begin(), s.end());
    }
  }
  return out;
}

bool Expr::depends_on(std::string_view name) const {
  return free_variables().count(std::string(name)) > 0;
}

Expr operator+(const Expr& a, const Expr& b) {
  if (a.is_zero()) return b;
  if (b.is_zero()) return a;
  TermMap m = a.terms();
  for (const auto& [mono, c] : b.terms()) accumulate(m, mono, c);
  return make(std::move(m));
}

Expr Expr::operator-() const {
  TermMap m;
  for (const auto& [mono, c] : *terms_) m.emplace(mono, -c);
  return make(std::move(m));
}

Expr operator-(const Expr& a, const Expr& b) { return a + (-b); }

Expr operator*(const Expr& a, const Expr& b) {
  if (a.is_zero() || b.is_zero()) return Expr();
  TermMap m;
  for (const auto& [ma, ca] : a.terms()) {
    for (const auto& [mb, cb] : b.terms()) accumulate(m, multiply(ma, mb), ca * cb);
  }
  return make(std::move(m));
}

Expr operator/(const Expr& a, const Expr& b) { return a * pow(b, -1); }

int compare(const Expr& a, const Expr& b) {
  if (a.terms_ == b.terms_) return 0;
  auto ia = a.terms_->begin();
  auto ib = b.terms_->begin();
  for (; ia != a.terms_->end() && ib != b.terms_->end(); ++ia, ++ib) {
    if (int c = compare(ia->first, ib->first); c != 0) return c;
    if (int c = compare(ia->second, ib->second); c != 0) return c;
  }
  if (ia == a.terms_->end() && ib == b.terms_->end()) return 0;
  return ia == a.terms_->end() ? -1 : 1;
}

Expr exp(const Expr& arg) {
  if (!arg.is_algebraic()) throw DomainError("exp argument must be algebraic: " + arg.to_string());
  const Number c = constant_term(arg);
  const Expr rest = arg - Expr(c);
  const Number factor = c.is_zero() ? Number(1) : Number::real(std::exp(c.value()));
  if (rest.is_zero()) return Expr(factor);
  Monomial m;
  m.exp_arg = rest;
  return single(m, factor);
}

namespace {

Expr trig(TrigKind kind, const Expr& arg) {
  if (!arg.is_algebraic()) throw DomainError("trigonometric argument must be algebraic: " + arg.to_string());
  if (arg.is_constant()) {
    const double v = arg.constant_value().value();
    if (arg.is_zero()) return kind == TrigKind::Sin ? Expr() : Expr(1);
    return Expr::real(kind == TrigKind::Sin ? std::sin(v) : std::cos(v));
  }
  const bool flip = arg.terms().begin()->second.negative();
  const Expr normalized = flip ? -arg : arg;
  Expr out = trig_factor(kind, normalized, 1);
  return (flip && kind == TrigKind::Sin) ? -out : out;
}

}  // namespace

Expr sin(const Expr& arg) { return trig(TrigKind::Sin, arg); }
Expr cos(const Expr& arg) { return trig(TrigKind::Cos, arg); }

Expr pow(const Expr& base, int exponent) {
  if (exponent == 0) return Expr(1);
  if (exponent < 0) {
    if (base.term_count() != 1) {
      throw DomainError("negative power of a multi-term expression: " + base.to_string());
    }
    const auto& [mono, c] = *base.terms().begin();
    if (!mono.trig.empty()) throw DomainError("negative power of a trigonometric factor");
    Monomial inv;
    for (const auto& [name, k] : mono.powers) inv.powers.emplace_back(name, -k);
    inv.exp_arg = -mono.exp_arg;
    return pow(single(inv, Number(1) / c), -exponent);
  }
  Expr result(1);
  Expr b = base;
  unsigned e = static_cast<unsigned>(exponent);
  while (e != 0) {
    if (e & 1U) result = result * b;
    e >>= 1U;
    if (e != 0) b = b * b;
  }
  return result;
}

Expr diff(const Expr& e, std::string_view var) {
  Expr out;
  for (const auto& [mono, c] : e.terms()) {
    // power rule
    for (std::size_t i = 0; i < mono.powers.size(); ++i) {
      if (mono.powers[i].first != var) continue;
      const int k = mono.powers[i].second;
      Monomial m = mono;
      if (k == 1) {
        m.powers.erase(m.powers.begin() + static_cast<std::ptrdiff_t>(i));
      } else {
        m.powers[i].second = k - 1;
      }
      out += single(m, c * Number(k));
    }
    // exp factor
    if (!mono.exp_arg.is_zero()) {
      const Expr d = diff(mono.exp_arg, var);
      if (!d.is_zero()) out += single(mono, c) * d;
    }
    // trig factors
    for (std::size_t j = 0; j < mono.trig.size(); ++j) {
      const TrigFactor& f = mono.trig[j];
      const Expr d = diff(f.arg, var);
      if (d.is_zero()) continue;
      Monomial m = mono;
      if (f.power == 1) {
        m.trig.erase(m.trig.begin() + static_cast<std::ptrdiff_t>(j));
      } else {
        m.trig[j].power = f.power - 1;
      }
      const Expr derivative = f.kind == TrigKind::Sin ? trig_factor(TrigKind::Cos, f.arg, 1)
                                                      : -trig_factor(TrigKind::Sin, f.arg, 1);
      out += single(m, c * Number(f.power)) * derivative * d;
    }
  }
  return out;
}

Expr diff(const Expr& e, std::string_view var, const std::vector<std::string>& declared) {
  if (std::find(declared.begin(), declared.end(), var) == declared.end()) {
    throw VariableError("undeclared variable '" + std::string(var) + "'");
  }
  return diff(e, var);
}

Expr substitute(const Expr& e, const std::map<std::string, Expr>& images) {
  if (images.empty()) return e;
  Expr out;
  for (const auto& [mono, c] : e.terms()) {
    Expr term(c);
    for (const auto& [name, k] : mono.powers) {
      auto it = images.find(name);
      term *= pow(it == images.end() ? Expr::variable(name) : it->second, k);
    }
    if (!mono.exp_arg.is_zero()) term *= exp(substitute(mono.exp_arg, images));
    for (const auto& f : mono.trig) {
      const Expr a = substitute(f.arg, images);
      term *= pow(f.kind == TrigKind::Sin ? sin(a) : cos(a), f.power);
    }
    out += term;
  }
  return out;
}

double eval(const Expr& e, const Point& pt) {
  double sum = 0.0;
  for (const auto& [mono, c] : e.terms()) {
    double v = c.value();
    for (const auto& [name, k] : mono.powers) {
      auto it = pt.find(name);
      if (it == pt.end()) throw VariableError("no value assigned to '" + name + "'");
      if (k < 0 && it->second == 0.0) throw DomainError("negative power of zero in '" + name + "'");
      v *= std::pow(it->second, k);
    }
    if (!mono.exp_arg.is_zero()) v *= std::exp(eval(mono.exp_arg, pt));
    for (const auto& f : mono.trig) {
      const double a = eval(f.arg, pt);
      v *= std::pow(f.kind == TrigKind::Sin ? std::sin(a) : std::cos(a), f.power);
    }
    sum += v;
  }
  if (!std::isfinite(sum)) throw DomainError("non-finite value of " + e.to_string());
  return sum;
}

// ------------------------------------------------------------- printing --

namespace {

std::string monomial_string(const Monomial& m) {
  std::string out;
  auto append = [&out](const std::string& f) {
    if (!out.empty()) out += "*";
    out += f;
  };
  for (const auto& [name, k] : m.powers) append(k == 1 ? name : name + "^" + std::to_string(k));
  if (!m.exp_arg.is_zero()) append("exp(" + m.exp_arg.to_string() + ")");
  for (const auto& f : m.trig) {
    std::string s = (f.kind == TrigKind::Sin ? "sin(" : "cos(") + f.arg.to_string() + ")";
    if (f.power != 1) s += "^" + std::to_string(f.power);
    append(s);
  }
  return out;
}

}  // namespace

std::string Expr::to_string() const {
  if (terms_->empty()) return "0";
  std::string out;
  bool first = true;
  for (const auto& [mono, c] : *terms_) {
    const bool neg = c.negative();
    const Number mag = neg ? -c : c;
    if (first) {
      if (neg) out += "-";
    } else {
      out += neg ? " - " : " + ";
    }
    first = false;
    if (mono.is_unit()) {
      out += mag.to_string();
    } else if (mag.is_one()) {
      out += monomial_string(mono);
    } else {
      out += mag.to_string() + "*" + monomial_string(mono);
    }
  }
  return out;
}

// --------------------------------------------------------------- parsing --

namespace {

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  Expr parse_all() {
    Expr e = expression();
    skip_ws();
    if (pos_ != text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError("expression '" + std::string(text_) + "' at column " + std::to_string(pos_ + 1) +
                     ": " + what);
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  Expr expression() {
    Expr e = term();
    for (;;) {
      if (accept('+')) {
        e = e + term();
      } else if (accept('-')) {
        e = e - term();
      } else {
        return e;
      }
    }
  }

  Expr term() {
    Expr e = unary();
    for (;;) {
      if (accept('*')) {
        e = e * unary();
      } else if (accept('/')) {
        const std::size_t at = pos_;
        Expr d = unary();
        try {
          e = e / d;
        } catch (const DomainError& err) {
          pos_ = at;
          fail(err.what());
        }
      } else {
        return e;
      }
    }
  }

  Expr unary() {
    if (accept('-')) return -unary();
    if (accept('+')) return unary();
    return power();
  }

  Expr power() {
    Expr base = primary();
    if (accept('^')) {
      const std::size_t at = pos_;
      Expr ex = unary();
      if (!ex.is_constant() || !ex.constant_value().is_integer()) {
        pos_ = at;
        fail("exponent must be an integer constant");
      }
      const long long k = ex.constant_value().num();
      if (k > 64 || k < -64) fail("exponent out of range");
      try {
        return pow(base, static_cast<int>(k));
      } catch (const DomainError& err) {
        pos_ = at;
        fail(err.what());
      }
    }
    return base;
  }

  Expr number() {
    const std::size_t start = pos_;
    std::string digits;
    long long scale = 0;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) digits += text_[pos_++];
    if (pos_ < text_.size() && text_[pos_] == '.') {
      ++pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        digits += text_[pos_++];
        --scale;
      }
    }
    if (digits.empty()) fail("malformed number");
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t p = pos_ + 1;
      bool neg = false;
      if (p < text_.size() && (text_[p] == '+' || text_[p] == '-')) neg = text_[p++] == '-';
      if (p < text_.size() && std::isdigit(static_cast<unsigned char>(text_[p]))) {
        long long ex = 0;
        while (p < text_.size() && std::isdigit(static_cast<unsigned char>(text_[p]))) {
          ex = ex * 10 + (text_[p++] - '0');
          if (ex > 400) fail("exponent out of range");
        }
        scale += neg ? -ex : ex;
        pos_ = p;
      }
    }
    const std::string literal(text_.substr(start, pos_ - start));
    // exact rational when it fits, double otherwise
    digits.erase(0, std::min(digits.find_first_not_of('0'), digits.size()));
    if (digits.empty()) return Expr();
    if (digits.size() <= 18 && std::abs(scale) <= 18) {
      long long n = std::stoll(digits);
      long long p10 = 1;
      for (long long i = 0; i < std::abs(scale); ++i) p10 *= 10;
      if (scale >= 0) {
        const i128 v = static_cast<i128>(n) * p10;
        if (fits64(v)) return Expr(Number(static_cast<long long>(v)));
      } else {
        return Expr(Number::rational(n, p10));
      }
    }
    return Expr::real(std::stod(literal));
  }

  Expr primary() {
    skip_ws();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    const char c = text_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (c == '(') {
      ++pos_;
      Expr e = expression();
      if (!accept(')')) fail("expected ')'");
      return e;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::size_t start = pos_;
      while (pos_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
        ++pos_;
      }
      const std::string name(text_.substr(start, pos_ - start));
      skip_ws();
      if (pos_ < text_.size() && text_[pos_] == '(') {
        ++pos_;
        const std::size_t at = pos_;
        Expr arg = expression();
        if (!accept(')')) fail("expected ')'");
        try {
          if (name == "exp") return exp(arg);
          if (name == "sin") return sin(arg);
          if (name == "cos") return cos(arg);
          if (name == "sqrt") return sqrt_constant(arg);
        } catch (const DomainError& err) {
          pos_ = at;
          fail(err.what());
        }
        pos_ = start;
        fail("unknown function '" + name + "'");
      }
      if (name == "pi") return Expr::real(std::numbers::pi);
      return Expr::variable(name);
    }
    fail("unexpected '" + std::string(1, c) + "'");
  }

  static Expr sqrt_constant(const Expr& arg) {
    if (!arg.is_constant()) throw DomainError("sqrt is only supported for constants");
    const Number v = arg.constant_value();
    if (v.negative()) throw DomainError("sqrt of a negative constant");
    if (v.exact()) {
      const auto isqrt = [](long long x) -> std::optional<long long> {
        auto r = static_cast<long long>(std::llround(std::sqrt(static_cast<double>(x))));
        for (long long c = std::max(0LL, r - 1); c <= r + 1; ++c) {
          if (static_cast<i128>(c) * c == x) return c;
        }
        return std::nullopt;
      };
      auto n = isqrt(v.num());
      auto d = isqrt(v.den());
      if (n && d) return Expr(Number::rational(*n, *d));
    }
    return Expr::real(std::sqrt(v.value()));
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

Expr parse(std::string_view text) { return Parser(text).parse_all(); }

// ------------------------------------------------------------ compiling --

struct CompiledExpr::Term {
  double coeff = 0.0;
  std::vector<std::pair<int, int>> powers;
  std::shared_ptr<const std::vector<Term>> exp_arg;
  struct Trig {
    TrigKind kind;
    std::shared_ptr<const std::vector<Term>> arg;
    int power;
  };
  std::vector<Trig> trig;
};

namespace {

using CTerm = CompiledExpr::Term;

}  // namespace

CompiledExpr::CompiledExpr(const Expr& e, const std::vector<std::string>& slots) {
  std::unordered_map<std::string, int> index;
  for (std::size_t i = 0; i < slots.size(); ++i) index.emplace(slots[i], static_cast<int>(i));
  struct Builder {
    const std::unordered_map<std::string, int>& index;
    std::shared_ptr<const std::vector<Term>> build(const Expr& x) const {
      auto out = std::make_shared<std::vector<Term>>();
      for (const auto& [mono, c] : x.terms()) {
        Term t;
        t.coeff = c.value();
        for (const auto& [name, k] : mono.powers) {
          auto it = index.find(name);
          if (it == index.end()) throw VariableError("no slot for variable '" + name + "'");
          t.powers.emplace_back(it->second, k);
        }
        if (!mono.exp_arg.is_zero()) t.exp_arg = build(mono.exp_arg);
        for (const auto& f : mono.trig) t.trig.push_back({f.kind, build(f.arg), f.power});
        out->push_back(std::move(t));
      }
      return out;
    }
  };
  terms_ = Builder{index}.build(e);
}

namespace {

double run(const std::vector<CTerm>& terms, const double* x) {
  double sum = 0.0;
  for (const auto& t : terms) {
    double v = t.coeff;
    for (const auto& [slot, k] : t.powers) {
      const double b = x[slot];
      switch (k) {
        case 1: v *= b; break;
        case 2: v *= b * b; break;
        default: v *= std::pow(b, k);
      }
    }
    if (t.exp_arg) v *= std::exp(run(*t.exp_arg, x));
    for (const auto& f : t.trig) {
      const double a = run(*f.arg, x);
      const double s = f.kind == TrigKind::Sin ? std::sin(a) : std::cos(a);
      v *= f.power == 1 ? s : std::pow(s, f.power);
    }
    sum += v;
  }
  return sum;
}

}  // namespace

double CompiledExpr::operator()(const double* values) const {
  return terms_ ? run(*terms_, values) : 0.0;
}

}  // namespace lcms
