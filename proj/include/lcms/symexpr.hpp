#pragma once

// Symbolic scalar expressions in canonical expanded form.
//
// An Expr is a finite sum  sum_k c_k * M_k  where each monomial M_k is a
// product of integer powers of named variables, at most one exp(P) factor and
// integer powers of sin(A)/cos(A) factors.  Arguments P and A are algebraic
// (Laurent polynomials in the variables).  Coefficients are exact rationals
// or doubles.  Every constructor returns the canonical form, so structural
// equality is the zero test: is_zero(e) is true iff no monomial survives.
// exp/sin/cos of distinct arguments are treated as independent, which makes
// the zero test conservative (it never reports a non-zero as zero).

#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace lcms {

/// Exact rational while the numerator/denominator fit in 64 bits, a double
/// otherwise (or when constructed from a double).
class Number {
 public:
  Number() = default;
  Number(long long value) : num_(value) {}  // NOLINT(google-explicit-constructor)

  static Number rational(long long num, long long den);
  static Number real(double value);

  [[nodiscard]] bool exact() const { return exact_; }
  [[nodiscard]] long long num() const { return num_; }
  [[nodiscard]] long long den() const { return den_; }
  [[nodiscard]] double value() const;
  [[nodiscard]] bool is_zero() const;
  [[nodiscard]] bool is_one() const { return exact_ && num_ == 1 && den_ == 1; }
  [[nodiscard]] bool negative() const { return value() < 0.0; }
  [[nodiscard]] bool is_integer() const { return exact_ && den_ == 1; }

  friend Number operator+(const Number& a, const Number& b);
  friend Number operator-(const Number& a, const Number& b);
  friend Number operator*(const Number& a, const Number& b);
  friend Number operator/(const Number& a, const Number& b);
  Number operator-() const;

  /// Total order used for canonical keys. Exact and real numbers never
  /// compare equal to each other.
  friend int compare(const Number& a, const Number& b);

  [[nodiscard]] std::string to_string() const;

 private:
  bool exact_ = true;
  long long num_ = 0;
  long long den_ = 1;
  double real_ = 0.0;
};

class Expr;
struct TermMap;

/// Assignment of real values to variable names.
using Point = std::unordered_map<std::string, double>;

/// Immutable symbolic expression; cheap to copy (shared storage).
class Expr {
 public:
  Expr();
  Expr(long long value);     // NOLINT(google-explicit-constructor)
  Expr(const Number& value); // NOLINT(google-explicit-constructor)

  static Expr constant(const Number& value) { return Expr(value); }
  static Expr real(double value) { return Expr(Number::real(value)); }
  static Expr variable(std::string name);

  [[nodiscard]] bool is_zero() const;
  [[nodiscard]] bool is_constant() const;
  /// Value of a constant expression; throws DomainError otherwise.
  [[nodiscard]] Number constant_value() const;
  /// True when no exp/sin/cos factor occurs.
  [[nodiscard]] bool is_algebraic() const;
  [[nodiscard]] std::size_t term_count() const;
  [[nodiscard]] std::set<std::string> free_variables() const;
  [[nodiscard]] bool depends_on(std::string_view name) const;

  [[nodiscard]] std::string to_string() const;

  [[nodiscard]] const TermMap& terms() const { return *terms_; }

  friend Expr operator+(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a, const Expr& b);
  friend Expr operator*(const Expr& a, const Expr& b);
  friend Expr operator/(const Expr& a, const Expr& b);
  Expr operator-() const;
  Expr& operator+=(const Expr& b) { return *this = *this + b; }
  Expr& operator-=(const Expr& b) { return *this = *this - b; }
  Expr& operator*=(const Expr& b) { return *this = *this * b; }

  friend int compare(const Expr& a, const Expr& b);
  friend bool operator==(const Expr& a, const Expr& b) { return compare(a, b) == 0; }
  friend bool operator<(const Expr& a, const Expr& b) { return compare(a, b) < 0; }

  explicit Expr(std::shared_ptr<const TermMap> terms) : terms_(std::move(terms)) {}

 private:
  std::shared_ptr<const TermMap> terms_;
};

enum class TrigKind { Sin, Cos };

struct TrigFactor {
  TrigKind kind;
  Expr arg;
  int power;
};

struct Monomial {
  /// Sorted by name; exponents non-zero.
  std::vector<std::pair<std::string, int>> powers;
  /// Argument of the single exp factor; zero means no factor.  Never has a
  /// constant term (constants are folded into the coefficient).
  Expr exp_arg;
  /// Sorted by (kind, arg); powers positive.
  std::vector<TrigFactor> trig;

  [[nodiscard]] bool is_unit() const { return powers.empty() && exp_arg.is_zero() && trig.empty(); }
};

int compare(const Monomial& a, const Monomial& b);

struct MonomialLess {
  bool operator()(const Monomial& a, const Monomial& b) const { return compare(a, b) < 0; }
};

struct TermMap : std::map<Monomial, Number, MonomialLess> {};

Expr exp(const Expr& arg);
Expr sin(const Expr& arg);
Expr cos(const Expr& arg);
/// Integer power; negative exponents require a single-term base without
/// sin/cos factors.
Expr pow(const Expr& base, int exponent);

/// Exact partial derivative (canonical).
Expr diff(const Expr& e, std::string_view var);
/// As diff(), but rejects variables outside `declared`.
Expr diff(const Expr& e, std::string_view var, const std::vector<std::string>& declared);

/// Simultaneous substitution of variables by expressions.
Expr substitute(const Expr& e, const std::map<std::string, Expr>& images);

/// Numeric evaluation; throws VariableError for unassigned variables and
/// DomainError for non-finite results.
double eval(const Expr& e, const Point& pt);

/// True iff e canonicalizes to zero.
inline bool is_zero(const Expr& e) { return e.is_zero(); }

/// Parses infix text: numbers, identifiers, + - * / ^, parentheses,
/// exp/sin/cos/sqrt and the constant `pi`.
Expr parse(std::string_view text);

/// Expression compiled against a fixed variable ordering for fast repeated
/// evaluation (grid integrators).
class CompiledExpr {
 public:
  CompiledExpr() = default;
  CompiledExpr(const Expr& e, const std::vector<std::string>& slots);

  [[nodiscard]] double operator()(const double* values) const;

  struct Term;

 private:
  std::shared_ptr<const std::vector<Term>> terms_;
};

}  // namespace lcms
