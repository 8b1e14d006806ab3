#pragma once

#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "presym/rational.hpp"
#include "presym/var.hpp"

namespace presym {

/// Power product of variables, kept sorted by variable order with positive exponents.
class Monomial {
 public:
  using Factor = std::pair<Var, int>;

  Monomial() = default;
  explicit Monomial(const Var& v, int exponent = 1);

  const std::vector<Factor>& factors() const { return factors_; }
  bool is_one() const { return factors_.empty(); }
  int degree() const;
  int exponent(const Var& v) const;

  Monomial operator*(const Monomial& other) const;
  /// this / other when other divides this.
  std::optional<Monomial> divide(const Monomial& other) const;
  /// Removes every power of v.
  Monomial without(const Var& v) const;
  /// Componentwise minimum (gcd of two monomials).
  static Monomial gcd(const Monomial& a, const Monomial& b);

  friend bool operator==(const Monomial&, const Monomial&) = default;

 private:
  std::vector<Factor> factors_;
  friend class Polynomial;
};

/// Graded lexicographic comparison: true when a is strictly greater than b.
bool grlex_greater(const Monomial& a, const Monomial& b);

struct GrlexDescending {
  bool operator()(const Monomial& a, const Monomial& b) const { return grlex_greater(a, b); }
};

/// Sparse multivariate polynomial with rational coefficients. Terms iterate in
/// descending graded-lexicographic order, so the first term is the leading one.
class Polynomial {
 public:
  using Terms = std::map<Monomial, Rational, GrlexDescending>;

  Polynomial() = default;
  Polynomial(const Rational& c);  // NOLINT: constants convert implicitly
  Polynomial(long c) : Polynomial(Rational(c)) {}  // NOLINT
  static Polynomial variable(const Var& v, int exponent = 1);
  static Polynomial term(const Monomial& m, const Rational& c);

  const Terms& terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }
  bool is_zero() const { return terms_.empty(); }
  bool is_constant() const;
  /// Coefficient of the monomial 1.
  Rational constant_term() const;
  const Monomial& leading_monomial() const { return terms_.begin()->first; }
  const Rational& leading_coefficient() const { return terms_.begin()->second; }

  VarSet variables() const;
  bool contains(const Var& v) const;
  int degree(const Var& v) const;
  int total_degree() const;

  /// Coefficients with respect to v: exponent -> coefficient free of v.
  std::map<int, Polynomial> coefficients(const Var& v) const;
  Polynomial coefficient(const Var& v, int exponent) const;

  Polynomial& operator+=(const Polynomial& other);
  Polynomial& operator-=(const Polynomial& other);
  Polynomial& operator*=(const Rational& c);

  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
  friend Polynomial operator-(Polynomial a) { return a *= Rational(-1); }
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b);
  friend Polynomial operator*(Polynomial a, const Rational& c) { return a *= c; }
  friend Polynomial operator*(const Rational& c, Polynomial a) { return a *= c; }
  friend bool operator==(const Polynomial& a, const Polynomial& b) { return a.terms_ == b.terms_; }

  Polynomial pow(int exponent) const;
  Polynomial derivative(const Var& v) const;
  Polynomial mul_monomial(const Monomial& m, const Rational& c) const;

  /// Replaces v by the polynomial value.
  Polynomial substitute(const Var& v, const Polynomial& value) const;
  /// Replaces the listed variables by rational numbers; others are kept.
  Polynomial evaluate_partial(const std::map<Var, Rational>& point) const;
  /// Requires every variable to be bound.
  Rational evaluate(const std::map<Var, Rational>& point) const;

 private:
  void add_term(const Monomial& m, const Rational& c);
  Terms terms_;
};

/// Gcd of the monomials of p (the largest monomial dividing p).
Monomial monomial_content(const Polynomial& p);

/// Exact quotient a / b, or nullopt if b does not divide a.
std::optional<Polynomial> exact_divide(const Polynomial& a, const Polynomial& b);

/// Pseudo-remainder of a by b viewed as polynomials in v.
Polynomial pseudo_remainder(const Polynomial& a, const Polynomial& b, const Var& v);

/// Scales p to integer coefficients with gcd 1 and a positive leading coefficient.
/// Returns (c, q) with p = c * q. The zero polynomial maps to (0, 0).
std::pair<Rational, Polynomial> integer_primitive(const Polynomial& p);

/// Integer-primitive representative of p (see integer_primitive).
Polynomial primitive(const Polynomial& p);

/// Greatest common divisor, normalized by integer_primitive.
Polynomial gcd(const Polynomial& a, const Polynomial& b);

/// Cheap sufficient test for gcd(a, b) = 1 by specialization; false means
/// "unknown", not "shares a factor".
bool certainly_coprime(const Polynomial& a, const Polynomial& b);

/// Gcd of the coefficients of p with respect to v (p itself when v is absent).
Polynomial content_in(const Polynomial& p, const Var& v);

}  // namespace presym
