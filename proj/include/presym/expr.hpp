#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "presym/polynomial.hpp"

namespace presym {

/// Immutable symbolic expression over named variables.
///
/// Values are stored in canonical rational form: numerator / denominator with
/// gcd 1, the denominator integer-primitive with a positive leading coefficient.
/// Every arithmetic result is canonical, so structural equality is
/// mathematical equality.
class Expr {
 public:
  Expr() = default;
  Expr(const Rational& c) : num_(c) {}  // NOLINT
  Expr(long c) : num_(c) {}             // NOLINT
  Expr(const Polynomial& p) : num_(p) {}  // NOLINT
  Expr(const Var& v) : num_(Polynomial::variable(v)) {}  // NOLINT

  /// Throws std::domain_error when den is identically zero.
  static Expr fraction(const Polynomial& num, const Polynomial& den);

  const Polynomial& numerator() const { return num_; }
  const Polynomial& denominator() const { return den_; }

  bool is_polynomial() const { return den_.is_constant(); }
  bool is_zero() const { return num_.is_zero(); }
  bool is_constant() const { return num_.is_constant() && den_.is_constant(); }
  /// Only meaningful when is_constant().
  Rational constant_value() const { return num_.constant_term(); }

  VarSet variables() const;
  bool contains(const Var& v) const { return num_.contains(v) || den_.contains(v); }
  bool contains_kind(VarKind kind) const;

  friend Expr operator+(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a);
  friend Expr operator*(const Expr& a, const Expr& b);
  /// Throws std::domain_error when b is identically zero.
  friend Expr operator/(const Expr& a, const Expr& b);
  Expr& operator+=(const Expr& b) { return *this = *this + b; }
  Expr& operator-=(const Expr& b) { return *this = *this - b; }
  Expr& operator*=(const Expr& b) { return *this = *this * b; }

  friend bool operator==(const Expr& a, const Expr& b) { return a.num_ == b.num_ && a.den_ == b.den_; }

 private:
  Polynomial num_;
  Polynomial den_ = Polynomial(1);
};

Expr pow(const Expr& e, int exponent);

/// Canonical form. Expressions are canonical on construction, so this is the
/// identity on values; it exists as the named normalization entry point.
Expr normalize(const Expr& e);

/// Exact partial derivative.
Expr differentiate(const Expr& e, const Var& v);

/// Simultaneous substitution. Throws std::invalid_argument on cyclic bindings
/// (a variable reachable from its own binding).
Expr substitute(const Expr& e, const std::map<Var, Expr>& bindings);
/// Substitution without the cycle check, for bindings known to be triangular.
Expr substitute_unchecked(const Expr& e, const std::map<Var, Expr>& bindings);

/// Exact value at a point. Throws std::invalid_argument on unbound variables
/// and std::domain_error when the denominator vanishes.
Rational eval_at(const Expr& e, const std::map<Var, Rational>& point);

/// Floating-point value at a point (same error behaviour as eval_at).
double eval_double(const Expr& e, const std::map<Var, double>& point);

/// Polynomial constraint form: integer-primitive numerator with positive
/// leading coefficient. The sign convention makes c and -c identical.
Polynomial constraint_form(const Polynomial& p);
Expr constraint_form(const Expr& e);

using FactorList = std::vector<std::pair<Expr, int>>;

/// Factors a polynomial expression. Throws std::invalid_argument("factor
/// requires polynomial") on a non-constant denominator.
FactorList factor(const Expr& e);

/// Polynomial factorization: content-free factors with multiplicities, in a
/// deterministic order. Products of variables, linear forms and perfect powers
/// are split completely; other factors may be returned square-free but coarser.
std::vector<std::pair<Polynomial, int>> factor_polynomial(const Polynomial& p);

/// Product of the distinct factors of p (the square-free kernel), content-free.
Polynomial radical(const Polynomial& p);

/// Rational roots of a univariate polynomial in v (empty when the coefficients
/// are too large to enumerate divisors).
std::vector<Rational> rational_roots(const Polynomial& p, const Var& v);

}  // namespace presym
