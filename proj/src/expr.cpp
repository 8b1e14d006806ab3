#include "presym/expr.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>

namespace presym {

Expr Expr::fraction(const Polynomial& num, const Polynomial& den)
{
  if (den.is_zero()) throw std::domain_error("division by an expression that is identically zero");
  Expr out;
  if (num.is_zero()) return out;
  if (den.is_constant()) {
    out.num_ = num * Rational(1 / den.constant_term());
    return out;
  }
  Polynomial n = num, d = den;
  if (!certainly_coprime(n, d)) {
    // Denominators are mostly products of small factors; cancel those first.
    for (const auto& [f, k] : factor_polynomial(d)) {
      for (int i = 0; i < k; ++i) {
        auto q = exact_divide(n, f);
        if (!q) break;
        n = std::move(*q);
        d = *exact_divide(d, f);
      }
    }
    if (!d.is_constant() && !certainly_coprime(n, d)) {
      Polynomial g = gcd(n, d);
      if (!g.is_constant()) {
        n = *exact_divide(n, g);
        d = *exact_divide(d, g);
      }
    }
  }
  auto [c, dp] = integer_primitive(d);
  out.num_ = n * Rational(1 / c);
  out.den_ = std::move(dp);
  return out;
}

VarSet Expr::variables() const
{
  VarSet out = num_.variables();
  VarSet d = den_.variables();
  out.insert(d.begin(), d.end());
  return out;
}

bool Expr::contains_kind(VarKind kind) const
{
  for (const auto& v : variables())
    if (v.kind == kind) return true;
  return false;
}

Expr operator+(const Expr& a, const Expr& b)
{
  if (a.is_polynomial() && b.is_polynomial()) return Expr(a.num_ + b.num_);
  if (a.den_ == b.den_) return Expr::fraction(a.num_ + b.num_, a.den_);
  return Expr::fraction(a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_);
}

Expr operator-(const Expr& a)
{
  Expr out = a;
  out.num_ = -out.num_;
  return out;
}

Expr operator-(const Expr& a, const Expr& b) { return a + (-b); }

Expr operator*(const Expr& a, const Expr& b)
{
  if (a.is_polynomial() && b.is_polynomial()) return Expr(a.num_ * b.num_);
  return Expr::fraction(a.num_ * b.num_, a.den_ * b.den_);
}

Expr operator/(const Expr& a, const Expr& b)
{
  if (b.is_zero()) throw std::domain_error("division by an expression that is identically zero");
  return Expr::fraction(a.num_ * b.den_, a.den_ * b.num_);
}

Expr pow(const Expr& e, int exponent)
{
  if (exponent < 0) return Expr(1) / pow(e, -exponent);
  if (e.is_polynomial()) return Expr(e.numerator().pow(exponent));
  return Expr::fraction(e.numerator().pow(exponent), e.denominator().pow(exponent));
}

Expr normalize(const Expr& e) { return e; }

Expr differentiate(const Expr& e, const Var& v)
{
  const Polynomial& n = e.numerator();
  const Polynomial& d = e.denominator();
  if (e.is_polynomial()) return Expr::fraction(n.derivative(v), d);
  return Expr::fraction(n.derivative(v) * d - n * d.derivative(v), d * d);
}

namespace {

void check_acyclic(const std::map<Var, Expr>& bindings)
{
  // 0 = unvisited, 1 = on stack, 2 = done
  std::map<Var, int> state;
  std::function<void(const Var&)> visit = [&](const Var& v) {
    auto it = bindings.find(v);
    if (it == bindings.end()) return;
    int& s = state[v];
    if (s == 2) return;
    if (s == 1) throw std::invalid_argument("cyclic substitution involving '" + v.name + "'");
    s = 1;
    for (const auto& w : it->second.variables()) visit(w);
    state[v] = 2;
  };
  for (const auto& [v, _] : bindings) visit(v);
}

// Substitutes into a polynomial over a common denominator so that only one
// gcd is taken per call.
Expr substitute_polynomial(const Polynomial& p, const std::map<Var, Expr>& bindings)
{
  std::map<Var, int> max_exp;
  bool touched = false;
  for (const auto& [m, _] : p.terms())
    for (const auto& [v, e] : m.factors())
      if (bindings.count(v)) {
        touched = true;
        int& me = max_exp[v];
        me = std::max(me, e);
      }
  if (!touched) return Expr(p);

  std::map<Var, std::vector<Polynomial>> num_pow, den_pow;
  Polynomial common(1);
  for (const auto& [v, e] : max_exp) {
    const Expr& b = bindings.at(v);
    auto& np = num_pow[v];
    auto& dp = den_pow[v];
    np.push_back(Polynomial(1));
    dp.push_back(Polynomial(1));
    for (int k = 1; k <= e; ++k) {
      np.push_back(np.back() * b.numerator());
      dp.push_back(dp.back() * b.denominator());
    }
    common = common * dp[e];
  }

  Polynomial total;
  for (const auto& [m, c] : p.terms()) {
    Polynomial termp(c);
    Monomial rest;
    for (const auto& [v, e] : m.factors()) {
      if (auto it = max_exp.find(v); it != max_exp.end()) {
        termp = termp * num_pow[v][e] * den_pow[v][it->second - e];
      } else {
        rest = rest * Monomial(v, e);
      }
    }
    // variables without a binding that never got a denominator factor
    for (const auto& [v, me] : max_exp)
      if (m.exponent(v) == 0) termp = termp * den_pow[v][me];
    total += termp.mul_monomial(rest, 1);
  }
  return Expr::fraction(total, common);
}

}  // namespace

Expr substitute_unchecked(const Expr& e, const std::map<Var, Expr>& bindings)
{
  if (bindings.empty()) return e;
  Expr num = substitute_polynomial(e.numerator(), bindings);
  if (e.is_polynomial()) return num * Expr(Rational(1) / e.denominator().constant_term());
  return num / substitute_polynomial(e.denominator(), bindings);
}

Expr substitute(const Expr& e, const std::map<Var, Expr>& bindings)
{
  check_acyclic(bindings);
  return substitute_unchecked(e, bindings);
}

Rational eval_at(const Expr& e, const std::map<Var, Rational>& point)
{
  Rational d = e.denominator().evaluate(point);
  Rational n = e.numerator().evaluate(point);
  if (d == 0) throw std::domain_error("denominator vanishes at the evaluation point");
  return n / d;
}

namespace {

double eval_poly_double(const Polynomial& p, const std::map<Var, double>& point)
{
  double total = 0;
  for (const auto& [m, c] : p.terms()) {
    double t = c.get_d();
    for (const auto& [v, e] : m.factors()) {
      auto it = point.find(v);
      if (it == point.end()) throw std::invalid_argument("unbound variable '" + v.name + "'");
      t *= std::pow(it->second, e);
    }
    total += t;
  }
  return total;
}

}  // namespace

double eval_double(const Expr& e, const std::map<Var, double>& point)
{
  double d = eval_poly_double(e.denominator(), point);
  double n = eval_poly_double(e.numerator(), point);
  if (d == 0) throw std::domain_error("denominator vanishes at the evaluation point");
  return n / d;
}

Polynomial constraint_form(const Polynomial& p) { return primitive(p); }

Expr constraint_form(const Expr& e) { return Expr(primitive(e.numerator())); }

}  // namespace presym
