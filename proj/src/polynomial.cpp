#include "presym/polynomial.hpp"

#include <algorithm>
#include <cstdint>
#include <cctype>
#include <stdexcept>

namespace presym {

Rational parse_rational(std::string_view text)
{
  std::string s(text);
  auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  if (s.empty()) throw std::invalid_argument("empty number");

  bool negative = false;
  std::size_t pos = 0;
  if (s[0] == '-' || s[0] == '+') {
    negative = s[0] == '-';
    pos = 1;
  }
  std::string body = s.substr(pos);
  Rational value;
  try {
    if (auto slash = body.find('/'); slash != std::string::npos) {
      Integer num(body.substr(0, slash), 10), den(body.substr(slash + 1), 10);
      if (den == 0) throw std::invalid_argument("zero denominator in '" + s + "'");
      value = Rational(num, den);
    } else if (auto dot = body.find('.'); dot != std::string::npos) {
      std::string whole = body.substr(0, dot), frac = body.substr(dot + 1);
      if (whole.empty()) whole = "0";
      if (frac.empty()) frac = "0";
      if (!std::all_of(whole.begin(), whole.end(), ::isdigit) ||
          !std::all_of(frac.begin(), frac.end(), ::isdigit))
        throw std::invalid_argument("bad number '" + s + "'");
      Integer scale;
      mpz_ui_pow_ui(scale.get_mpz_t(), 10, frac.size());
      value = Rational(Integer(whole + frac, 10), scale);
    } else {
      if (body.empty() || !std::all_of(body.begin(), body.end(), ::isdigit))
        throw std::invalid_argument("bad number '" + s + "'");
      value = Rational(Integer(body, 10));
    }
  } catch (const std::invalid_argument&) {
    throw;
  } catch (const std::exception&) {
    throw std::invalid_argument("bad number '" + s + "'");
  }
  value.canonicalize();
  return negative ? Rational(-value) : value;
}

std::string_view to_string(VarKind kind)
{
  switch (kind) {
    case VarKind::State: return "state";
    case VarKind::Momentum: return "momentum";
    case VarKind::Control: return "control";
    case VarKind::ControlVelocity: return "control-velocity";
    case VarKind::Parameter: return "parameter";
  }
  return "unknown";
}

const Var& VarTable::add(const Var& v)
{
  auto [it, inserted] = vars_.emplace(v.name, v);
  if (!inserted) throw std::invalid_argument("duplicate variable name '" + v.name + "'");
  return it->second;
}

std::optional<Var> VarTable::find(std::string_view name) const
{
  if (auto it = vars_.find(name); it != vars_.end()) return it->second;
  return std::nullopt;
}

std::vector<Var> VarTable::all() const
{
  std::vector<Var> out;
  for (const auto& [_, v] : vars_) out.push_back(v);
  std::sort(out.begin(), out.end());
  return out;
}

// ---------------------------------------------------------------- Monomial

Monomial::Monomial(const Var& v, int exponent)
{
  if (exponent < 0) throw std::invalid_argument("negative monomial exponent");
  if (exponent > 0) factors_.emplace_back(v, exponent);
}

int Monomial::degree() const
{
  int d = 0;
  for (const auto& [_, e] : factors_) d += e;
  return d;
}

int Monomial::exponent(const Var& v) const
{
  for (const auto& [w, e] : factors_)
    if (w == v) return e;
  return 0;
}

Monomial Monomial::operator*(const Monomial& other) const
{
  Monomial out;
  out.factors_.reserve(factors_.size() + other.factors_.size());
  auto a = factors_.begin(), b = other.factors_.begin();
  while (a != factors_.end() || b != other.factors_.end()) {
    if (b == other.factors_.end() || (a != factors_.end() && a->first < b->first)) {
      out.factors_.push_back(*a++);
    } else if (a == factors_.end() || b->first < a->first) {
      out.factors_.push_back(*b++);
    } else {
      out.factors_.emplace_back(a->first, a->second + b->second);
      ++a;
      ++b;
    }
  }
  return out;
}

std::optional<Monomial> Monomial::divide(const Monomial& other) const
{
  Monomial out;
  auto a = factors_.begin();
  for (const auto& [v, e] : other.factors_) {
    while (a != factors_.end() && a->first < v) out.factors_.push_back(*a++);
    if (a == factors_.end() || a->first != v || a->second < e) return std::nullopt;
    if (a->second > e) out.factors_.emplace_back(v, a->second - e);
    ++a;
  }
  while (a != factors_.end()) out.factors_.push_back(*a++);
  return out;
}

Monomial Monomial::without(const Var& v) const
{
  Monomial out;
  for (const auto& f : factors_)
    if (f.first != v) out.factors_.push_back(f);
  return out;
}

Monomial Monomial::gcd(const Monomial& a, const Monomial& b)
{
  Monomial out;
  auto i = a.factors_.begin(), j = b.factors_.begin();
  while (i != a.factors_.end() && j != b.factors_.end()) {
    if (i->first < j->first) {
      ++i;
    } else if (j->first < i->first) {
      ++j;
    } else {
      out.factors_.emplace_back(i->first, std::min(i->second, j->second));
      ++i;
      ++j;
    }
  }
  return out;
}

bool grlex_greater(const Monomial& a, const Monomial& b)
{
  int da = a.degree(), db = b.degree();
  if (da != db) return da > db;
  const auto& fa = a.factors();
  const auto& fb = b.factors();
  auto i = fa.begin(), j = fb.begin();
  while (i != fa.end() && j != fb.end()) {
    if (i->first == j->first) {
      if (i->second != j->second) return i->second > j->second;
      ++i;
      ++j;
    } else {
      // The monomial holding the earlier variable has the larger exponent there.
      return i->first < j->first;
    }
  }
  return i != fa.end() && j == fb.end();
}

// -------------------------------------------------------------- Polynomial

Polynomial::Polynomial(const Rational& c)
{
  if (c != 0) terms_.emplace(Monomial{}, c);
}

Polynomial Polynomial::variable(const Var& v, int exponent) { return term(Monomial(v, exponent), 1); }

Polynomial Polynomial::term(const Monomial& m, const Rational& c)
{
  Polynomial p;
  if (c != 0) p.terms_.emplace(m, c);
  return p;
}

bool Polynomial::is_constant() const { return terms_.empty() || (terms_.size() == 1 && terms_.begin()->first.is_one()); }

Rational Polynomial::constant_term() const
{
  if (auto it = terms_.find(Monomial{}); it != terms_.end()) return it->second;
  return 0;
}

VarSet Polynomial::variables() const
{
  VarSet out;
  for (const auto& [m, _] : terms_)
    for (const auto& [v, e] : m.factors()) out.insert(v);
  return out;
}

bool Polynomial::contains(const Var& v) const
{
  for (const auto& [m, _] : terms_)
    if (m.exponent(v) > 0) return true;
  return false;
}

int Polynomial::degree(const Var& v) const
{
  int d = 0;
  for (const auto& [m, _] : terms_) d = std::max(d, m.exponent(v));
  return d;
}

int Polynomial::total_degree() const { return terms_.empty() ? 0 : terms_.begin()->first.degree(); }

std::map<int, Polynomial> Polynomial::coefficients(const Var& v) const
{
  std::map<int, Polynomial> out;
  for (const auto& [m, c] : terms_) out[m.exponent(v)].add_term(m.without(v), c);
  return out;
}

Polynomial Polynomial::coefficient(const Var& v, int exponent) const
{
  Polynomial out;
  for (const auto& [m, c] : terms_)
    if (m.exponent(v) == exponent) out.add_term(m.without(v), c);
  return out;
}

void Polynomial::add_term(const Monomial& m, const Rational& c)
{
  if (c == 0) return;
  auto [it, inserted] = terms_.try_emplace(m, c);
  if (!inserted) {
    it->second += c;
    if (it->second == 0) terms_.erase(it);
  }
}

Polynomial& Polynomial::operator+=(const Polynomial& other)
{
  for (const auto& [m, c] : other.terms_) add_term(m, c);
  return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& other)
{
  for (const auto& [m, c] : other.terms_) add_term(m, -c);
  return *this;
}

Polynomial& Polynomial::operator*=(const Rational& c)
{
  if (c == 0) {
    terms_.clear();
    return *this;
  }
  for (auto& [_, coeff] : terms_) coeff *= c;
  return *this;
}

Polynomial operator*(const Polynomial& a, const Polynomial& b)
{
  Polynomial out;
  for (const auto& [ma, ca] : a.terms_)
    for (const auto& [mb, cb] : b.terms_) out.add_term(ma * mb, ca * cb);
  return out;
}

Polynomial Polynomial::mul_monomial(const Monomial& m, const Rational& c) const
{
  Polynomial out;
  if (c == 0) return out;
  for (const auto& [mm, cc] : terms_) out.terms_.emplace_hint(out.terms_.end(), mm * m, cc * c);
  return out;
}

Polynomial Polynomial::pow(int exponent) const
{
  if (exponent < 0) throw std::invalid_argument("negative polynomial power");
  Polynomial result(1), base = *this;
  while (exponent > 0) {
    if (exponent & 1) result = result * base;
    exponent >>= 1;
    if (exponent) base = base * base;
  }
  return result;
}

Polynomial Polynomial::derivative(const Var& v) const
{
  Polynomial out;
  for (const auto& [m, c] : terms_) {
    int e = m.exponent(v);
    if (e == 0) continue;
    Monomial reduced = m.without(v) * Monomial(v, e - 1);
    out.add_term(reduced, c * e);
  }
  return out;
}

Polynomial Polynomial::substitute(const Var& v, const Polynomial& value) const
{
  if (!contains(v)) return *this;
  auto coeffs = coefficients(v);
  Polynomial out;
  Polynomial power(1);
  int current = 0;
  for (const auto& [e, c] : coeffs) {
    while (current < e) {
      power = power * value;
      ++current;
    }
    out += c * power;
  }
  return out;
}

Polynomial Polynomial::evaluate_partial(const std::map<Var, Rational>& point) const
{
  Polynomial out;
  for (const auto& [m, c] : terms_) {
    Rational coeff = c;
    Monomial rest;
    for (const auto& [v, e] : m.factors()) {
      if (auto it = point.find(v); it != point.end()) {
        Rational p;
        mpz_pow_ui(p.get_num_mpz_t(), it->second.get_num_mpz_t(), e);
        mpz_pow_ui(p.get_den_mpz_t(), it->second.get_den_mpz_t(), e);
        coeff *= p;
      } else {
        rest.factors_.emplace_back(v, e);
      }
    }
    out.add_term(rest, coeff);
  }
  return out;
}

Rational Polynomial::evaluate(const std::map<Var, Rational>& point) const
{
  Polynomial p = evaluate_partial(point);
  if (!p.is_constant()) throw std::invalid_argument("unbound variable '" + p.variables().begin()->name + "'");
  return p.constant_term();
}

// --------------------------------------------------------------- algorithms

Monomial monomial_content(const Polynomial& p)
{
  if (p.is_zero()) return {};
  auto it = p.terms().begin();
  Monomial g = it->first;
  for (++it; it != p.terms().end() && !g.is_one(); ++it) g = Monomial::gcd(g, it->first);
  return g;
}

std::optional<Polynomial> exact_divide(const Polynomial& a, const Polynomial& b)
{
  if (b.is_zero()) throw std::domain_error("division by zero polynomial");
  if (b.is_constant()) return a * Rational(1 / b.constant_term());
  Polynomial remainder = a, quotient;
  const Monomial& lm = b.leading_monomial();
  const Rational& lc = b.leading_coefficient();
  while (!remainder.is_zero()) {
    auto m = remainder.leading_monomial().divide(lm);
    if (!m) return std::nullopt;
    Rational c = remainder.leading_coefficient() / lc;
    quotient += Polynomial::term(*m, c);
    remainder -= b.mul_monomial(*m, c);
  }
  return quotient;
}

Polynomial pseudo_remainder(const Polynomial& a, const Polynomial& b, const Var& v)
{
  int db = b.degree(v);
  Polynomial lcb = b.coefficient(v, db);
  Polynomial r = a;
  while (!r.is_zero() && r.degree(v) >= db) {
    int dr = r.degree(v);
    Polynomial lcr = r.coefficient(v, dr);
    r = lcb * r - lcr * Polynomial::variable(v, dr - db) * b;
  }
  return r;
}

std::pair<Rational, Polynomial> integer_primitive(const Polynomial& p)
{
  if (p.is_zero()) return {Rational(0), Polynomial()};
  Integer num_gcd = 0, den_lcm = 1;
  for (const auto& [_, c] : p.terms()) {
    num_gcd = gcd(num_gcd, Integer(c.get_num()));
    den_lcm = lcm(den_lcm, Integer(c.get_den()));
  }
  Rational content(num_gcd, den_lcm);
  content.canonicalize();
  if (p.leading_coefficient() < 0) content = -content;
  return {content, p * Rational(1 / content)};
}

Polynomial primitive(const Polynomial& p) { return integer_primitive(p).second; }

namespace {

Polynomial primitive_in(const Polynomial& p, const Var& v)
{
  Polynomial c = content_in(p, v);
  return primitive(*exact_divide(p, c));
}

using Dense = std::vector<Rational>;  // coefficient of v^i at index i

Dense dense_in(const Polynomial& p, const Var& v)
{
  Dense out(static_cast<std::size_t>(p.degree(v)) + 1);
  for (const auto& [m, c] : p.terms()) out[static_cast<std::size_t>(m.exponent(v))] += c;
  while (out.size() > 1 && out.back() == 0) out.pop_back();
  return out;
}

std::size_t univariate_gcd_degree(Dense a, Dense b)
{
  if (a.size() < b.size()) std::swap(a, b);
  while (!(b.size() == 1 && b[0] == 0)) {
    if (b.size() == 1) return 0;
    while (a.size() >= b.size() && !(a.size() == 1 && a[0] == 0)) {
      Rational f = a.back() / b.back();
      std::size_t shift = a.size() - b.size();
      for (std::size_t i = 0; i < b.size(); ++i) a[i + shift] -= f * b[i];
      a.pop_back();
      while (a.size() > 1 && a.back() == 0) a.pop_back();
    }
    std::swap(a, b);
  }
  return a.size() - 1;
}

// True when gcd(a, b) certainly does not involve v: at a point where both
// leading coefficients in v survive, the specialized gcd has degree zero.
bool coprime_in(const Polynomial& a, const Polynomial& b, const Var& v)
{
  Polynomial la = a.coefficient(v, a.degree(v));
  Polynomial lb = b.coefficient(v, b.degree(v));
  VarSet others = a.variables();
  for (const Var& w : b.variables()) others.insert(w);
  others.erase(v);
  std::uint64_t state = 0x9e3779b97f4a7c15ULL;
  for (int attempt = 0; attempt < 3; ++attempt) {
    std::map<Var, Rational> point;
    for (const Var& w : others) {
      state = state * 6364136223846793005ULL + 1442695040888963407ULL;
      point[w] = Rational(static_cast<long>((state >> 33) % 61) - 30);
    }
    if (la.evaluate(point) == 0 || lb.evaluate(point) == 0) continue;
    return univariate_gcd_degree(dense_in(a.evaluate_partial(point), v), dense_in(b.evaluate_partial(point), v)) == 0;
  }
  return false;
}

}  // namespace

Polynomial content_in(const Polynomial& p, const Var& v)
{
  if (!p.contains(v)) return primitive(p);
  Polynomial g;
  for (const auto& [_, c] : p.coefficients(v)) {
    g = gcd(g, c);
    if (g.is_constant()) return Polynomial(1);
  }
  return g;
}

bool certainly_coprime(const Polynomial& a, const Polynomial& b)
{
  if (a.is_zero() || b.is_zero()) return false;
  if (a.is_constant() || b.is_constant()) return true;
  if (!Monomial::gcd(monomial_content(a), monomial_content(b)).is_one()) return false;
  VarSet vb = b.variables();
  for (const auto& v : a.variables())
    if (vb.count(v) && !coprime_in(a, b, v)) return false;
  return true;
}

Polynomial gcd(const Polynomial& a, const Polynomial& b)
{
  if (a.is_zero()) return primitive(b);
  if (b.is_zero()) return primitive(a);
  if (a.is_constant() || b.is_constant()) return Polynomial(1);

  // Pull out the monomial part first; it keeps the recursion shallow for the
  // typical product-of-variables inputs.
  Monomial mg = Monomial::gcd(monomial_content(a), monomial_content(b));
  Polynomial ar = *exact_divide(a, Polynomial::term(monomial_content(a), 1));
  Polynomial br = *exact_divide(b, Polynomial::term(monomial_content(b), 1));
  Polynomial mono = Polynomial::term(mg, 1);
  if (ar.is_constant() || br.is_constant()) return mono;

  VarSet va = ar.variables(), vb = br.variables();
  bool coprime = true;
  for (const auto& v : va)
    if (vb.count(v) && !coprime_in(ar, br, v)) {
      coprime = false;
      break;
    }
  if (coprime) return mono;

  for (const auto& v : va)
    if (!vb.count(v)) return primitive(mono * gcd(content_in(ar, v), br));
  for (const auto& v : vb)
    if (!va.count(v)) return primitive(mono * gcd(ar, content_in(br, v)));

  const Var v = *va.begin();
  Polynomial ca = content_in(ar, v), cb = content_in(br, v);
  Polynomial g_content = gcd(ca, cb);
  Polynomial pa = primitive(*exact_divide(ar, ca));
  Polynomial pb = primitive(*exact_divide(br, cb));
  if (pa.degree(v) < pb.degree(v)) std::swap(pa, pb);

  Polynomial g_prim;
  while (true) {
    Polynomial r = pseudo_remainder(pa, pb, v);
    if (r.is_zero()) {
      g_prim = primitive_in(pb, v);
      break;
    }
    if (r.degree(v) == 0) {
      g_prim = Polynomial(1);
      break;
    }
    pa = std::move(pb);
    pb = primitive_in(r, v);
  }
  return primitive(mono * g_content * g_prim);
}

}  // namespace presym
