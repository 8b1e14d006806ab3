#include <algorithm>
#include <stdexcept>

#include "presym/expr.hpp"

namespace presym {

namespace {

constexpr int kMaxLinearSearchDegree = 8;
constexpr std::size_t kMaxCombinations = 256;

using Factors = std::vector<std::pair<Polynomial, int>>;

// Positive divisors of |n|; empty when n is too large to enumerate.
std::vector<Integer> divisors(Integer n)
{
  if (n < 0) n = -n;
  if (n == 0 || n > Integer("1000000000000")) return {};
  std::vector<Integer> small, large;
  for (Integer d = 1; d * d <= n; ++d) {
    if (n % d == 0) {
      small.push_back(d);
      if (d * d != n) large.push_back(n / d);
    }
  }
  small.insert(small.end(), large.rbegin(), large.rend());
  return small;
}

// Yun's square-free decomposition of f, which must be primitive in v.
Factors square_free_in(const Polynomial& f, const Var& v)
{
  Factors out;
  Polynomial fp = f.derivative(v);
  Polynomial a0 = gcd(f, fp);
  Polynomial b = *exact_divide(f, a0);
  Polynomial c = *exact_divide(fp, a0);
  Polynomial d = c - b.derivative(v);
  for (int i = 1; !b.is_constant(); ++i) {
    Polynomial a = gcd(b, d);
    if (!a.is_constant()) out.emplace_back(primitive(a), i);
    b = *exact_divide(b, a);
    c = *exact_divide(d, a);
    d = c - b.derivative(v);
  }
  return out;
}

Polynomial univariate_at(const Polynomial& p, const std::map<Var, Rational>& point) { return p.evaluate_partial(point); }

// Looks for a factor of q that is linear (total degree one). A linear factor
// involving v reads v - r(others) with r affine, so its root is recovered from
// rational roots of univariate restrictions along coordinate lines.
std::optional<Polynomial> find_linear_factor(const Polynomial& q)
{
  int deg = q.total_degree();
  if (deg < 2 || deg > kMaxLinearSearchDegree) return std::nullopt;
  VarSet vars = q.variables();
  for (const Var& v : vars) {
    std::vector<Var> others;
    for (const Var& w : vars)
      if (w != v) others.push_back(w);
    int dv = q.degree(v);
    if (dv == 0) continue;
    Polynomial lc = q.coefficient(v, dv);

    for (int attempt = 0; attempt < 4; ++attempt) {
      std::map<Var, Rational> base;
      for (std::size_t i = 0; i < others.size(); ++i)
        base[others[i]] = attempt == 0 ? 0 : static_cast<long>((i * attempt) % 5 + attempt);
      if (lc.evaluate_partial(base).constant_term() == 0 || !lc.evaluate_partial(base).is_constant()) continue;

      std::vector<Rational> roots0 = rational_roots(univariate_at(q, base), v);
      for (const Rational& r0 : roots0) {
        // slopes[i] holds every admissible coefficient of (others[i] - base) in r.
        std::vector<std::vector<Rational>> slopes(others.size());
        bool feasible = true;
        for (std::size_t i = 0; i < others.size() && feasible; ++i) {
          const Var& w = others[i];
          std::map<Var, Rational> line = base;
          line.erase(w);
          Polynomial restricted = univariate_at(q, line);  // polynomial in v and w
          for (long step = 1; step <= 3 && slopes[i].empty(); ++step) {
            std::map<Var, Rational> shifted = base;
            shifted[w] = base[w] + step;
            Polynomial lc_at = lc.evaluate_partial(shifted);
            if (!lc_at.is_constant() || lc_at.constant_term() == 0) continue;
            for (const Rational& r1 : rational_roots(univariate_at(q, shifted), v)) {
              Rational slope = (r1 - r0) / step;
              Polynomial along = Polynomial(r0) +
                                 Polynomial(slope) * (Polynomial::variable(w) - Polynomial(base[w]));
              if (restricted.substitute(v, along).is_zero()) slopes[i].push_back(slope);
            }
          }
          if (slopes[i].empty()) feasible = false;
        }
        if (!feasible) continue;

        std::size_t combos = 1;
        for (const auto& s : slopes) combos *= s.size();
        if (combos > kMaxCombinations) continue;
        for (std::size_t k = 0; k < combos; ++k) {
          std::size_t idx = k;
          Polynomial candidate = Polynomial::variable(v) - Polynomial(r0);
          for (std::size_t i = 0; i < others.size(); ++i) {
            const Rational& s = slopes[i][idx % slopes[i].size()];
            idx /= slopes[i].size();
            candidate -= Polynomial(s) * (Polynomial::variable(others[i]) - Polynomial(base[others[i]]));
          }
          if (exact_divide(q, candidate)) return primitive(candidate);
        }
      }
      break;  // one admissible base point suffices for v
    }
  }
  return std::nullopt;
}

void split(const Polynomial& q, int multiplicity, Factors& out)
{
  if (q.is_constant()) return;
  Polynomial p = primitive(q);

  // Monomial part.
  Monomial mc = monomial_content(p);
  if (!mc.is_one()) {
    for (const auto& [v, e] : mc.factors()) out.emplace_back(Polynomial::variable(v), e * multiplicity);
    split(*exact_divide(p, Polynomial::term(mc, 1)), multiplicity, out);
    return;
  }

  VarSet vars = p.variables();
  // Factors missing some variable show up in the content with respect to it.
  for (const Var& v : vars) {
    Polynomial c = content_in(p, v);
    if (!c.is_constant()) {
      split(c, multiplicity, out);
      split(*exact_divide(p, c), multiplicity, out);
      return;
    }
  }

  // Primitive in every variable and of degree one in some variable: irreducible.
  for (const Var& v : vars) {
    if (p.degree(v) == 1) {
      out.emplace_back(p, multiplicity);
      return;
    }
  }

  const Var& v = *vars.begin();
  Factors sqf = square_free_in(p, v);
  if (sqf.size() > 1 || (sqf.size() == 1 && sqf.front().second > 1)) {
    for (const auto& [f, m] : sqf) split(f, multiplicity * m, out);
    return;
  }

  if (auto lin = find_linear_factor(p)) {
    out.emplace_back(*lin, multiplicity);
    split(*exact_divide(p, *lin), multiplicity, out);
    return;
  }
  out.emplace_back(p, multiplicity);
}

}  // namespace

std::vector<Rational> rational_roots(const Polynomial& p, const Var& v)
{
  std::vector<Rational> roots;
  if (p.is_zero() || p.is_constant()) return roots;
  for (const Var& w : p.variables())
    if (w != v) throw std::invalid_argument("rational_roots: polynomial is not univariate");

  Polynomial q = primitive(p);  // integer coefficients
  Monomial mc = monomial_content(q);
  if (!mc.is_one()) {
    roots.push_back(0);
    q = *exact_divide(q, Polynomial::term(mc, 1));
  }
  if (q.is_constant()) return roots;
  Integer lead(q.coefficient(v, q.degree(v)).constant_term().get_num());
  Integer tail(q.constant_term().get_num());
  auto dn = divisors(tail), dd = divisors(lead);
  for (const Integer& a : dn) {
    for (const Integer& b : dd) {
      for (int sign : {1, -1}) {
        Rational cand(a * sign, b);
        cand.canonicalize();
        if (std::find(roots.begin(), roots.end(), cand) != roots.end()) continue;
        if (q.evaluate({{v, cand}}) == 0) roots.push_back(cand);
      }
    }
  }
  std::sort(roots.begin(), roots.end());
  return roots;
}

std::vector<std::pair<Polynomial, int>> factor_polynomial(const Polynomial& p)
{
  Factors raw;
  split(p, 1, raw);
  Factors merged;
  for (auto& [f, m] : raw) {
    Polynomial g = primitive(f);
    auto it = std::find_if(merged.begin(), merged.end(), [&](const auto& x) { return x.first == g; });
    if (it != merged.end()) {
      it->second += m;
    } else {
      merged.emplace_back(std::move(g), m);
    }
  }
  std::sort(merged.begin(), merged.end(), [](const auto& a, const auto& b) {
    const auto& ta = a.first.terms();
    const auto& tb = b.first.terms();
    // Higher leading monomials first, then lexicographic on the remaining terms.
    auto ia = ta.begin(), ib = tb.begin();
    for (; ia != ta.end() && ib != tb.end(); ++ia, ++ib) {
      if (ia->first != ib->first) return grlex_greater(ia->first, ib->first);
      if (ia->second != ib->second) return ia->second > ib->second;
    }
    return ia != ta.end() && ib == tb.end();
  });
  return merged;
}

FactorList factor(const Expr& e)
{
  if (!e.is_polynomial()) throw std::invalid_argument("factor requires polynomial");
  FactorList out;
  for (auto& [f, m] : factor_polynomial(e.numerator())) out.emplace_back(Expr(f), m);
  return out;
}

Polynomial radical(const Polynomial& p)
{
  if (p.is_zero()) return p;
  Polynomial out(1);
  for (const auto& [f, _] : factor_polynomial(p)) out = out * f;
  return out;
}

}  // namespace presym
