#pragma once

#include <random>
#include <vector>

#include "presym/expr.hpp"

namespace presym::testing {

/// Sum of up to max_terms monomials of total degree <= max_degree with small
/// nonzero integer coefficients. May cancel to a lower degree.
inline Expr random_poly(std::mt19937_64& rng, const std::vector<Var>& vars, int max_degree, int max_terms = 4)
{
  std::uniform_int_distribution<int> coeff(-5, 5);
  std::uniform_int_distribution<int> terms(1, max_terms);
  std::uniform_int_distribution<int> degree(0, max_degree);
  std::uniform_int_distribution<std::size_t> pick(0, vars.size() - 1);
  Expr out;
  const int n = terms(rng);
  for (int t = 0; t < n; ++t) {
    int c = coeff(rng);
    if (c == 0) c = 1;
    Expr term(static_cast<long>(c));
    const int d = degree(rng);
    for (int i = 0; i < d; ++i) term *= Expr(vars[pick(rng)]);
    out += term;
  }
  return out;
}

inline std::vector<Expr> random_field(std::mt19937_64& rng, const std::vector<Var>& coords, int max_degree)
{
  std::vector<Expr> v;
  for (std::size_t i = 0; i < coords.size(); ++i) v.push_back(random_poly(rng, coords, max_degree, 3));
  return v;
}

inline Rational random_rational(std::mt19937_64& rng)
{
  std::uniform_int_distribution<long> num(-9, 9);
  std::uniform_int_distribution<long> den(1, 5);
  return make_rational(num(rng), den(rng));
}

inline double random_double(std::mt19937_64& rng, double lo, double hi)
{
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

}  // namespace presym::testing
