#pragma once

#include <gmpxx.h>

#include <string>
#include <string_view>

namespace presym {

/// Exact arbitrary-precision rational number.
using Rational = mpq_class;
using Integer = mpz_class;

inline Rational make_rational(long num, long den = 1)
{
  Rational q(num, den);
  q.canonicalize();
  return q;
}

/// Parses "p", "p/q" or a finite decimal such as "-0.125" exactly.
Rational parse_rational(std::string_view text);

inline std::string to_string(const Rational& q) { return q.get_str(); }

}  // namespace presym
