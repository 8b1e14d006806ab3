#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "presym/expr.hpp"

namespace presym {

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Resolves identifiers while parsing; returning nullopt rejects the name.
using VarResolver = std::function<std::optional<Var>(std::string_view)>;

/// Parses infix text with + - * / ^, integer exponents, integer, decimal and
/// p/q literals and identifiers [A-Za-z_][A-Za-z0-9_]*.
Expr parse_expr(std::string_view text, const VarResolver& resolve);
Expr parse_expr(std::string_view text, const VarTable& table);

/// Resolver that accepts every identifier as a parameter (used by tests and tools).
VarResolver any_as_parameter();

/// Canonical text; parse_expr(to_string(e)) == e given the same variable table.
std::string to_string(const Expr& e);
std::string to_string(const Polynomial& p);

}  // namespace presym
