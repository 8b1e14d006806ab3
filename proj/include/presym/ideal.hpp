#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "presym/expr.hpp"

namespace presym {

/// How a vanishing question was decided.
enum class DecisionMethod { Triangular, MomentumLinear, Sampling };

std::string_view to_string(DecisionMethod m);

struct Decision {
  bool zero = false;
  DecisionMethod method = DecisionMethod::Triangular;
  /// Sampling only: number of points checked. Zero with method Sampling means
  /// no admissible point could be generated and the answer is not certified.
  int samples = 0;
  bool certain() const { return method != DecisionMethod::Sampling || samples > 0; }
};

/// Triangular set of solved variables together with polynomials known to be
/// nonzero. Binding values never mention bound variables.
class SolvedSystem {
 public:
  const std::map<Var, Expr>& bindings() const { return bindings_; }
  /// Irreducible factors assumed nonzero, in constraint form.
  const std::vector<Polynomial>& nonzero() const { return nonzero_; }

  Expr reduce(const Expr& e) const { return substitute_unchecked(e, bindings_); }

  /// True when p is a nonzero constant or all of its factors are assumed nonzero.
  bool known_nonzero(const Polynomial& p) const;

  /// Removes constant and known-nonzero factors and repeated factors. A nonzero
  /// constant result means p cannot vanish under the assumptions.
  Polynomial strip(const Polynomial& p) const;

  /// Records p != 0 (factor by factor). Returns false when p is identically zero
  /// after reduction (the set becomes empty).
  bool assume_nonzero(const Expr& p);

  /// A variable of p that can be solved for with a coefficient known nonzero,
  /// preferring controls, then momenta, states, parameters.
  std::optional<std::pair<Var, Expr>> solvable(const Polynomial& p) const;

  /// Adds v := value and back-substitutes. Returns false when some assumed
  /// nonzero factor becomes identically zero.
  bool bind(const Var& v, const Expr& value);

  bool is_bound(const Var& v) const { return bindings_.count(v) > 0; }

 private:
  std::map<Var, Expr> bindings_;
  std::vector<Polynomial> nonzero_;
};

/// Decides whether e vanishes on {gens = 0, inequations != 0}.
///
/// Triangular-solvable generators are eliminated exactly first; remaining
/// generators linear and homogeneous in momenta are handled by a rank test over
/// the field of the other variables; anything else falls back to checking 64
/// random rational points on the set.
Decision reduces_to_zero(const Expr& e, const std::vector<Expr>& gens, const std::vector<Expr>& inequations);

/// Same as reduces_to_zero, starting from an already solved system plus extra
/// unsolved generators.
Decision reduces_to_zero(const Expr& e, const SolvedSystem& base, const std::vector<Expr>& unsolved);

/// True when {gens = 0, inequations != 0} is provably empty by triangular
/// elimination; nullopt when elimination cannot decide.
std::optional<bool> provably_empty(const std::vector<Expr>& gens, const std::vector<Expr>& inequations);

}  // namespace presym
