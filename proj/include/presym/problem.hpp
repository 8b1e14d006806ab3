#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "presym/expr.hpp"

namespace presym {

class ProblemError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TimeMode {
  bool free = false;
  Rational a = 0;
  Rational b = 1;
};

struct Endpoints {
  std::vector<Expr> from;
  std::vector<Expr> to;
};

/// Optimal control problem on a chart of M with controls in an open set of R^k.
struct ControlProblem {
  std::string name;
  std::vector<Var> states;
  std::vector<Var> controls;
  std::vector<Var> parameters;
  /// Conjugate momenta, one per state and in the same order.
  std::vector<Var> momenta;
  /// Undetermined coefficients of the control directions, one per control.
  std::vector<Var> control_velocities;
  std::vector<Expr> vector_field;
  Expr cost;
  TimeMode time;
  std::optional<Endpoints> endpoints;
  /// Informational only; derivations treat the control set as open.
  std::vector<std::optional<std::pair<Rational, Rational>>> control_bounds;
  /// Branch pins carried by the file, each an expression required nonzero.
  std::vector<Expr> pins;
  VarTable table;

  std::size_t m() const { return states.size(); }
  std::size_t k() const { return controls.size(); }
  std::optional<Var> find(std::string_view name) const { return table.find(name); }
  /// Momentum conjugate to the i-th state.
  const Var& momentum(std::size_t i) const { return momenta.at(i); }
};

/// Momenta paired with the states and the constant p0.
struct CotangentChart {
  std::vector<Var> momenta;
  int p0 = 0;
};

/// Throws std::invalid_argument unless p0 is 0 or -1.
CotangentChart make_chart(const ControlProblem& p, int p0);

/// Parses and validates a problem given as JSON text. Throws ProblemError.
ControlProblem load_problem(std::string_view json_text);
ControlProblem load_problem_file(const std::filesystem::path& path);

/// JSON text that load_problem reads back to an equal problem.
std::string print_problem(const ControlProblem& p);

/// Parses "expr != 0" (or a bare "expr") over the problem's variables.
Expr parse_pin(std::string_view text, const ControlProblem& p);

struct AffineDecomposition {
  std::vector<Expr> drift;
  /// inputs[l] is the field multiplying the l-th control.
  std::vector<std::vector<Expr>> inputs;
};

/// X = Z + sum_l u_l Y_l with control-free Z and Y_l, or nullopt when some
/// component is not jointly affine in the controls.
std::optional<AffineDecomposition> affine_decomposition(const ControlProblem& p);

}  // namespace presym
