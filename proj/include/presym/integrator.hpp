#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "presym/engine.hpp"

namespace presym {

class IntegrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Initial data off the branch: a constraint or inequation fails at t0.
class InitialDataError : public IntegrationError {
 public:
  using IntegrationError::IntegrationError;
};

/// Floating-point evaluator for a fixed expression over an indexed variable list.
class CompiledExpr {
 public:
  CompiledExpr() = default;
  /// Throws std::invalid_argument when e mentions a variable outside `index`.
  CompiledExpr(const Expr& e, const std::map<Var, int>& index);
  double operator()(const double* values) const;

 private:
  struct Term {
    double coeff;
    std::vector<std::pair<int, int>> powers;
  };
  static double eval(const std::vector<Term>& terms, const double* values);
  std::vector<Term> num_;
  std::vector<Term> den_;
  bool has_den_ = false;
};

/// Numeric starting point: values for free variables (states, momenta, controls)
/// and parameters. Bound variables are computed from the branch bindings.
struct InitialData {
  std::map<std::string, double> values;
  std::map<std::string, double> parameters;
  /// Controls without solved velocities held constant.
  std::vector<std::string> hold_controls;
  /// Integration interval; defaults to the problem's fixed interval.
  std::optional<std::pair<double, double>> span;
};

struct IntegrateOptions {
  double t0 = 0;
  double t1 = 1;
  double h = 1e-3;
  double tol_drift = 1e-6;
  double tol_init = 1e-12;
};

struct Trajectory {
  std::vector<double> t;
  /// Column names: states, momenta, controls in declaration order.
  std::vector<Var> columns;
  std::vector<std::vector<double>> samples;
  /// Max |constraint| and |H - H(t0)| per node.
  std::vector<double> residual;
  std::vector<double> h_drift;
  std::vector<double> hamiltonian;
  std::map<std::string, double> parameters;
  std::vector<std::string> constraint_labels;
  /// Why integration stopped early; empty when the span was covered.
  std::string aborted;

  double max_residual() const;
  double max_h_drift() const;
  double value(std::size_t node, const Var& v) const;
};

/// Values of every column at t0 completed from the branch bindings.
std::map<Var, double> resolve_initial(const HamiltonianSystem& hs, const Branch& b, const InitialData& init);

/// Fixed-step classical fourth-order integration of the reduced Hamilton
/// equations on a stabilized branch. Throws IntegrationError on invalid
/// initial data, drift above tol_drift and rejected steps.
Trajectory integrate(const HamiltonianSystem& hs, const Branch& b, const InitialData& init, const IntegrateOptions& opts);

struct EndpointCheck {
  std::string component;
  double expected = 0;
  double actual = 0;
  double deviation = 0;
  bool pass = false;
};

struct EndpointReport {
  std::vector<EndpointCheck> start;
  std::vector<EndpointCheck> end;
  bool pass = true;
};

/// Compares the first and last samples with the problem endpoints, evaluated
/// with the trajectory's parameter values.
EndpointReport verify_endpoints(const Trajectory& tr, const ControlProblem& p, double tol);

/// Delimited text dump: header, one row per node, 17 significant digits.
std::string trajectory_csv(const Trajectory& tr);

/// Reads {"values", "parameters", "constants", "hold_controls", "span"}; values may be numbers or
/// expressions over parameters and names listed in "constants".
InitialData load_initial_data(std::string_view json_text, const ControlProblem& p,
                              const std::map<std::string, double>& extra_parameters = {});
InitialData load_initial_data_file(const std::string& path, const ControlProblem& p,
                                   const std::map<std::string, double>& extra_parameters = {});

}  // namespace presym
