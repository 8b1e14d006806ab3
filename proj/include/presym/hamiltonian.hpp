#pragma once

#include <utility>
#include <vector>

#include "presym/problem.hpp"

namespace presym {

/// Pontryagin Hamiltonian H = <p, X> + p0 F with its Hamilton equations.
struct HamiltonianSystem {
  const ControlProblem* problem = nullptr;
  CotangentChart chart;
  Expr H;
  /// dH/dp_i, one per state.
  std::vector<Expr> state_rhs;
  /// -dH/dx_j, one per momentum.
  std::vector<Expr> momentum_rhs;
  std::vector<Var> control_velocities;

  int p0() const { return chart.p0; }
};

/// Coordinates (x, p) of a cotangent bundle.
struct CanonicalCoordinates {
  std::vector<Var> positions;
  std::vector<Var> momenta;
};

using VectorField = std::vector<Expr>;

HamiltonianSystem build_hamiltonian(const ControlProblem& p, int p0);

std::pair<std::vector<Expr>, std::vector<Expr>> hamilton_equations(const HamiltonianSystem& hs);

/// Derivative of f along X_H with the control directions weighted by the
/// control-velocity symbols. Throws std::invalid_argument when f already
/// contains a control velocity.
Expr apply_XH(const HamiltonianSystem& hs, const Expr& f);

/// {f, g} = sum_j df/dx_j dg/dp_j - df/dp_j dg/dx_j.
Expr poisson_bracket(const CanonicalCoordinates& c, const Expr& f, const Expr& g);
Expr poisson_bracket(const HamiltonianSystem& hs, const Expr& f, const Expr& g);

/// [V, W]^j = sum_i V^i dW^j/dx_i - W^i dV^j/dx_i. Throws
/// std::invalid_argument when a component depends on a control.
VectorField lie_bracket(const std::vector<Var>& coords, const VectorField& v, const VectorField& w);

/// H_V = sum_j p_j V^j.
Expr hamiltonian_lift(const std::vector<Var>& momenta, const VectorField& v);

}  // namespace presym
