#include "presym/hamiltonian.hpp"

#include <stdexcept>

namespace presym {

HamiltonianSystem build_hamiltonian(const ControlProblem& p, int p0)
{
  HamiltonianSystem hs;
  hs.problem = &p;
  hs.chart = make_chart(p, p0);
  hs.control_velocities = p.control_velocities;
  Expr h = Expr(p0) * p.cost;
  for (std::size_t j = 0; j < p.m(); ++j) h += Expr(p.momenta[j]) * p.vector_field[j];
  hs.H = h;
  for (std::size_t i = 0; i < p.m(); ++i) {
    hs.state_rhs.push_back(differentiate(h, p.momenta[i]));
    hs.momentum_rhs.push_back(-differentiate(h, p.states[i]));
  }
  return hs;
}

std::pair<std::vector<Expr>, std::vector<Expr>> hamilton_equations(const HamiltonianSystem& hs)
{
  return {hs.state_rhs, hs.momentum_rhs};
}

Expr apply_XH(const HamiltonianSystem& hs, const Expr& f)
{
  if (f.contains_kind(VarKind::ControlVelocity))
    throw std::invalid_argument("apply_XH: argument contains a control-velocity variable");
  const ControlProblem& p = *hs.problem;
  Expr out;
  for (std::size_t i = 0; i < p.m(); ++i) {
    if (f.contains(p.states[i])) out += hs.state_rhs[i] * differentiate(f, p.states[i]);
    if (f.contains(p.momenta[i])) out += hs.momentum_rhs[i] * differentiate(f, p.momenta[i]);
  }
  for (std::size_t l = 0; l < p.k(); ++l)
    if (f.contains(p.controls[l])) out += Expr(hs.control_velocities[l]) * differentiate(f, p.controls[l]);
  return out;
}

Expr poisson_bracket(const CanonicalCoordinates& c, const Expr& f, const Expr& g)
{
  if (c.positions.size() != c.momenta.size()) throw std::invalid_argument("poisson_bracket: unpaired coordinates");
  Expr out;
  for (std::size_t j = 0; j < c.positions.size(); ++j) {
    const Var& x = c.positions[j];
    const Var& p = c.momenta[j];
    out += differentiate(f, x) * differentiate(g, p) - differentiate(f, p) * differentiate(g, x);
  }
  return out;
}

Expr poisson_bracket(const HamiltonianSystem& hs, const Expr& f, const Expr& g)
{
  return poisson_bracket(CanonicalCoordinates{hs.problem->states, hs.chart.momenta}, f, g);
}

VectorField lie_bracket(const std::vector<Var>& coords, const VectorField& v, const VectorField& w)
{
  if (v.size() != coords.size() || w.size() != coords.size())
    throw std::invalid_argument("lie_bracket: component count differs from dimension");
  for (const auto* field : {&v, &w})
    for (const auto& c : *field)
      if (c.contains_kind(VarKind::Control)) throw std::invalid_argument("lie_bracket: control-dependent component");
  VectorField out(coords.size());
  for (std::size_t j = 0; j < coords.size(); ++j) {
    Expr s;
    for (std::size_t i = 0; i < coords.size(); ++i)
      s += v[i] * differentiate(w[j], coords[i]) - w[i] * differentiate(v[j], coords[i]);
    out[j] = s;
  }
  return out;
}

Expr hamiltonian_lift(const std::vector<Var>& momenta, const VectorField& v)
{
  if (v.size() != momenta.size()) throw std::invalid_argument("hamiltonian_lift: component count differs from dimension");
  Expr out;
  for (std::size_t j = 0; j < v.size(); ++j) out += Expr(momenta[j]) * v[j];
  return out;
}

}  // namespace presym
