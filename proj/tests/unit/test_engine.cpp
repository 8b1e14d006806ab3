#include <algorithm>
#include <set>

#include "doctest.h"
#include "presym/engine.hpp"
#include "presym/parse.hpp"
#include "random_expr.hpp"

using namespace presym;

namespace {

const std::string data_dir = PRESYM_DATA_DIR;

const ControlProblem& mechanical()
{
  static const ControlProblem p = load_problem_file(data_dir + "/affine_mechanical.json");
  return p;
}

Expr E(const ControlProblem& p, std::string_view text) { return parse_expr(text, p.table); }
Expr E(std::string_view text) { return E(mechanical(), text); }

std::set<std::string> forms(const std::vector<Expr>& es)
{
  std::set<std::string> out;
  for (const auto& e : es) out.insert(to_string(constraint_form(e)));
  return out;
}

std::set<std::string> forms(std::initializer_list<const char*> texts)
{
  std::vector<Expr> es;
  for (auto t : texts) es.push_back(E(t));
  return forms(es);
}

/// Whether e vanishes on the branch (bindings, unsolved equations, inequations).
bool holds_on(const Branch& b, const Expr& e) { return reduces_to_zero(e, b.solved, b.unsolved()).zero; }

std::vector<Expr> pinned() { return {parse_pin("x*(x-1)*q_z*u2 != 0", mechanical())}; }

}  // namespace

TEST_CASE("primary constraints")
{
  HamiltonianSystem h0 = build_hamiltonian(mechanical(), 0);
  HamiltonianSystem h1 = build_hamiltonian(mechanical(), -1);
  CHECK(forms(primary_constraints(h0).equation_exprs()) == forms({"q_x", "(1-x)*q_y + x^2*q_z"}));
  Branch n = primary_constraints(h1);
  CHECK(forms(n.equation_exprs()) == forms({"q_x - u1", "(1-x)*q_y + x^2*q_z - u2"}));
  CHECK(n.solved_controls().size() == 2);

  ControlProblem si = load_problem_file(data_dir + "/single_integrator.json");
  Branch s = primary_constraints(build_hamiltonian(si, 0));
  CHECK(forms(s.equation_exprs()) == std::set<std::string>{"lam"});
}

TEST_CASE("first abnormal stabilization pass")
{
  HamiltonianSystem h0 = build_hamiltonian(mechanical(), 0);
  Branch b = primary_constraints(h0);
  StabilizationOutcome o = stabilize_once(h0, b);
  CHECK_FALSE(o.split_on);
  CHECK(o.progress());
  CHECK(holds_on(b, E("p_x")));
  CHECK(holds_on(b, E("(-1+x)*p_y - x^2*p_z - v_x*q_y + 2*x*v_x*q_z")));
  CHECK_FALSE(holds_on(b, E("p_y")));
}

TEST_CASE("second abnormal pass produces the product constraint")
{
  HamiltonianSystem h0 = build_hamiltonian(mechanical(), 0);
  Branch b = primary_constraints(h0);
  stabilize_once(h0, b);
  stabilize_once(h0, b);
  CHECK(holds_on(b, E("(-q_y + 2*x*q_z)*u2")));
  CHECK(holds_on(b, E("(-q_y + 2*x*q_z)*u1 + 2*p_y*v_x - 4*x*v_x*p_z + 2*v_x^2*q_z")));
}

TEST_CASE("normal stabilization solves the control velocities")
{
  HamiltonianSystem h1 = build_hamiltonian(mechanical(), -1);
  Branch b = primary_constraints(h1);
  StabilizationOutcome o = stabilize_once(h1, b);
  CHECK(o.new_constraints == 0);
  CHECK(o.solved_velocities == 2);
  CHECK(b.solved_control_velocities.at(h1.control_velocities[0]) == E("-p_x"));
}

TEST_CASE("splitting")
{
  Branch root;
  Origin o;
  REQUIRE(add_equation(root, E("(-q_y + 2*x*q_z)*u2"), o, 0));
  auto kids = split_branch(root, 0);
  REQUIRE(kids.size() == 2);
  CHECK(holds_on(kids[0], E("-q_y + 2*x*q_z")));
  CHECK(holds_on(kids[1], E("u2")));
  CHECK(forms(kids[1].inequations()) == forms({"-q_y + 2*x*q_z"}));

  Branch quad;
  REQUIRE(add_equation(quad, E("x*(x-1)*q_z*u2"), o, 0));
  CHECK(split_branch(quad, 0).size() == 4);

  Branch lin;
  REQUIRE(add_equation(lin, E("x + y - 1"), o, 0));
  auto same = split_branch(lin, 0);
  REQUIRE(same.size() == 1);
  CHECK(forms(same[0].equation_exprs()) == forms(lin.equation_exprs()));
}

TEST_CASE("split children partition the parent variety")
{
  VarTable t;
  Var x = t.add(state("x"));
  Var y = t.add(state("y"));
  std::mt19937_64 rng(31);
  for (int round = 0; round < 5; ++round) {
    std::vector<Expr> roots;
    Expr product(1L);
    for (int i = 0; i < 3; ++i) {
      roots.push_back(testing::random_poly(rng, {y}, 2, 3) + Expr(static_cast<long>(i)));
      product *= Expr(x) - roots.back();
    }
    Branch parent;
    REQUIRE(add_equation(parent, product, Origin{}, 0));
    auto idx = std::find_if(parent.equations.begin(), parent.equations.end(), [](const Constraint& c) { return !c.defines; });
    REQUIRE(idx != parent.equations.end());
    auto kids = split_branch(parent, static_cast<std::size_t>(idx - parent.equations.begin()));
    for (int s = 0; s < 32; ++s) {
      Rational yv = testing::random_rational(rng);
      std::map<Var, Rational> pt{{y, yv}, {x, eval_at(roots[static_cast<std::size_t>(s) % roots.size()], {{y, yv}})}};
      int members = 0;
      for (const auto& k : kids) {
        if (k.status == BranchStatus::Empty) continue;
        bool in = true;
        for (const auto& e : k.equation_exprs()) in = in && eval_at(e, pt) == 0;
        for (const auto& e : k.inequations()) in = in && eval_at(e, pt) != 0;
        members += in ? 1 : 0;
      }
      CHECK(members == 1);
    }
  }
}

TEST_CASE("pinned abnormal run reaches the expected leaf")
{
  HamiltonianSystem h0 = build_hamiltonian(mechanical(), 0);
  AlgorithmOptions o;
  o.pins = pinned();
  ConstraintTree t = run_algorithm(h0, o);
  CHECK_FALSE(t.budget_exhausted);
  auto leaves = t.leaves();
  REQUIRE(leaves.size() == 1);
  const Branch& leaf = *leaves[0];
  const std::vector<Expr> expected{E("q_x"), E("-q_y + 4*q_z"), E("p_x"), E("p_y - 4*p_z"),
                                   E("x - 2"), E("v_x"), E("u1")};
  for (const auto& e : expected) CHECK(holds_on(leaf, e));
  for (const auto& e : leaf.equation_exprs()) CHECK(reduces_to_zero(e, expected, leaf.inequations()).zero);
  CHECK(leaf.depth <= 5);
  CHECK(leaf.nonzero_covector);
  CHECK(leaf.solved_control_velocities.at(h0.control_velocities[0]).is_zero());
}

TEST_CASE("normal run keeps the primary branch")
{
  HamiltonianSystem h1 = build_hamiltonian(mechanical(), -1);
  ConstraintTree t = run_algorithm(h1);
  auto leaves = t.leaves();
  REQUIRE(leaves.size() == 1);
  CHECK(forms(leaves[0]->equation_exprs()) == forms({"q_x - u1", "(1-x)*q_y + x^2*q_z - u2"}));
  CHECK(leaves[0]->depth == 0);
  CHECK(leaves[0]->solved_control_velocities.size() == 2);
}

TEST_CASE("budget exhaustion is reported")
{
  HamiltonianSystem h0 = build_hamiltonian(mechanical(), 0);
  AlgorithmOptions o;
  o.pins = pinned();
  o.max_steps = 2;
  ConstraintTree t = run_algorithm(h0, o);
  CHECK(t.budget_exhausted);
  CHECK_FALSE(t.diagnostics.empty());

  AlgorithmOptions narrow;
  narrow.max_branches = 2;
  CHECK(run_algorithm(h0, narrow).budget_exhausted);
}

TEST_CASE("zero-fiber deletion")
{
  ControlProblem si = load_problem_file(data_dir + "/single_integrator.json");
  HamiltonianSystem hs = build_hamiltonian(si, 0);
  Branch b = primary_constraints(hs);
  delete_zero_fiber(b, hs);
  CHECK(b.status == BranchStatus::Empty);
  CHECK(run_algorithm(hs).leaves().empty());

  ControlProblem planar = load_problem(R"({"states":["x","y"],"controls":["u"],"vector_field":["u","0"],
    "cost":"u^2/2","time":{"fixed":[0,1]}})");
  HamiltonianSystem hp = build_hamiltonian(planar, 0);
  Branch c = primary_constraints(hp);
  delete_zero_fiber(c, hp);
  CHECK(c.status != BranchStatus::Empty);
  CHECK(c.nonzero_covector);

  HamiltonianSystem normal = build_hamiltonian(si, -1);
  Branch n = primary_constraints(normal);
  CHECK_THROWS_AS(delete_zero_fiber(n, normal), EngineError);
}

TEST_CASE("free time")
{
  ControlProblem p = load_problem_file(data_dir + "/single_integrator_free.json");
  AlgorithmOptions o;
  o.free_time = true;
  ConstraintTree normal = run_algorithm(build_hamiltonian(p, -1), o);
  CHECK(normal.leaves().empty());
  ConstraintTree abnormal = run_algorithm(build_hamiltonian(p, 0), o);
  CHECK(abnormal.leaves().empty());

  HamiltonianSystem h0 = build_hamiltonian(mechanical(), 0);
  o.pins = pinned();
  ConstraintTree t = run_algorithm(h0, o);
  REQUIRE(t.leaves().size() == 1);
  CHECK(t.leaves()[0]->free_time_h);
  CHECK(t.diagnostics.empty());
  for (const auto* leaf : t.leaves()) {
    Branch copy = *leaf;
    CHECK(add_free_time_constraint(h0, copy));
  }
}
