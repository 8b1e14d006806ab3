#include "doctest.h"
#include "presym/ideal.hpp"
#include "presym/parse.hpp"

using namespace presym;

namespace {

VarTable make_table()
{
  VarTable t;
  for (auto n : {"x", "y", "v_x"}) t.add(state(n));
  for (auto n : {"p_x", "p_y", "p_z", "q_x", "q_y", "q_z"}) t.add(momentum(n));
  for (auto n : {"u1", "u2"}) t.add(control(n));
  return t;
}

Expr E(std::string_view text)
{
  static const VarTable t = make_table();
  return parse_expr(text, t);
}

std::vector<Expr> Es(std::initializer_list<const char*> texts)
{
  std::vector<Expr> out;
  for (auto s : texts) out.push_back(E(s));
  return out;
}

}  // namespace

TEST_CASE("membership examples")
{
  Decision d = reduces_to_zero(E("q_x*v_x"), Es({"q_x"}), {});
  CHECK(d.zero);
  CHECK(d.method == DecisionMethod::Triangular);
  CHECK_FALSE(reduces_to_zero(E("p_x"), Es({"q_x"}), {}).zero);

  auto leaf = Es({"q_x", "-q_y + 4*q_z", "p_x", "p_y - 4*p_z", "x - 2", "v_x"});
  d = reduces_to_zero(E("(-q_y + 4*q_z)*u1"), leaf, Es({"q_z*u2"}));
  CHECK(d.zero);
  CHECK(d.certain());
  CHECK_FALSE(reduces_to_zero(E("q_z*u1"), leaf, Es({"q_z*u2"})).zero);
}

TEST_CASE("inequations let the elimination cancel factors")
{
  CHECK(reduces_to_zero(E("y"), Es({"x*y", "x - y"}), Es({"x"})).zero);
  CHECK_FALSE(reduces_to_zero(E("y"), Es({"x*y"}), {}).zero);
}

TEST_CASE("momentum-linear generators use the rank test")
{
  auto gens = Es({"x*p_x + y*p_y", "p_y - y*p_z"});
  Decision d = reduces_to_zero(E("x*p_x + y^2*p_z"), gens, {});
  CHECK(d.zero);
  CHECK(d.certain());
  CHECK_FALSE(reduces_to_zero(E("p_x"), gens, {}).zero);
}

TEST_CASE("emptiness")
{
  CHECK(provably_empty(Es({"x - 2", "x - 3"}), {}) == std::optional<bool>(true));
  CHECK(provably_empty(Es({"x - 2"}), Es({"x - 2"})) == std::optional<bool>(true));
  CHECK(provably_empty(Es({"x - 2", "y"}), Es({"v_x"})) == std::optional<bool>(false));
}

TEST_CASE("solved system")
{
  SolvedSystem s;
  CHECK(s.assume_nonzero(E("x*(y - 1)")));
  CHECK(s.known_nonzero(E("3*x^2*(y - 1)").numerator()));
  CHECK_FALSE(s.known_nonzero(E("y").numerator()));
  CHECK(s.strip(E("x*(y - 1)^2*p_x").numerator()) == E("p_x").numerator());

  auto sol = s.solvable(E("x*u1 - p_x").numerator());
  REQUIRE(sol);
  CHECK(sol->first.name == "u1");
  CHECK(sol->second == E("p_x/x"));
  CHECK(s.bind(sol->first, sol->second));
  CHECK(s.reduce(E("u1*x")) == E("p_x"));
  CHECK_FALSE(s.bind(*make_table().find("y"), Expr(1L)));
  CHECK_FALSE(s.assume_nonzero(E("x - x")));
}
