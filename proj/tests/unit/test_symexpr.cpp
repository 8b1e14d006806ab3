#include <cmath>
#include <set>

#include "doctest.h"
#include "presym/parse.hpp"
#include "random_expr.hpp"

using namespace presym;

namespace {

VarTable mechanical_table()
{
  VarTable t;
  for (auto n : {"x", "y", "z", "v_x", "v_y", "v_z"}) t.add(state(n));
  for (auto n : {"p_x", "p_y", "p_z", "q_x", "q_y", "q_z"}) t.add(momentum(n));
  for (auto n : {"u1", "u2"}) t.add(control(n));
  return t;
}

const VarTable& table()
{
  static const VarTable t = mechanical_table();
  return t;
}

Expr E(std::string_view text) { return parse_expr(text, table()); }
Var V(std::string_view name) { return *table().find(name); }

std::set<std::string> factor_strings(const FactorList& fs)
{
  std::set<std::string> out;
  for (const auto& [f, m] : fs) {
    if (f.is_constant()) continue;
    out.insert(to_string(constraint_form(f)) + "^" + std::to_string(m));
  }
  return out;
}

}  // namespace

TEST_CASE("differentiate: control derivative of the abnormal Hamiltonian part")
{
  Expr e = E("u2*(1-x)*q_y + u2*x^2*q_z");
  CHECK(differentiate(e, V("u2")) == E("(1-x)*q_y + x^2*q_z"));
  CHECK(differentiate(Expr(make_rational(7, 3)), V("x")).is_zero());
}

TEST_CASE("differentiate agrees with central finite differences")
{
  std::mt19937_64 rng(11);
  const std::vector<Var> vars{V("x"), V("y"), V("q_z")};
  int checked = 0;
  while (checked < 100) {
    Expr e = testing::random_poly(rng, vars, 4, 5);
    const Var& v = vars[checked % vars.size()];
    std::map<Var, double> pt;
    for (const auto& w : vars) pt[w] = testing::random_double(rng, -2, 2);
    const double h = 1e-5;
    auto shifted = [&](double s) {
      auto q = pt;
      q[v] += s;
      return eval_double(e, q);
    };
    const double fd = (shifted(h) - shifted(-h)) / (2 * h);
    const double exact = eval_double(differentiate(e, v), pt);
    CHECK(std::abs(exact - fd) / std::max(1.0, std::abs(exact)) <= 1e-6);
    ++checked;
  }
}

TEST_CASE("differentiation is linear, obeys Leibniz and partials commute")
{
  std::mt19937_64 rng(12);
  const std::vector<Var> vars{V("x"), V("y"), V("p_x"), V("u1")};
  for (int i = 0; i < 30; ++i) {
    Expr f = testing::random_poly(rng, vars, 3);
    Expr g = testing::random_poly(rng, vars, 3);
    Rational a = testing::random_rational(rng);
    const Var& v = vars[i % vars.size()];
    const Var& w = vars[(i + 1) % vars.size()];
    CHECK(differentiate(Expr(a) * f + g, v) == Expr(a) * differentiate(f, v) + differentiate(g, v));
    CHECK(differentiate(f * g, v) == differentiate(f, v) * g + f * differentiate(g, v));
    CHECK(differentiate(differentiate(f, v), w) == differentiate(differentiate(f, w), v));
  }
}

TEST_CASE("canonical forms")
{
  CHECK(normalize(E("(1-x)*q_y + x^2*q_z - (q_y - x*q_y + x^2*q_z)")).is_zero());
  CHECK(constraint_form(E("-q_y + 4*q_z")) == constraint_form(E("4*q_z - q_y")));
  CHECK(constraint_form(E("-q_y + 4*q_z")) == constraint_form(E("q_y - 4*q_z")));
  CHECK(constraint_form(E("6*x - 4")) == E("3*x - 2"));
  CHECK(E("(x^2 - 1)/(x - 1)") == E("x + 1"));
  CHECK(E("x/(2*y)") == E("(x/2)/y"));
  CHECK_THROWS_AS(E("x/(y - y)"), ParseError);
  CHECK_THROWS_AS(E("x") / E("y - y"), std::domain_error);
}

TEST_CASE("printing round-trips through the parser")
{
  std::mt19937_64 rng(13);
  const std::vector<Var> vars{V("x"), V("v_x"), V("q_y"), V("u2")};
  for (int i = 0; i < 50; ++i) {
    Expr e = testing::random_poly(rng, vars, 3) / (testing::random_poly(rng, vars, 2) + Expr(7L));
    CHECK(E(to_string(e)) == e);
  }
  CHECK(to_string(E("x^2 - 2*x + 1")) == "x^2 - 2*x + 1");
}

TEST_CASE("factor")
{
  CHECK(factor_strings(factor(E("x^2*q_z*u2 - x*q_z*u2"))) ==
        std::set<std::string>{"x^1", "x - 1^1", "q_z^1", "u2^1"});
  CHECK(factor_strings(factor(E("x^2 - 2*x + 1"))) == std::set<std::string>{"x - 1^2"});
  Expr e = E("(x - v_x)*(q_y + 3*q_z)^2");
  CHECK(factor_strings(factor(Expr(make_rational(-14, 5)) * e)) == factor_strings(factor(e)));
  CHECK_THROWS_AS(factor(E("1/x")), std::invalid_argument);
}

TEST_CASE("factor reconstructs its input")
{
  std::mt19937_64 rng(14);
  const std::vector<Var> vars{V("x"), V("y"), V("q_z")};
  for (int i = 0; i < 30; ++i) {
    Expr a = testing::random_poly(rng, vars, 2, 3);
    Expr b = testing::random_poly(rng, vars, 2, 3);
    Expr e = a * b;
    if (e.is_zero()) continue;
    Expr product(1L);
    for (const auto& [f, m] : factor(e)) product *= pow(f, m);
    CHECK(constraint_form(product) == constraint_form(e));
  }
}

TEST_CASE("substitute")
{
  CHECK(substitute(E("(1-x)*q_y + x^2*q_z"), {{V("x"), Expr(2L)}}) == E("-q_y + 4*q_z"));
  CHECK(substitute(E("x*y + 1"), {}) == E("x*y + 1"));
  CHECK_THROWS_AS(substitute(E("x"), {{V("x"), E("y")}, {V("y"), E("x + 1")}}), std::invalid_argument);
}

TEST_CASE("substitute then evaluate matches evaluation with composed bindings")
{
  std::mt19937_64 rng(15);
  const std::vector<Var> vars{V("x"), V("y"), V("z")};
  for (int i = 0; i < 40; ++i) {
    Expr e = testing::random_poly(rng, vars, 3);
    Expr g = testing::random_poly(rng, {V("y"), V("z")}, 2);
    std::map<Var, Rational> pt{{V("y"), testing::random_rational(rng)}, {V("z"), testing::random_rational(rng)}};
    auto composed = pt;
    composed[V("x")] = eval_at(g, pt);
    CHECK(eval_at(substitute(e, {{V("x"), g}}), pt) == eval_at(e, composed));
  }
}

TEST_CASE("eval_at")
{
  CHECK(eval_at(E("-q_y + 4*q_z"), {{V("q_y"), Rational(4)}, {V("q_z"), Rational(1)}}) == 0);
  CHECK(eval_at(E("x^2"), {{V("x"), make_rational(3, 2)}}) == make_rational(9, 4));
  CHECK_THROWS_AS(eval_at(E("x + y"), {{V("x"), Rational(1)}}), std::invalid_argument);
  CHECK_THROWS_AS(eval_at(E("1/x"), {{V("x"), Rational(0)}}), std::domain_error);
}

TEST_CASE("eval_at agrees with floating evaluation")
{
  std::mt19937_64 rng(16);
  const std::vector<Var> vars{V("x"), V("y"), V("p_z")};
  for (int i = 0; i < 100; ++i) {
    Expr e = testing::random_poly(rng, vars, 4, 5);
    std::map<Var, Rational> q;
    std::map<Var, double> d;
    for (const auto& v : vars) {
      q[v] = testing::random_rational(rng);
      d[v] = q[v].get_d();
    }
    const double exact = eval_at(e, q).get_d();
    CHECK(std::abs(exact - eval_double(e, d)) <= 1e-12 * std::max(1.0, std::abs(exact)));
  }
}

TEST_CASE("parser rejects malformed input")
{
  CHECK_THROWS_AS(E("x +"), ParseError);
  CHECK_THROWS_AS(E("w"), ParseError);
  CHECK(E("x^-1") == E("1/x"));
  CHECK_THROWS_AS(E("x^y"), ParseError);
  CHECK(E("0.25*x") == E("x/4"));
  CHECK(parse_rational("-0.125") == make_rational(-1, 8));
  CHECK(parse_rational("010") == 10);
  CHECK(parse_rational("09/012") == make_rational(3, 4));
}
