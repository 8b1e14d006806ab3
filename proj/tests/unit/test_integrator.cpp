#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "presym/integrator.hpp"
#include "presym/parse.hpp"

using namespace presym;

namespace {

const std::string data_dir = PRESYM_DATA_DIR;

const ControlProblem& mechanical()
{
  static const ControlProblem p = load_problem_file(data_dir + "/affine_mechanical.json");
  return p;
}

struct Run {
  HamiltonianSystem hs;
  ConstraintTree tree;
  const Branch& leaf() const { return *tree.leaves().at(0); }
};

Run pinned_run()
{
  Run r{build_hamiltonian(mechanical(), 0), {}};
  AlgorithmOptions o;
  o.pins = {parse_pin("x*(x-1)*q_z*u2 != 0", mechanical())};
  r.tree = run_algorithm(r.hs, o);
  return r;
}

InitialData mechanical_init(double vy0, double pz0, double qz0)
{
  InitialData d;
  d.parameters["v_y0"] = vy0;
  d.values = {{"x", 2}, {"y", 0}, {"z", 0}, {"v_x", 0}, {"v_y", vy0}, {"v_z", 4 * (1 - vy0)},
              {"p_z", pz0}, {"q_z", qz0}, {"u2", 2 * (vy0 - 1)}};
  d.hold_controls = {"u2"};
  return d;
}

double column(const Trajectory& tr, std::size_t node, std::string_view name)
{
  return tr.value(node, *mechanical().find(name));
}

}  // namespace

TEST_CASE("pinned leaf reproduces the closed-form curve and covector")
{
  Run r = pinned_run();
  const double vy0 = 0.7, pz0 = -1.3, qz0 = 0.4, u2 = 2 * (vy0 - 1);
  Trajectory tr = integrate(r.hs, r.leaf(), mechanical_init(vy0, pz0, qz0), IntegrateOptions{});
  REQUIRE(tr.aborted.empty());
  REQUIRE(tr.t.size() == 1001);
  const std::size_t last = tr.t.size() - 1;
  const double t = tr.t[last];
  CHECK(t == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(std::abs(column(tr, last, "y") - (-u2 * t * t / 2 + vy0 * t)) <= 1e-8);
  CHECK(std::abs(column(tr, last, "z") - (2 * u2 * t * t + 4 * (1 - vy0) * t)) <= 1e-8);
  CHECK(std::abs(column(tr, last, "v_y") - (-u2 * t + vy0)) <= 1e-8);
  CHECK(std::abs(column(tr, last, "v_z") - (4 * u2 * t + 4 * (1 - vy0))) <= 1e-8);
  CHECK(std::abs(column(tr, last, "q_y") - (-4 * pz0 * t + 4 * qz0)) <= 1e-8);
  CHECK(std::abs(column(tr, last, "q_z") - (-pz0 * t + qz0)) <= 1e-8);
  CHECK(std::abs(column(tr, last, "p_y") - 4 * pz0) <= 1e-8);
  CHECK(column(tr, last, "x") == 2);
  CHECK(tr.max_residual() <= 1e-9);
  CHECK(tr.max_h_drift() <= 1e-9);
}

TEST_CASE("endpoint check exposes the v_y mismatch by |v_y0|")
{
  Run r = pinned_run();
  const double vy0 = 2;
  Trajectory tr = integrate(r.hs, r.leaf(), mechanical_init(vy0, 1, 1), IntegrateOptions{});
  EndpointReport rep = verify_endpoints(tr, mechanical(), 1e-8);
  CHECK_FALSE(rep.pass);
  for (const auto& c : rep.start) CHECK(c.pass);
  for (const auto& c : rep.end) {
    if (c.component == "v_y") {
      CHECK_FALSE(c.pass);
      CHECK(c.deviation == doctest::Approx(vy0).epsilon(1e-9));
    } else {
      CHECK(c.pass);
    }
  }
  Trajectory zero = integrate(r.hs, r.leaf(), mechanical_init(0, 1, 1), IntegrateOptions{});
  CHECK(verify_endpoints(zero, mechanical(), 1e-8).pass);
}

TEST_CASE("single integrator normal branch is integrated exactly")
{
  ControlProblem p = load_problem_file(data_dir + "/single_integrator.json");
  HamiltonianSystem hs = build_hamiltonian(p, -1);
  ConstraintTree tree = run_algorithm(hs);
  REQUIRE(tree.leaves().size() == 1);
  InitialData d = load_initial_data_file(data_dir + "/single_integrator_init.json", p);
  Trajectory tr = integrate(hs, *tree.leaves()[0], d, IntegrateOptions{});
  const Var x = *p.find("x"), u = *p.find("u"), lam = *p.find("lam");
  for (std::size_t i = 0; i < tr.t.size(); ++i) {
    CHECK(std::abs(tr.value(i, x) - (0.5 + 1.5 * tr.t[i])) <= 1e-13);
    CHECK(tr.value(i, u) == 1.5);
    CHECK(tr.value(i, lam) == 1.5);
  }
  CHECK(verify_endpoints(tr, p, 1e-12).pass);
}

TEST_CASE("a branch that forces every rate to zero gives constant samples")
{
  ControlProblem p = load_problem(R"({"states":["x","y"],"controls":["u"],"vector_field":["0","0"],
    "cost":"u^2/2","time":{"fixed":[0,1]}})");
  HamiltonianSystem hs = build_hamiltonian(p, -1);
  ConstraintTree tree = run_algorithm(hs);
  REQUIRE(tree.leaves().size() == 1);
  InitialData d;
  d.values = {{"x", 0.3}, {"y", -2.5}, {"lam_x", 1.25}, {"lam_y", 7}};
  Trajectory tr = integrate(hs, *tree.leaves()[0], d, IntegrateOptions{});
  for (const auto& row : tr.samples) CHECK(row == tr.samples.front());
}

TEST_CASE("endpoints taken from the trajectory itself pass at tolerance zero")
{
  ControlProblem p = load_problem_file(data_dir + "/single_integrator.json");
  HamiltonianSystem hs = build_hamiltonian(p, -1);
  ConstraintTree tree = run_algorithm(hs);
  Trajectory tr = integrate(hs, *tree.leaves()[0], load_initial_data_file(data_dir + "/single_integrator_init.json", p),
                            IntegrateOptions{});
  const Var x = *p.find("x");
  ControlProblem own = p;
  own.endpoints = Endpoints{};
  own.endpoints->from = {Expr(Rational(tr.value(0, x)))};
  own.endpoints->to = {Expr(Rational(tr.value(tr.t.size() - 1, x)))};
  CHECK(verify_endpoints(tr, own, 0).pass);
}

TEST_CASE("perturbed initial data is rejected with the constraint and the magnitude")
{
  Run r = pinned_run();
  InitialData d = mechanical_init(2, 1, 1);
  d.values["x"] = 2.001;
  try {
    integrate(r.hs, r.leaf(), d, IntegrateOptions{});
    FAIL("expected InitialDataError");
  } catch (const InitialDataError& e) {
    std::string msg = e.what();
    CHECK(msg.find("x - 2") != std::string::npos);
    CHECK(msg.find("0.001") != std::string::npos);
  }
}

TEST_CASE("a free control without a velocity is refused by name")
{
  Run r = pinned_run();
  InitialData d = mechanical_init(2, 1, 1);
  d.hold_controls.clear();
  CHECK_THROWS_WITH_AS(integrate(r.hs, r.leaf(), d, IntegrateOptions{}), doctest::Contains("u2"), IntegrationError);
}

TEST_CASE("trajectory dump")
{
  ControlProblem p = load_problem_file(data_dir + "/single_integrator.json");
  HamiltonianSystem hs = build_hamiltonian(p, -1);
  ConstraintTree tree = run_algorithm(hs);
  IntegrateOptions o;
  o.h = 0.25;
  Trajectory tr = integrate(hs, *tree.leaves()[0], load_initial_data_file(data_dir + "/single_integrator_init.json", p), o);
  std::string csv = trajectory_csv(tr);
  CHECK(csv.rfind("t,x,lam,u,residual,h_drift\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 6);
  CHECK(csv.find("\n1,2,1.5,1.5,0,0\n") != std::string::npos);
}

TEST_CASE("invalid integration requests")
{
  Run r = pinned_run();
  IntegrateOptions o;
  o.h = 0.3;
  CHECK_THROWS_AS(integrate(r.hs, r.leaf(), mechanical_init(2, 1, 1), o), IntegrationError);
  o.h = -1;
  CHECK_THROWS_AS(integrate(r.hs, r.leaf(), mechanical_init(2, 1, 1), o), IntegrationError);
  InitialData missing = mechanical_init(2, 1, 1);
  missing.values.erase("q_z");
  CHECK_THROWS_WITH_AS(integrate(r.hs, r.leaf(), missing, IntegrateOptions{}), doctest::Contains("q_z"), IntegrationError);
  InitialData stray = mechanical_init(2, 1, 1);
  stray.values["w"] = 1;
  CHECK_THROWS_WITH_AS(integrate(r.hs, r.leaf(), stray, IntegrateOptions{}), doctest::Contains("'w'"), IntegrationError);
  CHECK_THROWS_AS(load_initial_data(R"({"values":{"x":[1]}})", mechanical()), IntegrationError);
}
