#include "doctest.h"
#include "presym/classifier.hpp"
#include "presym/parse.hpp"

using namespace presym;

namespace {

const std::string data_dir = PRESYM_DATA_DIR;

const ControlProblem& mechanical()
{
  static const ControlProblem p = load_problem_file(data_dir + "/affine_mechanical.json");
  return p;
}

Expr E(const ControlProblem& p, std::string_view text) { return parse_expr(text, p.table); }

ClassifyOptions pinned_options()
{
  ClassifyOptions o;
  o.abnormal_pins = {parse_pin("x*(x-1)*q_z*u2 != 0", mechanical())};
  return o;
}

ControlProblem planar(std::string_view second_component, std::string_view cost)
{
  return load_problem(R"({"states":["x","y"],"controls":["u"],"vector_field":["u",")" +
                      std::string(second_component) + R"("],"cost":")" + std::string(cost) +
                      R"(","time":{"fixed":[0,1]}})");
}

bool decided(const Verdict& v) { return v.method != ProjectionMethod::Sampling; }

}  // namespace

TEST_CASE("single integrator: every normal extremal is strict")
{
  Verdict v = classify(load_problem_file(data_dir + "/single_integrator.json"));
  CHECK(v.abnormal_exists == Tri::No);
  CHECK(v.normal_exists == Tri::Yes);
  CHECK(v.strictness == Strictness::AllNormalStrict);
  CHECK(v.cases.normal_strict == Tri::Yes);
  CHECK(decided(v));
  CHECK(v.superset_only);
  CHECK_FALSE(v.free_time_notes);
}

TEST_CASE("free-time single integrator with unit cost")
{
  Verdict v = classify(load_problem_file(data_dir + "/single_integrator_free.json"));
  CHECK(v.abnormal_exists == Tri::No);
  CHECK(v.normal_exists == Tri::No);
  CHECK(v.normal_tree.leaves().empty());
  REQUIRE(v.free_time_notes);
  CHECK(v.free_time_notes->only_zero_covectors);
  CHECK(v.strictness == Strictness::NoExtremals);
  CHECK(decided(v));
  CHECK_FALSE(v.superset_only);
}

TEST_CASE("unreachable normal branch: all abnormal extremals strict")
{
  Verdict v = classify(planar("1", "u*y"));
  CHECK(v.abnormal_exists == Tri::Yes);
  CHECK(v.normal_exists == Tri::No);
  CHECK(v.strictness == Strictness::AllAbnormalStrict);
  CHECK(decided(v));
}

TEST_CASE("mechanical system on the pinned branch: no strict abnormal extremals at tree level")
{
  Verdict v = classify(mechanical(), pinned_options());
  CHECK(v.abnormal_exists == Tri::Yes);
  CHECK(v.normal_exists == Tri::Yes);
  CHECK(v.target == ProjectionTarget::MxU);
  CHECK(v.strictness == Strictness::NoStrictAbnormal);
  CHECK(v.cases.no_strict_abnormal == Tri::Yes);
  CHECK(v.cases.coincide == Tri::No);
  CHECK(decided(v));
}

TEST_CASE("normal image inside the abnormal one: locally abnormal")
{
  Verdict v = classify(planar("1", "u*x*y"));
  CHECK(v.strictness == Strictness::LocallyAbnormal);
  CHECK(v.cases.locally_abnormal == Tri::Yes);
  CHECK(decided(v));
}

TEST_CASE("equal images: the two classes coincide")
{
  Verdict v = classify(planar("0", "0"));
  CHECK(v.strictness == Strictness::Coincide);
  CHECK(v.cases.coincide == Tri::Yes);
  CHECK(decided(v));
}

TEST_CASE("unpinned mechanical run stays conclusive on existence")
{
  Verdict v = classify(mechanical());
  CHECK(v.abnormal_exists == Tri::Yes);
  CHECK(v.normal_exists == Tri::Yes);
  CHECK_FALSE(v.abnormal_tree.budget_exhausted);
}

TEST_CASE("projections of the mechanical leaves")
{
  const ControlProblem& p = mechanical();
  Verdict v = classify(p, pinned_options());
  auto leaves = v.abnormal_tree.leaves();
  REQUIRE(leaves.size() == 1);
  ProjectionDescription onto_m = project_leaf(p, *leaves[0], 0, ProjectionTarget::M);
  CHECK(onto_m.exact);
  REQUIRE(onto_m.equations.size() == 2);
  CHECK(reduces_to_zero(E(p, "x - 2"), onto_m.equations, {}).zero);
  CHECK(reduces_to_zero(E(p, "v_x"), onto_m.equations, {}).zero);
  CHECK(onto_m.inequations.empty());

  ProjectionDescription onto_mu = project_leaf(p, *leaves[0], 0, ProjectionTarget::MxU);
  CHECK(onto_mu.exact);
  CHECK(reduces_to_zero(E(p, "u1"), onto_mu.equations, onto_mu.inequations).zero);

  auto normal = v.normal_tree.leaves();
  REQUIRE(normal.size() == 1);
  ProjectionDescription all = project_leaf(p, *normal[0], -1, ProjectionTarget::M);
  CHECK(all.exact);
  CHECK(all.equations.empty());
  CHECK(all.inequations.empty());
  CHECK(projection_target(p) == ProjectionTarget::MxU);
  CHECK(projection_target(planar("u^2", "u")) == ProjectionTarget::M);
}

TEST_CASE("normal lift along the strict abnormal curve")
{
  const ControlProblem& p = mechanical();
  ClosedFormCurve gamma = load_curve_file(data_dir + "/gamma_curve.json", p);
  LiftResult r = check_normal_lift_along(gamma, p);
  CHECK(r.exists == Tri::No);
  REQUIRE(r.contradiction);
  Expr ratio = *r.contradiction / E(p, "(v_y0 - 1)^2");
  CHECK(ratio.is_constant());
  CHECK_FALSE(ratio.is_zero());

  ClosedFormCurve general = load_curve_file(data_dir + "/gamma_curve_general.json", p);
  CHECK(check_normal_lift_along(general, p).exists == Tri::Undetermined);

  ClosedFormCurve still = load_curve_file(data_dir + "/gamma_curve_general.json", p, {{"v_y0", Rational(1)}});
  LiftResult s = check_normal_lift_along(still, p);
  CHECK(s.exists == Tri::Yes);
  CHECK(s.witness.at(*p.find("p_x")).is_zero());
  CHECK(s.witness.at(*p.find("q_x")).is_zero());

  CHECK_THROWS_AS(load_curve_file(data_dir + "/gamma_curve.json", p, {{"v_y0", Rational(1)}}), CurveError);
}

TEST_CASE("curve membership in the abnormal image")
{
  const ControlProblem& p = mechanical();
  Verdict v = classify(p, pinned_options());
  ClosedFormCurve gamma = load_curve_file(data_dir + "/gamma_curve.json", p);
  REQUIRE_FALSE(v.projections.empty());
  bool inside = false;
  for (const auto& d : v.projections)
    if (d.p0 == 0 && curve_in_image(gamma, d) == Tri::Yes) inside = true;
  CHECK(inside);
}

TEST_CASE("straight line of the single integrator lifts with constant momentum")
{
  ControlProblem p = load_problem_file(data_dir + "/single_integrator.json");
  ClosedFormCurve line = load_curve(R"({"time":"t","states":{"x":"x0 + a*t"},"controls":{"u":"a"}})", p);
  LiftResult r = check_normal_lift_along(line, p);
  CHECK(r.exists == Tri::Yes);
  CHECK(r.witness.at(*p.find("lam")) == E(p, "a"));

  ClosedFormCurve bent = load_curve(R"({"time":"t","states":{"x":"t^2"},"controls":{"u":"1"}})", p);
  CHECK_THROWS_AS(check_normal_lift_along(bent, p), CurveError);
}
