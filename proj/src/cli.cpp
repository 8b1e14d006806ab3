#include "presym/cli.hpp"

#include <fstream>
#include <sstream>

#include "CLI11.hpp"
#include "presym/report.hpp"

namespace presym::cli {

namespace {

struct Config {
  std::string input;
  std::string p0 = "both";
  std::vector<std::string> pins;
  int max_steps = 16;
  int max_branches = 64;
  double h = 1e-3;
  double tol_drift = 1e-6;
  double tol_accept = 1e-8;
  std::vector<std::string> params;
  std::string format = "text";
  std::string out;
  std::string curve;
  std::string init;
  int leaf = -1;
};

class InputFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::pair<std::string, std::string> split_param(const std::string& text)
{
  auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0) throw InputFailure("--param expects name=value, got '" + text + "'");
  return {text.substr(0, eq), text.substr(eq + 1)};
}

std::map<std::string, Rational> exact_params(const Config& cfg)
{
  std::map<std::string, Rational> out;
  for (const auto& s : cfg.params) {
    auto [n, v] = split_param(s);
    try {
      out[n] = parse_rational(v);
    } catch (const std::exception&) {
      throw InputFailure("--param " + n + ": '" + v + "' is not a rational number");
    }
  }
  return out;
}

std::map<std::string, double> numeric_params(const Config& cfg)
{
  std::map<std::string, double> out;
  for (const auto& s : cfg.params) {
    auto [n, v] = split_param(s);
    try {
      std::size_t used = 0;
      out[n] = std::stod(v, &used);
      if (used != v.size()) throw std::invalid_argument(v);
    } catch (const std::exception&) {
      throw InputFailure("--param " + n + ": '" + v + "' is not a number");
    }
  }
  return out;
}

std::vector<Expr> pins_of(const Config& cfg, const ControlProblem& p)
{
  std::vector<Expr> pins = p.pins;
  for (const auto& s : cfg.pins) pins.push_back(parse_pin(s, p));
  return pins;
}

AlgorithmOptions engine_options(const Config& cfg)
{
  AlgorithmOptions o;
  o.max_steps = cfg.max_steps;
  o.max_branches = cfg.max_branches;
  return o;
}

void emit(const Config& cfg, const Json& doc, std::ostream& out)
{
  std::string text = cfg.format == "structured" ? doc.dump(2) + "\n" : render_text(doc);
  if (cfg.out.empty()) {
    out << text;
    return;
  }
  std::ofstream f(cfg.out);
  if (!f) throw InputFailure("cannot write '" + cfg.out + "'");
  f << text;
}

int cmd_derive(const Config& cfg, std::ostream& out, std::ostream& err)
{
  ControlProblem p = load_problem_file(cfg.input);
  AlgorithmOptions o = engine_options(cfg);
  o.pins = pins_of(cfg, p);
  o.free_time = p.time.free;
  std::vector<int> p0s;
  if (cfg.p0 == "0") p0s = {0};
  else if (cfg.p0 == "-1") p0s = {-1};
  else p0s = {0, -1};

  Json trees = Json::array();
  bool exhausted = false;
  for (int p0 : p0s) {
    HamiltonianSystem hs = build_hamiltonian(p, p0);
    ConstraintTree t = run_algorithm(hs, o);
    exhausted = exhausted || t.budget_exhausted;
    for (const auto& d : t.diagnostics) err << "p0=" << p0 << ": " << d << "\n";
    trees.push_back(tree_json(t));
  }
  if (trees.size() == 1) {
    emit(cfg, trees[0], out);
  } else {
    Json doc;
    doc["kind"] = "trees";
    doc["trees"] = trees;
    emit(cfg, doc, out);
  }
  return exhausted ? BudgetExhausted : Success;
}

int cmd_classify(const Config& cfg, std::ostream& out, std::ostream& err)
{
  ControlProblem p = load_problem_file(cfg.input);
  ClassifyOptions o;
  o.engine = engine_options(cfg);
  o.abnormal_pins = pins_of(cfg, p);
  Verdict v = classify(p, o);
  Json doc = verdict_json(v);
  if (!cfg.curve.empty()) {
    ClosedFormCurve c = load_curve_file(cfg.curve, p, exact_params(cfg));
    LiftResult r = check_normal_lift_along(c, p, o.engine);
    Tri in_image = Tri::No;
    bool any = false;
    for (const auto& d : v.projections) {
      if (d.p0 != 0) continue;
      any = true;
      Tri t = curve_in_image(c, d);
      if (t == Tri::Yes) in_image = Tri::Yes;
      else if (t == Tri::Undetermined && in_image == Tri::No) in_image = Tri::Undetermined;
    }
    if (!any && v.abnormal_tree.budget_exhausted) in_image = Tri::Undetermined;
    doc["curve"] = lift_json(r, in_image);
  }
  for (const auto& d : v.diagnostics) err << d << "\n";
  emit(cfg, doc, out);
  return v.abnormal_tree.budget_exhausted || v.normal_tree.budget_exhausted ? BudgetExhausted : Success;
}

int cmd_integrate(const Config& cfg, std::ostream& out, std::ostream& err)
{
  ControlProblem p = load_problem_file(cfg.input);
  if (cfg.init.empty()) throw InputFailure("integrate requires --init <file>");
  if (!(cfg.h > 0) || !(cfg.tol_drift > 0) || !(cfg.tol_accept > 0))
    throw InputFailure("--h, --tol-drift and --tol-accept must be positive");
  int p0 = 0;
  if (cfg.p0 == "-1") p0 = -1;
  else if (cfg.p0 != "0" && cfg.p0 != "both") throw InputFailure("--p0 must be 0 or -1");
  InitialData init;
  try {
    init = load_initial_data_file(cfg.init, p, numeric_params(cfg));
  } catch (const IntegrationError& e) {
    throw InputFailure(e.what());
  }

  AlgorithmOptions o = engine_options(cfg);
  o.pins = pins_of(cfg, p);
  o.free_time = p.time.free;
  HamiltonianSystem hs = build_hamiltonian(p, p0);
  ConstraintTree tree = run_algorithm(hs, o);
  if (tree.budget_exhausted) {
    for (const auto& d : tree.diagnostics) err << d << "\n";
    return BudgetExhausted;
  }
  auto leaves = tree.leaves();
  const Branch* leaf = nullptr;
  if (cfg.leaf >= 0) {
    for (const auto* b : leaves)
      if (b->id == cfg.leaf) leaf = b;
    if (!leaf) throw InputFailure("--leaf " + std::to_string(cfg.leaf) + " is not a stabilized leaf");
  } else if (leaves.size() == 1) {
    leaf = leaves.front();
  } else {
    std::string ids;
    for (const auto* b : leaves) ids += " " + std::to_string(b->id);
    throw InputFailure(leaves.empty() ? std::string("the constraint tree has no stabilized leaf")
                                      : "several leaves, choose one with --leaf:" + ids);
  }

  IntegrateOptions io;
  io.h = cfg.h;
  io.tol_drift = cfg.tol_drift;
  if (init.span) {
    io.t0 = init.span->first;
    io.t1 = init.span->second;
  } else if (p.time.free) {
    throw InputFailure("free-time problems need a \"span\" in the initial-data file");
  } else {
    io.t0 = p.time.a.get_d();
    io.t1 = p.time.b.get_d();
  }

  Trajectory tr;
  try {
    tr = integrate(hs, *leaf, init, io);
  } catch (const InitialDataError& e) {
    err << "error: " << e.what() << "\n";
    return NumericFailure;
  } catch (const IntegrationError& e) {
    throw InputFailure(e.what());
  }

  EndpointReport ends = verify_endpoints(tr, p, cfg.tol_accept);
  IntegrationSummary s{leaf->id, p0, cfg.h, cfg.tol_accept, cfg.tol_drift, p.time.free};
  Json doc = integration_json(tr, ends, s);
  Config report_cfg = cfg;
  report_cfg.out.clear();
  emit(report_cfg, doc, out);
  if (!cfg.out.empty()) {
    std::ofstream f(cfg.out);
    if (!f) throw InputFailure("cannot write '" + cfg.out + "'");
    f << trajectory_csv(tr);
  }
  if (!tr.aborted.empty()) err << "error: " << tr.aborted << "\n";
  return doc["pass"].get<bool>() ? Success : NumericFailure;
}

int cmd_report(const Config& cfg, std::ostream& out)
{
  std::ifstream in(cfg.input);
  if (!in) throw InputFailure("cannot open '" + cfg.input + "'");
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const std::exception& e) {
    throw InputFailure(std::string("malformed report file: ") + e.what());
  }
  emit(cfg, doc, out);
  return Success;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
  CLI::App app{"Constraint algorithm for extremals of optimal control problems", "presym"};
  app.require_subcommand(1, 1);
  Config cfg;

  auto common = [&](CLI::App* c, bool engine) {
    c->add_option("input", cfg.input, engine ? "Problem file (JSON)" : "Structured output file (JSON)")->required();
    c->add_option("--format", cfg.format, "Output format")->check(CLI::IsMember({"text", "structured"}));
    c->add_option("--out", cfg.out, "Output path");
    if (!engine) return;
    c->add_option("--pin", cfg.pins, "Branch pin 'expr != 0' (repeatable)");
    c->add_option("--max-steps", cfg.max_steps, "Stabilization passes per branch")->check(CLI::PositiveNumber);
    c->add_option("--max-branches", cfg.max_branches, "Branch budget")->check(CLI::PositiveNumber);
    c->add_option("--param", cfg.params, "Parameter binding name=value (repeatable)");
  };

  CLI::App* derive = app.add_subcommand("derive", "Run the constraint algorithm and dump the tree");
  common(derive, true);
  derive->add_option("--p0", cfg.p0, "0, -1 or both")->check(CLI::IsMember({"0", "-1", "both"}));

  CLI::App* classify = app.add_subcommand("classify", "Classify extremals; pins apply to the abnormal run");
  common(classify, true);
  classify->add_option("--curve", cfg.curve, "Closed-form curve to test for a normal lift");

  CLI::App* integ = app.add_subcommand("integrate", "Integrate Hamilton's equations on a leaf (--out writes the CSV dump)");
  integ->set_help_flag("--help", "Print this help message and exit");
  common(integ, true);
  integ->add_option("--p0", cfg.p0, "0 or -1")->check(CLI::IsMember({"0", "-1"}));
  integ->add_option("--init", cfg.init, "Initial-data file")->required();
  integ->add_option("--leaf", cfg.leaf, "Leaf id");
  integ->add_option("--h", cfg.h, "Step size");
  integ->add_option("--tol-drift", cfg.tol_drift, "Constraint drift abort tolerance");
  integ->add_option("--tol-accept", cfg.tol_accept, "Acceptance tolerance for residuals and endpoints");

  CLI::App* report = app.add_subcommand("report", "Render a structured output file");
  common(report, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return Success;
    }
    err << "error: " << e.what() << "\n";
    return InputError;
  }

  try {
    if (derive->parsed()) return cmd_derive(cfg, out, err);
    if (classify->parsed()) return cmd_classify(cfg, out, err);
    if (integ->parsed()) {
      if (cfg.p0 == "both") cfg.p0 = "0";
      return cmd_integrate(cfg, out, err);
    }
    return cmd_report(cfg, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return InputError;
  }
}

}  // namespace presym::cli
