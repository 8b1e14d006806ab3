#include "presym/report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "presym/parse.hpp"

namespace presym {

namespace {

Json expr_list(const std::vector<Expr>& es)
{
  Json a = Json::array();
  for (const auto& e : es) a.push_back(to_string(e));
  return a;
}

std::string number(double x)
{
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

}  // namespace

Json tree_json(const ConstraintTree& tree)
{
  Json doc;
  doc["kind"] = "tree";
  doc["p0"] = tree.p0;
  doc["budget_exhausted"] = tree.budget_exhausted;
  doc["diagnostics"] = tree.diagnostics;
  Json leaves = Json::array();
  for (const auto* b : tree.leaves()) leaves.push_back(b->id);
  doc["leaves"] = leaves;
  Json branches = Json::array();
  for (const auto& b : tree.branches) {
    Json j;
    j["id"] = b.id;
    j["parent"] = b.parent;
    j["children"] = b.children;
    j["status"] = std::string(to_string(b.status));
    j["passes"] = b.passes;
    j["depth"] = b.depth;
    if (b.status == BranchStatus::Empty) j["empty_reason"] = b.empty_reason;
    if (tree.p0 == 0) j["nonzero_covector"] = b.nonzero_covector;
    Json eqs = Json::array();
    for (const auto& c : b.equations) {
      Json e;
      e["id"] = c.id;
      e["expr"] = to_string(c.expr);
      Json o;
      o["kind"] = std::string(to_string(c.origin.kind));
      if (c.origin.control >= 0) o["control"] = c.origin.control;
      if (c.origin.parent >= 0) o["parent"] = c.origin.parent;
      if (c.origin.factor_of >= 0) o["factor_of"] = c.origin.factor_of;
      e["origin"] = o;
      e["step"] = c.step_introduced;
      if (c.defines) e["solved_for"] = c.defines->name;
      eqs.push_back(e);
    }
    j["equations"] = eqs;
    j["inequations"] = expr_list(b.inequations());
    Json bind = Json::object();
    for (const auto& [v, val] : b.solved.bindings()) bind[v.name] = to_string(val);
    j["bindings"] = bind;
    Json cv = Json::object();
    for (const auto& [v, val] : b.solved_control_velocities) cv[v.name] = to_string(val);
    j["control_velocities"] = cv;
    if (b.free_time_h) j["h_vanished_before_augmentation"] = b.h_vanished_before.value_or(false);
    j["log"] = b.log;
    branches.push_back(j);
  }
  doc["branches"] = branches;
  return doc;
}

Json projection_json(const ProjectionDescription& d)
{
  Json j;
  j["branch"] = d.branch;
  j["p0"] = d.p0;
  Json el = Json::array();
  for (const auto& v : d.eliminated) el.push_back(v.name);
  j["eliminated"] = el;
  j["equations"] = expr_list(d.equations);
  j["inequations"] = expr_list(d.inequations);
  j["exact"] = d.exact;
  j["method"] = std::string(to_string(d.method));
  j["notes"] = d.notes;
  return j;
}

Json verdict_json(const Verdict& v)
{
  Json doc;
  doc["kind"] = "verdict";
  doc["abnormal_exists"] = std::string(to_string(v.abnormal_exists));
  doc["normal_exists"] = std::string(to_string(v.normal_exists));
  doc["strictness"] = std::string(to_string(v.strictness));
  Json c;
  c["all_abnormal_strict"] = std::string(to_string(v.cases.abnormal_strict));
  c["all_normal_strict"] = std::string(to_string(v.cases.normal_strict));
  c["no_strict_abnormal"] = std::string(to_string(v.cases.no_strict_abnormal));
  c["locally_abnormal"] = std::string(to_string(v.cases.locally_abnormal));
  c["coincide"] = std::string(to_string(v.cases.coincide));
  doc["cases"] = c;
  doc["target"] = std::string(to_string(v.target));
  doc["method"] = std::string(to_string(v.method));
  doc["superset_only"] = v.superset_only;
  if (v.free_time_notes) {
    Json f;
    f["only_zero_covectors"] = v.free_time_notes->only_zero_covectors;
    f["hx_vanishes"] = v.free_time_notes->hx_vanishes;
    f["details"] = v.free_time_notes->details;
    doc["free_time"] = f;
  } else {
    doc["free_time"] = nullptr;
  }
  Json proj = Json::array();
  for (const auto& d : v.projections) proj.push_back(projection_json(d));
  doc["projections"] = proj;
  doc["diagnostics"] = v.diagnostics;
  doc["abnormal_tree"] = tree_json(v.abnormal_tree);
  doc["normal_tree"] = tree_json(v.normal_tree);
  return doc;
}

Json lift_json(const LiftResult& r, Tri in_abnormal_image)
{
  Json j;
  j["kind"] = "normal_lift";
  j["exists"] = std::string(to_string(r.exists));
  j["leaf"] = r.leaf;
  j["reason"] = r.reason;
  if (r.contradiction) {
    j["contradiction"] = to_string(*r.contradiction);
    std::string f;
    for (const auto& [fac, mult] : factor(*r.contradiction)) {
      if (!f.empty()) f += " * ";
      f += "(" + to_string(fac) + ")";
      if (mult > 1) f += "^" + std::to_string(mult);
    }
    j["contradiction_factored"] = f;
  }
  Json w = Json::object();
  for (const auto& [v, val] : r.witness) w[v.name] = to_string(val);
  j["witness"] = w;
  j["in_abnormal_image"] = std::string(to_string(in_abnormal_image));
  Tri strict = Tri::Undetermined;
  if (r.exists == Tri::Yes) strict = Tri::No;
  else if (r.exists == Tri::No && in_abnormal_image == Tri::Yes) strict = Tri::Yes;
  j["strict_abnormal"] = std::string(to_string(strict));
  return j;
}

Json integration_json(const Trajectory& tr, const EndpointReport& ends, const IntegrationSummary& s)
{
  Json j;
  j["kind"] = "integration";
  j["leaf"] = s.leaf;
  j["p0"] = s.p0;
  j["h"] = s.h;
  j["nodes"] = tr.t.size();
  Json params = Json::object();
  for (const auto& [n, x] : tr.parameters) params[n] = x;
  j["parameters"] = params;
  Json fin = Json::object();
  if (!tr.samples.empty())
    for (std::size_t i = 0; i < tr.columns.size(); ++i) fin[tr.columns[i].name] = tr.samples.back()[i];
  j["t_final"] = tr.t.empty() ? 0.0 : tr.t.back();
  j["final"] = fin;
  j["max_residual"] = tr.max_residual();
  j["max_h_drift"] = tr.max_h_drift();
  double max_h = 0;
  for (double h : tr.hamiltonian) max_h = std::max(max_h, std::abs(h));
  j["max_abs_h"] = max_h;
  j["aborted"] = tr.aborted;
  auto checks = [](const std::vector<EndpointCheck>& cs) {
    Json a = Json::array();
    for (const auto& c : cs)
      a.push_back({{"component", c.component}, {"expected", c.expected}, {"actual", c.actual}, {"deviation", c.deviation},
                   {"pass", c.pass}});
    return a;
  };
  Json e;
  e["pass"] = ends.pass;
  e["start"] = checks(ends.start);
  e["end"] = checks(ends.end);
  j["endpoints"] = e;
  bool numeric_ok = tr.aborted.empty() && tr.max_residual() <= s.tol_accept && tr.max_h_drift() <= s.tol_accept;
  if (s.free_time) numeric_ok = numeric_ok && max_h <= s.tol_accept;
  j["tol_accept"] = s.tol_accept;
  j["tol_drift"] = s.tol_drift;
  j["numeric_pass"] = numeric_ok;
  j["pass"] = numeric_ok && ends.pass;
  return j;
}

namespace {

void render_tree(std::ostringstream& out, const Json& t)
{
  out << "constraint tree p0 = " << t["p0"].get<int>() << "\n";
  if (t["budget_exhausted"].get<bool>()) out << "  budget exhausted\n";
  for (const auto& d : t["diagnostics"]) out << "  diagnostic: " << d.get<std::string>() << "\n";
  for (const auto& b : t["branches"]) {
    out << "  branch " << b["id"].get<int>() << " (parent " << b["parent"].get<int>() << "): " << b["status"].get<std::string>();
    out << ", passes " << b["passes"].get<int>() << ", depth " << b["depth"].get<int>() << "\n";
    if (b.contains("empty_reason")) out << "    empty: " << b["empty_reason"].get<std::string>() << "\n";
    if (b["status"] == "split") continue;
    for (const auto& e : b["equations"]) {
      out << "    " << e["expr"].get<std::string>() << " = 0  [" << e["origin"]["kind"].get<std::string>();
      if (e.contains("solved_for")) out << ", solved for " << e["solved_for"].get<std::string>();
      out << "]\n";
    }
    for (const auto& q : b["inequations"]) out << "    " << q.get<std::string>() << " != 0\n";
    for (const auto& [n, v] : b["bindings"].items()) out << "    " << n << " := " << v.get<std::string>() << "\n";
    for (const auto& [n, v] : b["control_velocities"].items()) out << "    " << n << " := " << v.get<std::string>() << "\n";
    if (b.contains("nonzero_covector") && b["nonzero_covector"].get<bool>()) out << "    nonzero covectors present\n";
  }
  out << "  leaves:";
  if (t["leaves"].empty()) out << " none";
  for (const auto& l : t["leaves"]) out << " " << l.get<int>();
  out << "\n";
}

std::string existence_line(const std::string& which, const std::string& flag)
{
  if (flag == "no") return "no " + which + " extremals";
  if (flag == "yes") return which + " extremals exist";
  return which + " extremals: undetermined";
}

void render_verdict(std::ostringstream& out, const Json& v)
{
  out << existence_line("abnormal", v["abnormal_exists"].get<std::string>()) << "\n";
  out << existence_line("normal", v["normal_exists"].get<std::string>()) << "\n";
  out << "strictness: " << v["strictness"].get<std::string>() << "\n";
  out << "projection cases (target " << v["target"].get<std::string>() << ", method " << v["method"].get<std::string>() << "):\n";
  const Json& c = v["cases"];
  out << "  all abnormal extremals strict: " << c["all_abnormal_strict"].get<std::string>() << "\n";
  out << "  all normal extremals strict: " << c["all_normal_strict"].get<std::string>() << "\n";
  out << "  no strict abnormal extremals: " << c["no_strict_abnormal"].get<std::string>() << "\n";
  out << "  locally abnormal extremals: " << c["locally_abnormal"].get<std::string>() << "\n";
  out << "  abnormal and normal images coincide: " << c["coincide"].get<std::string>() << "\n";
  if (c["locally_abnormal"] == "yes")
    out << "  (strict abnormal away from the common image; an extremal may still have pieces inside it)\n";
  if (v["superset_only"].get<bool>())
    out << "fixed time: final submanifolds contain the biextremals and may be larger\n";
  if (!v["free_time"].is_null()) {
    const Json& f = v["free_time"];
    out << "free time: only zero covectors in the abnormal final submanifold: " << (f["only_zero_covectors"].get<bool>() ? "yes" : "no") << "\n";
    out << "free time: H_X vanishes on the abnormal final submanifold: " << (f["hx_vanishes"].get<bool>() ? "yes" : "no") << "\n";
    for (const auto& d : f["details"]) out << "  " << d.get<std::string>() << "\n";
  }
  for (const auto& p : v["projections"]) {
    out << "projection of branch " << p["branch"].get<int>() << " (p0 = " << p["p0"].get<int>() << ", "
        << (p["exact"].get<bool>() ? "exact" : "approximate") << ", " << p["method"].get<std::string>() << "):";
    if (p["equations"].empty() && p["inequations"].empty()) out << " everything";
    out << "\n";
    for (const auto& e : p["equations"]) out << "    " << e.get<std::string>() << " = 0\n";
    for (const auto& e : p["inequations"]) out << "    " << e.get<std::string>() << " != 0\n";
    for (const auto& n : p["notes"]) out << "    note: " << n.get<std::string>() << "\n";
  }
  for (const auto& d : v["diagnostics"]) out << "diagnostic: " << d.get<std::string>() << "\n";
  if (v.contains("curve")) {
    const Json& l = v["curve"];
    out << "curve: normal lift " << (l["exists"] == "no" ? "impossible" : l["exists"] == "yes" ? "exists" : "undetermined") << "\n";
    out << "  " << l["reason"].get<std::string>() << "\n";
    if (l.contains("contradiction"))
      out << "  contradiction: " << l["contradiction_factored"].get<std::string>() << " = 0\n";
    for (const auto& [n, w] : l["witness"].items()) out << "  witness " << n << " = " << w.get<std::string>() << "\n";
    out << "  in abnormal image: " << l["in_abnormal_image"].get<std::string>() << "\n";
    out << "  strict abnormal: " << l["strict_abnormal"].get<std::string>() << "\n";
  }
}

void render_integration(std::ostringstream& out, const Json& j)
{
  out << "integration of leaf " << j["leaf"].get<int>() << " (p0 = " << j["p0"].get<int>() << "), h = " << number(j["h"].get<double>())
      << ", " << j["nodes"].get<std::size_t>() << " nodes\n";
  if (!j["aborted"].get<std::string>().empty()) out << "aborted: " << j["aborted"].get<std::string>() << "\n";
  out << "final state at t = " << number(j["t_final"].get<double>()) << ":";
  for (const auto& [n, x] : j["final"].items()) out << " " << n << "=" << number(x.get<double>());
  out << "\n";
  out << "max constraint residual " << number(j["max_residual"].get<double>()) << ", max |H - H(t0)| "
      << number(j["max_h_drift"].get<double>()) << "\n";
  const Json& e = j["endpoints"];
  for (const char* side : {"start", "end"})
    for (const auto& c : e[side])
      if (!c["pass"].get<bool>())
        out << "endpoint " << side << " " << c["component"].get<std::string>() << ": expected " << number(c["expected"].get<double>())
            << ", got " << number(c["actual"].get<double>()) << " (deviation " << number(c["deviation"].get<double>()) << ")\n";
  out << "endpoints: " << (e["pass"].get<bool>() ? "pass" : "fail") << "\n";
  out << "result: " << (j["pass"].get<bool>() ? "pass" : "fail") << "\n";
}

}  // namespace

std::string render_text(const Json& doc)
{
  std::ostringstream out;
  const std::string kind = doc.value("kind", "");
  if (kind == "tree") {
    render_tree(out, doc);
  } else if (kind == "trees") {
    for (const auto& t : doc["trees"]) render_tree(out, t);
  } else if (kind == "verdict") {
    render_verdict(out, doc);
  } else if (kind == "integration") {
    render_integration(out, doc);
  } else {
    throw std::invalid_argument("unknown report kind '" + kind + "'");
  }
  return out.str();
}

}  // namespace presym
