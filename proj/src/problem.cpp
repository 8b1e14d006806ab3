#include "presym/problem.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "presym/parse.hpp"

namespace presym {

using nlohmann::json;

CotangentChart make_chart(const ControlProblem& p, int p0)
{
  if (p0 != 0 && p0 != -1) throw std::invalid_argument("p0 must be 0 or -1");
  return {p.momenta, p0};
}

namespace {

std::vector<std::string> string_list(const json& doc, const char* key, bool required)
{
  if (!doc.contains(key)) {
    if (required) throw ProblemError(std::string("missing field '") + key + "'");
    return {};
  }
  const json& v = doc.at(key);
  if (!v.is_array()) throw ProblemError(std::string("field '") + key + "' must be an array of strings");
  std::vector<std::string> out;
  for (const auto& item : v) {
    if (!item.is_string()) throw ProblemError(std::string("field '") + key + "' must be an array of strings");
    out.push_back(item.get<std::string>());
  }
  return out;
}

Rational number_field(const json& v, const std::string& what)
{
  try {
    if (v.is_number_integer()) return Rational(v.get<long>());
    if (v.is_string()) return parse_rational(v.get<std::string>());
    if (v.is_number()) return parse_rational(v.dump());
  } catch (const std::exception&) {
  }
  throw ProblemError("invalid number in " + what);
}

Expr parse_field(const ControlProblem& p, const std::string& text, const std::string& what)
{
  try {
    return parse_expr(text, p.table);
  } catch (const ParseError& e) {
    throw ProblemError(what + ": " + e.what());
  }
}

void require_kinds(const Expr& e, std::initializer_list<VarKind> allowed, const std::string& what)
{
  for (const Var& v : e.variables()) {
    bool ok = false;
    for (VarKind k : allowed) ok = ok || v.kind == k;
    if (!ok) throw ProblemError(what + " must not depend on " + std::string(to_string(v.kind)) + " '" + v.name + "'");
  }
}

std::string rational_json(const Rational& r) { return to_string(r); }

}  // namespace

ControlProblem load_problem(std::string_view json_text)
{
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ProblemError(std::string("malformed problem file: ") + e.what());
  }
  if (!doc.is_object()) throw ProblemError("problem file must be a JSON object");

  ControlProblem p;
  if (doc.contains("name")) p.name = doc.at("name").get<std::string>();

  auto states = string_list(doc, "states", true);
  auto controls = string_list(doc, "controls", true);
  auto params = string_list(doc, "parameters", false);
  auto mom_names = string_list(doc, "momentum_names", false);
  auto cv_names = string_list(doc, "control_velocity_names", false);

  if (states.empty()) throw ProblemError("at least one state is required");
  if (controls.size() > states.size())
    throw ProblemError("dimension mismatch: " + std::to_string(controls.size()) + " controls exceed " +
                       std::to_string(states.size()) + " states (k must not exceed m)");
  if (!mom_names.empty() && mom_names.size() != states.size())
    throw ProblemError("dimension mismatch: momentum_names needs one entry per state");
  if (!cv_names.empty() && cv_names.size() != controls.size())
    throw ProblemError("dimension mismatch: control_velocity_names needs one entry per control");

  try {
    for (std::size_t i = 0; i < states.size(); ++i) {
      p.states.push_back(p.table.add(state(states[i])));
      std::string mn = mom_names.empty() ? "lam_" + states[i] : mom_names[i];
      p.momenta.push_back(p.table.add(momentum(mn)));
    }
    for (std::size_t l = 0; l < controls.size(); ++l) {
      p.controls.push_back(p.table.add(control(controls[l])));
      std::string cn = cv_names.empty() ? "C_" + controls[l] : cv_names[l];
      p.control_velocities.push_back(p.table.add(control_velocity(cn)));
    }
    for (const auto& n : params) p.parameters.push_back(p.table.add(parameter(n)));
  } catch (const std::invalid_argument& e) {
    throw ProblemError(e.what());
  }

  auto field = string_list(doc, "vector_field", true);
  if (field.size() != states.size())
    throw ProblemError("dimension mismatch: vector_field has " + std::to_string(field.size()) + " components for " +
                       std::to_string(states.size()) + " states");
  for (std::size_t i = 0; i < field.size(); ++i) {
    std::string what = "vector_field[" + std::to_string(i) + "]";
    Expr e = parse_field(p, field[i], what);
    require_kinds(e, {VarKind::State, VarKind::Control, VarKind::Parameter}, what);
    p.vector_field.push_back(e);
  }

  if (!doc.contains("cost") || !doc.at("cost").is_string()) throw ProblemError("missing field 'cost'");
  p.cost = parse_field(p, doc.at("cost").get<std::string>(), "cost");
  require_kinds(p.cost, {VarKind::State, VarKind::Control, VarKind::Parameter}, "cost");

  if (doc.contains("time")) {
    const json& t = doc.at("time");
    if (t.is_string() && t.get<std::string>() == "free") {
      p.time.free = true;
    } else if (t.is_object() && t.contains("fixed")) {
      const json& iv = t.at("fixed");
      if (!iv.is_array() || iv.size() != 2) throw ProblemError("time.fixed must be [a, b]");
      p.time.a = number_field(iv[0], "time.fixed");
      p.time.b = number_field(iv[1], "time.fixed");
      if (!(p.time.a < p.time.b)) throw ProblemError("time.fixed requires a < b");
    } else {
      throw ProblemError("time must be \"free\" or {\"fixed\": [a, b]}");
    }
  }

  if (doc.contains("endpoints")) {
    const json& ep = doc.at("endpoints");
    Endpoints e;
    for (const char* key : {"from", "to"}) {
      auto items = string_list(ep, key, true);
      if (items.size() != states.size())
        throw ProblemError(std::string("dimension mismatch: endpoints.") + key + " needs one entry per state");
      for (std::size_t i = 0; i < items.size(); ++i) {
        std::string what = std::string("endpoints.") + key + "[" + std::to_string(i) + "]";
        Expr x = parse_field(p, items[i], what);
        require_kinds(x, {VarKind::Parameter}, what);
        (std::string(key) == "from" ? e.from : e.to).push_back(x);
      }
    }
    p.endpoints = std::move(e);
  }

  p.control_bounds.assign(p.controls.size(), std::nullopt);
  if (doc.contains("control_bounds")) {
    const json& cb = doc.at("control_bounds");
    if (!cb.is_object()) throw ProblemError("control_bounds must map control names to [lo, hi]");
    for (const auto& [name, iv] : cb.items()) {
      auto it = std::find_if(p.controls.begin(), p.controls.end(), [&](const Var& v) { return v.name == name; });
      if (it == p.controls.end()) throw ProblemError("control_bounds names unknown control '" + name + "'");
      if (!iv.is_array() || iv.size() != 2) throw ProblemError("control_bounds." + name + " must be [lo, hi]");
      Rational lo = number_field(iv[0], "control_bounds"), hi = number_field(iv[1], "control_bounds");
      if (!(lo < hi)) throw ProblemError("control_bounds." + name + " requires lo < hi");
      p.control_bounds[static_cast<std::size_t>(it - p.controls.begin())] = std::make_pair(lo, hi);
    }
  }

  for (const auto& pin : string_list(doc, "pins", false)) p.pins.push_back(parse_pin(pin, p));
  return p;
}

ControlProblem load_problem_file(const std::filesystem::path& path)
{
  std::ifstream in(path);
  if (!in) throw ProblemError("cannot open problem file '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return load_problem(ss.str());
}

Expr parse_pin(std::string_view text, const ControlProblem& p)
{
  std::string body(text);
  if (auto pos = body.find("!="); pos != std::string::npos) {
    std::string rhs = body.substr(pos + 2);
    body = body.substr(0, pos);
    Expr r = parse_field(p, rhs, "pin");
    if (!r.is_zero()) throw ProblemError("pin must have the form 'expr != 0'");
  }
  Expr e = parse_field(p, body, "pin");
  if (!e.is_polynomial()) throw ProblemError("pin must be polynomial");
  if (e.is_zero()) throw ProblemError("pin '" + std::string(text) + "' is identically zero");
  if (e.contains_kind(VarKind::ControlVelocity)) throw ProblemError("pin must not mention control velocities");
  return e;
}

std::string print_problem(const ControlProblem& p)
{
  json doc = json::object();
  if (!p.name.empty()) doc["name"] = p.name;
  auto names = [](const std::vector<Var>& vs) {
    json a = json::array();
    for (const auto& v : vs) a.push_back(v.name);
    return a;
  };
  auto exprs = [](const std::vector<Expr>& es) {
    json a = json::array();
    for (const auto& e : es) a.push_back(to_string(e));
    return a;
  };
  doc["states"] = names(p.states);
  doc["controls"] = names(p.controls);
  doc["parameters"] = names(p.parameters);
  doc["momentum_names"] = names(p.momenta);
  doc["control_velocity_names"] = names(p.control_velocities);
  doc["vector_field"] = exprs(p.vector_field);
  doc["cost"] = to_string(p.cost);
  if (p.time.free) {
    doc["time"] = "free";
  } else {
    doc["time"] = {{"fixed", {rational_json(p.time.a), rational_json(p.time.b)}}};
  }
  if (p.endpoints) doc["endpoints"] = {{"from", exprs(p.endpoints->from)}, {"to", exprs(p.endpoints->to)}};
  json bounds = json::object();
  for (std::size_t l = 0; l < p.control_bounds.size(); ++l)
    if (p.control_bounds[l])
      bounds[p.controls[l].name] = {rational_json(p.control_bounds[l]->first), rational_json(p.control_bounds[l]->second)};
  if (!bounds.empty()) doc["control_bounds"] = bounds;
  if (!p.pins.empty()) {
    json pins = json::array();
    for (const auto& e : p.pins) pins.push_back(to_string(e) + " != 0");
    doc["pins"] = pins;
  }
  return doc.dump(2);
}

std::optional<AffineDecomposition> affine_decomposition(const ControlProblem& p)
{
  AffineDecomposition out;
  out.inputs.assign(p.k(), std::vector<Expr>(p.m()));
  std::map<Var, Expr> zero_controls;
  for (const auto& u : p.controls) zero_controls[u] = Expr(0);
  for (std::size_t i = 0; i < p.m(); ++i) {
    const Expr& xi = p.vector_field[i];
    if (!xi.is_polynomial()) {
      for (const auto& u : p.controls)
        if (xi.denominator().contains(u)) return std::nullopt;
    }
    for (std::size_t l = 0; l < p.k(); ++l) {
      Expr d = differentiate(xi, p.controls[l]);
      for (const auto& u : p.controls)
        if (d.contains(u)) return std::nullopt;
      out.inputs[l][i] = d;
    }
    out.drift.push_back(substitute_unchecked(xi, zero_controls));
  }
  return out;
}

}  // namespace presym
