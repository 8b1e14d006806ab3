#include "presym/integrator.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "presym/parse.hpp"

namespace presym {

CompiledExpr::CompiledExpr(const Expr& e, const std::map<Var, int>& index)
{
  auto compile = [&](const Polynomial& p) {
    std::vector<Term> out;
    for (const auto& [m, c] : p.terms()) {
      Term t{c.get_d(), {}};
      for (const auto& [v, exp] : m.factors()) {
        auto it = index.find(v);
        if (it == index.end()) throw std::invalid_argument("no numeric slot for variable '" + v.name + "'");
        t.powers.emplace_back(it->second, exp);
      }
      out.push_back(std::move(t));
    }
    return out;
  };
  num_ = compile(e.numerator());
  has_den_ = !e.is_polynomial();
  if (has_den_) den_ = compile(e.denominator());
}

double CompiledExpr::eval(const std::vector<Term>& terms, const double* values)
{
  double s = 0;
  for (const auto& t : terms) {
    double v = t.coeff;
    for (const auto& [i, e] : t.powers) {
      double x = values[i];
      for (int k = 0; k < e; ++k) v *= x;
    }
    s += v;
  }
  return s;
}

double CompiledExpr::operator()(const double* values) const
{
  double n = eval(num_, values);
  return has_den_ ? n / eval(den_, values) : n;
}

double Trajectory::max_residual() const { return residual.empty() ? 0 : *std::max_element(residual.begin(), residual.end()); }

double Trajectory::max_h_drift() const { return h_drift.empty() ? 0 : *std::max_element(h_drift.begin(), h_drift.end()); }

double Trajectory::value(std::size_t node, const Var& v) const
{
  auto it = std::find(columns.begin(), columns.end(), v);
  if (it == columns.end()) throw std::invalid_argument("trajectory has no column '" + v.name + "'");
  return samples.at(node).at(static_cast<std::size_t>(it - columns.begin()));
}

namespace {

/// Numeric model of a branch: slot layout, compiled right-hand sides and checks.
class Model {
 public:
  Model(const HamiltonianSystem& hs, const Branch& b, const InitialData& init) : p_(*hs.problem)
  {
    for (const auto& v : p_.states) add_slot(v);
    for (const auto& v : p_.momenta) add_slot(v);
    for (const auto& v : p_.controls) add_slot(v);
    columns = slots_;
    for (const auto& v : p_.parameters) add_slot(v);

    for (const auto& v : p_.parameters) {
      auto it = init.parameters.find(v.name);
      if (it == init.parameters.end()) throw IntegrationError("parameter '" + v.name + "' needs a numeric value");
      params[v] = it->second;
    }

    const auto& bindings = b.solved.bindings();
    std::set<std::string> hold(init.hold_controls.begin(), init.hold_controls.end());
    for (const auto& name : hold)
      if (!p_.find(name) || p_.find(name)->kind != VarKind::Control)
        throw IntegrationError("hold_controls names unknown control '" + name + "'");

    for (const auto& v : p_.states) integrated.push_back(v);
    for (const auto& v : p_.momenta) integrated.push_back(v);
    for (std::size_t l = 0; l < p_.k(); ++l) {
      const Var& u = p_.controls[l];
      if (bindings.count(u)) {
        algebraic.emplace_back(u, compile(bindings.at(u)));
        continue;
      }
      auto cv = b.solved_control_velocities.find(p_.control_velocities[l]);
      if (cv != b.solved_control_velocities.end()) {
        integrated.push_back(u);
        control_rates.emplace_back(u, compile(cv->second));
      } else if (hold.count(u.name)) {
        integrated.push_back(u);
        control_rates.emplace_back(u, compile(Expr(0)));
      } else {
        throw IntegrationError("control '" + u.name +
                               "' is neither solved nor fixed on the branch; list it in hold_controls to keep it constant");
      }
    }
    for (std::size_t i = 0; i < p_.m(); ++i) {
      state_rhs.push_back(compile(hs.state_rhs[i]));
      momentum_rhs.push_back(compile(hs.momentum_rhs[i]));
    }
    for (const auto& [v, val] : bindings) {
      Expr c = constraint_form(Expr(v) - val);
      constraints.push_back(compile(c));
      labels.push_back(to_string(c));
      bound_values.emplace_back(v, compile(val));
    }
    for (const auto& e : b.unsolved()) {
      constraints.push_back(compile(e));
      labels.push_back(to_string(e));
    }
    for (const auto& f : b.inequations()) {
      inequations.push_back(compile(f));
      inequation_labels.push_back(to_string(f));
    }
    hamiltonian = compile(hs.H);
  }

  int slot(const Var& v) const { return index_.at(v); }
  std::size_t size() const { return slots_.size(); }

  /// Fills parameters and algebraic controls given integrated values.
  void complete(std::vector<double>& vals) const
  {
    for (const auto& [v, x] : params) vals[static_cast<std::size_t>(slot(v))] = x;
    for (const auto& [u, f] : algebraic) vals[static_cast<std::size_t>(slot(u))] = f(vals.data());
  }

  Eigen::VectorXd rhs(const Eigen::VectorXd& y, std::vector<double>& scratch) const
  {
    load(y, scratch);
    Eigen::VectorXd d(y.size());
    std::size_t k = 0;
    for (const auto& f : state_rhs) d[static_cast<Eigen::Index>(k++)] = f(scratch.data());
    for (const auto& f : momentum_rhs) d[static_cast<Eigen::Index>(k++)] = f(scratch.data());
    for (const auto& [u, f] : control_rates) d[static_cast<Eigen::Index>(k++)] = f(scratch.data());
    return d;
  }

  void load(const Eigen::VectorXd& y, std::vector<double>& vals) const
  {
    for (std::size_t i = 0; i < integrated.size(); ++i)
      vals[static_cast<std::size_t>(slot(integrated[i]))] = y[static_cast<Eigen::Index>(i)];
    complete(vals);
  }

  /// Largest constraint residual and the index attaining it.
  std::pair<double, std::size_t> residual(const std::vector<double>& vals) const
  {
    double worst = 0;
    std::size_t at = 0;
    for (std::size_t i = 0; i < constraints.size(); ++i) {
      double r = std::abs(constraints[i](vals.data()));
      if (!(r <= worst)) {
        worst = r;
        at = i;
      }
    }
    return {worst, at};
  }

  std::vector<Var> columns;
  std::vector<Var> integrated;
  std::map<Var, double> params;
  std::vector<std::pair<Var, CompiledExpr>> algebraic;
  std::vector<std::pair<Var, CompiledExpr>> control_rates;
  std::vector<std::pair<Var, CompiledExpr>> bound_values;
  std::vector<CompiledExpr> state_rhs, momentum_rhs;
  std::vector<CompiledExpr> constraints;
  std::vector<std::string> labels;
  std::vector<CompiledExpr> inequations;
  std::vector<std::string> inequation_labels;
  CompiledExpr hamiltonian;

 private:
  void add_slot(const Var& v)
  {
    index_[v] = static_cast<int>(slots_.size());
    slots_.push_back(v);
  }
  CompiledExpr compile(const Expr& e) const { return CompiledExpr(e, index_); }

  const ControlProblem& p_;
  std::map<Var, int> index_;
  std::vector<Var> slots_;
};

std::vector<double> initial_slots(const Model& model, const ControlProblem& p, const Branch& b, const InitialData& init)
{
  std::vector<double> vals(model.size(), 0.0);
  std::set<std::string> known;
  for (const auto& v : model.columns) known.insert(v.name);
  for (const auto& [name, x] : init.values)
    if (!known.count(name)) throw IntegrationError("initial value given for unknown variable '" + name + "'");

  const auto& bindings = b.solved.bindings();
  for (const auto& v : model.columns) {
    if (bindings.count(v)) continue;
    auto it = init.values.find(v.name);
    if (it == init.values.end()) throw IntegrationError("no initial value for free variable '" + v.name + "'");
    vals[static_cast<std::size_t>(model.slot(v))] = it->second;
  }
  for (const auto& [v, x] : model.params) vals[static_cast<std::size_t>(model.slot(v))] = x;
  for (const auto& [v, f] : model.bound_values) {
    auto it = init.values.find(v.name);
    vals[static_cast<std::size_t>(model.slot(v))] = it != init.values.end() ? it->second : f(vals.data());
  }
  (void)p;
  return vals;
}

}  // namespace

std::map<Var, double> resolve_initial(const HamiltonianSystem& hs, const Branch& b, const InitialData& init)
{
  Model model(hs, b, init);
  auto vals = initial_slots(model, *hs.problem, b, init);
  std::map<Var, double> out;
  for (const auto& v : model.columns) out[v] = vals[static_cast<std::size_t>(model.slot(v))];
  return out;
}

Trajectory integrate(const HamiltonianSystem& hs, const Branch& b, const InitialData& init, const IntegrateOptions& opts)
{
  if (b.status != BranchStatus::Stabilized) throw IntegrationError("branch " + std::to_string(b.id) + " is not a stabilized leaf");
  if (!(opts.h > 0)) throw IntegrationError("step size must be positive");
  if (!(opts.t1 > opts.t0)) throw IntegrationError("integration span must be increasing");
  const double span = opts.t1 - opts.t0;
  const long steps = std::lround(span / opts.h);
  if (steps < 1 || std::abs(static_cast<double>(steps) * opts.h - span) > 1e-9 * span)
    throw IntegrationError("span length is not a whole number of steps of size h");

  const ControlProblem& p = *hs.problem;
  Model model(hs, b, init);
  std::vector<double> vals = initial_slots(model, p, b, init);

  auto [r0, at0] = model.residual(vals);
  if (r0 > opts.tol_init)
    throw InitialDataError("initial data violates constraint '" + model.labels[at0] + "' (residual " +
                           std::to_string(r0) + ")");
  for (std::size_t i = 0; i < model.inequations.size(); ++i)
    if (std::abs(model.inequations[i](vals.data())) <= opts.tol_init)
      throw InitialDataError("initial data violates inequation '" + model.inequation_labels[i] + " != 0'");

  Trajectory tr;
  tr.columns = model.columns;
  tr.constraint_labels = model.labels;
  for (const auto& [v, x] : model.params) tr.parameters[v.name] = x;

  Eigen::VectorXd y(static_cast<Eigen::Index>(model.integrated.size()));
  for (std::size_t i = 0; i < model.integrated.size(); ++i)
    y[static_cast<Eigen::Index>(i)] = vals[static_cast<std::size_t>(model.slot(model.integrated[i]))];

  std::vector<double> scratch = vals;
  auto rk4 = [&](const Eigen::VectorXd& y0, double h) {
    Eigen::VectorXd k1 = model.rhs(y0, scratch);
    Eigen::VectorXd k2 = model.rhs(y0 + 0.5 * h * k1, scratch);
    Eigen::VectorXd k3 = model.rhs(y0 + 0.5 * h * k2, scratch);
    Eigen::VectorXd k4 = model.rhs(y0 + h * k3, scratch);
    return Eigen::VectorXd(y0 + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
  };

  double h_start = 0;
  auto record = [&](double t, const Eigen::VectorXd& state) -> std::optional<std::string> {
    model.load(state, scratch);
    std::vector<double> row;
    for (const auto& v : model.columns) row.push_back(scratch[static_cast<std::size_t>(model.slot(v))]);
    auto [res, at] = model.residual(scratch);
    double hv = model.hamiltonian(scratch.data());
    if (tr.t.empty()) h_start = hv;
    tr.t.push_back(t);
    tr.samples.push_back(std::move(row));
    tr.residual.push_back(res);
    tr.hamiltonian.push_back(hv);
    tr.h_drift.push_back(std::abs(hv - h_start));
    if (!(res <= opts.tol_drift))
      return "constraint '" + model.labels[at] + "' drifted to " + std::to_string(res) + " at t = " + std::to_string(t);
    return std::nullopt;
  };

  record(opts.t0, y);
  for (long k = 1; k <= steps; ++k) {
    Eigen::VectorXd full = rk4(y, opts.h);
    Eigen::VectorXd half = rk4(rk4(y, 0.5 * opts.h), 0.5 * opts.h);
    double est = (full - half).lpNorm<Eigen::Infinity>() / 15.0;
    double t = opts.t0 + static_cast<double>(k) * opts.h;
    if (!std::isfinite(est) || est > opts.tol_drift) {
      tr.aborted = "step rejected at t = " + std::to_string(t) + ": local error estimate " + std::to_string(est) +
                   " exceeds tolerance " + std::to_string(opts.tol_drift) + "; reduce h";
      break;
    }
    y = full;
    if (auto why = record(t, y)) {
      tr.aborted = *why;
      break;
    }
  }
  return tr;
}

EndpointReport verify_endpoints(const Trajectory& tr, const ControlProblem& p, double tol)
{
  EndpointReport rep;
  if (!p.endpoints || tr.samples.empty()) return rep;
  std::map<Var, double> point;
  for (const auto& v : p.parameters) {
    auto it = tr.parameters.find(v.name);
    if (it != tr.parameters.end()) point[v] = it->second;
  }
  auto check = [&](const std::vector<Expr>& target, std::size_t node, std::vector<EndpointCheck>& out) {
    for (std::size_t i = 0; i < p.m(); ++i) {
      EndpointCheck c;
      c.component = p.states[i].name;
      c.expected = eval_double(target[i], point);
      c.actual = tr.value(node, p.states[i]);
      c.deviation = std::abs(c.actual - c.expected);
      c.pass = c.deviation <= tol;
      rep.pass = rep.pass && c.pass;
      out.push_back(c);
    }
  };
  check(p.endpoints->from, 0, rep.start);
  check(p.endpoints->to, tr.samples.size() - 1, rep.end);
  return rep;
}

std::string trajectory_csv(const Trajectory& tr)
{
  std::string out = "t";
  for (const auto& v : tr.columns) out += "," + v.name;
  out += ",residual,h_drift\n";
  char buf[40];
  auto num = [&](double x) {
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return std::string(buf);
  };
  for (std::size_t i = 0; i < tr.t.size(); ++i) {
    out += num(tr.t[i]);
    for (double x : tr.samples[i]) out += "," + num(x);
    out += "," + num(tr.residual[i]) + "," + num(tr.h_drift[i]) + "\n";
  }
  return out;
}

InitialData load_initial_data(std::string_view json_text, const ControlProblem& p,
                              const std::map<std::string, double>& extra_parameters)
{
  using nlohmann::json;
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw IntegrationError(std::string("malformed initial-data file: ") + e.what());
  }
  if (!doc.is_object()) throw IntegrationError("initial-data file must be a JSON object");

  InitialData init;
  std::map<std::string, double> numbers;
  auto read_numbers = [&](const char* key) {
    if (!doc.contains(key)) return;
    for (const auto& [name, v] : doc.at(key).items()) {
      if (!v.is_number()) throw IntegrationError(std::string(key) + "." + name + " must be a number");
      numbers[name] = v.get<double>();
    }
  };
  read_numbers("constants");
  read_numbers("parameters");
  for (const auto& [name, x] : extra_parameters) numbers[name] = x;

  for (const auto& v : p.parameters) {
    auto it = numbers.find(v.name);
    if (it != numbers.end()) init.parameters[v.name] = it->second;
  }

  std::map<Var, double> point;
  VarTable table;
  for (const auto& [name, x] : numbers) {
    Var v = parameter(name);
    if (p.find(name) && p.find(name)->kind != VarKind::Parameter)
      throw IntegrationError("constant '" + name + "' shadows a problem variable");
    table.add(v);
    point[v] = x;
  }

  if (doc.contains("values")) {
    for (const auto& [name, v] : doc.at("values").items()) {
      if (v.is_number()) {
        init.values[name] = v.get<double>();
      } else if (v.is_string()) {
        try {
          init.values[name] = eval_double(parse_expr(v.get<std::string>(), table), point);
        } catch (const std::exception& e) {
          throw IntegrationError("values." + name + ": " + e.what());
        }
      } else {
        throw IntegrationError("values." + name + " must be a number or an expression");
      }
    }
  }
  if (doc.contains("span")) {
    const json& sp = doc.at("span");
    if (!sp.is_array() || sp.size() != 2 || !sp[0].is_number() || !sp[1].is_number())
      throw IntegrationError("span must be [t0, t1]");
    init.span = std::make_pair(sp[0].get<double>(), sp[1].get<double>());
  }
  if (doc.contains("hold_controls"))
    for (const auto& n : doc.at("hold_controls")) init.hold_controls.push_back(n.get<std::string>());
  return init;
}

InitialData load_initial_data_file(const std::string& path, const ControlProblem& p,
                                   const std::map<std::string, double>& extra_parameters)
{
  std::ifstream in(path);
  if (!in) throw IntegrationError("cannot open initial-data file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return load_initial_data(ss.str(), p, extra_parameters);
}

}  // namespace presym
