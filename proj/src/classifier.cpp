#include "presym/classifier.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "presym/parse.hpp"
#include "presym/symbolic_matrix.hpp"

namespace presym {

std::string_view to_string(Tri t)
{
  switch (t) {
    case Tri::Yes: return "yes";
    case Tri::No: return "no";
    case Tri::Undetermined: return "undetermined";
  }
  return "?";
}

std::string_view to_string(Strictness s)
{
  switch (s) {
    case Strictness::AllAbnormalStrict: return "all-abnormal-strict";
    case Strictness::AllNormalStrict: return "all-normal-strict";
    case Strictness::NoStrictAbnormal: return "no-strict-abnormal";
    case Strictness::LocallyAbnormal: return "locally-abnormal";
    case Strictness::Coincide: return "coincide";
    case Strictness::NoExtremals: return "no-extremals";
    case Strictness::Undetermined: return "undetermined";
  }
  return "?";
}

std::string_view to_string(ProjectionMethod m)
{
  switch (m) {
    case ProjectionMethod::ExactElimination: return "exact-elimination";
    case ProjectionMethod::RankCriterion: return "rank-criterion";
    case ProjectionMethod::Sampling: return "sampling";
  }
  return "?";
}

std::string_view to_string(ProjectionTarget t) { return t == ProjectionTarget::M ? "M" : "MxU"; }

namespace {

Tri tri_not(Tri a) { return a == Tri::Yes ? Tri::No : a == Tri::No ? Tri::Yes : Tri::Undetermined; }

Tri tri_and(Tri a, Tri b)
{
  if (a == Tri::No || b == Tri::No) return Tri::No;
  if (a == Tri::Yes && b == Tri::Yes) return Tri::Yes;
  return Tri::Undetermined;
}

Tri from_optional(std::optional<bool> b) { return b ? (*b ? Tri::Yes : Tri::No) : Tri::Undetermined; }

bool mentions_any(const Polynomial& p, const std::set<Var>& vars)
{
  for (const Var& v : p.variables())
    if (vars.count(v)) return true;
  return false;
}

/// Coefficients of p as a polynomial in the listed variables.
std::vector<Polynomial> coefficients_in(const Polynomial& p, const std::set<Var>& vars)
{
  std::map<std::vector<std::pair<Var, int>>, Polynomial> groups;
  for (const auto& [m, c] : p.terms()) {
    std::vector<std::pair<Var, int>> key;
    Monomial rest;
    for (const auto& [v, e] : m.factors()) {
      if (vars.count(v))
        key.emplace_back(v, e);
      else
        rest = rest * Monomial(v, e);
    }
    groups[key] += Polynomial::term(rest, c);
  }
  std::vector<Polynomial> out;
  for (auto& [k, c] : groups) out.push_back(c);
  return out;
}

Polynomial equation_of(const Var& v, const Expr& value) { return (Expr(v) - value).numerator(); }

}  // namespace

ProjectionTarget projection_target(const ControlProblem& p)
{
  auto aff = affine_decomposition(p);
  if (!aff || p.k() == 0) return ProjectionTarget::M;
  ExprMatrix y(static_cast<Eigen::Index>(p.m()), static_cast<Eigen::Index>(p.k()));
  for (std::size_t l = 0; l < p.k(); ++l)
    for (std::size_t i = 0; i < p.m(); ++i) y(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(l)) = aff->inputs[l][i];
  return exact_rank(y) == static_cast<int>(p.k()) ? ProjectionTarget::MxU : ProjectionTarget::M;
}

ProjectionDescription project_leaf(const ControlProblem& p, const Branch& leaf, int p0, ProjectionTarget target)
{
  ProjectionDescription out;
  out.branch = leaf.id;
  out.p0 = p0;
  std::set<Var> elim(p.momenta.begin(), p.momenta.end());
  if (target == ProjectionTarget::M) elim.insert(p.controls.begin(), p.controls.end());
  out.eliminated.assign(elim.begin(), elim.end());

  auto mark_empty = [&](const std::string& why) {
    out.equations = {Expr(1)};
    out.inequations.clear();
    out.exact = true;
    out.notes.push_back(why);
    return out;
  };

  std::set<Var> determined;
  std::vector<Polynomial> eqs;
  std::vector<Expr> bound_momenta;
  for (const auto& [v, val] : leaf.solved.bindings()) {
    if (elim.count(v)) {
      determined.insert(v);
      if (v.kind == VarKind::Momentum) bound_momenta.push_back(val);
    } else {
      eqs.push_back(equation_of(v, val));
    }
  }
  for (const auto& e : leaf.unsolved()) eqs.push_back(e.numerator());
  std::vector<Polynomial> ineqs;
  for (const auto& f : leaf.solved.nonzero()) ineqs.push_back(f);

  SolvedSystem kept_nonzero;
  for (const auto& f : ineqs)
    if (!mentions_any(f, elim)) kept_nonzero.assume_nonzero(Expr(f));

  // Triangular elimination of the remaining eliminated variables.
  std::map<Var, Expr> elim_bind;
  bool progress = true;
  while (progress) {
    progress = false;
    for (std::size_t i = 0; i < eqs.size() && !progress; ++i) {
      const Polynomial& q = eqs[i];
      for (const Var& v : q.variables()) {
        if (!elim.count(v) || q.degree(v) != 1) continue;
        Polynomial c = q.coefficient(v, 1);
        if (mentions_any(c, elim) || !kept_nonzero.known_nonzero(c)) continue;
        Expr value = -Expr::fraction(q - c * Polynomial::variable(v), c);
        std::map<Var, Expr> one{{v, value}};
        for (auto& [w, val] : elim_bind) val = substitute_unchecked(val, one);
        for (auto& m : bound_momenta) m = substitute_unchecked(m, one);
        elim_bind[v] = value;
        determined.insert(v);
        std::vector<Polynomial> next;
        for (std::size_t j = 0; j < eqs.size(); ++j) {
          if (j == i) continue;
          Polynomial r = substitute_unchecked(Expr(eqs[j]), one).numerator();
          if (r.is_zero()) continue;
          if (r.is_constant()) return mark_empty("equations contradict after eliminating " + v.name);
          next.push_back(r);
        }
        for (auto& f : ineqs) {
          f = substitute_unchecked(Expr(f), one).numerator();
          if (f.is_zero()) return mark_empty("inequation vanishes after eliminating " + v.name);
        }
        eqs = std::move(next);
        progress = true;
        break;
      }
    }
  }

  std::vector<Polynomial> residual;
  for (const auto& q : eqs) {
    if (mentions_any(q, elim))
      residual.push_back(q);
    else
      out.equations.push_back(Expr(constraint_form(q)));
  }
  std::vector<Polynomial> elim_ineqs;
  for (const auto& f : ineqs) {
    if (f.is_constant()) continue;
    if (mentions_any(f, elim))
      elim_ineqs.push_back(f);
    else
      out.inequations.push_back(Expr(constraint_form(f)));
  }

  std::set<Var> in_residual;
  for (const auto& q : residual)
    for (const Var& v : q.variables())
      if (elim.count(v)) in_residual.insert(v);

  // Inequations in eliminated variables hold somewhere on the fiber when each
  // has a coefficient that cannot vanish and their variables are unconstrained.
  bool ineqs_ok = true;
  for (const auto& f : elim_ineqs) {
    bool ok = false;
    for (const auto& c : coefficients_in(f, elim))
      if (!mentions_any(c, elim) && kept_nonzero.known_nonzero(c)) ok = true;
    for (const Var& v : f.variables())
      if (in_residual.count(v)) ok = false;
    ineqs_ok = ineqs_ok && ok;
  }

  bool covector_ok = p0 != 0;
  if (!covector_ok) {
    for (const Var& m : p.momenta)
      if (!determined.count(m) && !in_residual.count(m)) covector_ok = true;
    for (const auto& m : bound_momenta)
      if (!m.contains_kind(VarKind::Momentum) && m.is_polynomial() && kept_nonzero.known_nonzero(m.numerator()))
        covector_ok = true;
  }

  auto inexact = [&](const std::string& why) {
    out.exact = false;
    out.method = ProjectionMethod::Sampling;
    out.notes.push_back(why + "; equations describe an outer approximation");
    return out;
  };

  if (!ineqs_ok) return inexact("inequations constrain the eliminated variables");

  if (residual.empty()) {
    if (!covector_ok) return inexact("nonzero covector condition not eliminated");
    out.exact = true;
    out.method = ProjectionMethod::ExactElimination;
    return out;
  }

  // Residual equations affine in the eliminated variables: fiber is the
  // solution set of A e = b over each point.
  std::vector<Var> cols(in_residual.begin(), in_residual.end());
  bool affine = true;
  for (const auto& q : residual)
    for (const auto& [m, c] : q.terms()) {
      int d = 0;
      for (const auto& [v, e] : m.factors())
        if (elim.count(v)) d += e;
      if (d > 1) affine = false;
    }
  if (!affine) return inexact("residual equations are nonlinear in the eliminated variables");

  const auto r = static_cast<Eigen::Index>(residual.size());
  const auto n = static_cast<Eigen::Index>(cols.size());
  ExprMatrix a(r, n);
  bool homogeneous = true;
  for (Eigen::Index i = 0; i < r; ++i) {
    Polynomial rest = residual[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < n; ++j) {
      Polynomial c = residual[static_cast<std::size_t>(i)].coefficient(cols[static_cast<std::size_t>(j)], 1);
      a(i, j) = Expr(c);
      rest -= c * Polynomial::variable(cols[static_cast<std::size_t>(j)]);
    }
    if (!rest.is_zero()) homogeneous = false;
  }
  bool only_momenta = std::all_of(cols.begin(), cols.end(), [](const Var& v) { return v.kind == VarKind::Momentum; });

  std::vector<Expr> kept_eqs = out.equations;
  if (homogeneous) {
    if (!covector_ok) {
      if (!only_momenta) return inexact("kernel may consist of control directions only");
      if (n <= r) {
        ExprMatrix at = a;
        for (const auto& minor : maximal_minors(at)) {
          if (minor.is_zero()) continue;
          if (minor.is_constant()) return mark_empty("momentum coefficient matrix has full rank everywhere");
          out.equations.push_back(constraint_form(Expr(minor.numerator())));
        }
        out.notes.push_back("rank-deficiency minors of the momentum coefficient matrix");
      }
    }
    out.exact = true;
    out.method = ProjectionMethod::RankCriterion;
    return out;
  }

  if (r > n) return inexact("more residual equations than eliminated unknowns");
  ExprMatrix at = a.transpose();
  std::vector<Expr> degeneracy = kept_eqs;
  bool full_rank_everywhere = false;
  for (const auto& minor : maximal_minors(at)) {
    if (minor.is_zero()) continue;
    if (minor.is_constant()) full_rank_everywhere = true;
    degeneracy.push_back(Expr(minor.numerator()));
  }
  if (!full_rank_everywhere && provably_empty(degeneracy, out.inequations) != true)
    return inexact("affine fiber may be inconsistent where the coefficient rank drops");
  if (!covector_ok && !(only_momenta && n > r)) return inexact("nonzero covector condition not eliminated");
  out.exact = true;
  out.method = ProjectionMethod::RankCriterion;
  out.notes.push_back("coefficient matrix of the eliminated variables has full row rank on the image");
  return out;
}

namespace {

struct Image {
  const ProjectionDescription* d;
  Tri empty;
};

Tri image_empty(const ProjectionDescription& d)
{
  for (const auto& e : d.equations)
    if (e.is_constant() && !e.is_zero()) return Tri::Yes;
  Tri t = from_optional(provably_empty(d.equations, d.inequations));
  if (t == Tri::No && !d.exact) return Tri::Undetermined;
  return t;
}

Tri union_empty(const std::vector<Image>& imgs, bool exhausted)
{
  if (exhausted) return Tri::Undetermined;
  Tri all = Tri::Yes;
  for (const auto& i : imgs) {
    if (i.empty == Tri::No) return Tri::No;
    if (i.empty == Tri::Undetermined) all = Tri::Undetermined;
  }
  return all;
}

template <typename T>
std::vector<T> concat(std::vector<T> a, const std::vector<T>& b)
{
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

class Comparator {
 public:
  ProjectionMethod worst = ProjectionMethod::ExactElimination;

  Tri intersection_empty(const ProjectionDescription& a, const ProjectionDescription& b)
  {
    Tri t = from_optional(provably_empty(concat(a.equations, b.equations), concat(a.inequations, b.inequations)));
    if (t == Tri::No && !(a.exact && b.exact)) return Tri::Undetermined;
    return t;
  }

  /// a is a subset of b. Outer approximations certify only one direction:
  /// containment needs b exact, non-containment needs a exact.
  Tri contained(const ProjectionDescription& a, const ProjectionDescription& b)
  {
    Tri result = b.exact ? Tri::Yes : Tri::Undetermined;
    Tri missing = a.exact ? Tri::No : Tri::Undetermined;
    for (const auto& e : b.equations) {
      Decision d = reduces_to_zero(e, a.equations, a.inequations);
      if (!d.zero) return missing;
      if (d.method == DecisionMethod::Sampling) {
        worst = ProjectionMethod::Sampling;
        result = Tri::Undetermined;
      } else if (d.method == DecisionMethod::MomentumLinear && worst == ProjectionMethod::ExactElimination) {
        worst = ProjectionMethod::RankCriterion;
      }
    }
    for (const auto& g : b.inequations) {
      auto eqs = a.equations;
      eqs.push_back(g);
      Tri t = from_optional(provably_empty(eqs, a.inequations));
      if (t == Tri::No) return missing;
      if (t == Tri::Undetermined) result = Tri::Undetermined;
    }
    return result;
  }

  /// Union of `as` is a subset of the union of `bs`, decided leaf by leaf.
  Tri union_contained(const std::vector<Image>& as, const std::vector<Image>& bs)
  {
    Tri all = Tri::Yes;
    for (const auto& a : as) {
      if (a.empty == Tri::Yes) continue;
      Tri found = Tri::No;
      bool disjoint_from_all = a.empty == Tri::No;
      for (const auto& b : bs) {
        if (b.empty == Tri::Yes) continue;
        Tri c = contained(*a.d, *b.d);
        if (c == Tri::Yes) {
          found = Tri::Yes;
          break;
        }
        if (intersection_empty(*a.d, *b.d) != Tri::Yes) disjoint_from_all = false;
        if (c == Tri::Undetermined) found = Tri::Undetermined;
      }
      if (found == Tri::Yes) continue;
      bool single = std::count_if(bs.begin(), bs.end(), [](const Image& b) { return b.empty != Tri::Yes; }) <= 1;
      if (disjoint_from_all || (single && found == Tri::No && a.empty == Tri::No)) return Tri::No;
      // An open subset of affine space is irreducible, so it is not covered by
      // finitely many sets each cut out by a nonzero equation.
      bool open_a = a.d->exact && a.d->equations.empty() && a.empty == Tri::No;
      bool all_proper = std::all_of(bs.begin(), bs.end(), [](const Image& b) {
        return b.empty == Tri::Yes || std::any_of(b.d->equations.begin(), b.d->equations.end(),
                                                  [](const Expr& e) { return !e.is_zero(); });
      });
      if (open_a && all_proper) return Tri::No;
      all = Tri::Undetermined;
    }
    return all;
  }
};

}  // namespace

Verdict classify(const ControlProblem& p, const ClassifyOptions& opts)
{
  Verdict v;
  AlgorithmOptions ab = opts.engine;
  ab.pins = concat(ab.pins, opts.abnormal_pins);
  ab.free_time = p.time.free;
  AlgorithmOptions nm = opts.engine;
  nm.free_time = p.time.free;

  HamiltonianSystem h0 = build_hamiltonian(p, 0);
  HamiltonianSystem h1 = build_hamiltonian(p, -1);
  v.abnormal_tree = run_algorithm(h0, ab);
  v.normal_tree = run_algorithm(h1, nm);
  v.superset_only = !p.time.free;
  v.target = projection_target(p);
  for (const auto* tree : {&v.abnormal_tree, &v.normal_tree})
    for (const auto& d : tree->diagnostics) v.diagnostics.push_back((tree->p0 == 0 ? "p0=0: " : "p0=-1: ") + d);

  for (const auto* leaf : v.abnormal_tree.leaves()) v.projections.push_back(project_leaf(p, *leaf, 0, v.target));
  std::size_t n_abnormal = v.projections.size();
  for (const auto* leaf : v.normal_tree.leaves()) v.projections.push_back(project_leaf(p, *leaf, -1, v.target));

  Comparator cmp;
  std::vector<Image> ab_img, nm_img;
  for (std::size_t i = 0; i < v.projections.size(); ++i) {
    const auto& d = v.projections[i];
    if (d.method == ProjectionMethod::Sampling) cmp.worst = ProjectionMethod::Sampling;
    else if (d.method == ProjectionMethod::RankCriterion && cmp.worst == ProjectionMethod::ExactElimination)
      cmp.worst = ProjectionMethod::RankCriterion;
    (i < n_abnormal ? ab_img : nm_img).push_back({&d, image_empty(d)});
  }

  Tri e0 = union_empty(ab_img, v.abnormal_tree.budget_exhausted);
  Tri e1 = union_empty(nm_img, v.normal_tree.budget_exhausted);
  v.abnormal_exists = tri_not(e0);
  v.normal_exists = tri_not(e1);

  Tri ep = Tri::Yes;
  if (e0 == Tri::Yes || e1 == Tri::Yes) {
    ep = Tri::Yes;
  } else if (v.abnormal_tree.budget_exhausted || v.normal_tree.budget_exhausted) {
    ep = Tri::Undetermined;
  } else {
    for (const auto& a : ab_img)
      for (const auto& b : nm_img) {
        if (a.empty == Tri::Yes || b.empty == Tri::Yes) continue;
        Tri t = cmp.intersection_empty(*a.d, *b.d);
        if (t == Tri::No) ep = Tri::No;
        else if (t == Tri::Undetermined && ep == Tri::Yes) ep = Tri::Undetermined;
      }
  }

  Tri sub01 = Tri::Undetermined, sub10 = Tri::Undetermined;
  if (ep == Tri::No) {
    sub01 = cmp.union_contained(ab_img, nm_img);
    sub10 = cmp.union_contained(nm_img, ab_img);
  }

  ProjectionCase& c = v.cases;
  c.abnormal_strict = tri_and(ep, tri_not(e0));
  c.normal_strict = tri_and(ep, tri_not(e1));
  c.no_strict_abnormal = tri_and(tri_not(ep), sub01);
  c.locally_abnormal = tri_and(tri_not(ep), tri_not(sub01));
  c.coincide = tri_and(tri_not(ep), tri_and(sub01, sub10));
  v.method = cmp.worst;

  if (e0 == Tri::Yes && e1 == Tri::Yes)
    v.strictness = Strictness::NoExtremals;
  else if (c.abnormal_strict == Tri::Yes)
    v.strictness = Strictness::AllAbnormalStrict;
  else if (c.normal_strict == Tri::Yes)
    v.strictness = Strictness::AllNormalStrict;
  else if (c.coincide == Tri::Yes)
    v.strictness = Strictness::Coincide;
  else if (c.no_strict_abnormal == Tri::Yes)
    v.strictness = Strictness::NoStrictAbnormal;
  else if (c.locally_abnormal == Tri::Yes)
    v.strictness = Strictness::LocallyAbnormal;
  if (v.abnormal_exists == Tri::Undetermined || v.normal_exists == Tri::Undetermined)
    v.strictness = Strictness::Undetermined;

  if (p.time.free) {
    FreeTimeNotes notes;
    bool exhausted = v.abnormal_tree.budget_exhausted;
    auto leaves = v.abnormal_tree.leaves();
    notes.only_zero_covectors = !exhausted && leaves.empty();
    if (notes.only_zero_covectors) {
      notes.details.push_back("every abnormal leaf carries only zero covectors: no abnormal extremals");
    } else if (!exhausted) {
      bool all = true;
      for (const auto* leaf : leaves) all = all && leaf->h_vanished_before.value_or(false);
      notes.hx_vanishes = all;
      if (all)
        notes.details.push_back(
            "H_X vanishes on every abnormal leaf: abnormal extremals are strict, no normal extremals unless F vanishes");
    }
    v.free_time_notes = notes;
  }
  return v;
}

ClosedFormCurve load_curve(std::string_view json_text, const ControlProblem& p,
                           const std::map<std::string, Rational>& impose)
{
  using nlohmann::json;
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw CurveError(std::string("malformed curve file: ") + e.what());
  }
  if (!doc.is_object()) throw CurveError("curve file must be a JSON object");

  ClosedFormCurve c;
  VarTable table;
  std::string tname = doc.value("time", std::string("t"));
  c.time = parameter(tname);
  try {
    table.add(c.time);
    for (const auto& v : p.parameters) table.add(v);
    if (doc.contains("parameters"))
      for (const auto& n : doc.at("parameters")) {
        Var v = parameter(n.get<std::string>());
        if (!table.contains(v.name)) table.add(v);
      }
  } catch (const std::exception& e) {
    throw CurveError(std::string("curve symbols: ") + e.what());
  }
  for (const auto& v : table.all())
    if (v != c.time) c.parameters.push_back(v);

  std::map<Var, Expr> fixed;
  for (const auto& [name, value] : impose) {
    auto v = table.find(name);
    if (!v || *v == c.time) throw CurveError("cannot impose unknown parameter '" + name + "'");
    fixed[*v] = Expr(value);
  }
  auto parse = [&](const std::string& text, const std::string& what) {
    try {
      return substitute_unchecked(parse_expr(text, table), fixed);
    } catch (const std::exception& e) {
      throw CurveError(what + ": " + e.what());
    }
  };

  auto read_map = [&](const char* key, const std::vector<Var>& vars, std::map<Var, Expr>& out) {
    if (!doc.contains(key) || !doc.at(key).is_object()) throw CurveError(std::string("missing object '") + key + "'");
    const json& m = doc.at(key);
    for (const auto& v : vars) {
      if (!m.contains(v.name)) throw CurveError(std::string(key) + " lacks component '" + v.name + "'");
      out[v] = parse(m.at(v.name).get<std::string>(), std::string(key) + "." + v.name);
    }
  };
  read_map("states", p.states, c.states);
  read_map("controls", p.controls, c.controls);
  if (doc.contains("assume_nonzero"))
    for (const auto& a : doc.at("assume_nonzero")) {
      Expr e = parse(a.get<std::string>(), "assume_nonzero");
      if (e.is_zero()) throw CurveError("assumption '" + a.get<std::string>() + " != 0' fails under the imposed values");
      if (!e.is_constant()) c.assume_nonzero.push_back(e);
    }
  return c;
}

ClosedFormCurve load_curve_file(const std::string& path, const ControlProblem& p,
                                const std::map<std::string, Rational>& impose)
{
  std::ifstream in(path);
  if (!in) throw CurveError("cannot open curve file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return load_curve(ss.str(), p, impose);
}

namespace {

LiftResult lift_on_leaf(const ClosedFormCurve& curve, const HamiltonianSystem& hs, const Branch& leaf)
{
  const ControlProblem& p = *hs.problem;
  LiftResult res;
  res.leaf = leaf.id;
  std::map<Var, Expr> on_curve = curve.states;
  on_curve.insert(curve.controls.begin(), curve.controls.end());
  auto along = [&](const Expr& e) { return substitute_unchecked(e, on_curve); };

  std::vector<Expr> mdot;
  for (const auto& r : hs.momentum_rhs) mdot.push_back(along(r));
  auto ddt = [&](const Expr& r) {
    Expr d = differentiate(r, curve.time);
    for (std::size_t j = 0; j < p.m(); ++j)
      if (r.contains(p.momenta[j])) d += differentiate(r, p.momenta[j]) * mdot[j];
    return d;
  };

  SolvedSystem sys;
  for (const auto& a : curve.assume_nonzero) sys.assume_nonzero(a);

  struct Relation {
    Expr expr;
    std::string label;
    bool differentiated = false;
  };
  std::vector<Relation> pending;
  for (const auto& [v, val] : leaf.solved.bindings())
    pending.push_back({along(Expr(v) - val), "binding of " + v.name});
  for (const auto& e : leaf.unsolved()) pending.push_back({along(e), "equation " + to_string(e)});
  for (std::size_t l = 0; l < p.k(); ++l) {
    auto it = leaf.solved_control_velocities.find(p.control_velocities[l]);
    if (it == leaf.solved_control_velocities.end()) continue;
    Expr udot = differentiate(curve.controls.at(p.controls[l]), curve.time);
    pending.push_back({udot - along(it->second), "velocity of " + p.controls[l].name});
  }

  std::optional<std::string> obstruction;
  const int max_rounds = 4 * static_cast<int>(p.m()) + 8;
  for (int round = 0; round < max_rounds; ++round) {
    bool progress = false;
    std::vector<Relation> next;
    for (auto& rel : pending) {
      Expr red = sys.reduce(rel.expr);
      if (red.is_zero()) continue;
      Polynomial num = red.numerator();
      if (!red.contains_kind(VarKind::Momentum)) {
        bool nonzero = true;
        std::string unknown;
        for (const auto& [f, mult] : factor_polynomial(num)) {
          if (f.contains(curve.time) || sys.known_nonzero(f)) continue;
          nonzero = false;
          unknown = to_string(f);
        }
        if (nonzero) {
          res.exists = Tri::No;
          res.contradiction = red;
          res.reason = rel.label + " forces " + to_string(red) + " = 0";
          return res;
        }
        obstruction = rel.label + " holds only where " + unknown + " = 0";
        continue;
      }
      bool solved = false;
      for (const Var& m : p.momenta) {
        if (num.degree(m) != 1) continue;
        Polynomial c = num.coefficient(m, 1);
        if (Expr(c).contains_kind(VarKind::Momentum)) continue;
        for (const auto& [f, mult] : factor_polynomial(c))
          if (f.contains(curve.time)) sys.assume_nonzero(Expr(f));
        if (!sys.known_nonzero(c)) continue;
        Expr value = -Expr::fraction(num - c * Polynomial::variable(m), c);
        if (!sys.bind(m, value)) {
          res.exists = Tri::No;
          res.reason = "solving " + rel.label + " for " + m.name + " annihilates an assumption";
          return res;
        }
        solved = true;
        break;
      }
      if (!rel.differentiated) {
        next.push_back({ddt(red), "derivative of " + rel.label});
        rel.differentiated = true;
        progress = true;
      }
      if (solved) {
        progress = true;
      } else {
        rel.expr = red;
        next.push_back(rel);
      }
    }
    pending = std::move(next);
    if (pending.empty()) {
      if (obstruction) {
        res.reason = *obstruction;
        return res;
      }
      res.exists = Tri::Yes;
      for (const auto& [v, val] : sys.bindings())
        if (v.kind == VarKind::Momentum) res.witness[v] = val;
      std::string free;
      for (const Var& m : p.momenta)
        if (!sys.is_bound(m)) free += (free.empty() ? "" : ", ") + m.name;
      res.reason = free.empty() ? "all momenta determined" : "free momenta follow Hamilton's equations: " + free;
      return res;
    }
    if (!progress) break;
  }
  res.reason = obstruction ? *obstruction : "relations between momenta could not be solved";
  return res;
}

}  // namespace

Tri curve_in_image(const ClosedFormCurve& curve, const ProjectionDescription& d)
{
  std::map<Var, Expr> on_curve = curve.states;
  on_curve.insert(curve.controls.begin(), curve.controls.end());
  SolvedSystem assumed;
  for (const auto& a : curve.assume_nonzero) assumed.assume_nonzero(a);
  for (const auto& e : d.equations) {
    Expr r = substitute_unchecked(e, on_curve);
    if (!r.is_zero()) return Tri::No;
  }
  for (const auto& g : d.inequations) {
    Expr r = substitute_unchecked(g, on_curve);
    if (r.is_zero()) return Tri::No;
    if (r.contains(curve.time)) continue;
    if (!assumed.known_nonzero(r.numerator())) return Tri::Undetermined;
  }
  return d.exact ? Tri::Yes : Tri::Undetermined;
}

LiftResult check_normal_lift_along(const ClosedFormCurve& curve, const ControlProblem& p, const AlgorithmOptions& opts)
{
  std::map<Var, Expr> on_curve = curve.states;
  on_curve.insert(curve.controls.begin(), curve.controls.end());
  for (std::size_t i = 0; i < p.m(); ++i) {
    Expr r = differentiate(curve.states.at(p.states[i]), curve.time) - substitute_unchecked(p.vector_field[i], on_curve);
    if (!r.is_zero())
      throw CurveError("not an integral curve: d" + p.states[i].name + "/dt differs from the vector field by " +
                       to_string(r));
  }

  HamiltonianSystem hs = build_hamiltonian(p, -1);
  AlgorithmOptions o = opts;
  o.free_time = p.time.free;
  ConstraintTree tree = run_algorithm(hs, o);
  LiftResult out;
  if (tree.budget_exhausted) {
    out.reason = "normal constraint tree exceeded its budget";
    return out;
  }
  auto leaves = tree.leaves();
  if (leaves.empty()) {
    out.exists = Tri::No;
    out.reason = "the normal final submanifold is empty";
    return out;
  }
  bool all_impossible = true;
  std::optional<LiftResult> first;
  for (const auto* leaf : leaves) {
    LiftResult r = lift_on_leaf(curve, hs, *leaf);
    if (r.exists == Tri::Yes) return r;
    if (r.exists != Tri::No) all_impossible = false;
    if (!first || (first->exists == Tri::No && r.exists == Tri::Undetermined)) first = r;
  }
  out = *first;
  if (!all_impossible) out.exists = Tri::Undetermined;
  return out;
}

}  // namespace presym
