#include "presym/engine.hpp"

#include <algorithm>
#include <deque>

#include "presym/parse.hpp"

namespace presym {

std::string_view to_string(OriginKind k)
{
  switch (k) {
    case OriginKind::Primary: return "primary";
    case OriginKind::Stabilization: return "stabilization";
    case OriginKind::FreeTimeH: return "free-time-H";
    case OriginKind::UserSplit: return "user-split";
  }
  return "unknown";
}

std::string_view to_string(BranchStatus s)
{
  switch (s) {
    case BranchStatus::Active: return "active";
    case BranchStatus::Stabilized: return "stabilized";
    case BranchStatus::Empty: return "empty";
    case BranchStatus::Split: return "split";
  }
  return "unknown";
}

std::vector<Expr> Branch::inequations() const
{
  std::vector<Expr> out;
  for (const auto& f : solved.nonzero()) out.emplace_back(f);
  return out;
}

std::map<Var, Expr> Branch::solved_controls() const
{
  std::map<Var, Expr> out;
  for (const auto& [v, val] : solved.bindings())
    if (v.kind == VarKind::Control) out.emplace(v, val);
  return out;
}

std::vector<Expr> Branch::unsolved() const
{
  std::vector<Expr> out;
  for (const auto& c : equations)
    if (!c.defines) out.push_back(c.expr);
  return out;
}

std::vector<Expr> Branch::equation_exprs() const
{
  std::vector<Expr> out;
  for (const auto& c : equations) out.push_back(c.expr);
  return out;
}

std::vector<const Branch*> ConstraintTree::leaves() const
{
  std::vector<const Branch*> out;
  for (const auto& b : branches)
    if (b.status == BranchStatus::Stabilized) out.push_back(&b);
  return out;
}

namespace {

enum class Inserted { Implied, Added, Empty };

void mark_empty(Branch& b, const std::string& reason)
{
  b.status = BranchStatus::Empty;
  b.empty_reason = reason;
  b.log.push_back("empty: " + reason);
}

Expr binding_equation(const Var& v, const Expr& value)
{
  return constraint_form(Expr(v) - value);
}

Constraint* find_constraint(Branch& b, int id)
{
  for (auto& c : b.equations)
    if (c.id == id) return &c;
  return nullptr;
}

void refresh(Branch& b)
{
  for (auto& c : b.equations)
    if (c.defines) c.expr = binding_equation(*c.defines, b.solved.bindings().at(*c.defines));
  for (auto& [cv, val] : b.solved_control_velocities) val = b.solved.reduce(val);
}

// Re-reduces every unsolved equation and solves whatever became solvable.
bool cascade(Branch& b)
{
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = 0; i < b.equations.size(); ++i) {
      Constraint& c = b.equations[i];
      if (c.defines) continue;
      Expr r = b.solved.reduce(c.expr);
      if (!r.is_polynomial()) b.solved.assume_nonzero(Expr(r.denominator()));
      const Polynomial& n = r.numerator();
      if (n.is_zero()) {
        b.log.push_back("#" + std::to_string(c.id) + " implied after substitution");
        b.equations.erase(b.equations.begin() + static_cast<long>(i));
        changed = true;
        break;
      }
      Polynomial s = b.solved.strip(n);
      if (s.is_constant()) {
        mark_empty(b, "#" + std::to_string(c.id) + " reduces to a nonzero constant");
        return false;
      }
      c.expr = Expr(constraint_form(s));
      if (auto sol = b.solved.solvable(s)) {
        if (!b.solved.bind(sol->first, sol->second)) {
          mark_empty(b, "solving #" + std::to_string(c.id) + " for " + sol->first.name + " makes an inequation vanish");
          return false;
        }
        c.defines = sol->first;
        b.log.push_back("#" + std::to_string(c.id) + " solved: " + sol->first.name + " := " + to_string(sol->second));
        changed = true;
        break;
      }
    }
  }
  refresh(b);
  return true;
}

Inserted insert(Branch& b, const Expr& e, const Origin& origin, int step, bool stabilized = false)
{
  Expr r = b.solved.reduce(e);
  if (!r.is_polynomial()) b.solved.assume_nonzero(Expr(r.denominator()));
  const Polynomial& n = r.numerator();
  if (n.is_zero()) {
    b.log.push_back("implied: " + to_string(e));
    return Inserted::Implied;
  }
  Polynomial s = b.solved.strip(n);
  if (s.is_constant()) {
    mark_empty(b, "constraint " + to_string(e) + " reduces to a nonzero constant");
    return Inserted::Empty;
  }
  auto unsolved = b.unsolved();
  if (!unsolved.empty()) {
    Decision d = reduces_to_zero(Expr(s), b.solved, unsolved);
    if (d.zero) {
      b.log.push_back("implied (" + std::string(to_string(d.method)) + "): " + to_string(Expr(s)));
      return Inserted::Implied;
    }
  }
  Constraint c;
  c.id = b.next_constraint_id++;
  c.expr = Expr(constraint_form(s));
  c.origin = origin;
  c.step_introduced = step;
  c.stabilized = stabilized;
  b.log.push_back("added #" + std::to_string(c.id) + " (" + std::string(to_string(origin.kind)) + ", step " +
                  std::to_string(step) + "): " + to_string(c.expr));
  b.equations.push_back(std::move(c));
  return cascade(b) ? Inserted::Added : Inserted::Empty;
}

bool vanishes_on(const Branch& b, const Polynomial& p)
{
  if (p.is_zero()) return true;
  auto unsolved = b.unsolved();
  if (unsolved.empty()) return b.solved.reduce(Expr(p)).is_zero();
  return reduces_to_zero(Expr(p), b.solved, unsolved).zero;
}

std::optional<std::size_t> product_equation(const Branch& b)
{
  for (std::size_t i = 0; i < b.equations.size(); ++i) {
    if (b.equations[i].defines) continue;
    if (factor_polynomial(b.equations[i].expr.numerator()).size() >= 2) return i;
  }
  return std::nullopt;
}

}  // namespace

bool add_equation(Branch& b, const Expr& e, const Origin& origin, int step)
{
  if (b.status == BranchStatus::Empty) return false;
  return insert(b, e, origin, step) != Inserted::Empty;
}

Branch primary_constraints(const HamiltonianSystem& hs, const std::vector<Expr>& pins)
{
  Branch b;
  for (const auto& pin : pins) {
    if (!b.solved.assume_nonzero(pin)) {
      mark_empty(b, "pin " + to_string(pin) + " != 0 cannot hold");
      return b;
    }
    b.log.push_back("pinned: " + to_string(pin) + " != 0");
  }
  const auto& controls = hs.problem->controls;
  for (std::size_t l = 0; l < controls.size(); ++l) {
    Origin o;
    o.kind = OriginKind::Primary;
    o.control = static_cast<int>(l);
    if (insert(b, differentiate(hs.H, controls[l]), o, 0) == Inserted::Empty) return b;
  }
  return b;
}

StabilizationOutcome stabilize_once(const HamiltonianSystem& hs, Branch& b)
{
  StabilizationOutcome out;
  const int step = ++b.passes;
  std::vector<int> pending;
  for (const auto& c : b.equations)
    if (!c.stabilized) pending.push_back(c.id);

  for (int id : pending) {
    Constraint* c = find_constraint(b, id);
    if (!c || c->stabilized) continue;
    c->stabilized = true;
    const Expr phi = c->expr;

    Expr r = b.solved.reduce(substitute_unchecked(apply_XH(hs, phi), b.solved_control_velocities));
    if (!r.is_polynomial()) b.solved.assume_nonzero(Expr(r.denominator()));
    Polynomial rest = r.numerator();

    std::vector<Var> velocities;
    for (const Var& v : rest.variables())
      if (v.kind == VarKind::ControlVelocity) velocities.push_back(v);
    for (const auto& [m, _] : rest.terms()) {
      int d = 0;
      for (const auto& [v, e] : m.factors())
        if (v.kind == VarKind::ControlVelocity) d += e;
      if (d > 1) throw EngineError("nonlinear control-velocity dependence in X_H(" + to_string(phi) + ")");
    }

    bool solved_velocity = false;
    for (const Var& cv : velocities) {
      Polynomial coef = rest.coefficient(cv, 1);
      Polynomial term = coef * Polynomial::variable(cv);
      if (vanishes_on(b, coef)) {
        rest -= term;
        b.log.push_back("dropped " + cv.name + " term of X_H(#" + std::to_string(id) + "): coefficient " +
                        to_string(coef) + " vanishes");
        continue;
      }
      if (b.solved.known_nonzero(coef)) {
        Expr value = Expr::fraction(-(rest - term), coef);
        std::map<Var, Expr> one{{cv, value}};
        for (auto& [w, val] : b.solved_control_velocities) val = substitute_unchecked(val, one);
        b.solved_control_velocities[cv] = value;
        b.log.push_back("X_H(#" + std::to_string(id) + ") solved " + cv.name + " := " + to_string(value));
        ++out.solved_velocities;
        solved_velocity = true;
        break;
      }
      c->stabilized = false;
      out.split_on = Expr(coef);
      b.log.push_back("coefficient " + to_string(coef) + " of " + cv.name + " in X_H(#" + std::to_string(id) +
                      ") is not known invertible");
      return out;
    }
    if (solved_velocity) continue;

    std::size_t bound_before = b.solved.bindings().size();
    Origin o;
    o.kind = OriginKind::Stabilization;
    o.parent = id;
    Inserted res = insert(b, Expr(rest), o, step);
    if (res == Inserted::Empty) return out;
    if (res == Inserted::Added) ++out.new_constraints;
    out.new_bindings += static_cast<int>(b.solved.bindings().size() - bound_before);
  }
  return out;
}

std::vector<Branch> split_branch(const Branch& b, std::size_t c)
{
  const Constraint target = b.equations.at(c);
  auto factors = factor_polynomial(target.expr.numerator());
  if (factors.size() < 2) return {b};

  std::vector<Branch> out;
  for (std::size_t i = 0; i < factors.size(); ++i) {
    Branch child = b;
    child.parent = b.id;
    child.children.clear();
    child.status = BranchStatus::Active;
    child.equations.erase(child.equations.begin() + static_cast<long>(c));
    child.log.push_back("split #" + std::to_string(target.id) + " on factor " + std::to_string(i + 1) + "/" +
                        std::to_string(factors.size()) + ": " + to_string(factors[i].first) + " = 0");
    bool ok = true;
    for (std::size_t j = 0; j < i && ok; ++j) {
      if (!child.solved.assume_nonzero(Expr(factors[j].first))) {
        mark_empty(child, "excluded factor " + to_string(factors[j].first) + " vanishes identically");
        ok = false;
      }
    }
    if (ok) ok = cascade(child);
    if (ok) {
      Origin o = target.origin;
      o.factor_of = target.id;
      insert(child, Expr(factors[i].first), o, target.step_introduced);
    }
    out.push_back(std::move(child));
  }
  return out;
}

namespace {

void check_inequations(Branch& b)
{
  auto unsolved = b.unsolved();
  if (unsolved.empty()) return;
  for (const auto& f : b.solved.nonzero()) {
    Decision d = reduces_to_zero(Expr(f), b.solved, unsolved);
    if (d.zero) {
      mark_empty(b, "inequation " + to_string(f) + " != 0 vanishes on the branch");
      return;
    }
  }
}

class Runner {
 public:
  Runner(const HamiltonianSystem& hs, const AlgorithmOptions& opts, ConstraintTree& tree)
      : hs_(hs), opts_(opts), tree_(tree)
  {
  }

  void run(int id)
  {
    bool full = false;
    while (true) {
      Branch& b = tree_.branches[static_cast<std::size_t>(id)];
      if (b.status == BranchStatus::Empty) return;

      if (auto idx = product_equation(b)) {
        std::vector<Branch> kids = split_branch(b, *idx);
        if (!spawn(id, std::move(kids))) return;
        return;
      }

      bool any_pending = std::any_of(b.equations.begin(), b.equations.end(), [](const Constraint& c) { return !c.stabilized; });
      if (!any_pending) {
        for (auto& c : b.equations) c.stabilized = false;
        full = true;
      }
      if (b.passes >= opts_.max_steps) {
        exhausted("branch " + std::to_string(id) + " reached the step budget of " + std::to_string(opts_.max_steps));
        return;
      }

      StabilizationOutcome out = stabilize_once(hs_, b);
      if (b.status == BranchStatus::Empty) return;
      if (out.split_on) {
        Branch invertible = b;
        Branch degenerate = b;
        invertible.children.clear();
        degenerate.children.clear();
        invertible.parent = degenerate.parent = id;
        invertible.log.push_back("split on " + to_string(*out.split_on) + " != 0");
        degenerate.log.push_back("split on " + to_string(*out.split_on) + " = 0");
        if (!invertible.solved.assume_nonzero(*out.split_on)) {
          mark_empty(invertible, "coefficient " + to_string(*out.split_on) + " vanishes identically");
        } else {
          cascade(invertible);
        }
        Origin o;
        o.kind = OriginKind::Stabilization;
        insert(degenerate, *out.split_on, o, b.passes);
        spawn(id, {std::move(invertible), std::move(degenerate)});
        return;
      }
      if (out.progress()) {
        if (out.new_constraints + out.new_bindings > 0) b.depth = b.passes;
        full = false;
      } else if (full) {
        b.status = BranchStatus::Stabilized;
        b.log.push_back("stabilized after " + std::to_string(b.passes) + " passes");
        return;
      }
    }
  }

  std::deque<int> queue;

 private:
  bool spawn(int parent, std::vector<Branch> kids)
  {
    if (tree_.branches.size() + kids.size() > static_cast<std::size_t>(opts_.max_branches)) {
      exhausted("splitting branch " + std::to_string(parent) + " would exceed the branch budget of " +
                std::to_string(opts_.max_branches));
      return false;
    }
    for (auto& k : kids) {
      k.id = static_cast<int>(tree_.branches.size());
      tree_.branches[static_cast<std::size_t>(parent)].children.push_back(k.id);
      queue.push_back(k.id);
      tree_.branches.push_back(std::move(k));
    }
    tree_.branches[static_cast<std::size_t>(parent)].status = BranchStatus::Split;
    return true;
  }

  void exhausted(const std::string& why)
  {
    tree_.budget_exhausted = true;
    tree_.diagnostics.push_back("budget-exhausted: " + why);
  }

  const HamiltonianSystem& hs_;
  const AlgorithmOptions& opts_;
  ConstraintTree& tree_;
};

}  // namespace

ConstraintTree run_algorithm(const HamiltonianSystem& hs, const AlgorithmOptions& opts)
{
  ConstraintTree tree;
  tree.p0 = hs.p0();
  Branch root = primary_constraints(hs, opts.pins);
  root.id = 0;
  tree.branches.push_back(std::move(root));
  tree.roots.push_back(0);

  Runner runner(hs, opts, tree);
  runner.queue.push_back(0);
  while (!runner.queue.empty()) {
    int id = runner.queue.front();
    runner.queue.pop_front();
    runner.run(id);
  }

  for (auto& b : tree.branches) {
    if (b.status != BranchStatus::Stabilized) continue;
    check_inequations(b);
    if (b.status != BranchStatus::Stabilized) continue;
    if (opts.free_time && !add_free_time_constraint(hs, b))
      tree.diagnostics.push_back("branch " + std::to_string(b.id) + ": X_H(H) does not vanish after adding H = 0");
    if (b.status != BranchStatus::Stabilized) continue;
    if (hs.p0() == 0) delete_zero_fiber(b, hs);
  }
  return tree;
}

void delete_zero_fiber(Branch& b, const HamiltonianSystem& hs)
{
  if (hs.p0() != 0) throw EngineError("delete_zero_fiber applies to p0 = 0 only");
  if (b.status == BranchStatus::Empty) return;
  auto unsolved = b.unsolved();
  for (const Var& p : hs.chart.momenta) {
    Expr e(p);
    bool zero = unsolved.empty() ? b.solved.reduce(e).is_zero() : reduces_to_zero(e, b.solved, unsolved).zero;
    if (!zero) {
      b.nonzero_covector = true;
      b.log.push_back("zero fiber removed: lambda != 0");
      return;
    }
  }
  mark_empty(b, "zero fiber: every momentum vanishes");
}

bool add_free_time_constraint(const HamiltonianSystem& hs, Branch& b)
{
  if (b.status == BranchStatus::Empty) return true;
  Polynomial h0 = b.solved.reduce(hs.H).numerator();
  b.h_vanished_before = vanishes_on(b, h0);
  Origin o;
  o.kind = OriginKind::FreeTimeH;
  b.free_time_h = true;
  if (insert(b, hs.H, o, b.passes, true) == Inserted::Empty) return true;

  Expr r = b.solved.reduce(substitute_unchecked(apply_XH(hs, hs.H), b.solved_control_velocities));
  if (vanishes_on(b, r.numerator())) return true;
  b.log.push_back("diagnostic: X_H(H) = " + to_string(r) + " does not vanish");
  return false;
}

}  // namespace presym
