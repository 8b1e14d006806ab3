#include "presym/ideal.hpp"

#include <algorithm>
#include <random>
#include <tuple>

#include "presym/symbolic_matrix.hpp"

namespace presym {

std::string_view to_string(DecisionMethod m)
{
  switch (m) {
    case DecisionMethod::Triangular: return "triangular";
    case DecisionMethod::MomentumLinear: return "momentum-linear";
    case DecisionMethod::Sampling: return "sampling";
  }
  return "unknown";
}

namespace {

constexpr int kSamples = 64;
constexpr int kMaxAttemptsPerSample = 20;
constexpr std::uint64_t kSamplingSeed = 0x5eed5eedULL;

int kind_preference(VarKind k)
{
  switch (k) {
    case VarKind::Control: return 0;
    case VarKind::Momentum: return 1;
    case VarKind::State: return 2;
    case VarKind::Parameter: return 3;
    case VarKind::ControlVelocity: return 4;
  }
  return 5;
}

bool contains_factor(const std::vector<Polynomial>& list, const Polynomial& f)
{
  return std::find(list.begin(), list.end(), f) != list.end();
}

}  // namespace

bool SolvedSystem::known_nonzero(const Polynomial& p) const
{
  if (p.is_zero()) return false;
  if (p.is_constant()) return true;
  for (const auto& [f, _] : factor_polynomial(p))
    if (!contains_factor(nonzero_, f)) return false;
  return true;
}

Polynomial SolvedSystem::strip(const Polynomial& p) const
{
  if (p.is_zero()) return p;
  Polynomial out(1);
  for (const auto& [f, _] : factor_polynomial(p))
    if (!contains_factor(nonzero_, f)) out = out * f;
  return out;
}

bool SolvedSystem::assume_nonzero(const Expr& p)
{
  Polynomial r = reduce(p).numerator();
  if (r.is_zero()) return false;
  for (const auto& [f, _] : factor_polynomial(r))
    if (!contains_factor(nonzero_, f)) nonzero_.push_back(f);
  return true;
}

std::optional<std::pair<Var, Expr>> SolvedSystem::solvable(const Polynomial& p) const
{
  using Rank = std::tuple<int, int, int, Var>;
  std::optional<Rank> best;
  std::optional<std::pair<Var, Expr>> out;
  for (const Var& v : p.variables()) {
    if (v.kind == VarKind::ControlVelocity || bindings_.count(v)) continue;
    if (p.degree(v) != 1) continue;
    Polynomial c1 = p.coefficient(v, 1);
    if (!known_nonzero(c1)) continue;
    Rank r{kind_preference(v.kind), c1.is_constant() ? 0 : 1, c1.total_degree(), v};
    if (!best || r < *best) {
      best = r;
      out = std::make_pair(v, Expr::fraction(-p.coefficient(v, 0), c1));
    }
  }
  return out;
}

bool SolvedSystem::bind(const Var& v, const Expr& value)
{
  std::map<Var, Expr> one{{v, value}};
  for (auto& [w, val] : bindings_) val = substitute_unchecked(val, one);
  bindings_[v] = value;
  std::vector<Polynomial> updated;
  for (const auto& f : nonzero_) {
    if (!f.contains(v)) {
      if (!contains_factor(updated, f)) updated.push_back(f);
      continue;
    }
    Polynomial r = substitute_unchecked(Expr(f), one).numerator();
    if (r.is_zero()) return false;
    for (const auto& [g, _] : factor_polynomial(r))
      if (!contains_factor(updated, g)) updated.push_back(g);
  }
  nonzero_ = std::move(updated);
  return true;
}

namespace {

bool momentum_linear_homogeneous(const Polynomial& p)
{
  if (p.is_zero()) return true;
  for (const auto& [m, _] : p.terms()) {
    int d = 0;
    for (const auto& [v, e] : m.factors())
      if (v.kind == VarKind::Momentum) d += e;
    if (d != 1) return false;
  }
  return true;
}

bool momentum_span_test(const Polynomial& e, const std::vector<Polynomial>& gens)
{
  std::vector<Var> momenta;
  auto collect = [&](const Polynomial& p) {
    for (const Var& v : p.variables())
      if (v.kind == VarKind::Momentum && std::find(momenta.begin(), momenta.end(), v) == momenta.end())
        momenta.push_back(v);
  };
  collect(e);
  for (const auto& g : gens) collect(g);
  std::sort(momenta.begin(), momenta.end());

  auto row_of = [&](const Polynomial& p, ExprMatrix& m, Eigen::Index r) {
    for (std::size_t j = 0; j < momenta.size(); ++j) m(r, j) = Expr(p.coefficient(momenta[j], 1));
  };
  ExprMatrix g(gens.size(), momenta.size());
  ExprMatrix ge(gens.size() + 1, momenta.size());
  for (std::size_t i = 0; i < gens.size(); ++i) {
    row_of(gens[i], g, i);
    row_of(gens[i], ge, i);
  }
  row_of(e, ge, gens.size());
  return exact_rank(g) == exact_rank(ge);
}

Rational random_rational(std::mt19937_64& rng)
{
  std::uniform_int_distribution<long> num(-9, 9), den(1, 5);
  Rational q(num(rng), den(rng));
  q.canonicalize();
  return q;
}

Decision sample_check(const Polynomial& target, const SolvedSystem& s, const std::vector<Polynomial>& pending)
{
  VarSet free;
  auto add_vars = [&](const VarSet& vs) {
    for (const Var& v : vs)
      if (!s.is_bound(v)) free.insert(v);
  };
  add_vars(target.variables());
  for (const auto& g : pending) add_vars(g.variables());
  for (const auto& f : s.nonzero()) add_vars(f.variables());
  for (const auto& [_, val] : s.bindings()) add_vars(val.variables());

  std::mt19937_64 rng(kSamplingSeed);
  int successes = 0;
  for (int attempts = 0; successes < kSamples && attempts < kSamples * kMaxAttemptsPerSample; ++attempts) {
    std::map<Var, Rational> point;
    bool ok = true;
    for (const auto& g : pending) {
      Polynomial gp = g.evaluate_partial(point);
      if (gp.is_zero()) continue;
      if (gp.is_constant()) {
        ok = false;
        break;
      }
      VarSet vs = gp.variables();
      Var pick = *vs.begin();
      for (const Var& v : vs)
        if (gp.degree(v) == 1) {
          pick = v;
          break;
        }
      for (const Var& v : vs)
        if (v != pick) point[v] = random_rational(rng);
      Polynomial uni = gp.evaluate_partial(point);
      std::vector<Rational> roots = rational_roots(uni, pick);
      if (roots.empty()) {
        ok = false;
        break;
      }
      point[pick] = roots[std::uniform_int_distribution<std::size_t>(0, roots.size() - 1)(rng)];
    }
    if (!ok) continue;
    for (const Var& v : free)
      if (!point.count(v)) point[v] = random_rational(rng);

    std::map<Var, Rational> full = point;
    try {
      for (const auto& [w, val] : s.bindings()) full[w] = eval_at(val, point);
    } catch (const std::domain_error&) {
      continue;
    }
    bool admissible = true;
    for (const auto& f : s.nonzero())
      if (f.evaluate(full) == 0) {
        admissible = false;
        break;
      }
    if (!admissible) continue;
    ++successes;
    if (target.evaluate(full) != 0) return {false, DecisionMethod::Sampling, successes};
  }
  return {successes > 0, DecisionMethod::Sampling, successes};
}

Decision worse(const Decision& a, const Decision& b)
{
  Decision out;
  out.zero = a.zero && b.zero;
  out.method = std::max(a.method, b.method);
  out.samples = std::max(a.samples, b.samples);
  return out;
}

Decision decide(const Expr& e, SolvedSystem s, std::vector<Polynomial> pending)
{
  const Decision empty_set{true, DecisionMethod::Triangular, 0};
  bool progress = true;
  while (progress) {
    progress = false;
    for (std::size_t i = 0; i < pending.size(); ++i) {
      Polynomial r = s.reduce(Expr(pending[i])).numerator();
      if (r.is_zero()) {
        pending.erase(pending.begin() + static_cast<long>(i));
        progress = true;
        break;
      }
      r = s.strip(r);
      if (r.is_constant()) return empty_set;
      if (auto sol = s.solvable(r)) {
        if (!s.bind(sol->first, sol->second)) return empty_set;
        pending.erase(pending.begin() + static_cast<long>(i));
        progress = true;
        break;
      }
      pending[i] = r;
    }
  }

  // A product generator is a union of components; decide on each.
  for (std::size_t i = 0; i < pending.size(); ++i) {
    auto factors = factor_polynomial(pending[i]);
    if (factors.size() < 2) continue;
    std::optional<Decision> acc;
    for (const auto& [f, _] : factors) {
      auto sub = pending;
      sub[i] = f;
      Decision d = decide(e, s, sub);
      acc = acc ? worse(*acc, d) : d;
      if (!acc->zero) break;
    }
    return *acc;
  }

  Polynomial target = s.reduce(e).numerator();
  if (target.is_zero()) return {true, DecisionMethod::Triangular, 0};
  if (pending.empty()) return {false, DecisionMethod::Triangular, 0};

  bool linear = target.variables().size() > 0 && momentum_linear_homogeneous(target);
  for (const auto& g : pending) linear = linear && momentum_linear_homogeneous(g);
  if (linear) return {momentum_span_test(target, pending), DecisionMethod::MomentumLinear, 0};

  return sample_check(target, s, pending);
}

}  // namespace

Decision reduces_to_zero(const Expr& e, const SolvedSystem& base, const std::vector<Expr>& unsolved)
{
  std::vector<Polynomial> pending;
  for (const auto& g : unsolved) {
    if (!g.is_polynomial()) throw std::invalid_argument("reduces_to_zero requires polynomial generators");
    pending.push_back(g.numerator());
  }
  return decide(e, base, pending);
}

Decision reduces_to_zero(const Expr& e, const std::vector<Expr>& gens, const std::vector<Expr>& inequations)
{
  if (!e.is_polynomial()) throw std::invalid_argument("reduces_to_zero requires polynomial input");
  SolvedSystem s;
  for (const auto& q : inequations) {
    if (!q.is_polynomial()) throw std::invalid_argument("reduces_to_zero requires polynomial inequations");
    if (!s.assume_nonzero(q)) return {true, DecisionMethod::Triangular, 0};
  }
  return reduces_to_zero(e, s, gens);
}

std::optional<bool> provably_empty(const std::vector<Expr>& gens, const std::vector<Expr>& inequations)
{
  SolvedSystem s;
  for (const auto& q : inequations)
    if (!s.assume_nonzero(q)) return true;
  std::vector<Polynomial> pending;
  for (const auto& g : gens) pending.push_back(g.numerator());
  bool progress = true;
  while (progress) {
    progress = false;
    for (std::size_t i = 0; i < pending.size(); ++i) {
      Polynomial r = s.reduce(Expr(pending[i])).numerator();
      if (r.is_zero()) {
        pending.erase(pending.begin() + static_cast<long>(i));
        progress = true;
        break;
      }
      r = s.strip(r);
      if (r.is_constant()) return true;
      if (auto sol = s.solvable(r)) {
        if (!s.bind(sol->first, sol->second)) return true;
        pending.erase(pending.begin() + static_cast<long>(i));
        progress = true;
        break;
      }
      pending[i] = r;
    }
  }
  if (pending.empty()) return false;
  return std::nullopt;
}

}  // namespace presym
