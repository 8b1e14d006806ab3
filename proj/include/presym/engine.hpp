#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "presym/hamiltonian.hpp"
#include "presym/ideal.hpp"

namespace presym {

enum class OriginKind { Primary, Stabilization, FreeTimeH, UserSplit };

std::string_view to_string(OriginKind k);

struct Origin {
  OriginKind kind = OriginKind::Primary;
  /// Control index for primary constraints.
  int control = -1;
  /// Constraint whose stabilization produced this one.
  int parent = -1;
  /// Set when the constraint is one factor of a split product constraint.
  int factor_of = -1;
};

struct Constraint {
  int id = 0;
  /// Constraint form (content-free numerator, positive leading coefficient).
  Expr expr;
  Origin origin;
  int step_introduced = 0;
  bool stabilized = false;
  /// Variable this equation was solved for, if any.
  std::optional<Var> defines;
};

enum class BranchStatus { Active, Stabilized, Empty, Split };

std::string_view to_string(BranchStatus s);

struct Branch {
  int id = 0;
  int parent = -1;
  std::vector<int> children;
  std::vector<Constraint> equations;
  /// Solved variables and the irreducible factors required nonzero.
  SolvedSystem solved;
  std::map<Var, Expr> solved_control_velocities;
  BranchStatus status = BranchStatus::Active;
  int next_constraint_id = 0;
  int passes = 0;
  /// Last pass that added a constraint or a binding.
  int depth = 0;
  bool nonzero_covector = false;
  bool free_time_h = false;
  /// Free time: whether H already vanished on the branch before H = 0 was added.
  std::optional<bool> h_vanished_before;
  std::string empty_reason;
  std::vector<std::string> log;

  std::vector<Expr> inequations() const;
  std::map<Var, Expr> solved_controls() const;
  /// Equations not solved for a variable.
  std::vector<Expr> unsolved() const;
  std::vector<Expr> equation_exprs() const;
  bool is_leaf() const { return status == BranchStatus::Stabilized; }
};

struct AlgorithmOptions {
  int max_steps = 16;
  int max_branches = 64;
  /// Root inequations (branch pins).
  std::vector<Expr> pins;
  /// Append H = 0 to every stabilized leaf.
  bool free_time = false;
};

struct ConstraintTree {
  int p0 = 0;
  std::vector<Branch> branches;  // indexed by id
  std::vector<int> roots;
  bool budget_exhausted = false;
  std::vector<std::string> diagnostics;

  std::vector<const Branch*> leaves() const;
  const Branch& at(int id) const { return branches.at(static_cast<std::size_t>(id)); }
};

class EngineError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Root branch with the constraints dH/du_l, pins assumed nonzero.
Branch primary_constraints(const HamiltonianSystem& hs, const std::vector<Expr>& pins = {});

/// Adds an equation to a branch, substituting and solving eagerly. Returns
/// false when the branch became empty.
bool add_equation(Branch& b, const Expr& e, const Origin& origin, int step);

struct StabilizationOutcome {
  int new_constraints = 0;
  int new_bindings = 0;
  int solved_velocities = 0;
  /// A control-velocity coefficient that is neither zero nor known invertible.
  std::optional<Expr> split_on;
  bool progress() const { return new_constraints + new_bindings + solved_velocities > 0; }
};

/// One pass over the branch's unstabilized equations.
StabilizationOutcome stabilize_once(const HamiltonianSystem& hs, Branch& b);

/// Disjoint cover of b along the factors of equation c (index into
/// b.equations): child i gets f_i = 0 and f_j != 0 for j < i. An irreducible
/// constraint gives a single copy of b.
std::vector<Branch> split_branch(const Branch& b, std::size_t c);

ConstraintTree run_algorithm(const HamiltonianSystem& hs, const AlgorithmOptions& opts = {});

/// Empties b when every momentum vanishes on it, otherwise sets the
/// nonzero-covector marker. Throws EngineError for p0 = -1.
void delete_zero_fiber(Branch& b, const HamiltonianSystem& hs);

/// Appends H = 0 without stabilizing it and checks that X_H(H) vanishes on b.
/// Returns false when the diagnostic fires.
bool add_free_time_constraint(const HamiltonianSystem& hs, Branch& b);

}  // namespace presym
