#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "presym/engine.hpp"

namespace presym {

enum class Tri { Yes, No, Undetermined };

std::string_view to_string(Tri t);

enum class Strictness {
  AllAbnormalStrict,
  AllNormalStrict,
  NoStrictAbnormal,
  LocallyAbnormal,
  Coincide,
  /// Both final submanifolds project to the empty set.
  NoExtremals,
  Undetermined
};

std::string_view to_string(Strictness s);

/// Procedure that decided a projection or comparison, ordered by strength.
enum class ProjectionMethod { ExactElimination, RankCriterion, Sampling };

std::string_view to_string(ProjectionMethod m);

enum class ProjectionTarget { M, MxU };

std::string_view to_string(ProjectionTarget t);

struct ProjectionDescription {
  int branch = -1;
  int p0 = 0;
  std::vector<Var> eliminated;
  /// Equations and inequations over states, parameters and, for M x U, controls.
  std::vector<Expr> equations;
  std::vector<Expr> inequations;
  bool exact = false;
  ProjectionMethod method = ProjectionMethod::ExactElimination;
  std::vector<std::string> notes;
};

/// Five flags of the projection comparison. Each is Yes/No when certified.
struct ProjectionCase {
  Tri abnormal_strict = Tri::Undetermined;   // P empty and abnormal image nonempty
  Tri normal_strict = Tri::Undetermined;     // P empty and normal image nonempty
  Tri no_strict_abnormal = Tri::Undetermined;  // P nonempty and equal to the abnormal image
  Tri locally_abnormal = Tri::Undetermined;  // P nonempty and smaller than the abnormal image
  Tri coincide = Tri::Undetermined;          // both images equal P
};

struct FreeTimeNotes {
  /// The abnormal final submanifold carries only zero covectors.
  bool only_zero_covectors = false;
  /// Nonzero covectors exist and H_X vanishes on every abnormal leaf before H = 0
  /// is added: every abnormal extremal is strict, no normal ones unless F vanishes.
  bool hx_vanishes = false;
  std::vector<std::string> details;
};

struct Verdict {
  ConstraintTree abnormal_tree;
  ConstraintTree normal_tree;
  Tri abnormal_exists = Tri::Undetermined;
  Tri normal_exists = Tri::Undetermined;
  Strictness strictness = Strictness::Undetermined;
  ProjectionCase cases;
  ProjectionTarget target = ProjectionTarget::M;
  std::vector<ProjectionDescription> projections;
  std::optional<FreeTimeNotes> free_time_notes;
  /// Weakest procedure used by the comparisons.
  ProjectionMethod method = ProjectionMethod::ExactElimination;
  /// Fixed time: final submanifolds contain the biextremals but may be larger.
  bool superset_only = false;
  std::vector<std::string> diagnostics;
};

struct ClassifyOptions {
  AlgorithmOptions engine;
  /// Pins for the abnormal run only.
  std::vector<Expr> abnormal_pins;
};

Verdict classify(const ControlProblem& p, const ClassifyOptions& opts = {});

/// Chooses M x U when the system is control-affine with inputs of full
/// symbolic rank, M otherwise.
ProjectionTarget projection_target(const ControlProblem& p);

ProjectionDescription project_leaf(const ControlProblem& p, const Branch& leaf, int p0, ProjectionTarget target);

/// State and control components of a curve as functions of a time symbol.
struct ClosedFormCurve {
  Var time;
  std::vector<Var> parameters;
  std::map<Var, Expr> states;
  std::map<Var, Expr> controls;
  /// Parameter expressions known nonzero along the curve.
  std::vector<Expr> assume_nonzero;
};

class CurveError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parses {"time", "parameters", "assume_nonzero", "states", "controls"}.
/// Parameters of the problem are in scope; `impose` substitutes values for them.
ClosedFormCurve load_curve(std::string_view json_text, const ControlProblem& p,
                           const std::map<std::string, Rational>& impose = {});
ClosedFormCurve load_curve_file(const std::string& path, const ControlProblem& p,
                                const std::map<std::string, Rational>& impose = {});

struct LiftResult {
  Tri exists = Tri::Undetermined;
  /// Impossible: the nonzero expression forced to vanish.
  std::optional<Expr> contradiction;
  /// Exists: momenta as functions of t (free momenta are left symbolic).
  std::map<Var, Expr> witness;
  int leaf = -1;
  std::string reason;
};

/// Whether the curve lies in the image: equations vanish identically in t and
/// no inequation does.
Tri curve_in_image(const ClosedFormCurve& curve, const ProjectionDescription& d);

/// Throws CurveError("not an integral curve") when the curve does not solve
/// the system equations.
LiftResult check_normal_lift_along(const ClosedFormCurve& curve, const ControlProblem& p,
                                   const AlgorithmOptions& opts = {});

}  // namespace presym
