#pragma once

#include <string>

#include "json.hpp"
#include "presym/classifier.hpp"
#include "presym/integrator.hpp"

namespace presym {

using Json = nlohmann::ordered_json;

Json tree_json(const ConstraintTree& tree);

Json projection_json(const ProjectionDescription& d);

Json verdict_json(const Verdict& v);

/// `in_abnormal_image` is the curve's membership in the abnormal projection.
Json lift_json(const LiftResult& r, Tri in_abnormal_image);

struct IntegrationSummary {
  int leaf = -1;
  int p0 = 0;
  double h = 0;
  double tol_accept = 0;
  double tol_drift = 0;
  bool free_time = false;
};

Json integration_json(const Trajectory& tr, const EndpointReport& ends, const IntegrationSummary& s);

/// Human-readable rendering of any document produced above, keyed on its "kind".
std::string render_text(const Json& doc);

}  // namespace presym
