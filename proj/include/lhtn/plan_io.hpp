#pragma once

#include <istream>
#include <ostream>
#include <string>

#include <json.hpp>

#include "lhtn/model.hpp"

namespace lhtn {

/// Text form:
///   ;; makespan N
///   {(a x), (b y)}
///   {(c z)}
///   ;; trace method <node> <method name>
///   ;; trace action <node> <action name>
///   ;; trace switch
/// Trace lines are optional for reading but required for validation.
void write_plan_text(std::ostream& out, const LayeredPlan& plan, const GroundHtnProblem& p);
LayeredPlan read_plan_text(std::istream& in, const GroundHtnProblem& p);

nlohmann::json plan_to_json(const LayeredPlan& plan, const GroundHtnProblem& p);
LayeredPlan plan_from_json(const nlohmann::json& j, const GroundHtnProblem& p);

}  // namespace lhtn
