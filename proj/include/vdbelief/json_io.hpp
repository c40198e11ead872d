#pragma once

#include <string>

#include <json.hpp>

#include "vdbelief/assignment.hpp"
#include "vdbelief/bounds.hpp"
#include "vdbelief/model.hpp"
#include "vdbelief/runtime.hpp"

namespace vdbelief {

using Json = nlohmann::json;

// Model file format. Transitions may omit variables (they persist) and the
// observation block (deterministic first symbol). Serialization emits the
// canonical minimal form, so parse(serialize(m)) == serialize-canonical m.
FactoredPOMDP parse_model(const std::string& text);
std::string serialize_model(const FactoredPOMDP& pomdp);

Json belief_to_json(const BeliefState& b);
Json factored_belief_to_json(const FactoredBelief& f, const FactoredPOMDP& pomdp);
BeliefState belief_from_json(const Json& j, const FactoredPOMDP& pomdp);

Json value_functions_to_json(const std::vector<ValueFunction>& vfs, const FactoredPOMDP& pomdp);
std::vector<ValueFunction> value_functions_from_json(const Json& j, const FactoredPOMDP& pomdp);

Json assignment_to_json(const SchemeAssignment& a, const FactoredPOMDP& pomdp);
SchemeAssignment assignment_from_json(const Json& j, const FactoredPOMDP& pomdp);

Json bound_report_to_json(const BoundReport& r, const FactoredPOMDP& pomdp);

Json execution_report_to_json(const ExecutionReport& r);
// One CSV row: prior hash, loss, suboptimal count.
std::string execution_report_csv(const ExecutionReport& r, const BeliefState& prior);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

} // namespace vdbelief
