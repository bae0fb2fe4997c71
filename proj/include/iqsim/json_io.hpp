#pragma once

#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "iqsim/measures.hpp"
#include "iqsim/qstate.hpp"
#include "iqsim/scenarios.hpp"

namespace iqsim {

// Insertion-ordered JSON keeps serialized output stable.
using Json = nlohmann::ordered_json;

// Shortest decimal form that round-trips the exact double.
std::string format_double(double v);

using State = std::variant<PureState, DensityMatrix>;

Json state_to_json(const State& s);

// Throws std::invalid_argument on schema or state-validity violations.
State state_from_json(const Json& j);

Json report_to_json(const MeasureReport& r);

Json trace_to_json(const std::string& scenario, const Json& config,
                   const scenarios::StageTrace& trace);

// One CSV row: comma separators, no quoting (cells never contain
// commas), caller appends rows with "\n".
std::string csv_join(const std::vector<std::string>& cells);

}  // namespace iqsim
