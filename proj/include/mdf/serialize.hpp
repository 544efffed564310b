#pragma once

#include <iosfwd>
#include <span>
#include <string>

#include <json.hpp>

#include "mdf/errmetrics.hpp"
#include "mdf/optsize.hpp"
#include "mdf/procedures.hpp"
#include "mdf/simlab.hpp"
#include "mdf/size_function.hpp"

namespace mdf {

using Json = nlohmann::ordered_json;

// Size family documents:
//   {"kind": "sidak"|"bonferroni"|"weighted"|"tabulated", "M": int,
//    "weights": [..], "knots": [[a,v],..]}
// Tabulated knots are either one list shared by every member or one list per
// member. A document of the form {"family": {...}} is unwrapped.
// Malformed documents throw std::invalid_argument.
Json to_json(const SizeFamily& family);
SizeFamily family_from_json(const Json& doc);
// Builtin name ("sidak", "bonferroni") for M tests, or a path to a JSON document.
SizeFamily resolve_sizes(const std::string& source, std::size_t battery_size);
SizeFamily read_family_file(const std::string& path);

Json to_json(const ValidationReport& report);
Json to_json(const ProcedureOutcome& outcome);
Json to_json(const RateEstimates& rates);
Json to_json(const SimConfig& config);
Json to_json(const SimResult& result);
Json to_json(const WeightSolution& solution);

std::string to_string(Tail tail);
Tail parse_tail(const std::string& name);

// Missing fields take SimConfig defaults; "effects" may be a single number
// applied to every alternative.
SimConfig sim_config_from_json(const Json& doc);

void write_replicates_csv(std::ostream& out, std::span<const ErrorCounts> counts);

Json read_json_file(const std::string& path);

}  // namespace mdf
