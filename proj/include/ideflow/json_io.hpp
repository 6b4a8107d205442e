#pragma once

#include <nlohmann/json.hpp>

#include <string>

#include "ideflow/instance.hpp"

namespace ideflow {

using json = nlohmann::ordered_json;

// Rationals are serialized as bare integers when they fit, "p/q" strings otherwise;
// parsing accepts integers, "p/q" and decimal strings. Round-trips are bit-exact.
json rational_to_json(const Rational& r);
Rational rational_from_json(const json& j);

json stepfn_to_json(const StepFn& f);
StepFn stepfn_from_json(const json& j);

json instance_to_json(const Instance& inst);
Instance instance_from_json(const json& j);

void save_instance(const Instance& inst, const std::string& path);
// Throws std::runtime_error with line/field diagnostics on parse failure.
Instance load_instance(const std::string& path);

json read_json_file(const std::string& path);
void write_json_file(const json& j, const std::string& path);

}  // namespace ideflow
