#pragma once

#include <string>
#include <vector>

#include "ideflow/dynamics.hpp"
#include "ideflow/engine.hpp"
#include "ideflow/json_io.hpp"

namespace ideflow {

// Series names: "F_delta", "Z", "q:<edge>", "load:<edge>".
// Rows at the union of the selected series' breakpoints; values as decimal
// strings, with an exact "<name>.rational" sibling column when exact is set.
// Throws std::invalid_argument for unknown series names.
std::string csv_timeseries(const CompiledGraph& g, const DerivedState& d,
                           const std::vector<std::string>& series, bool exact);

// Static SVG line chart; every breakpoint of every series becomes a vertex.
std::string svg_plot(const std::vector<std::pair<std::string, Pwl>>& series);

json flow_to_json(const FlowOverTime& f);
FlowOverTime flow_from_json(const json& j);

json trace_to_json(const CompiledGraph& g, const IDETrace& trace);

}  // namespace ideflow
