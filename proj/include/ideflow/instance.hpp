#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "ideflow/step_function.hpp"

namespace ideflow {

struct Edge {
    std::string id;
    std::string tail;
    std::string head;
    Rational tau;  // physical travel time, > 0
    Rational nu;   // rate capacity, > 0
};

// A single-sink network with finitely supported node inflow rates.
struct Instance {
    std::vector<std::string> nodes;
    std::vector<Edge> edges;
    std::string sink;
    std::map<std::string, StepFn> inflows;

    // End of all inflow supports (0 when there is no inflow).
    Rational theta0() const;
    // Total injected volume U.
    Rational total_volume() const;
    bool has_node(const std::string& n) const;
};

struct Violation {
    std::string rule;     // e.g. "capacity-positive", "sink-reachability"
    std::string subject;  // offending node or edge id
    std::string detail;
    bool warning = false;  // warnings do not make validate() non-empty
};

struct ValidationReport {
    std::vector<Violation> errors;
    std::vector<Violation> warnings;
    bool ok() const { return errors.empty(); }
};

ValidationReport validate(const Instance& inst);

// Translate all inflow supports so the earliest breakpoint is 0.
// Returns the translated instance and the applied offset.
std::pair<Instance, Rational> normalize_time_origin(const Instance& inst);

Rational total_tau(const Instance& inst);

// Longest physical path length to the sink. Exact (via topological DP) on acyclic
// graphs; on cyclic graphs falls back to the sound upper bound sum(tau_e).
struct LongestPathTau {
    Rational value;
    bool exact;
};
LongestPathTau longest_path_tau(const Instance& inst);

bool is_acyclic(const Instance& inst);

// Index-based view used by the simulation and analysis code.
struct CompiledGraph {
    const Instance* inst;
    int n = 0, m = 0;
    std::map<std::string, int> node_index;
    std::map<std::string, int> edge_index;
    std::vector<int> tail, head;
    std::vector<Rational> tau, nu;
    std::vector<std::vector<int>> out, in;  // edge indices per node
    int sink = -1;

    static CompiledGraph build(const Instance& inst);
    const std::string& node_name(int v) const { return inst->nodes[static_cast<size_t>(v)]; }
    const std::string& edge_id(int e) const { return inst->edges[static_cast<size_t>(e)].id; }
};

// Shortest physical distance (w.r.t. tau) from every node to the sink;
// unreachable nodes get no entry.
std::vector<std::pair<int, Rational>> physical_distances(const CompiledGraph& g);

}  // namespace ideflow
