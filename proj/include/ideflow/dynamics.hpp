#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ideflow/instance.hpp"

namespace ideflow {

// Edge in/outflow rate pairs, keyed by edge id. Missing edges carry zero flow.
struct FlowOverTime {
    std::map<std::string, StepFn> f_plus;
    std::map<std::string, StepFn> f_minus;

    const StepFn& in(const std::string& edge) const;
    const StepFn& out(const std::string& edge) const;
};

// Everything derivable from (instance, flow): cumulatives, queues, loads,
// total volume F_delta, sink arrivals Z, cumulative node inflows.
struct DerivedState {
    std::vector<Pwl> F_plus, F_minus;  // indexed like CompiledGraph edges
    std::vector<Pwl> queue;            // q_e(t) = F+_e(t) - F-_e(t + tau_e)
    std::vector<Pwl> load;             // F+_e - F-_e
    Pwl F_delta;
    Pwl Z;
    std::map<std::string, Pwl> U_cum;
    std::vector<std::string> defects;  // negative queue/load reports
    bool ok() const { return defects.empty(); }
};

DerivedState derive(const CompiledGraph& g, const FlowOverTime& f);

struct ConstraintViolation {
    std::string constraint;  // "conservation", "sink", "no-early-outflow", "queue-at-capacity"
    std::string subject;     // node or edge id
    Rational from, to;       // violating sub-interval
    std::string detail;
};

struct FeasibilityReport {
    std::vector<ConstraintViolation> violations;
    bool ok() const { return violations.empty(); }
};

// Exact verification of constraints (1)-(4) on the common breakpoint refinement.
FeasibilityReport check_feasibility(const CompiledGraph& g, const FlowOverTime& f);

// First time >= theta0 with zero volume in the network; nullopt when the volume
// stays positive through the stored horizon.
std::optional<Rational> makespan(const CompiledGraph& g, const DerivedState& d);

struct TravelTimeResult {
    Rational value;
    Rational by_edge_costs;    // sum_e int c_e f+_e
    Rational by_arrival_rate;  // int t Z'(t) dt - sum_v int t u_v(t) dt
    Rational by_volume;        // int F_delta
    bool consistent;
    std::vector<std::pair<std::string, Rational>> edge_residuals;  // per-edge identity residuals
};

// All three formulas of the total travel time, computed exactly and cross-checked.
TravelTimeResult total_travel_time(const CompiledGraph& g, const FlowOverTime& f,
                                   const DerivedState& d);

// int t Z'(t) dt over the whole horizon.
Rational total_delay(const CompiledGraph& g, const FlowOverTime& f, const DerivedState& d);

// Vickrey response of one edge: given the edge inflow, returns the forced outflow
// (queues operate at capacity) and the queue length profile.
struct EdgeResponse {
    StepFn f_minus;
    Pwl queue;
};
EdgeResponse single_edge_response(const StepFn& f_plus, const Rational& nu, const Rational& tau);

// Feasible flow from a routing policy: at each node and phase, arriving volume is
// split over the outgoing edges according to the supplied weights. Used to build
// random feasible (not necessarily IDE) flows and to replay OPT routings.
class RoutingPolicy {
   public:
    virtual ~RoutingPolicy() = default;
    // Weights over g.out[v]; they are normalized by the caller. Must not be all zero
    // when b > 0.
    virtual std::vector<Rational> split(const CompiledGraph& g, int v, const Rational& time,
                                        const Rational& b) = 0;
};

FlowOverTime simulate_routing(const CompiledGraph& g, RoutingPolicy& policy,
                              const Rational& horizon);

}  // namespace ideflow
