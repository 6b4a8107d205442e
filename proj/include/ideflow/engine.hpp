#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ideflow/dynamics.hpp"
#include "ideflow/instance.hpp"
#include "ideflow/phase_sim.hpp"

namespace ideflow {

// Node labels and the active-edge set at one instant.
// Labels are current shortest-path distances to the sink under the
// instantaneous travel times c_e(t) = tau_e + q_e(t)/nu_e; an edge vw is
// active when l_v = l_w + c_e. Unreachable nodes carry no label.
struct LabelState {
    Rational time;
    std::vector<std::optional<Rational>> labels;       // per node
    std::vector<std::optional<Rational>> label_derivs;  // per node, right derivative
    std::vector<bool> active;                           // per edge
    std::vector<int> processing_order;                  // nodes by ascending label
};

// Labels and the tight-edge set from exact reverse Dijkstra.
LabelState instantaneous_labels(const CompiledGraph& g, const std::vector<Rational>& queues,
                                const Rational& time);

// One water-filling candidate: an active out-edge of the node being processed.
struct FillCandidate {
    Rational nu;
    bool queue_positive;
    Rational downstream_deriv;  // l'_w of the edge's head
};

struct FillResult {
    std::vector<Rational> x;  // per candidate, sums to b
    Rational level;           // the node's label derivative
};

// Splits b over the candidates so that used edges equalize the growth rate of
// their instantaneous costs; ties at flat brackets break proportionally to nu.
FillResult water_fill(const Rational& b, const std::vector<FillCandidate>& candidates);

struct Phase {
    Rational start, end;
    std::vector<Rational> x;  // per-edge inflow rates
    LabelState state;         // at phase start
    PhaseSim::EventKind end_event;
};

struct IDETrace {
    std::vector<Phase> phases;
    FlowOverTime flow;
    bool terminated = false;
    std::optional<Rational> makespan;
    bool hit_phase_cap = false;
    bool hit_horizon = false;
};

struct EngineOptions {
    std::optional<Rational> horizon;  // default: the termination-theorem bound
    long max_phases = 1000000;
};

// Default horizon theta_hat = theta0 + 2U sum_e(tau_e + 1/(2 nu_e)) + tau(P_max) + 1/2,
// with U scaled by 1/nu_min when nu_min < 1 and the sum(tau) fallback for tau(P_max).
Rational default_horizon(const Instance& inst);

// Phase-by-phase IDE construction: labels -> ascending-label water-filling ->
// next event. Requires a validated instance with nonnegative-time inflows.
IDETrace compute_ide(const CompiledGraph& g, const EngineOptions& opts = {});

struct IdeViolation {
    std::string edge;
    Rational from, to;
    std::string detail;
};

struct IdeReport {
    std::vector<IdeViolation> violations;
    bool ok() const { return violations.empty(); }
};

// Independent IDE verifier: exact label functions per refined time piece via
// relaxation over piecewise-linear arithmetic; every edge carrying inflow must
// be tight as a function identity on its piece.
IdeReport check_ide(const CompiledGraph& g, const FlowOverTime& f);

}  // namespace ideflow
