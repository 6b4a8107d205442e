#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ideflow/dynamics.hpp"
#include "ideflow/engine.hpp"
#include "ideflow/instance.hpp"

namespace ideflow {

// --- sink-like subgraphs -----------------------------------------------------

struct SinkLikeQuery {
    std::vector<std::string> nodes;  // must contain the sink
    Rational t1, t2;
};

struct SinkLikeResult {
    Rational vol;
    bool volume_ok;                   // vol < 1/2
    bool shortest_paths_contained;    // all physically shortest v-t paths stay inside
    std::vector<std::string> escape_edges;  // shortest-path edges leaving the set
    bool sink_like() const { return volume_ok && shortest_paths_contained; }
};

SinkLikeResult sink_like_check(const CompiledGraph& g, const DerivedState& d,
                               const SinkLikeQuery& q);

// --- acyclic arrival bound ---------------------------------------------------

// residual = Z(theta) - Z(zeta) - min{F_delta(zeta), theta - zeta - tau(P_max)};
// the bound holds iff residual >= 0. Throws std::invalid_argument on cyclic input.
Rational acyclic_arrival_check(const CompiledGraph& g, const DerivedState& d, const Rational& zeta,
                               const Rational& theta);

// --- termination certificate -------------------------------------------------

struct TerminationCertificate {
    Rational theta_hat;
    Rational makespan;
    bool makespan_ok = false;
    Rational psi_bound;
    Rational psi;
    bool psi_ok = false;
    Rational u_effective;  // U, rescaled by 1/nu_min when nu_min < 1
    Rational tau_pmax;
    bool tau_pmax_exact = false;
    bool ok() const { return makespan_ok && psi_ok; }
};

TerminationCertificate termination_certificate(const Instance& inst, const Rational& mksp,
                                               const Rational& psi);

// --- optimal-flow bounds -----------------------------------------------------

struct OptBounds {
    bool bounded = false;
    Rational lower, upper;
    Rational delta;        // grid actually used (refined from the request)
    FlowOverTime witness;  // feasible flow achieving `upper`
    Rational witness_travel_time;
};

// Two-sided bounds on the optimal makespan via a lazily grown time-expanded
// max-flow. `lower` is the smallest grid time by which the relaxation can
// deliver the full volume, counting a window's arrivals at the window end; the
// exact certificate is one-sided-open: every feasible flow's makespan is
// strictly greater than lower - delta, so the optimum lies in
// (lower - delta, upper]. On instances whose optimum is grid-aligned (all the
// documented examples) lower equals it exactly. `upper` is attained: the plan
// of a minimum-service-count max flow is replayed through the real queueing
// dynamics and the resulting verified flow is measured.
// Requires a normalized (inflows starting at time >= 0), validated instance.
OptBounds opt_makespan_bounds(const CompiledGraph& g, const Rational& delta,
                              const Rational& horizon);

Rational opt_travel_time_lower(const Instance& inst);

// --- capacity-1 edge envelopes -----------------------------------------------

struct Cap1Envelopes {
    StepFn in_lo, in_hi;
    StepFn out_lo, out_hi;
    Pwl q_lo, q_hi;
};

// The staircase/queue/outflow envelopes of the unit-capacity unit-length edge,
// parameterized by the scale exponent k and the start time theta0.
Cap1Envelopes cap1_envelopes(int k, const Rational& theta0);

struct EnvelopeReport {
    bool precondition_ok = false;
    std::vector<std::string> failures;
    bool ok() const { return precondition_ok && failures.empty(); }
};

EnvelopeReport envelope_check_cap1_edge(const StepFn& drive, int k, const Rational& theta0);

// --- the two-path flow split -------------------------------------------------

struct FlowSplitReport {
    bool precondition_ok = false;
    Rational epsilon;      // nu / (y - nu)
    Rational switch_time;  // theta0 - x + epsilon
    std::vector<std::string> failures;
    StepFn got_into_queue_edge, got_into_bypass, got_into_downstream;
    bool ok() const { return precondition_ok && failures.empty(); }
};

// Builds the split sub-instance (feeder edge producing outflow y on
// [theta0-x, theta0], queue edge of capacity nu, bypass one unit longer), runs
// the engine, and compares the three resulting step functions with the
// predicted three-piece split.
FlowSplitReport flow_split_check(const Rational& y, const Rational& nu, const Rational& x);

// --- instance-level price-of-anarchy report -----------------------------------

struct PoaReport {
    bool ide_terminated = false;
    std::optional<Rational> ide_makespan;
    Rational ide_travel_time;
    Rational ide_total_delay;
    Rational normalization_offset;
    OptBounds opt;
    Rational opt_travel_time_lb;
    std::optional<Rational> makespan_ratio_lower;  // IDE makespan / OPT upper
    std::optional<Rational> travel_ratio_lower;    // IDE psi / witness psi
    TerminationCertificate certificate;
    long phase_count = 0;
};

PoaReport poa_report(const Instance& inst, const Rational& delta,
                     const std::optional<Rational>& horizon = std::nullopt);

}  // namespace ideflow
