#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "ideflow/dynamics.hpp"
#include "ideflow/instance.hpp"

namespace ideflow {

// Event-driven phase loop shared by the IDE engine and the routing replays.
//
// Within a phase all edge inflows are constant; edge outflows are forced by the
// queueing constraint and therefore constant too (outflow changes are events).
// The allocator decides the per-edge inflow rates at each phase start.
class PhaseSim {
   public:
    enum class EventKind { inflow, outflow_front, queue_depletion, activation, horizon, termination };

    struct Snapshot {
        Rational time;
        std::vector<Rational> queue;    // q_e(t), per edge
        std::vector<Rational> arrival;  // f-_e(t+), per edge
        std::vector<Rational> b;        // per node: u_v(t+) + sum of incoming arrivals
        Rational volume;                // F_delta(t)
    };

    struct PhaseRecord {
        Rational start, end;
        std::vector<Rational> x;  // per-edge inflow rates on [start, end)
        EventKind end_event;
    };

    // Allocator contract: x_e >= 0, and for every node v != sink,
    // sum of x over out(v) equals snapshot.b[v].
    using Allocator = std::function<std::vector<Rational>(const Snapshot&)>;
    // Optional extra phase-end candidates (e.g. label activation crossings);
    // must be strictly later than snapshot.time.
    using ExtraEvents =
        std::function<std::optional<Rational>(const Snapshot&, const std::vector<Rational>&)>;

    struct Result {
        FlowOverTime flow;
        std::vector<PhaseRecord> phases;
        bool terminated = false;
        std::optional<Rational> makespan;
        bool hit_phase_cap = false;
        bool hit_horizon = false;
    };

    PhaseSim(const CompiledGraph& g, Rational horizon, long max_phases = 1000000);

    void set_extra_events(ExtraEvents f) { extra_ = std::move(f); }

    Result run(const Allocator& alloc);

   private:
    const CompiledGraph& g_;
    Rational horizon_;
    long max_phases_;
    ExtraEvents extra_;
};

// Splits arriving volume over out-edges with seeded pseudo-random proportions,
// redrawn each phase. Produces feasible, generally non-IDE flows.
class RandomSplitPolicy : public RoutingPolicy {
   public:
    explicit RandomSplitPolicy(uint64_t seed) : seed_(seed) {}
    std::vector<Rational> split(const CompiledGraph& g, int v, const Rational& time,
                                const Rational& b) override;

   private:
    uint64_t seed_;
    uint64_t counter_ = 0;
};

}  // namespace ideflow
