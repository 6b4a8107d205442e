#include "ideflow/phase_sim.hpp"

#include <algorithm>
#include <random>
#include <stdexcept>

namespace ideflow {

namespace {

// Append-only right-constant function builder with coalescing.
struct StepBuilder {
    std::vector<Rational> starts;
    std::vector<Rational> values;

    void append(const Rational& from, const Rational& value) {
        if (!values.empty() && values.back() == value) return;
        if (values.empty() && value == 0) return;  // leading zeros are implicit
        starts.push_back(from);
        values.push_back(value);
    }
    Rational value_at(const Rational& t) const {
        auto it = std::upper_bound(starts.begin(), starts.end(), t);
        if (it == starts.begin()) return Rational(0);
        return values[static_cast<size_t>(it - starts.begin()) - 1];
    }
    // First start strictly after t where the value changes.
    std::optional<Rational> next_change_after(const Rational& t) const {
        auto it = std::upper_bound(starts.begin(), starts.end(), t);
        if (it == starts.end()) return std::nullopt;
        return *it;
    }
    StepFn finish() const {
        if (starts.empty()) return StepFn::zero();
        return StepFn(starts, values);
    }
};

}  // namespace

PhaseSim::PhaseSim(const CompiledGraph& g, Rational horizon, long max_phases)
    : g_(g), horizon_(std::move(horizon)), max_phases_(max_phases) {}

PhaseSim::Result PhaseSim::run(const Allocator& alloc) {
    const int n = g_.n, m = g_.m;
    Result res;

    std::vector<const StepFn*> inflow(static_cast<size_t>(n), nullptr);
    std::vector<Rational> all_inflow_bps;
    Rational start_time(0);
    Rational theta0(0);
    for (const auto& [name, u] : g_.inst->inflows) {
        if (u.is_zero()) continue;
        int v = g_.node_index.at(name);
        inflow[static_cast<size_t>(v)] = &u;
        for (const auto& b : u.breakpoints()) all_inflow_bps.push_back(b);
        start_time = rat_min(start_time, u.left_bound());
        theta0 = rat_max(theta0, u.last_breakpoint());
    }
    std::sort(all_inflow_bps.begin(), all_inflow_bps.end());
    all_inflow_bps.erase(std::unique(all_inflow_bps.begin(), all_inflow_bps.end()),
                         all_inflow_bps.end());

    std::vector<StepBuilder> fplus(static_cast<size_t>(m)), fminus(static_cast<size_t>(m));
    std::vector<Rational> queue(static_cast<size_t>(m), Rational(0));
    Rational volume(0);
    Rational t = start_time;
    size_t inflow_bp_idx = 0;

    for (long phase = 0;; ++phase) {
        if (phase >= max_phases_) {
            res.hit_phase_cap = true;
            break;
        }
        if (t >= horizon_) {
            res.hit_horizon = true;
            break;
        }

        Snapshot snap;
        snap.time = t;
        snap.queue = queue;
        snap.volume = volume;
        snap.arrival.assign(static_cast<size_t>(m), Rational(0));
        for (int e = 0; e < m; ++e)
            snap.arrival[static_cast<size_t>(e)] = fminus[static_cast<size_t>(e)].value_at(t);
        snap.b.assign(static_cast<size_t>(n), Rational(0));
        for (int v = 0; v < n; ++v) {
            Rational b(0);
            if (inflow[static_cast<size_t>(v)]) b += (*inflow[static_cast<size_t>(v)])(t);
            for (int e : g_.in[static_cast<size_t>(v)]) b += snap.arrival[static_cast<size_t>(e)];
            snap.b[static_cast<size_t>(v)] = b;
        }

        // Termination: the volume first reaches zero at a phase boundary (detected
        // here) or inside a phase (the termination event below truncates it).
        if (t >= theta0 && volume == 0) {
            res.terminated = true;
            res.makespan = t;
            break;
        }

        std::vector<Rational> x = alloc(snap);
        if (static_cast<int>(x.size()) != m) throw std::logic_error("allocator size mismatch");

        // Forced service rates and queue slopes for this phase.
        std::vector<Rational> service(static_cast<size_t>(m)), slope(static_cast<size_t>(m));
        for (int e = 0; e < m; ++e) {
            size_t se = static_cast<size_t>(e);
            if (queue[se] > 0)
                service[se] = g_.nu[se];
            else
                service[se] = rat_min(x[se], g_.nu[se]);
            slope[se] = x[se] - service[se];
        }

        // Candidate phase ends, all strictly after t.
        Rational t_next = horizon_;
        EventKind kind = EventKind::horizon;
        auto consider = [&](const Rational& cand, EventKind k) {
            if (cand > t && cand < t_next) {
                t_next = cand;
                kind = k;
            }
        };
        while (inflow_bp_idx < all_inflow_bps.size() && all_inflow_bps[inflow_bp_idx] <= t)
            ++inflow_bp_idx;
        if (inflow_bp_idx < all_inflow_bps.size())
            consider(all_inflow_bps[inflow_bp_idx], EventKind::inflow);
        for (int e = 0; e < m; ++e) {
            size_t se = static_cast<size_t>(e);
            if (auto c = fminus[se].next_change_after(t)) consider(*c, EventKind::outflow_front);
            if (service[se] != fminus[se].value_at(t + g_.tau[se]))
                consider(t + g_.tau[se], EventKind::outflow_front);
            if (queue[se] > 0 && slope[se] < 0)
                consider(t + queue[se] / (-slope[se]), EventKind::queue_depletion);
        }
        if (extra_) {
            if (auto c = extra_(snap, x)) consider(*c, EventKind::activation);
        }
        // Network drains to zero inside the phase.
        Rational vol_slope(0);
        for (int v = 0; v < n; ++v)
            if (inflow[static_cast<size_t>(v)]) vol_slope += (*inflow[static_cast<size_t>(v)])(t);
        for (int e : g_.in[static_cast<size_t>(g_.sink)])
            vol_slope -= snap.arrival[static_cast<size_t>(e)];
        for (int e : g_.out[static_cast<size_t>(g_.sink)]) vol_slope += x[static_cast<size_t>(e)];
        if (volume > 0 && vol_slope < 0) {
            Rational t_zero = t + volume / (-vol_slope);
            if (t_zero >= theta0) consider(t_zero, EventKind::termination);
        }

        if (!(t_next > t)) {
            // Should be unreachable: every candidate above is strictly future.
            std::string dump = "zero-length phase at t=" + to_string(t) + "; queues:";
            for (int e = 0; e < m; ++e)
                if (queue[static_cast<size_t>(e)] != 0)
                    dump += " " + g_.edge_id(e) + "=" + to_string(queue[static_cast<size_t>(e)]);
            dump += "; b:";
            for (int v = 0; v < n; ++v)
                if (snap.b[static_cast<size_t>(v)] != 0)
                    dump += " " + g_.node_name(v) + "=" + to_string(snap.b[static_cast<size_t>(v)]);
            throw std::logic_error(dump);
        }

        Rational dt = t_next - t;
        for (int e = 0; e < m; ++e) {
            size_t se = static_cast<size_t>(e);
            fplus[se].append(t, x[se]);
            fminus[se].append(t + g_.tau[se], service[se]);
            queue[se] += slope[se] * dt;
            if (queue[se] < 0) throw std::logic_error("negative queue on " + g_.edge_id(e));
        }
        volume += vol_slope * dt;
        res.phases.push_back({t, t_next, x, kind});
        t = t_next;

        if (kind == EventKind::termination && volume == 0 && t >= theta0) {
            res.terminated = true;
            res.makespan = t;
            break;
        }
    }

    for (int e = 0; e < m; ++e) {
        size_t se = static_cast<size_t>(e);
        fplus[se].append(t, Rational(0));
        // At termination all queues are empty, so every outflow ends by t + tau_e.
        // Horizon- or cap-truncated traces keep their last committed values; they
        // are only meaningful up to the cut.
        if (res.terminated) fminus[se].append(t + g_.tau[se], Rational(0));
        res.flow.f_plus[g_.edge_id(e)] = fplus[se].finish();
        res.flow.f_minus[g_.edge_id(e)] = fminus[se].finish();
    }
    return res;
}

std::vector<Rational> RandomSplitPolicy::split(const CompiledGraph& g, int v, const Rational& time,
                                               const Rational& b) {
    (void)time;
    (void)b;
    std::mt19937_64 rng(seed_ ^ (0x9e3779b97f4a7c15ULL * ++counter_));
    std::uniform_int_distribution<int> dist(0, 4);
    std::vector<Rational> w(g.out[static_cast<size_t>(v)].size());
    bool any = false;
    for (auto& wi : w) {
        wi = Rational(dist(rng));
        if (wi > 0) any = true;
    }
    if (!any && !w.empty()) w[0] = Rational(1);
    return w;
}

}  // namespace ideflow
