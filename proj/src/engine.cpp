#include "ideflow/engine.hpp"

#include <algorithm>
#include <deque>
#include <future>
#include <queue>
#include <stdexcept>
#include <thread>

namespace ideflow {

LabelState instantaneous_labels(const CompiledGraph& g, const std::vector<Rational>& queues,
                                const Rational& time) {
    LabelState st;
    st.time = time;
    st.labels.assign(static_cast<size_t>(g.n), std::nullopt);
    st.label_derivs.assign(static_cast<size_t>(g.n), std::nullopt);
    st.active.assign(static_cast<size_t>(g.m), false);

    auto cost = [&](int e) {
        size_t se = static_cast<size_t>(e);
        return g.tau[se] + queues[se] / g.nu[se];
    };

    // Dijkstra on reversed edges from the sink; ties break by node index.
    using QE = std::pair<Rational, int>;
    auto cmp = [](const QE& a, const QE& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second > b.second;
    };
    std::priority_queue<QE, std::vector<QE>, decltype(cmp)> pq(cmp);
    std::vector<bool> done(static_cast<size_t>(g.n), false);
    st.labels[static_cast<size_t>(g.sink)] = Rational(0);
    pq.push({Rational(0), g.sink});
    while (!pq.empty()) {
        auto [dv, v] = pq.top();
        pq.pop();
        if (done[static_cast<size_t>(v)]) continue;
        done[static_cast<size_t>(v)] = true;
        st.processing_order.push_back(v);
        for (int e : g.in[static_cast<size_t>(v)]) {
            int u = g.tail[static_cast<size_t>(e)];
            Rational nd = dv + cost(e);
            auto& lu = st.labels[static_cast<size_t>(u)];
            if (!lu || nd < *lu) {
                lu = nd;
                pq.push({nd, u});
            }
        }
    }
    for (int e = 0; e < g.m; ++e) {
        size_t se = static_cast<size_t>(e);
        const auto& lv = st.labels[static_cast<size_t>(g.tail[se])];
        const auto& lw = st.labels[static_cast<size_t>(g.head[se])];
        if (lv && lw && *lv == *lw + cost(e)) st.active[se] = true;
    }
    return st;
}

FillResult water_fill(const Rational& b, const std::vector<FillCandidate>& candidates) {
    if (b < 0) throw std::invalid_argument("water_fill: negative volume");
    FillResult r;
    r.x.assign(candidates.size(), Rational(0));
    if (candidates.empty()) {
        if (b > 0) throw std::invalid_argument("water_fill: volume but no candidates");
        r.level = Rational(0);
        return r;
    }
    // g_e(0): the marginal cost growth of the first drop into e.
    auto g0 = [&](const FillCandidate& c) {
        return c.queue_positive ? c.downstream_deriv - 1 : c.downstream_deriv;
    };
    if (b == 0) {
        r.level = g0(candidates[0]);
        for (const auto& c : candidates) r.level = rat_min(r.level, g0(c));
        return r;
    }
    // Demand at level L: queued edges want nu(1 + L - l'_w) clamped at 0; queue-free
    // edges jump from 0 to nu at L = l'_w and grow beyond.
    auto demand_lo = [&](const Rational& L) {  // left limit (jump edges excluded at L)
        Rational s(0);
        for (const auto& c : candidates) {
            if (c.queue_positive) {
                Rational want = c.nu * (1 + L - c.downstream_deriv);
                if (want > 0) s += want;
            } else if (L > c.downstream_deriv) {
                s += c.nu * (1 + L - c.downstream_deriv);
            }
        }
        return s;
    };
    auto demand_hi = [&](const Rational& L) {  // right limit (jump edges at full nu)
        Rational s(0);
        for (const auto& c : candidates) {
            if (c.queue_positive) {
                Rational want = c.nu * (1 + L - c.downstream_deriv);
                if (want > 0) s += want;
            } else if (L >= c.downstream_deriv) {
                s += c.nu * (1 + L - c.downstream_deriv);
            }
        }
        return s;
    };
    std::vector<Rational> thresholds;
    for (const auto& c : candidates) thresholds.push_back(g0(c));
    std::sort(thresholds.begin(), thresholds.end());
    thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());

    Rational level;
    bool at_jump = false;
    size_t i = 0;
    for (; i < thresholds.size(); ++i) {
        if (demand_hi(thresholds[i]) >= b) break;
    }
    if (i == thresholds.size()) {
        // Beyond the last threshold all candidates are open; solve the linear equation.
        Rational top = thresholds.back();
        Rational base = demand_hi(top);
        Rational slope(0);
        for (const auto& c : candidates) slope += c.nu;
        level = top + (b - base) / slope;
    } else if (demand_lo(thresholds[i]) <= b && b <= demand_hi(thresholds[i])) {
        level = thresholds[i];
        at_jump = true;
    } else {
        // Inside the open segment below thresholds[i].
        Rational hi = thresholds[i];
        Rational base = demand_lo(hi);
        Rational slope(0);
        for (const auto& c : candidates) {
            if (c.queue_positive) {
                if (c.nu * (1 + hi - c.downstream_deriv) > 0) slope += c.nu;
            } else if (hi > c.downstream_deriv) {
                slope += c.nu;
            }
        }
        level = hi - (base - b) / slope;
    }

    Rational assigned(0);
    std::vector<size_t> flexible;
    Rational flexible_nu(0);
    for (size_t k = 0; k < candidates.size(); ++k) {
        const auto& c = candidates[k];
        if (c.queue_positive) {
            Rational want = c.nu * (1 + level - c.downstream_deriv);
            if (want > 0) {
                r.x[k] = want;
                assigned += want;
            }
        } else if (level > c.downstream_deriv) {
            r.x[k] = c.nu * (1 + level - c.downstream_deriv);
            assigned += r.x[k];
        } else if (at_jump && level == c.downstream_deriv) {
            flexible.push_back(k);
            flexible_nu += c.nu;
        }
    }
    Rational residual = b - assigned;
    if (residual < 0 || (flexible.empty() && residual != 0))
        throw std::logic_error("water_fill: inconsistent bracket solve");
    for (size_t k : flexible) r.x[k] = residual * candidates[k].nu / flexible_nu;
    r.level = level;
    return r;
}

Rational default_horizon(const Instance& inst) {
    Rational U = inst.total_volume();
    Rational nu_min;
    bool first = true;
    Rational sum_term(0);
    for (const auto& e : inst.edges) {
        sum_term += e.tau + Rational(1) / (2 * e.nu);
        if (first || e.nu < nu_min) nu_min = e.nu;
        first = false;
    }
    if (!first && nu_min < 1) U = U / nu_min;
    Rational tp = longest_path_tau(inst).value;
    return inst.theta0() + 2 * U * sum_term + tp + Rational(1, 2);
}

namespace {

struct EngineAllocator {
    const CompiledGraph& g;
    std::vector<Phase>* phases;
    LabelState last_state;  // captured for the phase record & activation events
    std::vector<Rational> last_label_deriv_by_node;

    explicit EngineAllocator(const CompiledGraph& gg, std::vector<Phase>* ph)
        : g(gg), phases(ph) {}

    std::vector<Rational> operator()(const PhaseSim::Snapshot& snap) {
        LabelState st = instantaneous_labels(g, snap.queue, snap.time);
        std::vector<Rational> x(static_cast<size_t>(g.m), Rational(0));

        // Ascending-label sweep; every active edge strictly decreases the label,
        // so downstream derivatives are ready when a node is processed.
        for (int v : st.processing_order) {
            if (v == g.sink) {
                st.label_derivs[static_cast<size_t>(v)] = Rational(0);
                continue;
            }
            std::vector<int> cand_edges;
            std::vector<FillCandidate> cands;
            for (int e : g.out[static_cast<size_t>(v)]) {
                size_t se = static_cast<size_t>(e);
                if (!st.active[se]) continue;
                const auto& dw = st.label_derivs[static_cast<size_t>(g.head[se])];
                if (!dw) throw std::logic_error("label sweep ordering broke");
                cand_edges.push_back(e);
                cands.push_back({g.nu[se], snap.queue[se] > 0, *dw});
            }
            const Rational& b = snap.b[static_cast<size_t>(v)];
            if (b > 0 && cands.empty()) {
                if (!st.labels[static_cast<size_t>(v)])
                    throw std::runtime_error("volume at node that cannot reach the sink: " +
                                             g.node_name(v));
                throw std::logic_error("active out-edges missing at " + g.node_name(v));
            }
            if (!st.labels[static_cast<size_t>(v)]) continue;  // unreachable, no volume
            FillResult fr = water_fill(b, cands);
            for (size_t k = 0; k < cand_edges.size(); ++k)
                x[static_cast<size_t>(cand_edges[k])] = fr.x[k];
            st.label_derivs[static_cast<size_t>(v)] = fr.level;
        }

        if (phases) phases->push_back({snap.time, snap.time, x, st, PhaseSim::EventKind::horizon});
        last_state = st;
        return x;
    }

    // Earliest future activation: an inactive edge vw becomes tight when
    // (l_w + c_e - l_v)(t + dt) first hits zero under the phase's derivatives.
    std::optional<Rational> activation_event(const PhaseSim::Snapshot& snap,
                                             const std::vector<Rational>& x) const {
        std::optional<Rational> best;
        const LabelState& st = last_state;
        for (int e = 0; e < g.m; ++e) {
            size_t se = static_cast<size_t>(e);
            int v = g.tail[se], w = g.head[se];
            const auto& lv = st.labels[static_cast<size_t>(v)];
            const auto& lw = st.labels[static_cast<size_t>(w)];
            if (!lv || !lw) continue;
            Rational cost = g.tau[se] + snap.queue[se] / g.nu[se];
            Rational gap = *lw + cost - *lv;
            if (gap <= 0) continue;  // active (or numerically tight) already
            const auto& dv = st.label_derivs[static_cast<size_t>(v)];
            const auto& dw = st.label_derivs[static_cast<size_t>(w)];
            if (!dv || !dw) continue;
            Rational qslope = snap.queue[se] > 0
                                  ? x[se] - g.nu[se]
                                  : rat_max(x[se] - g.nu[se], Rational(0));
            Rational gap_slope = *dw + qslope / g.nu[se] - *dv;
            if (gap_slope >= 0) continue;
            Rational dt = gap / (-gap_slope);
            Rational cand = snap.time + dt;
            if (!best || cand < *best) best = cand;
        }
        return best;
    }
};

}  // namespace

IDETrace compute_ide(const CompiledGraph& g, const EngineOptions& opts) {
    IDETrace trace;
    Rational horizon = opts.horizon ? *opts.horizon : default_horizon(*g.inst);
    PhaseSim sim(g, horizon, opts.max_phases);
    EngineAllocator alloc(g, &trace.phases);
    sim.set_extra_events(
        [&alloc](const PhaseSim::Snapshot& snap, const std::vector<Rational>& x) {
            return alloc.activation_event(snap, x);
        });
    PhaseSim::Result res = sim.run(std::ref(alloc));
    trace.flow = std::move(res.flow);
    trace.terminated = res.terminated;
    trace.makespan = res.makespan;
    trace.hit_phase_cap = res.hit_phase_cap;
    trace.hit_horizon = res.hit_horizon;
    // The allocator recorded phases with placeholder ends; fill in the real ones.
    for (size_t i = 0; i < res.phases.size() && i < trace.phases.size(); ++i) {
        trace.phases[i].end = res.phases[i].end;
        trace.phases[i].end_event = res.phases[i].end_event;
    }
    if (trace.phases.size() > res.phases.size()) trace.phases.resize(res.phases.size());
    return trace;
}

IdeReport check_ide(const CompiledGraph& g, const FlowOverTime& f) {
    IdeReport rep;
    DerivedState d = derive(g, f);

    // Exact global label functions by relaxation over piecewise-linear arithmetic.
    std::vector<Pwl> cost;
    cost.reserve(static_cast<size_t>(g.m));
    for (int e = 0; e < g.m; ++e) {
        size_t se = static_cast<size_t>(e);
        Pwl c = d.queue[se].scaled(Rational(1) / g.nu[se]);
        cost.push_back(pwl_add(c, Pwl::constant(g.tau[se])));
    }
    // Worklist relaxation: whenever a node's label function drops, re-relax the
    // edges into it. Positive costs guarantee a fixpoint (shortest walks use at
    // most |V|-1 edges pointwise).
    std::vector<std::optional<Pwl>> label(static_cast<size_t>(g.n));
    label[static_cast<size_t>(g.sink)] = Pwl::constant(Rational(0));
    std::deque<int> work{g.sink};
    std::vector<bool> queued(static_cast<size_t>(g.n), false);
    queued[static_cast<size_t>(g.sink)] = true;
    while (!work.empty()) {
        int w = work.front();
        work.pop_front();
        queued[static_cast<size_t>(w)] = false;
        for (int e : g.in[static_cast<size_t>(w)]) {
            size_t se = static_cast<size_t>(e);
            int v = g.tail[se];
            Pwl cand = pwl_add(*label[static_cast<size_t>(w)], cost[se]);
            auto& lv = label[static_cast<size_t>(v)];
            bool changed = false;
            if (!lv) {
                lv = std::move(cand);
                changed = true;
            } else {
                Pwl m = pwl_min(*lv, cand);
                if (!(m == *lv)) {
                    lv = std::move(m);
                    changed = true;
                }
            }
            if (changed && !queued[static_cast<size_t>(v)]) {
                queued[static_cast<size_t>(v)] = true;
                work.push_back(v);
            }
        }
    }

    // Refine the timeline so every f+ is constant and every queue linear per piece,
    // then demand tightness as a function identity wherever an edge carries flow.
    std::vector<Rational> cuts;
    for (int e = 0; e < g.m; ++e) {
        for (const auto& b : f.in(g.edge_id(e)).breakpoints()) cuts.push_back(b);
        for (const auto& b : d.queue[static_cast<size_t>(e)].breakpoints()) cuts.push_back(b);
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    if (cuts.empty()) return rep;

    // Pieces are independent; check them in parallel chunks and keep the
    // violation order deterministic by concatenating chunk results in order.
    auto check_range = [&](size_t lo, size_t hi) {
        std::vector<IdeViolation> out;
        for (size_t i = lo; i < hi && i + 1 < cuts.size(); ++i) {
            const Rational& a = cuts[i];
            const Rational& b = cuts[i + 1];
            Rational mid = (a + b) / 2;
            for (int e = 0; e < g.m; ++e) {
                size_t se = static_cast<size_t>(e);
                if (!(f.in(g.edge_id(e))(mid) > 0)) continue;
                const auto& lv = label[static_cast<size_t>(g.tail[se])];
                const auto& lw = label[static_cast<size_t>(g.head[se])];
                if (!lv || !lw) {
                    out.push_back(
                        {g.edge_id(e), a, b, "flow on an edge with unreachable endpoint"});
                    continue;
                }
                Pwl rhs = pwl_add(*lw, cost[se]);
                if (!lv->equals_on(rhs, a, b)) {
                    out.push_back({g.edge_id(e), a, b,
                                   "edge carries flow while not tight: l_v(a)=" +
                                       to_string((*lv)(a)) + " vs l_w+c=" + to_string(rhs(a))});
                }
            }
        }
        return out;
    };
    size_t pieces = cuts.size() - 1;
    size_t workers = std::min<size_t>(std::max(1u, std::thread::hardware_concurrency()), 8);
    if (pieces < 16 || workers < 2) {
        rep.violations = check_range(0, pieces);
        return rep;
    }
    size_t chunk = (pieces + workers - 1) / workers;
    std::vector<std::future<std::vector<IdeViolation>>> futures;
    for (size_t lo = 0; lo < pieces; lo += chunk)
        futures.push_back(std::async(std::launch::async, check_range, lo,
                                     std::min(pieces, lo + chunk)));
    for (auto& fut : futures) {
        auto part = fut.get();
        rep.violations.insert(rep.violations.end(), part.begin(), part.end());
    }
    return rep;
}

}  // namespace ideflow
