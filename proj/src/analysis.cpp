#include "ideflow/analysis.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <set>
#include <stdexcept>

#include "ideflow/phase_sim.hpp"

namespace ideflow {

// ---------------------------------------------------------------------------
// sink-like subgraphs

SinkLikeResult sink_like_check(const CompiledGraph& g, const DerivedState& d,
                               const SinkLikeQuery& q) {
    SinkLikeResult r;
    std::set<int> T;
    for (const auto& name : q.nodes) T.insert(g.node_index.at(name));
    if (!T.count(g.sink)) throw std::invalid_argument("sink_like_check: set must contain the sink");
    if (!(q.t1 <= q.t2)) throw std::invalid_argument("sink_like_check: t1 > t2");

    r.vol = 0;
    for (int e = 0; e < g.m; ++e) {
        size_t se = static_cast<size_t>(e);
        bool tail_in = T.count(g.tail[se]), head_in = T.count(g.head[se]);
        if (tail_in && head_in) r.vol += d.load[se](q.t1);
        if (!tail_in && head_in)
            r.vol += d.F_minus[se](q.t2) - d.F_minus[se](q.t1);
    }
    for (const auto& [node, U] : d.U_cum) {
        int v = g.node_index.at(node);
        if (v != g.sink && T.count(v)) r.vol += U(q.t2) - U(q.t1);
    }
    r.volume_ok = r.vol < Rational(1, 2);

    // Containment: every shortest-path-DAG edge out of a member stays inside.
    auto dists = physical_distances(g);
    std::vector<std::optional<Rational>> dist(static_cast<size_t>(g.n));
    for (const auto& [v, dv] : dists) dist[static_cast<size_t>(v)] = dv;
    r.shortest_paths_contained = true;
    for (int e = 0; e < g.m; ++e) {
        size_t se = static_cast<size_t>(e);
        int v = g.tail[se], w = g.head[se];
        if (!T.count(v) || T.count(w)) continue;
        const auto& dv = dist[static_cast<size_t>(v)];
        const auto& dw = dist[static_cast<size_t>(w)];
        if (dv && dw && *dv == g.tau[se] + *dw) {
            r.shortest_paths_contained = false;
            r.escape_edges.push_back(g.edge_id(e));
        }
    }
    return r;
}

// ---------------------------------------------------------------------------
// acyclic arrival bound

Rational acyclic_arrival_check(const CompiledGraph& g, const DerivedState& d, const Rational& zeta,
                               const Rational& theta) {
    if (!is_acyclic(*g.inst))
        throw std::invalid_argument("acyclic_arrival_check: instance has a cycle");
    if (!(zeta <= theta)) throw std::invalid_argument("acyclic_arrival_check: zeta > theta");
    Rational tp = longest_path_tau(*g.inst).value;
    Rational bound = rat_min(d.F_delta(zeta), theta - zeta - tp);
    return d.Z(theta) - d.Z(zeta) - bound;
}

// ---------------------------------------------------------------------------
// termination certificate

TerminationCertificate termination_certificate(const Instance& inst, const Rational& mksp,
                                               const Rational& psi) {
    TerminationCertificate c;
    Rational U = inst.total_volume();
    Rational nu_min;
    bool first = true;
    Rational sum_term(0);
    for (const auto& e : inst.edges) {
        sum_term += e.tau + Rational(1) / (2 * e.nu);
        if (first || e.nu < nu_min) nu_min = e.nu;
        first = false;
    }
    c.u_effective = (!first && nu_min < 1) ? U / nu_min : U;
    auto lp = longest_path_tau(inst);
    c.tau_pmax = lp.value;
    c.tau_pmax_exact = lp.exact;
    c.theta_hat = inst.theta0() + 2 * c.u_effective * sum_term + c.tau_pmax + Rational(1, 2);
    c.makespan = mksp;
    c.makespan_ok = mksp <= c.theta_hat;
    Rational ceil3u(rat_ceil(3 * c.u_effective));
    c.psi_bound = ceil3u * c.u_effective * (2 * c.tau_pmax + sum_term + 1);
    c.psi = psi;
    c.psi_ok = psi <= c.psi_bound;
    return c;
}

// ---------------------------------------------------------------------------
// time-expanded optimal-flow bounds

namespace {

// Max-flow with exact rational capacities and optional small integer arc costs.
// Dinic for plain max flow; successive shortest augmenting paths (SPFA) for the
// cost-minimal max flow used to extract a detour-free routing plan.
class RationalMaxFlow {
   public:
    int add_node() {
        adj_.emplace_back();
        return static_cast<int>(adj_.size()) - 1;
    }
    int add_arc(int from, int to, Rational cap, long cost = 0) {
        adj_[static_cast<size_t>(from)].push_back(static_cast<int>(arcs_.size()));
        arcs_.push_back({to, std::move(cap), Rational(0), cost});
        adj_[static_cast<size_t>(to)].push_back(static_cast<int>(arcs_.size()));
        arcs_.push_back({from, Rational(0), Rational(0), -cost});
        return static_cast<int>(arcs_.size()) - 2;
    }
    Rational flow_on(int arc) const { return arcs_[static_cast<size_t>(arc)].flow; }

    // Augments from s to t until exhaustion; returns the added flow value.
    Rational augment_to_max(int s, int t) {
        Rational added(0);
        while (bfs(s, t)) {
            iter_.assign(adj_.size(), 0);
            while (true) {
                Rational pushed = dfs(s, t, std::nullopt);
                if (pushed == 0) break;
                added += pushed;
            }
        }
        return added;
    }

    // Maximum flow of minimum total cost (successive cheapest paths).
    Rational min_cost_max_flow(int s, int t) {
        Rational added(0);
        while (true) {
            // SPFA over the residual graph; costs are small integers.
            const long INF = std::numeric_limits<long>::max() / 4;
            std::vector<long> dist(adj_.size(), INF);
            std::vector<int> pre_arc(adj_.size(), -1);
            std::vector<bool> inq(adj_.size(), false);
            std::deque<int> q{s};
            dist[static_cast<size_t>(s)] = 0;
            inq[static_cast<size_t>(s)] = true;
            while (!q.empty()) {
                int v = q.front();
                q.pop_front();
                inq[static_cast<size_t>(v)] = false;
                for (int id : adj_[static_cast<size_t>(v)]) {
                    const Arc& a = arcs_[static_cast<size_t>(id)];
                    if (!(a.cap - a.flow > 0)) continue;
                    long nd = dist[static_cast<size_t>(v)] + a.cost;
                    if (nd < dist[static_cast<size_t>(a.to)]) {
                        dist[static_cast<size_t>(a.to)] = nd;
                        pre_arc[static_cast<size_t>(a.to)] = id;
                        if (!inq[static_cast<size_t>(a.to)]) {
                            inq[static_cast<size_t>(a.to)] = true;
                            q.push_back(a.to);
                        }
                    }
                }
            }
            if (pre_arc[static_cast<size_t>(t)] < 0) break;
            Rational push;
            bool first = true;
            for (int v = t; v != s;) {
                const Arc& a = arcs_[static_cast<size_t>(pre_arc[static_cast<size_t>(v)])];
                Rational res = a.cap - a.flow;
                if (first || res < push) push = res;
                first = false;
                v = arcs_[static_cast<size_t>(pre_arc[static_cast<size_t>(v)] ^ 1)].to;
            }
            for (int v = t; v != s;) {
                int id = pre_arc[static_cast<size_t>(v)];
                arcs_[static_cast<size_t>(id)].flow += push;
                arcs_[static_cast<size_t>(id ^ 1)].flow -= push;
                v = arcs_[static_cast<size_t>(id ^ 1)].to;
            }
            added += push;
        }
        return added;
    }

   private:
    struct Arc {
        int to;
        Rational cap;
        Rational flow;
        long cost;
    };
    std::vector<Arc> arcs_;
    std::vector<std::vector<int>> adj_;
    std::vector<int> level_;
    std::vector<size_t> iter_;

    bool bfs(int s, int t) {
        level_.assign(adj_.size(), -1);
        std::deque<int> q{s};
        level_[static_cast<size_t>(s)] = 0;
        while (!q.empty()) {
            int v = q.front();
            q.pop_front();
            for (int id : adj_[static_cast<size_t>(v)]) {
                const Arc& a = arcs_[static_cast<size_t>(id)];
                if (a.cap - a.flow > 0 && level_[static_cast<size_t>(a.to)] < 0) {
                    level_[static_cast<size_t>(a.to)] = level_[static_cast<size_t>(v)] + 1;
                    q.push_back(a.to);
                }
            }
        }
        return level_[static_cast<size_t>(t)] >= 0;
    }

    Rational dfs(int v, int t, std::optional<Rational> limit) {
        if (v == t) return limit ? *limit : Rational(0);
        for (size_t& i = iter_[static_cast<size_t>(v)]; i < adj_[static_cast<size_t>(v)].size();
             ++i) {
            int id = adj_[static_cast<size_t>(v)][i];
            Arc& a = arcs_[static_cast<size_t>(id)];
            Rational residual = a.cap - a.flow;
            if (residual <= 0 || level_[static_cast<size_t>(a.to)] !=
                                     level_[static_cast<size_t>(v)] + 1)
                continue;
            std::optional<Rational> sub_limit =
                limit ? std::optional<Rational>(rat_min(*limit, residual))
                      : std::optional<Rational>(residual);
            Rational pushed = dfs(a.to, t, sub_limit);
            if (pushed > 0) {
                a.flow += pushed;
                arcs_[static_cast<size_t>(id ^ 1)].flow -= pushed;
                return pushed;
            }
        }
        level_[static_cast<size_t>(v)] = -2;
        return Rational(0);
    }
};

// Replays a time-expanded plan through the real queueing dynamics: arrivals at a
// node enter the out-edges the plan departs on in that window (or the next
// window with planned departures), and the queues realize the plan's waiting.
class PlanReplay {
   public:
    PlanReplay(const CompiledGraph& g, Rational delta,
               std::vector<std::map<int, Rational>> departures)
        : g_(g), delta_(std::move(delta)), dep_(std::move(departures)) {
        auto dists = physical_distances(g);
        shortest_out_.assign(static_cast<size_t>(g.n), -1);
        std::vector<std::optional<Rational>> dist(static_cast<size_t>(g.n));
        for (const auto& [v, dv] : dists) dist[static_cast<size_t>(v)] = dv;
        for (int v = 0; v < g.n; ++v) {
            for (int e : g.out[static_cast<size_t>(v)]) {
                size_t se = static_cast<size_t>(e);
                const auto& dw = dist[static_cast<size_t>(g.head[se])];
                const auto& dv = dist[static_cast<size_t>(v)];
                if (dv && dw && *dv == g.tau[se] + *dw) {
                    shortest_out_[static_cast<size_t>(v)] = e;
                    break;
                }
            }
        }
    }

    std::vector<Rational> operator()(const PhaseSim::Snapshot& snap) {
        std::vector<Rational> x(static_cast<size_t>(g_.m), Rational(0));
        long w0 = window_of(snap.time);
        for (int v = 0; v < g_.n; ++v) {
            if (v == g_.sink) continue;
            const Rational& b = snap.b[static_cast<size_t>(v)];
            if (b == 0) continue;
            // First window at or after the current one with planned departures.
            const std::map<int, Rational>* plan = nullptr;
            for (long w = w0; w >= 0 && w < static_cast<long>(dep_.size()); ++w) {
                auto& m = dep_[static_cast<size_t>(w)];
                Rational total(0);
                bool mine = false;
                for (const auto& [e, val] : m)
                    if (g_.tail[static_cast<size_t>(e)] == v && val > 0) {
                        total += val;
                        mine = true;
                    }
                if (mine && total > 0) {
                    plan = &m;
                    break;
                }
            }
            if (plan) {
                Rational total(0);
                for (const auto& [e, val] : *plan)
                    if (g_.tail[static_cast<size_t>(e)] == v) total += val;
                for (const auto& [e, val] : *plan)
                    if (g_.tail[static_cast<size_t>(e)] == v)
                        x[static_cast<size_t>(e)] = b * val / total;
            } else {
                int e = shortest_out_[static_cast<size_t>(v)];
                if (e < 0) throw std::runtime_error("plan replay: stranded volume");
                x[static_cast<size_t>(e)] = b;
            }
        }
        return x;
    }

    // Window boundaries are phase events so the proportions stay aligned.
    std::optional<Rational> next_window_boundary(const Rational& t) const {
        long w = window_of(t);
        if (w + 1 >= static_cast<long>(dep_.size())) return std::nullopt;
        return Rational(w + 1) * delta_;
    }

   private:
    long window_of(const Rational& t) const {
        if (t < 0) return 0;
        return rat_floor(t / delta_).convert_to<long>();
    }
    const CompiledGraph& g_;
    Rational delta_;
    std::vector<std::map<int, Rational>> dep_;  // per window: service edge -> volume
    std::vector<int> shortest_out_;
};

}  // namespace

OptBounds opt_makespan_bounds(const CompiledGraph& g, const Rational& delta_request,
                              const Rational& horizon) {
    OptBounds out;
    const Instance& inst = *g.inst;
    Rational U = inst.total_volume();

    // Refine the grid so every travel time and inflow breakpoint is a multiple.
    Rational delta = delta_request;
    for (const auto& e : inst.edges) delta = rat_gcd(delta, e.tau);
    for (const auto& [node, u] : inst.inflows) {
        (void)node;
        for (const auto& b : u.breakpoints()) {
            if (b < 0) throw std::invalid_argument("opt_makespan_bounds: normalize first");
            if (b != 0) delta = rat_gcd(delta, b);
        }
    }
    out.delta = delta;
    if (U == 0) {
        out.bounded = true;
        out.lower = out.upper = inst.theta0();
        out.witness_travel_time = 0;
        return out;
    }

    Int window_count = rat_floor(horizon / delta) + 1;
    if (window_count > 100000000)
        throw std::invalid_argument("opt_makespan_bounds: grid too fine for the horizon");
    long max_windows = window_count.convert_to<long>();
    std::vector<long> tau_w(static_cast<size_t>(g.m));
    for (int e = 0; e < g.m; ++e)
        tau_w[static_cast<size_t>(e)] =
            rat_floor(g.tau[static_cast<size_t>(e)] / delta).convert_to<long>();

    // Full delivery is impossible before the last-injected particle of each source
    // has covered its physical distance; skip the max-flow passes before that.
    Rational earliest_full(0);
    {
        auto dists = physical_distances(g);
        std::vector<std::optional<Rational>> dist(static_cast<size_t>(g.n));
        for (const auto& [v, dv] : dists) dist[static_cast<size_t>(v)] = dv;
        for (const auto& [node, u] : inst.inflows) {
            if (u.is_zero()) continue;
            const auto& dv = dist[static_cast<size_t>(g.node_index.at(node))];
            if (dv) earliest_full = rat_max(earliest_full, u.last_breakpoint() + *dv);
        }
    }

    RationalMaxFlow mf;
    int SRC = mf.add_node(), SNK = mf.add_node();
    std::vector<std::vector<int>> copies;  // window -> node ids
    auto copy_of = [&](int v, long w) {
        return copies[static_cast<size_t>(w)][static_cast<size_t>(v)];
    };

    Rational reached(0);
    long J = -1;
    bool found = false;
    while (!found) {
        ++J;
        if (J >= max_windows) break;
        copies.emplace_back();
        for (int v = 0; v < g.n; ++v) copies.back().push_back(mf.add_node());
        for (const auto& [node, u] : inst.inflows) {
            Rational vol = u.integral(Rational(J) * delta, Rational(J + 1) * delta);
            if (vol > 0) mf.add_arc(SRC, copy_of(g.node_index.at(node), J), vol);
        }
        if (J > 0)
            for (int v = 0; v < g.n; ++v) mf.add_arc(copy_of(v, J - 1), copy_of(v, J), 2 * U);
        // Service arcs landing exactly in window J.
        for (int e = 0; e < g.m; ++e) {
            size_t se = static_cast<size_t>(e);
            long w = J - tau_w[se];
            if (w < 0) continue;
            mf.add_arc(copy_of(g.tail[se], w), copy_of(g.head[se], J), g.nu[se] * delta);
        }
        // Window J of the sink delivers by (J+1) delta.
        mf.add_arc(copy_of(g.sink, J), SNK, 2 * U);
        if (Rational(J + 1) * delta < earliest_full) continue;
        reached += mf.augment_to_max(SRC, SNK);
        if (reached == U) found = true;
    }
    if (!found) return out;  // horizon too small: unbounded report

    out.lower = Rational(J + 1) * delta;

    // Rebuild at the discovered deadline and take the max flow of minimum
    // service-arc count: it prefers direct routes and holding over equal-length
    // detours, which is exactly what replays cleanly through the queues.
    RationalMaxFlow plan_mf;
    std::vector<std::vector<int>> plan_service(static_cast<size_t>(J + 1),
                                               std::vector<int>(static_cast<size_t>(g.m), -1));
    {
        int psrc = plan_mf.add_node(), psnk = plan_mf.add_node();
        std::vector<std::vector<int>> pcopies;
        for (long w = 0; w <= J; ++w) {
            pcopies.emplace_back();
            for (int v = 0; v < g.n; ++v) pcopies.back().push_back(plan_mf.add_node());
            for (const auto& [node, u] : inst.inflows) {
                Rational vol = u.integral(Rational(w) * delta, Rational(w + 1) * delta);
                if (vol > 0)
                    plan_mf.add_arc(psrc,
                                    pcopies[static_cast<size_t>(w)]
                                           [static_cast<size_t>(g.node_index.at(node))],
                                    vol);
            }
            if (w > 0)
                for (int v = 0; v < g.n; ++v)
                    plan_mf.add_arc(pcopies[static_cast<size_t>(w - 1)][static_cast<size_t>(v)],
                                    pcopies[static_cast<size_t>(w)][static_cast<size_t>(v)],
                                    2 * U);
            for (int e = 0; e < g.m; ++e) {
                size_t se = static_cast<size_t>(e);
                long from = w - tau_w[se];
                if (from < 0) continue;
                plan_service[static_cast<size_t>(from)][se] = plan_mf.add_arc(
                    pcopies[static_cast<size_t>(from)][static_cast<size_t>(g.tail[se])],
                    pcopies[static_cast<size_t>(w)][static_cast<size_t>(g.head[se])],
                    g.nu[se] * delta, 1);
            }
            plan_mf.add_arc(pcopies[static_cast<size_t>(w)][static_cast<size_t>(g.sink)], psnk,
                            2 * U);
        }
        Rational value = plan_mf.min_cost_max_flow(psrc, psnk);
        if (value != U) throw std::logic_error("plan flow lost volume");
    }

    // Extract per-window service volumes and replay them through the dynamics.
    std::vector<std::map<int, Rational>> departures(static_cast<size_t>(J + 1));
    for (long w = 0; w <= J; ++w)
        for (int e = 0; e < g.m; ++e) {
            int arc = plan_service[static_cast<size_t>(w)][static_cast<size_t>(e)];
            if (arc < 0) continue;
            Rational fl = plan_mf.flow_on(arc);
            if (fl > 0) departures[static_cast<size_t>(w)][e] = fl;
        }
    PlanReplay replay(g, delta, std::move(departures));
    // The replay drains a finite plan through work-conserving queues; give it a
    // horizon with ample room past the plan for the queues to empty.
    Rational nu_min = g.m > 0 ? g.nu[0] : Rational(1);
    for (int e = 0; e < g.m; ++e) nu_min = rat_min(nu_min, g.nu[static_cast<size_t>(e)]);
    Rational replay_horizon = out.lower + total_tau(inst) + U / nu_min + 1;
    PhaseSim sim(g, replay_horizon);
    sim.set_extra_events([&replay](const PhaseSim::Snapshot& snap, const std::vector<Rational>&) {
        return replay.next_window_boundary(snap.time);
    });
    PhaseSim::Result res = sim.run(std::ref(replay));
    if (!res.terminated || !res.makespan) return out;  // replay failed: only `lower` is usable
    out.bounded = true;
    out.witness = std::move(res.flow);
    out.upper = *res.makespan;
    DerivedState d = derive(g, out.witness);
    out.witness_travel_time = total_travel_time(g, out.witness, d).value;
    return out;
}

Rational opt_travel_time_lower(const Instance& inst) {
    CompiledGraph g = CompiledGraph::build(inst);
    auto dists = physical_distances(g);
    std::vector<std::optional<Rational>> dist(static_cast<size_t>(g.n));
    for (const auto& [v, dv] : dists) dist[static_cast<size_t>(v)] = dv;
    Rational bound(0);
    for (const auto& [node, u] : inst.inflows) {
        if (u.is_zero()) continue;
        Rational vol = stepfn_integrate(u)(u.last_breakpoint());
        const auto& dv = dist[static_cast<size_t>(g.node_index.at(node))];
        if (dv) bound += vol * *dv;
    }
    // With tau, nu >= 1 every unit of volume spends at least one unit traveling.
    bool unit_scale = true;
    for (const auto& e : inst.edges)
        if (e.tau < 1 || e.nu < 1) unit_scale = false;
    if (unit_scale) bound = rat_max(bound, inst.total_volume());
    return bound;
}

// ---------------------------------------------------------------------------
// capacity-1 edge envelopes

Cap1Envelopes cap1_envelopes(int k, const Rational& theta0) {
    Cap1Envelopes env;
    Rational p = pow3(static_cast<unsigned>(k));
    auto at = [&](const Rational& mult) { return theta0 + mult * p; };
    env.in_lo = StepFn({at(1), at(2), at(3), at(4), at(5), at(6)},
                       {Rational(1), Rational(2), Rational(3), Rational(2), Rational(1),
                        Rational(0)});
    env.in_hi = StepFn({at(Rational(1, 2)), at(Rational(3, 2)), at(Rational(5, 2)), at(5), at(6),
                        at(7)},
                       {Rational(1), Rational(2), Rational(3), Rational(2), Rational(1),
                        Rational(0)});
    env.out_lo = StepFn::pulse(at(1) + 1, at(10) + 1, Rational(1));
    env.out_hi = StepFn::pulse(at(Rational(1, 2)) + 1, at(14) + 1, Rational(1));
    env.q_lo = Pwl({at(2), at(3), at(4), at(5), at(6), at(10)},
                   {Rational(0), p, 3 * p, 4 * p, 4 * p, Rational(0)});
    env.q_hi = Pwl({at(Rational(3, 2)), at(Rational(5, 2)), at(5), at(6), at(7), at(14)},
                   {Rational(0), p, 6 * p, 7 * p, 7 * p, Rational(0)});
    return env;
}

namespace {
bool pwl_le_global(const Pwl& a, const Pwl& b) {
    Pwl d = pwl_sub(b, a);
    for (const auto& v : d.values())
        if (v < 0) return false;
    return d.tail_slope() >= 0;
}
}  // namespace

EnvelopeReport envelope_check_cap1_edge(const StepFn& drive, int k, const Rational& theta0) {
    EnvelopeReport rep;
    Cap1Envelopes env = cap1_envelopes(k, theta0);
    rep.precondition_ok = step_le(env.in_lo, drive) && step_le(drive, env.in_hi);
    if (!rep.precondition_ok) return rep;

    Rational p = pow3(static_cast<unsigned>(k));
    EdgeResponse sim = single_edge_response(drive, Rational(1), Rational(1));
    if (!pwl_le_global(env.q_lo, sim.queue)) rep.failures.push_back("queue below lower envelope");
    if (!pwl_le_global(sim.queue, env.q_hi)) rep.failures.push_back("queue above upper envelope");
    if (!step_le(env.out_lo, sim.f_minus)) rep.failures.push_back("outflow below lower envelope");
    if (!step_le(sim.f_minus, env.out_hi)) rep.failures.push_back("outflow above upper envelope");
    // Waiting-time windows (nu = 1, so waiting time equals queue length).
    if (!(sim.queue.max_on(theta0 + 2 * p - Rational(1, 2), theta0 + 2 * p) <= p / 2))
        rep.failures.push_back("waiting window near 2*3^k exceeded");
    if (!(sim.queue.min_on(theta0 + 5 * p - Rational(1, 2), theta0 + 5 * p) >= 7 * p / 2))
        rep.failures.push_back("waiting window near 5*3^k undershot");
    if (!(sim.queue.max_on(theta0, theta0 + 5 * p) <= 6 * p))
        rep.failures.push_back("waiting cap 6*3^k exceeded");
    // Queue slope magnitude <= 2 on [theta0, theta0 + 14*3^k].
    const auto& bps = sim.queue.breakpoints();
    const auto& vals = sim.queue.values();
    Rational lo = theta0, hi = theta0 + 14 * p;
    for (size_t i = 0; i + 1 < bps.size(); ++i) {
        if (bps[i + 1] <= lo || bps[i] >= hi) continue;
        Rational slope = (vals[i + 1] - vals[i]) / (bps[i + 1] - bps[i]);
        if (rat_abs(slope) > 2) {
            rep.failures.push_back("queue slope magnitude above 2");
            break;
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------
// the two-path flow split

FlowSplitReport flow_split_check(const Rational& y, const Rational& nu, const Rational& x) {
    FlowSplitReport rep;
    if (!(y > nu) || !(x <= Rational(1, 2))) return rep;
    rep.epsilon = nu / (y - nu);
    if (!(x >= rep.epsilon)) return rep;
    rep.precondition_ok = true;

    Instance inst;
    inst.nodes = {"a", "u", "v", "up", "t"};
    inst.sink = "t";
    Rational wide = y + nu;
    inst.edges = {
        {"feed", "a", "u", Rational(1), y},
        {"uv", "u", "v", Rational(1), y},
        {"uup", "u", "up", Rational(1), nu},
        {"pu", "up", "t", Rational(1), wide},
        {"pv", "v", "t", Rational(2), wide},
    };
    inst.inflows["a"] = StepFn::pulse(Rational(0), x, y);
    // Feed outflow is y over [1, 1+x]; in the observation's clock theta0 = 1 + x.
    Rational theta0 = 1 + x;
    rep.switch_time = theta0 - x + rep.epsilon;

    CompiledGraph g = CompiledGraph::build(inst);
    IDETrace trace = compute_ide(g);
    if (!trace.terminated) {
        rep.failures.push_back("engine did not terminate");
        return rep;
    }
    rep.got_into_queue_edge = trace.flow.in("uup");
    rep.got_into_bypass = trace.flow.in("uv");
    rep.got_into_downstream = trace.flow.in("pu");

    StepFn want_queue_edge =
        rep.epsilon == x
            ? StepFn::pulse(Rational(1), theta0, y)
            : step_add(StepFn::pulse(Rational(1), rep.switch_time, y),
                       StepFn::pulse(rep.switch_time, theta0, nu));
    StepFn want_bypass = rep.epsilon == x
                             ? StepFn::zero()
                             : StepFn::pulse(rep.switch_time, theta0, y - nu);
    StepFn want_downstream = StepFn::pulse(theta0 - x + 1, theta0 + 2, nu);
    if (!(rep.got_into_queue_edge == want_queue_edge))
        rep.failures.push_back("inflow into the capacity-nu edge deviates from the split");
    if (!(rep.got_into_bypass == want_bypass))
        rep.failures.push_back("inflow into the bypass deviates from the split");
    if (!(rep.got_into_downstream == want_downstream))
        rep.failures.push_back("arrival downstream deviates from the split");
    return rep;
}

// ---------------------------------------------------------------------------
// instance-level report

PoaReport poa_report(const Instance& raw, const Rational& delta,
                     const std::optional<Rational>& horizon) {
    auto [inst, offset] = normalize_time_origin(raw);
    PoaReport rep;
    rep.normalization_offset = offset;
    CompiledGraph g = CompiledGraph::build(inst);

    EngineOptions opts;
    opts.horizon = horizon;
    IDETrace trace = compute_ide(g, opts);
    rep.ide_terminated = trace.terminated;
    rep.phase_count = static_cast<long>(trace.phases.size());
    if (!trace.terminated) return rep;

    DerivedState d = derive(g, trace.flow);
    rep.ide_makespan = trace.makespan;
    rep.ide_travel_time = total_travel_time(g, trace.flow, d).value;
    rep.ide_total_delay = total_delay(g, trace.flow, d);
    rep.certificate =
        termination_certificate(inst, *trace.makespan, rep.ide_travel_time);

    Rational opt_horizon = *trace.makespan + 1;  // OPT can never need more than the IDE
    rep.opt = opt_makespan_bounds(g, delta, opt_horizon);
    rep.opt_travel_time_lb = opt_travel_time_lower(inst);
    if (rep.opt.bounded) {
        if (rep.opt.upper > 0) rep.makespan_ratio_lower = *rep.ide_makespan / rep.opt.upper;
        if (rep.opt.witness_travel_time > 0)
            rep.travel_ratio_lower = rep.ide_travel_time / rep.opt.witness_travel_time;
    }
    return rep;
}

}  // namespace ideflow
