#include "ideflow/instance.hpp"

#include <algorithm>
#include <deque>
#include <queue>
#include <set>
#include <stdexcept>

namespace ideflow {

Rational Instance::theta0() const {
    Rational t(0);
    for (const auto& [node, u] : inflows) {
        (void)node;
        if (!u.is_zero()) t = rat_max(t, u.last_breakpoint());
    }
    return t;
}

Rational Instance::total_volume() const {
    Rational vol(0);
    for (const auto& [node, u] : inflows) {
        (void)node;
        if (u.is_zero() || !u.has_bounded_support()) continue;
        vol += stepfn_integrate(u)(u.last_breakpoint());
    }
    return vol;
}

bool Instance::has_node(const std::string& n) const {
    return std::find(nodes.begin(), nodes.end(), n) != nodes.end();
}

ValidationReport validate(const Instance& inst) {
    ValidationReport rep;
    auto err = [&](std::string rule, std::string subject, std::string detail) {
        rep.errors.push_back({std::move(rule), std::move(subject), std::move(detail), false});
    };
    auto warn = [&](std::string rule, std::string subject, std::string detail) {
        rep.warnings.push_back({std::move(rule), std::move(subject), std::move(detail), true});
    };

    std::set<std::string> node_set(inst.nodes.begin(), inst.nodes.end());
    if (node_set.size() != inst.nodes.size()) err("node-unique", "", "duplicate node names");
    if (!node_set.count(inst.sink)) err("sink-exists", inst.sink, "sink is not a node");

    std::set<std::string> edge_ids;
    for (const auto& e : inst.edges) {
        if (!edge_ids.insert(e.id).second) err("edge-id-unique", e.id, "duplicate edge id");
        if (!node_set.count(e.tail)) err("edge-endpoint", e.id, "unknown tail " + e.tail);
        if (!node_set.count(e.head)) err("edge-endpoint", e.id, "unknown head " + e.head);
        if (e.tail == e.head) err("no-self-loop", e.id, "self-loop");
        if (!(e.tau > 0)) err("tau-positive", e.id, "tau = " + to_string(e.tau));
        if (!(e.nu > 0)) err("nu-positive", e.id, "nu = " + to_string(e.nu));
    }

    for (const auto& [node, u] : inst.inflows) {
        if (!node_set.count(node)) {
            err("inflow-node", node, "inflow at unknown node");
            continue;
        }
        if (node == inst.sink) err("inflow-at-sink", node, "inflow at the sink");
        if (!u.nonnegative()) err("inflow-nonnegative", node, "negative inflow rate");
        if (!u.has_bounded_support()) err("inflow-bounded", node, "unbounded inflow support");
    }

    if (!rep.errors.empty()) return rep;  // structural errors make reachability moot

    // Reverse reachability from the sink.
    std::map<std::string, std::vector<std::string>> rev;
    for (const auto& e : inst.edges) rev[e.head].push_back(e.tail);
    std::set<std::string> reaches;
    std::deque<std::string> q{inst.sink};
    reaches.insert(inst.sink);
    while (!q.empty()) {
        auto v = q.front();
        q.pop_front();
        for (const auto& u : rev[v])
            if (reaches.insert(u).second) q.push_back(u);
    }
    for (const auto& v : inst.nodes) {
        if (reaches.count(v)) continue;
        auto it = inst.inflows.find(v);
        bool has_inflow = it != inst.inflows.end() && !it->second.is_zero();
        if (has_inflow)
            err("sink-reachability", v, "node with inflow cannot reach the sink");
        else
            warn("sink-reachability", v, "node cannot reach the sink (no inflow)");
    }
    return rep;
}

std::pair<Instance, Rational> normalize_time_origin(const Instance& inst) {
    bool any = false;
    Rational earliest(0);
    for (const auto& [node, u] : inst.inflows) {
        (void)node;
        if (u.is_zero()) continue;
        if (!any || u.left_bound() < earliest) earliest = u.left_bound();
        any = true;
    }
    Rational offset = any ? Rational(-earliest) : Rational(0);
    if (offset == 0) return {inst, Rational(0)};
    Instance out = inst;
    for (auto& [node, u] : out.inflows) {
        (void)node;
        u = u.shifted(offset);
    }
    return {out, offset};
}

Rational total_tau(const Instance& inst) {
    Rational s(0);
    for (const auto& e : inst.edges) s += e.tau;
    return s;
}

bool is_acyclic(const Instance& inst) {
    CompiledGraph g = CompiledGraph::build(inst);
    std::vector<int> indeg(static_cast<size_t>(g.n), 0);
    for (int e = 0; e < g.m; ++e) ++indeg[static_cast<size_t>(g.head[static_cast<size_t>(e)])];
    std::deque<int> q;
    for (int v = 0; v < g.n; ++v)
        if (indeg[static_cast<size_t>(v)] == 0) q.push_back(v);
    int seen = 0;
    while (!q.empty()) {
        int v = q.front();
        q.pop_front();
        ++seen;
        for (int e : g.out[static_cast<size_t>(v)])
            if (--indeg[static_cast<size_t>(g.head[static_cast<size_t>(e)])] == 0)
                q.push_back(g.head[static_cast<size_t>(e)]);
    }
    return seen == g.n;
}

LongestPathTau longest_path_tau(const Instance& inst) {
    if (!is_acyclic(inst)) return {total_tau(inst), false};
    CompiledGraph g = CompiledGraph::build(inst);
    // Longest tau-path to the sink over nodes that can reach it, in reverse
    // topological order of the forward graph.
    std::vector<int> order;
    {
        std::vector<int> indeg(static_cast<size_t>(g.n), 0);
        for (int e = 0; e < g.m; ++e) ++indeg[static_cast<size_t>(g.head[static_cast<size_t>(e)])];
        std::deque<int> q;
        for (int v = 0; v < g.n; ++v)
            if (indeg[static_cast<size_t>(v)] == 0) q.push_back(v);
        while (!q.empty()) {
            int v = q.front();
            q.pop_front();
            order.push_back(v);
            for (int e : g.out[static_cast<size_t>(v)])
                if (--indeg[static_cast<size_t>(g.head[static_cast<size_t>(e)])] == 0)
                    q.push_back(g.head[static_cast<size_t>(e)]);
        }
    }
    std::vector<bool> reach(static_cast<size_t>(g.n), false);
    std::vector<Rational> best(static_cast<size_t>(g.n), Rational(0));
    reach[static_cast<size_t>(g.sink)] = true;
    Rational global(0);
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        int v = *it;
        for (int e : g.out[static_cast<size_t>(v)]) {
            int w = g.head[static_cast<size_t>(e)];
            if (!reach[static_cast<size_t>(w)]) continue;
            Rational cand = g.tau[static_cast<size_t>(e)] + best[static_cast<size_t>(w)];
            if (!reach[static_cast<size_t>(v)] || cand > best[static_cast<size_t>(v)]) {
                reach[static_cast<size_t>(v)] = true;
                best[static_cast<size_t>(v)] = cand;
            }
        }
        if (reach[static_cast<size_t>(v)] && best[static_cast<size_t>(v)] > global)
            global = best[static_cast<size_t>(v)];
    }
    return {global, true};
}

CompiledGraph CompiledGraph::build(const Instance& inst) {
    CompiledGraph g;
    g.inst = &inst;
    g.n = static_cast<int>(inst.nodes.size());
    g.m = static_cast<int>(inst.edges.size());
    for (int v = 0; v < g.n; ++v) g.node_index[inst.nodes[static_cast<size_t>(v)]] = v;
    g.out.resize(static_cast<size_t>(g.n));
    g.in.resize(static_cast<size_t>(g.n));
    for (int e = 0; e < g.m; ++e) {
        const Edge& ed = inst.edges[static_cast<size_t>(e)];
        g.edge_index[ed.id] = e;
        int t = g.node_index.at(ed.tail), h = g.node_index.at(ed.head);
        g.tail.push_back(t);
        g.head.push_back(h);
        g.tau.push_back(ed.tau);
        g.nu.push_back(ed.nu);
        g.out[static_cast<size_t>(t)].push_back(e);
        g.in[static_cast<size_t>(h)].push_back(e);
    }
    auto it = g.node_index.find(inst.sink);
    g.sink = it == g.node_index.end() ? -1 : it->second;
    return g;
}

std::vector<std::pair<int, Rational>> physical_distances(const CompiledGraph& g) {
    // Dijkstra on reversed edges from the sink with weights tau.
    std::vector<std::pair<int, Rational>> dist;
    if (g.sink < 0) return dist;
    std::vector<bool> done(static_cast<size_t>(g.n), false);
    std::map<int, Rational> d;
    d[g.sink] = Rational(0);
    using QE = std::pair<Rational, int>;
    auto cmp = [](const QE& a, const QE& b) { return a.first > b.first; };
    std::priority_queue<QE, std::vector<QE>, decltype(cmp)> pq(cmp);
    pq.push({Rational(0), g.sink});
    while (!pq.empty()) {
        auto [dv, v] = pq.top();
        pq.pop();
        if (done[static_cast<size_t>(v)]) continue;
        done[static_cast<size_t>(v)] = true;
        dist.push_back({v, dv});
        for (int e : g.in[static_cast<size_t>(v)]) {
            int u = g.tail[static_cast<size_t>(e)];
            Rational nd = dv + g.tau[static_cast<size_t>(e)];
            auto it = d.find(u);
            if (it == d.end() || nd < it->second) {
                d[u] = nd;
                pq.push({nd, u});
            }
        }
    }
    return dist;
}

}  // namespace ideflow
