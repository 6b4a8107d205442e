#include "ideflow/generators.hpp"

#include <random>
#include <stdexcept>

namespace ideflow {

namespace {
std::string num(long v) { return std::to_string(v); }
Rational half() { return Rational(1, 2); }
}  // namespace

Instance gen_example_fig1() {
    Instance inst;
    inst.nodes = {"s1", "v", "s2", "t"};
    inst.sink = "t";
    inst.edges = {
        {"s1v", "s1", "v", Rational(1), Rational(2)},
        {"s1t", "s1", "t", Rational(3), Rational(1)},
        {"vs2", "v", "s2", Rational(1), Rational(2)},
        {"s2t", "s2", "t", Rational(1), Rational(1)},
        {"s2s1", "s2", "s1", Rational(1), Rational(1)},
    };
    inst.inflows["s1"] = StepFn::pulse(Rational(0), Rational(1), Rational(3));
    inst.inflows["s2"] = StepFn::pulse(Rational(1), Rational(2), Rational(4));
    return inst;
}

BlockingFragment gen_blocking_gadget(int K, int k, const std::string& prefix) {
    if (k < 1 || k > K) throw std::invalid_argument("gen_blocking_gadget: need 1 <= k <= K");
    BlockingFragment f;
    long entries = int_pow(3, static_cast<unsigned>(k)).convert_to<long>();
    if (k == 1) {
        f.exit = prefix + "v0";
        f.nodes.push_back(f.exit);
        for (long j = 1; j <= 3; ++j) {
            std::string v = prefix + "v" + num(j);
            f.nodes.push_back(v);
            f.entries.push_back(v);
            f.edges.push_back({prefix + "p" + num(j), v, f.exit, Rational(1), Rational(1)});
        }
        return f;
    }
    BlockingFragment sub = gen_blocking_gadget(K, k - 1, prefix + "s:");
    f.nodes = sub.nodes;
    f.edges = sub.edges;
    f.exit = sub.exit;
    // tau of the connecting edges e'_{j'}.
    Rational tau_conn = pow3(static_cast<unsigned>(K + 1)) + pow3(static_cast<unsigned>(K - k + 1)) -
                        pow3(static_cast<unsigned>(K - k));
    for (long j = 1; j <= entries; ++j) {
        std::string v = prefix + "v" + num(j);
        f.nodes.push_back(v);
        f.entries.push_back(v);
    }
    for (long jp = 1; jp <= entries / 3; ++jp) {
        std::string w = prefix + "w" + num(jp);
        f.nodes.push_back(w);
        for (long r = 0; r < 3; ++r) {
            long j = (jp - 1) * 3 + r + 1;
            f.edges.push_back(
                {prefix + "c" + num(j), f.entries[static_cast<size_t>(j - 1)], w, Rational(1), Rational(1)});
        }
        f.edges.push_back({prefix + "ep" + num(jp), w, sub.entries[static_cast<size_t>(jp - 1)],
                           tau_conn, Rational(3)});
    }
    return f;
}

Rational blocking_path_tau(int K, int k) {
    return Rational(k - 1) * (pow3(static_cast<unsigned>(K + 1)) + 1) + 1 -
           pow3(static_cast<unsigned>(K - k)) + pow3(static_cast<unsigned>(K - 1));
}

Rational blocking_tau_paper_sum(int K, int k) {
    Rational s(0);
    for (int kp = 1; kp <= k; ++kp)
        s += 4 * pow3(static_cast<unsigned>(kp - 1)) +
             (pow3(static_cast<unsigned>(kp + 1)) + 2) * pow3(static_cast<unsigned>(K - 1));
    return s - 11 * pow3(static_cast<unsigned>(K - 1)) - 1;
}

Rational blocking_tau_recursive(int K, int k) {
    if (k == 1) return Rational(3);
    return pow3(static_cast<unsigned>(k)) + pow3(static_cast<unsigned>(K + k)) +
           2 * pow3(static_cast<unsigned>(K - 1)) + blocking_tau_recursive(K, k - 1);
}

Rational cycling_tau_closed(int K) {
    return (Rational(3) + K) * pow3(static_cast<unsigned>(K + 1)) + 3;
}

Rational u_kl(int K, int L) {
    Rational p2 = pow3(static_cast<unsigned>(K + 2));
    return (Rational(L - 1) * (1 + p2 + 2 * K) + 4 * L * p2 + p2 + 1) / 2;
}

SlowTermination gen_slow_termination(int K, int L) {
    if (K < 1 || L < 1) throw std::invalid_argument("gen_slow_termination: need K, L >= 1");
    SlowTermination st;
    st.U = u_kl(K, L);
    Rational big = 2 * st.U;
    long n = int_pow(3, static_cast<unsigned>(K)).convert_to<long>();  // 3^K
    Instance& inst = st.inst;
    inst.sink = "t";

    auto uN = [&](long j) { return "u" + num(j); };
    auto vN = [&](long j) { return "v" + num(j); };
    auto wN = [&](long j) { return "w" + num(j); };
    auto xN = [&](long j) { return "x" + num(j); };

    for (long j = 1; j <= n; ++j) {
        inst.nodes.push_back(uN(j));
        inst.nodes.push_back(vN(j));
        inst.nodes.push_back(wN(j));
        inst.nodes.push_back(uN(j) + "p");
        inst.nodes.push_back(vN(j) + "p");
        inst.nodes.push_back(wN(j) + "p");
        inst.nodes.push_back(xN(j));
    }
    inst.nodes.push_back(uN(n + 1));
    inst.nodes.push_back(xN(n + 1));
    inst.nodes.push_back("t");
    st.source = uN(n + 1);

    auto edge = [&](const std::string& id, const std::string& a, const std::string& b,
                    Rational tau, Rational nu) { inst.edges.push_back({id, a, b, tau, nu}); };

    // Horizontal wiggle u_j -> v_j -> w_j -> u_{j+1}, capacity 2U, length 1 each.
    for (long j = 1; j <= n; ++j) {
        edge("ck:" + uN(j) + ">" + vN(j), uN(j), vN(j), Rational(1), big);
        edge("ck:" + vN(j) + ">" + wN(j), vN(j), wN(j), Rational(1), big);
        edge("ck:" + wN(j) + ">" + uN(j + 1), wN(j), uN(j + 1), Rational(1), big);
    }
    // Vertical stubs: capacity 3 down to the primes, capacity 1 into the x_j.
    for (long j = 1; j <= n; ++j) {
        for (const std::string& base : {uN(j), vN(j), wN(j)}) {
            edge("ck:" + base + ">" + base + "p", base, base + "p", Rational(1), Rational(3));
            edge("ck:" + base + "p>" + xN(j), base + "p", xN(j), Rational(1), Rational(1));
        }
    }
    // Shortcut edges u_{(j-1)3^k+1} -> u_{j 3^k+1}, length 3^{k+1}, matching the
    // physical length of the wiggle path they bypass.
    for (int kk = 0; kk < K; ++kk) {
        long step = int_pow(3, static_cast<unsigned>(kk)).convert_to<long>();
        long count = int_pow(3, static_cast<unsigned>(K - kk)).convert_to<long>();
        for (long j = 1; j <= count; ++j) {
            long a = (j - 1) * step + 1, b = j * step + 1;
            edge("ck:sc" + num(kk) + ":" + uN(a) + ">" + uN(b), uN(a), uN(b),
                 pow3(static_cast<unsigned>(kk + 1)), big);
        }
    }
    edge("ck:" + uN(n + 1) + ">" + xN(n + 1), uN(n + 1), xN(n + 1), Rational(2), Rational(1));
    edge("ck:" + uN(n + 1) + ">" + uN(1), uN(n + 1), uN(1), Rational(1), big);

    // Blocking gadget and the connecting edges.
    BlockingFragment bk = gen_blocking_gadget(K, K);
    for (const auto& nd : bk.nodes) inst.nodes.push_back(nd);
    for (const auto& e : bk.edges) inst.edges.push_back(e);

    st.tau_e1 = pow3(static_cast<unsigned>(K + 1)) - 5;
    for (long j = 1; j <= n; ++j)
        edge("ej:" + num(j), xN(j), bk.entries[static_cast<size_t>(j - 1)], st.tau_e1, Rational(3));
    edge("e0", bk.exit, "t", Rational(1), Rational(3));

    st.tau_p1 = blocking_path_tau(K, K);
    st.tau_efinal = st.tau_e1 + st.tau_p1 + 1;
    edge("efinal", xN(n + 1), "t", st.tau_efinal, Rational(1));

    inst.inflows[st.source] = StepFn::pulse(-half(), Rational(0), big);
    return st;
}

PoaInstance gen_poa_instance(int K, int L) {
    SlowTermination st = gen_slow_termination(K, L);
    PoaInstance p;
    p.U = st.U;
    p.epsilon = (Rational(4) + st.tau_efinal) / (2 * st.U);
    p.inflow_rate = 2 * st.U + 1;
    p.source = "s";
    p.inst = std::move(st.inst);
    Instance& inst = p.inst;
    inst.nodes.push_back("v");
    inst.nodes.push_back("s");
    inst.edges.push_back({"sv", "s", "v", Rational(1), p.inflow_rate});
    inst.edges.push_back({"vu", "v", st.source, Rational(1), p.inflow_rate});
    inst.edges.push_back({"st", "s", "t", Rational(3), p.inflow_rate});
    inst.edges.push_back({"vt", "v", "t", Rational(1), Rational(1)});
    inst.inflows.clear();
    inst.inflows["s"] = StepFn::pulse(-half() - p.epsilon, Rational(0), p.inflow_rate);
    return p;
}

Instance gen_random_instance(uint64_t seed, int max_nodes, bool acyclic) {
    std::mt19937_64 rng(seed);
    auto pick = [&](int lo, int hi) {
        return std::uniform_int_distribution<int>(lo, hi)(rng);
    };
    Instance inst;
    int n = pick(2, max_nodes < 2 ? 2 : max_nodes);
    for (int i = 0; i + 1 < n; ++i) inst.nodes.push_back("n" + std::to_string(i));
    inst.nodes.push_back("t");
    inst.sink = "t";
    int edge_seq = 0;
    auto add_edge = [&](int a, int b) {
        Edge e;
        e.id = "e" + std::to_string(edge_seq++);
        e.tail = inst.nodes[static_cast<size_t>(a)];
        e.head = inst.nodes[static_cast<size_t>(b)];
        e.tau = Rational(pick(1, 3));
        e.nu = Rational(pick(1, 3));
        inst.edges.push_back(e);
    };
    // Every node gets a forward edge, so the sink is reachable from everywhere.
    for (int i = 0; i + 1 < n; ++i) add_edge(i, pick(i + 1, n - 1));
    int extra = pick(0, n);
    for (int i = 0; i < extra; ++i) {
        int a = pick(0, n - 2);
        int b = pick(a + 1, n - 1);
        if (a != b) add_edge(a, b);
    }
    if (!acyclic && n >= 3) {
        int backs = pick(1, 2);
        for (int i = 0; i < backs; ++i) {
            int a = pick(1, n - 2);
            int b = pick(0, a - 1);
            add_edge(a, b);
        }
    }
    int sources = pick(1, std::min(3, n - 1));
    for (int i = 0; i < sources; ++i) {
        int v = pick(0, n - 2);
        Rational start = Rational(pick(0, 2), 2);  // 0, 1/2 or 1
        Rational len = Rational(pick(1, 4), 2);
        Rational rate = Rational(pick(1, 4));
        StepFn pulse = StepFn::pulse(start, start + len, rate);
        auto& slot = inst.inflows[inst.nodes[static_cast<size_t>(v)]];
        slot = slot.is_zero() ? pulse : step_add(slot, pulse);
    }
    return inst;
}

}  // namespace ideflow
