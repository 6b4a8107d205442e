#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ideflow/instance.hpp"

namespace ideflow {

// The motivating two-source instance: nodes {s1, v, s2, t}, edges
// s1v (1,2), s1t (3,1), vs2 (1,2), s2t (1,1), s2s1 (1,1),
// inflows u_s1 = 3*1_[0,1), u_s2 = 4*1_[1,2).
Instance gen_example_fig1();

// An open blocking gadget B_{K,k}: entry nodes are the heads of the (external)
// edges e_1..e_{3^k}; the exit node is the tail of the (external) edge e_0.
struct BlockingFragment {
    std::vector<std::string> nodes;
    std::vector<Edge> edges;
    std::vector<std::string> entries;
    std::string exit;
};

// Throws std::invalid_argument unless 1 <= k <= K.
BlockingFragment gen_blocking_gadget(int K, int k, const std::string& prefix = "bk:");

// Closed forms used by the structural checks.
Rational blocking_path_tau(int K, int k);      // tau(P_j^k)
Rational blocking_tau_paper_sum(int K, int k);  // the literature's Sigma closed form
Rational blocking_tau_recursive(int K, int k);  // 3^{k-1}*3 + sum tau(e') + tau(B_{K,k-1})
Rational cycling_tau_closed(int K);             // (3+K)*3^{K+1} + 3
Rational u_kl(int K, int L);

struct SlowTermination {
    Instance inst;
    Rational U;           // U_{K,L}
    Rational tau_e1;      // 3^{K+1} - 5
    Rational tau_p1;      // tau(P_1) inside B_K
    Rational tau_efinal;  // tau_e1 + tau_p1 + 1
    std::string source;   // u_{3^K+1}
    // Edge-id prefixes for the term-by-term tau decomposition:
    // "ck:" cycling, "bk:" blocking, "ej:" connecting, plus ids "e0", "efinal".
};

SlowTermination gen_slow_termination(int K, int L);

struct PoaInstance {
    Instance inst;
    Rational U;        // U_{K,L} of the embedded gadget
    Rational epsilon;  // (4 + tau_efinal) / (2 U_{K,L})
    Rational inflow_rate;
    std::string source;  // "s"
};

PoaInstance gen_poa_instance(int K, int L);

// Small deterministic pseudo-random instances for the property suites.
// All travel times and capacities are integers >= 1 and every node reaches the sink.
Instance gen_random_instance(uint64_t seed, int max_nodes, bool acyclic);

}  // namespace ideflow
