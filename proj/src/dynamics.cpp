#include "ideflow/dynamics.hpp"

#include <algorithm>
#include <stdexcept>

#include "ideflow/phase_sim.hpp"

namespace ideflow {

namespace {
const StepFn kZero;

bool pwl_globally_nonnegative(const Pwl& p) {
    for (const auto& v : p.values())
        if (v < 0) return false;
    return p.tail_slope() >= 0;
}

// Cuts of [lo, hi) into maximal sub-intervals on which both the step data and
// the queue sign are constant.
std::vector<Rational> sign_refinement(const StepFn& fp, const StepFn& fm, const Rational& tau,
                                      const Pwl& q) {
    std::vector<Rational> cuts;
    for (const auto& b : fp.breakpoints()) cuts.push_back(b);
    for (const auto& b : fm.breakpoints()) cuts.push_back(b - tau);
    for (const auto& b : q.breakpoints()) cuts.push_back(b);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    // Interior roots of q split sign-mixed pieces.
    std::vector<Rational> roots;
    for (size_t i = 0; i + 1 < cuts.size(); ++i) {
        Rational a = cuts[i], b = cuts[i + 1];
        Rational qa = q(a), qb = q(b);
        if ((qa > 0 && qb < 0) || (qa < 0 && qb > 0) || (qa > 0 && qb == 0) ||
            (qa == 0 && qb > 0)) {
            if (auto r = q.first_root_at_or_after(a))
                if (*r > a && *r < b) roots.push_back(*r);
        }
    }
    cuts.insert(cuts.end(), roots.begin(), roots.end());
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    return cuts;
}

Rational moment_of_derivative(const Pwl& p) {
    // int t p'(t) dt over the whole (finite-activity) domain.
    const auto& bps = p.breakpoints();
    const auto& vals = p.values();
    Rational acc(0);
    for (size_t i = 0; i + 1 < bps.size(); ++i) {
        Rational slope = (vals[i + 1] - vals[i]) / (bps[i + 1] - bps[i]);
        acc += slope * (bps[i + 1] * bps[i + 1] - bps[i] * bps[i]) / 2;
    }
    return acc;
}

Rational integrate_pwl_times_step(const Pwl& p, const StepFn& s) {
    if (!s.has_bounded_support())
        throw std::invalid_argument("integrate_pwl_times_step: unbounded support");
    const auto& bps = s.breakpoints();
    const auto& vals = s.values();
    Rational acc(0);
    for (size_t i = 0; i + 1 < bps.size(); ++i)
        if (vals[i] != 0) acc += vals[i] * p.integral(bps[i], bps[i + 1]);
    return acc;
}
}  // namespace

const StepFn& FlowOverTime::in(const std::string& edge) const {
    auto it = f_plus.find(edge);
    return it == f_plus.end() ? kZero : it->second;
}

const StepFn& FlowOverTime::out(const std::string& edge) const {
    auto it = f_minus.find(edge);
    return it == f_minus.end() ? kZero : it->second;
}

DerivedState derive(const CompiledGraph& g, const FlowOverTime& f) {
    DerivedState d;
    d.F_plus.reserve(static_cast<size_t>(g.m));
    Pwl fdelta = Pwl::constant(Rational(0));
    for (int e = 0; e < g.m; ++e) {
        const std::string& id = g.edge_id(e);
        const StepFn& fp = f.in(id);
        const StepFn& fm = f.out(id);
        Pwl Fp = stepfn_integrate(fp);
        Pwl Fm = stepfn_integrate(fm);
        Pwl q = pwl_sub(Fp, Fm.shifted(-g.tau[static_cast<size_t>(e)]));
        Pwl load = pwl_sub(Fp, Fm);
        if (!pwl_globally_nonnegative(q)) d.defects.push_back("negative queue on " + id);
        if (!pwl_globally_nonnegative(load)) d.defects.push_back("negative load on " + id);
        fdelta = pwl_add(fdelta, load);
        d.F_plus.push_back(std::move(Fp));
        d.F_minus.push_back(std::move(Fm));
        d.queue.push_back(std::move(q));
        d.load.push_back(std::move(load));
    }
    d.F_delta = std::move(fdelta);
    Pwl z = Pwl::constant(Rational(0));
    for (int e : g.in[static_cast<size_t>(g.sink)]) z = pwl_add(z, d.F_minus[static_cast<size_t>(e)]);
    for (int e : g.out[static_cast<size_t>(g.sink)]) z = pwl_sub(z, d.F_plus[static_cast<size_t>(e)]);
    d.Z = std::move(z);
    for (const auto& [node, u] : g.inst->inflows) d.U_cum[node] = stepfn_integrate(u);
    return d;
}

FeasibilityReport check_feasibility(const CompiledGraph& g, const FlowOverTime& f) {
    FeasibilityReport rep;
    // Clock start: flows and inflows may live on negative time before normalization.
    Rational clock(0);
    for (const auto& [node, u] : g.inst->inflows) {
        (void)node;
        if (!u.is_zero()) clock = rat_min(clock, u.left_bound());
    }
    for (int e = 0; e < g.m; ++e) {
        const StepFn& fp = f.in(g.edge_id(e));
        if (!fp.is_zero()) clock = rat_min(clock, fp.left_bound());
    }

    // (1), (2): per-node balance as exact step functions.
    for (int v = 0; v < g.n; ++v) {
        StepFn balance;
        for (int e : g.out[static_cast<size_t>(v)]) balance = step_add(balance, f.in(g.edge_id(e)));
        for (int e : g.in[static_cast<size_t>(v)]) balance = step_sub(balance, f.out(g.edge_id(e)));
        if (v == g.sink) {
            StepFn d = balance;
            for (size_t i = 0; i < d.values().size(); ++i) {
                if (d.values()[i] > 0) {
                    Rational from = d.breakpoints()[i];
                    Rational to = i + 1 < d.breakpoints().size() ? d.breakpoints()[i + 1] : from;
                    rep.violations.push_back({"sink", g.node_name(v), from, to,
                                              "net outflow " + to_string(d.values()[i])});
                }
            }
            continue;
        }
        auto it = g.inst->inflows.find(g.node_name(v));
        StepFn u = it == g.inst->inflows.end() ? StepFn::zero() : it->second;
        StepFn diff = step_sub(balance, u);
        for (size_t i = 0; i < diff.values().size(); ++i) {
            if (diff.values()[i] != 0) {
                Rational from = diff.breakpoints()[i];
                Rational to = i + 1 < diff.breakpoints().size() ? diff.breakpoints()[i + 1] : from;
                rep.violations.push_back({"conservation", g.node_name(v), from, to,
                                          "imbalance " + to_string(diff.values()[i])});
            }
        }
    }

    // (3), (4): per-edge queue discipline on the sign-refined timeline.
    for (int e = 0; e < g.m; ++e) {
        size_t se = static_cast<size_t>(e);
        const std::string& id = g.edge_id(e);
        const StepFn& fp = f.in(id);
        const StepFn& fm = f.out(id);
        const Rational& tau = g.tau[se];
        const Rational& nu = g.nu[se];

        // (3): no outflow before clock + tau.
        Rational first_allowed = clock + tau;
        if (!fm.is_zero() && fm.left_bound() < first_allowed)
            rep.violations.push_back({"no-early-outflow", id, fm.left_bound(), first_allowed,
                                      "outflow before travel time"});

        Pwl Fp = stepfn_integrate(fp);
        Pwl Fm = stepfn_integrate(fm);
        Pwl q = pwl_sub(Fp, Fm.shifted(-tau));
        std::vector<Rational> cuts = sign_refinement(fp, fm, tau, q);
        if (cuts.empty()) continue;
        // One piece past the last cut closes the check.
        cuts.push_back(cuts.back() + 1);
        for (size_t i = 0; i + 1 < cuts.size(); ++i) {
            Rational a = cuts[i], b = cuts[i + 1];
            if (b <= clock) continue;
            Rational mid = (a + b) / 2;
            Rational q_mid = q(mid);
            if (q_mid < 0) {
                rep.violations.push_back({"queue-at-capacity", id, a, b, "negative queue"});
                continue;
            }
            Rational want = q_mid > 0 ? nu : rat_min(fp(mid), nu);
            Rational got = fm(mid + tau);
            if (got != want)
                rep.violations.push_back({"queue-at-capacity", id, a, b,
                                          "outflow " + to_string(got) + " expected " +
                                              to_string(want)});
        }
    }
    return rep;
}

std::optional<Rational> makespan(const CompiledGraph& g, const DerivedState& d) {
    Rational theta0 = g.inst->theta0();
    auto r = d.F_delta.first_root_at_or_after(theta0);
    return r;
}

TravelTimeResult total_travel_time(const CompiledGraph& g, const FlowOverTime& f,
                                   const DerivedState& d) {
    TravelTimeResult r;
    r.by_edge_costs = 0;
    for (int e = 0; e < g.m; ++e) {
        size_t se = static_cast<size_t>(e);
        const StepFn& fp = f.in(g.edge_id(e));
        if (fp.is_zero()) continue;
        Pwl cost = d.queue[se].scaled(Rational(1) / g.nu[se]);
        cost = pwl_add(cost, Pwl::constant(g.tau[se]));
        Rational lhs = integrate_pwl_times_step(cost, fp);
        r.by_edge_costs += lhs;
        // Appendix identity residual: int c_e f+_e - (moment(f-) - moment(f+)).
        const StepFn& fm = f.out(g.edge_id(e));
        Rational full_lo = rat_min(fp.left_bound(), fm.left_bound());
        Rational full_hi = rat_max(fp.last_breakpoint(), fm.last_breakpoint());
        Rational rhs = fm.moment(full_lo, full_hi) - fp.moment(full_lo, full_hi);
        if (lhs != rhs) r.edge_residuals.push_back({g.edge_id(e), lhs - rhs});
    }
    // int t Z'(t) dt - sum_v int t u_v(t) dt
    Rational tz = moment_of_derivative(d.Z);
    Rational mu(0);
    for (const auto& [node, u] : g.inst->inflows) {
        (void)node;
        if (u.is_zero()) continue;
        mu += u.moment(u.left_bound(), u.last_breakpoint());
    }
    r.by_arrival_rate = tz - mu;
    // int F_delta over the full activity window.
    const auto& bps = d.F_delta.breakpoints();
    r.by_volume = d.F_delta.integral(bps.front(), bps.back());
    r.consistent =
        r.by_edge_costs == r.by_arrival_rate && r.by_arrival_rate == r.by_volume;
    r.value = r.by_edge_costs;
    return r;
}

Rational total_delay(const CompiledGraph& g, const FlowOverTime& f, const DerivedState& d) {
    (void)g;
    (void)f;
    return moment_of_derivative(d.Z);
}

EdgeResponse single_edge_response(const StepFn& f_plus, const Rational& nu, const Rational& tau) {
    EdgeResponse r;
    if (f_plus.is_zero()) {
        r.queue = Pwl::constant(Rational(0));
        return r;
    }
    if (!f_plus.has_bounded_support())
        throw std::invalid_argument("single_edge_response: unbounded inflow");
    std::vector<Rational> starts, svals;  // service pieces (pre-shift)
    std::vector<Rational> qb{f_plus.left_bound()}, qv{Rational(0)};
    auto serve = [&](const Rational& from, const Rational& v) {
        if (!svals.empty() && svals.back() == v) return;
        if (svals.empty() && v == 0) return;
        starts.push_back(from);
        svals.push_back(v);
    };
    auto qpoint = [&](const Rational& t, const Rational& q) {
        if (qb.back() == t) return;
        qb.push_back(t);
        qv.push_back(q);
    };
    Rational q(0);
    const auto& bps = f_plus.breakpoints();
    const auto& vals = f_plus.values();
    for (size_t i = 0; i + 1 < bps.size(); ++i) {
        Rational t = bps[i], end = bps[i + 1];
        const Rational& x = vals[i];
        while (t < end) {
            if (q > 0 && x < nu) {
                Rational deplete = t + q / (nu - x);
                serve(t, nu);
                if (deplete < end) {
                    q = 0;
                    qpoint(deplete, q);
                    t = deplete;
                } else {
                    q += (x - nu) * (end - t);
                    qpoint(end, q);
                    t = end;
                }
            } else if (q > 0 || x > nu) {
                serve(t, nu);
                q += (x - nu) * (end - t);
                qpoint(end, q);
                t = end;
            } else {
                serve(t, x);
                qpoint(end, q);
                t = end;
            }
        }
    }
    Rational t = bps.back();
    if (q > 0) {
        serve(t, nu);
        t += q / nu;
        qpoint(t, Rational(0));
        q = 0;
    }
    serve(t, Rational(0));
    StepFn service = starts.empty() ? StepFn::zero() : StepFn(starts, svals);
    r.f_minus = service.shifted(tau);
    r.queue = Pwl(qb, qv, Rational(0));
    return r;
}

namespace {
class PolicyAllocator {
   public:
    PolicyAllocator(const CompiledGraph& g, RoutingPolicy& p) : g_(g), p_(p) {}
    std::vector<Rational> operator()(const PhaseSim::Snapshot& snap) {
        std::vector<Rational> x(static_cast<size_t>(g_.m), Rational(0));
        for (int v = 0; v < g_.n; ++v) {
            if (v == g_.sink) continue;
            const Rational& b = snap.b[static_cast<size_t>(v)];
            if (b == 0) continue;
            const auto& outs = g_.out[static_cast<size_t>(v)];
            if (outs.empty()) throw std::runtime_error("volume stranded at " + g_.node_name(v));
            std::vector<Rational> w = p_.split(g_, v, snap.time, b);
            Rational total(0);
            for (const auto& wi : w) total += wi;
            if (total <= 0) throw std::runtime_error("routing policy returned zero weights");
            for (size_t i = 0; i < outs.size(); ++i)
                x[static_cast<size_t>(outs[i])] = b * w[i] / total;
        }
        return x;
    }

   private:
    const CompiledGraph& g_;
    RoutingPolicy& p_;
};
}  // namespace

FlowOverTime simulate_routing(const CompiledGraph& g, RoutingPolicy& policy,
                              const Rational& horizon) {
    PhaseSim sim(g, horizon);
    PolicyAllocator alloc(g, policy);
    auto res = sim.run(alloc);
    return std::move(res.flow);
}

}  // namespace ideflow
