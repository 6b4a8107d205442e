#include "ideflow/export.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace ideflow {

namespace {
const Pwl& series_by_name(const CompiledGraph& g, const DerivedState& d, const std::string& name) {
    if (name == "F_delta") return d.F_delta;
    if (name == "Z") return d.Z;
    auto colon = name.find(':');
    if (colon != std::string::npos) {
        std::string kind = name.substr(0, colon);
        std::string edge = name.substr(colon + 1);
        auto it = g.edge_index.find(edge);
        if (it == g.edge_index.end())
            throw std::invalid_argument("unknown edge in series: " + name);
        if (kind == "q") return d.queue[static_cast<size_t>(it->second)];
        if (kind == "load") return d.load[static_cast<size_t>(it->second)];
    }
    throw std::invalid_argument("unknown series: " + name);
}
}  // namespace

std::string csv_timeseries(const CompiledGraph& g, const DerivedState& d,
                           const std::vector<std::string>& series, bool exact) {
    std::vector<const Pwl*> cols;
    for (const auto& s : series) cols.push_back(&series_by_name(g, d, s));
    std::vector<Rational> times;
    for (const Pwl* p : cols)
        for (const auto& b : p->breakpoints()) times.push_back(b);
    std::sort(times.begin(), times.end());
    times.erase(std::unique(times.begin(), times.end()), times.end());

    std::ostringstream os;
    os << "time";
    for (const auto& s : series) {
        os << "," << s;
        if (exact) os << "," << s << ".rational";
    }
    os << "\n";
    for (const auto& t : times) {
        os << decimal_string(t);
        for (const Pwl* p : cols) {
            Rational v = (*p)(t);
            os << "," << decimal_string(v);
            if (exact) os << "," << to_string(v);
        }
        os << "\n";
    }
    return os.str();
}

std::string svg_plot(const std::vector<std::pair<std::string, Pwl>>& series) {
    // Data bounding box over all breakpoints.
    Rational xmin(0), xmax(1), ymin(0), ymax(1);
    bool first = true;
    for (const auto& [name, p] : series) {
        (void)name;
        for (size_t i = 0; i < p.breakpoints().size(); ++i) {
            const Rational& x = p.breakpoints()[i];
            const Rational& y = p.values()[i];
            if (first) {
                xmin = xmax = x;
                ymin = ymax = y;
                first = false;
            } else {
                xmin = rat_min(xmin, x);
                xmax = rat_max(xmax, x);
                ymin = rat_min(ymin, y);
                ymax = rat_max(ymax, y);
            }
        }
    }
    if (xmax == xmin) xmax = xmin + 1;
    if (ymax == ymin) ymax = ymin + 1;
    const long W = 640, H = 360, PAD = 40;
    auto sx = [&](const Rational& x) {
        return decimal_string(PAD + (x - xmin) / (xmax - xmin) * (W - 2 * PAD), 3);
    };
    auto sy = [&](const Rational& y) {
        return decimal_string(H - PAD - (y - ymin) / (ymax - ymin) * (H - 2 * PAD), 3);
    };
    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                   "#ff7f0e", "#8c564b"};
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
       << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
    os << "  <rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
    // Axes.
    os << "  <line x1=\"" << PAD << "\" y1=\"" << H - PAD << "\" x2=\"" << W - PAD << "\" y2=\""
       << H - PAD << "\" stroke=\"black\"/>\n";
    os << "  <line x1=\"" << PAD << "\" y1=\"" << PAD << "\" x2=\"" << PAD << "\" y2=\""
       << H - PAD << "\" stroke=\"black\"/>\n";
    os << "  <text x=\"" << PAD << "\" y=\"" << H - PAD + 16 << "\" font-size=\"10\">"
       << decimal_string(xmin, 4) << "</text>\n";
    os << "  <text x=\"" << W - PAD - 20 << "\" y=\"" << H - PAD + 16 << "\" font-size=\"10\">"
       << decimal_string(xmax, 4) << "</text>\n";
    os << "  <text x=\"2\" y=\"" << H - PAD << "\" font-size=\"10\">" << decimal_string(ymin, 4)
       << "</text>\n";
    os << "  <text x=\"2\" y=\"" << PAD << "\" font-size=\"10\">" << decimal_string(ymax, 4)
       << "</text>\n";
    size_t ci = 0;
    for (const auto& [name, p] : series) {
        os << "  <polyline fill=\"none\" stroke=\"" << colors[ci % 6] << "\" stroke-width=\"1.5\" points=\"";
        for (size_t i = 0; i < p.breakpoints().size(); ++i) {
            if (i) os << " ";
            os << sx(p.breakpoints()[i]) << "," << sy(p.values()[i]);
        }
        os << "\"/>\n";
        os << "  <text x=\"" << W - PAD + 2 << "\" y=\"" << PAD + 14 * static_cast<long>(ci)
           << "\" font-size=\"10\" fill=\"" << colors[ci % 6] << "\">" << name << "</text>\n";
        ++ci;
    }
    os << "</svg>\n";
    return os.str();
}

json flow_to_json(const FlowOverTime& f) {
    json j;
    j["edges"] = json::object();
    for (const auto& [id, fp] : f.f_plus) {
        j["edges"][id]["f_plus"] = stepfn_to_json(fp);
    }
    for (const auto& [id, fm] : f.f_minus) {
        j["edges"][id]["f_minus"] = stepfn_to_json(fm);
    }
    return j;
}

FlowOverTime flow_from_json(const json& j) {
    FlowOverTime f;
    const json& edges = j.contains("edges") ? j.at("edges") : j;
    for (const auto& [id, je] : edges.items()) {
        if (je.contains("f_plus")) f.f_plus[id] = stepfn_from_json(je.at("f_plus"));
        if (je.contains("f_minus")) f.f_minus[id] = stepfn_from_json(je.at("f_minus"));
    }
    return f;
}

json trace_to_json(const CompiledGraph& g, const IDETrace& trace) {
    json j;
    j["terminated"] = trace.terminated;
    if (trace.makespan) j["makespan"] = rational_to_json(*trace.makespan);
    j["hit_phase_cap"] = trace.hit_phase_cap;
    j["hit_horizon"] = trace.hit_horizon;
    j["phase_count"] = trace.phases.size();
    j["phases"] = json::array();
    for (const auto& ph : trace.phases) {
        json jp;
        jp["start"] = rational_to_json(ph.start);
        jp["end"] = rational_to_json(ph.end);
        switch (ph.end_event) {
            case PhaseSim::EventKind::inflow: jp["event"] = "inflow-breakpoint"; break;
            case PhaseSim::EventKind::outflow_front: jp["event"] = "outflow-front"; break;
            case PhaseSim::EventKind::queue_depletion: jp["event"] = "queue-depletion"; break;
            case PhaseSim::EventKind::activation: jp["event"] = "activation-crossing"; break;
            case PhaseSim::EventKind::horizon: jp["event"] = "horizon"; break;
            case PhaseSim::EventKind::termination: jp["event"] = "termination"; break;
        }
        jp["labels"] = json::object();
        jp["label_derivatives"] = json::object();
        for (int v = 0; v < g.n; ++v) {
            const auto& l = ph.state.labels[static_cast<size_t>(v)];
            if (l) jp["labels"][g.node_name(v)] = rational_to_json(*l);
            const auto& dl = ph.state.label_derivs[static_cast<size_t>(v)];
            if (dl) jp["label_derivatives"][g.node_name(v)] = rational_to_json(*dl);
        }
        jp["active_edges"] = json::array();
        for (int e = 0; e < g.m; ++e)
            if (ph.state.active[static_cast<size_t>(e)]) jp["active_edges"].push_back(g.edge_id(e));
        jp["allocations"] = json::object();
        for (int e = 0; e < g.m; ++e)
            if (ph.x[static_cast<size_t>(e)] != 0)
                jp["allocations"][g.edge_id(e)] = rational_to_json(ph.x[static_cast<size_t>(e)]);
        j["phases"].push_back(jp);
    }
    j["flow"] = flow_to_json(trace.flow);
    return j;
}

}  // namespace ideflow
