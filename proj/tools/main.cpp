#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "ideflow/analysis.hpp"
#include "ideflow/engine.hpp"
#include "ideflow/export.hpp"
#include "ideflow/generators.hpp"
#include "ideflow/json_io.hpp"

using namespace ideflow;

namespace {

int log_level() {
    const char* v = std::getenv("IDE_FLOWS_LOG");
    return v ? std::atoi(v) : 0;
}

void logline(const std::string& s) {
    if (log_level() > 0) std::cerr << "[ideflow] " << s << "\n";
}

Rational parse_rat_or_die(const std::string& s, const char* what) {
    auto r = parse_rational(s);
    if (!r) {
        std::cerr << "bad rational for " << what << ": " << s << "\n";
        std::exit(2);
    }
    return *r;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) {
        std::cerr << "cannot write " << path << "\n";
        std::exit(2);
    }
    out << text;
}

json violations_to_json(const ValidationReport& rep) {
    json j = json::array();
    for (const auto& v : rep.errors)
        j.push_back({{"rule", v.rule}, {"subject", v.subject}, {"detail", v.detail}});
    return j;
}

int cmd_gen(const std::string& spec, const std::vector<std::string>& args,
            const std::string& out_path) {
    Instance inst;
    json extra = json::object();
    if (spec == "fig1") {
        inst = gen_example_fig1();
    } else if (spec == "blocking") {
        if (args.size() != 2) {
            std::cerr << "usage: gen blocking K k\n";
            return 2;
        }
        BlockingFragment f = gen_blocking_gadget(std::stoi(args[0]), std::stoi(args[1]));
        json j;
        j["fragment"] = true;
        j["runnable"] = false;
        j["nodes"] = f.nodes;
        j["edges"] = json::array();
        for (const auto& e : f.edges)
            j["edges"].push_back({{"id", e.id},
                                  {"tail", e.tail},
                                  {"head", e.head},
                                  {"tau", rational_to_json(e.tau)},
                                  {"nu", rational_to_json(e.nu)}});
        j["entry_nodes"] = f.entries;
        j["exit_node"] = f.exit;
        write_json_file(j, out_path);
        Rational st(0);
        for (const auto& e : f.edges) st += e.tau;
        std::cout << "fragment (ports open, not runnable)\n";
        std::cout << "sum_tau = " << to_string(st) << "\n";
        return 0;
    } else if (spec == "slow-termination") {
        if (args.size() != 2) {
            std::cerr << "usage: gen slow-termination K L\n";
            return 2;
        }
        inst = gen_slow_termination(std::stoi(args[0]), std::stoi(args[1])).inst;
    } else if (spec == "poa") {
        if (args.size() != 2) {
            std::cerr << "usage: gen poa K L\n";
            return 2;
        }
        inst = gen_poa_instance(std::stoi(args[0]), std::stoi(args[1])).inst;
    } else {
        std::cerr << "unknown generator spec: " << spec << "\n";
        return 2;
    }
    (void)extra;
    save_instance(inst, out_path);
    std::cout << "U = " << to_string(inst.total_volume()) << "\n";
    std::cout << "sum_tau = " << to_string(total_tau(inst)) << "\n";
    std::cout << "theta0 = " << to_string(inst.theta0()) << "\n";
    return 0;
}

int cmd_simulate(const std::string& inst_path, const std::string& out_dir,
                 const std::string& horizon_s, long max_phases, bool exact_csv) {
    Instance raw = load_instance(inst_path);
    ValidationReport val = validate(raw);
    if (!val.ok()) {
        std::cerr << violations_to_json(val).dump(2) << "\n";
        return 2;
    }
    auto [inst, offset] = normalize_time_origin(raw);
    CompiledGraph g = CompiledGraph::build(inst);
    EngineOptions opts;
    if (!horizon_s.empty()) opts.horizon = parse_rat_or_die(horizon_s, "--horizon");
    opts.max_phases = max_phases;
    logline("simulating " + inst_path);
    IDETrace trace = compute_ide(g, opts);

    std::filesystem::create_directories(out_dir);
    write_json_file(trace_to_json(g, trace), out_dir + "/trace.json");

    DerivedState d = derive(g, trace.flow);
    json metrics;
    metrics["normalization_offset"] = rational_to_json(offset);
    metrics["terminated"] = trace.terminated;
    metrics["phase_count"] = trace.phases.size();
    if (trace.terminated) {
        TravelTimeResult tt = total_travel_time(g, trace.flow, d);
        metrics["makespan"] = rational_to_json(*trace.makespan);
        metrics["total_travel_time"] = rational_to_json(tt.value);
        metrics["travel_time_consistent"] = tt.consistent;
        metrics["total_delay"] = rational_to_json(total_delay(g, trace.flow, d));
    }
    write_json_file(metrics, out_dir + "/metrics.json");

    std::vector<std::string> series{"F_delta", "Z"};
    for (const auto& e : inst.edges) series.push_back("q:" + e.id);
    write_text(out_dir + "/series.csv", csv_timeseries(g, d, series, exact_csv));

    if (!trace.terminated) {
        std::cerr << (trace.hit_phase_cap ? "phase cap reached\n" : "horizon reached\n");
        return 3;
    }
    return 0;
}

int cmd_verify(const std::string& inst_path, const std::string& flow_path) {
    Instance raw = load_instance(inst_path);
    ValidationReport val = validate(raw);
    if (!val.ok()) {
        std::cerr << violations_to_json(val).dump(2) << "\n";
        return 2;
    }
    auto [inst, offset] = normalize_time_origin(raw);
    (void)offset;
    CompiledGraph g = CompiledGraph::build(inst);
    json jf = read_json_file(flow_path);
    FlowOverTime flow = flow_from_json(jf.contains("flow") ? jf.at("flow") : jf);

    FeasibilityReport fr = check_feasibility(g, flow);
    IdeReport ir = check_ide(g, flow);
    json rep;
    rep["feasibility_violations"] = json::array();
    for (const auto& v : fr.violations)
        rep["feasibility_violations"].push_back({{"constraint", v.constraint},
                                                 {"subject", v.subject},
                                                 {"from", rational_to_json(v.from)},
                                                 {"to", rational_to_json(v.to)},
                                                 {"detail", v.detail}});
    rep["ide_violations"] = json::array();
    for (const auto& v : ir.violations)
        rep["ide_violations"].push_back({{"edge", v.edge},
                                         {"from", rational_to_json(v.from)},
                                         {"to", rational_to_json(v.to)},
                                         {"detail", v.detail}});
    std::cout << rep.dump(2) << "\n";
    return (fr.ok() && ir.ok()) ? 0 : 1;
}

json analyze_report_json(const std::string& inst_path, const PoaReport& rep);

// Analyzes every *.json instance in a directory, `jobs` instances at a time.
int cmd_analyze_batch(const std::string& dir, const std::string& delta_s, int jobs) {
    Rational delta = parse_rat_or_die(delta_s, "--delta");
    std::vector<std::string> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir))
        if (entry.path().extension() == ".json") files.push_back(entry.path().string());
    std::sort(files.begin(), files.end());
    if (files.empty()) {
        std::cerr << "no instance files in " << dir << "\n";
        return 2;
    }
    std::vector<json> reports(files.size());
    std::vector<int> codes(files.size(), 0);
    std::atomic<size_t> next{0};
    auto worker = [&]() {
        while (true) {
            size_t i = next.fetch_add(1);
            if (i >= files.size()) return;
            try {
                Instance raw = load_instance(files[i]);
                ValidationReport val = validate(raw);
                if (!val.ok()) {
                    reports[i] = {{"instance", files[i]}, {"error", "validation failed"}};
                    codes[i] = 2;
                    continue;
                }
                PoaReport rep = poa_report(raw, delta);
                reports[i] = analyze_report_json(files[i], rep);
                if (!rep.ide_terminated) codes[i] = 3;
            } catch (const std::exception& ex) {
                reports[i] = {{"instance", files[i]}, {"error", ex.what()}};
                codes[i] = 2;
            }
        }
    };
    int n = std::max(1, jobs);
    std::vector<std::thread> pool;
    for (int i = 0; i < n; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    json out = json::array();
    for (const auto& r : reports) out.push_back(r);
    std::cout << out.dump(2) << "\n";
    for (int c : codes)
        if (c != 0) return c;
    return 0;
}

int cmd_analyze(const std::string& inst_path, const std::string& delta_s,
                const std::string& out_path, const std::string& sink_like_csv) {
    Instance raw = load_instance(inst_path);
    ValidationReport val = validate(raw);
    if (!val.ok()) {
        std::cerr << violations_to_json(val).dump(2) << "\n";
        return 2;
    }
    Rational delta = parse_rat_or_die(delta_s, "--delta");
    PoaReport rep = poa_report(raw, delta);
    if (!sink_like_csv.empty() && rep.ide_terminated) {
        // Whole-graph sink-like scan over the IDE trace's phase boundaries.
        auto [inst, off] = normalize_time_origin(raw);
        (void)off;
        CompiledGraph g = CompiledGraph::build(inst);
        IDETrace trace = compute_ide(g);
        DerivedState d = derive(g, trace.flow);
        std::ostringstream os;
        os << "time,vol,sink_like\n";
        SinkLikeQuery q{inst.nodes, Rational(0), Rational(0)};
        for (const auto& ph : trace.phases) {
            q.t1 = q.t2 = ph.start;
            auto r = sink_like_check(g, d, q);
            os << decimal_string(ph.start) << "," << decimal_string(r.vol) << ","
               << (r.sink_like() ? 1 : 0) << "\n";
        }
        write_text(sink_like_csv, os.str());
    }
    json j = analyze_report_json(inst_path, rep);
    if (out_path.empty())
        std::cout << j.dump(2) << "\n";
    else
        write_json_file(j, out_path);
    if (!rep.ide_terminated) return 3;
    return 0;
}

json analyze_report_json(const std::string& inst_path, const PoaReport& rep) {
    json j;
    j["instance"] = inst_path;
    j["ide_terminated"] = rep.ide_terminated;
    j["phase_count"] = rep.phase_count;
    j["normalization_offset"] = rational_to_json(rep.normalization_offset);
    if (rep.ide_terminated) {
        j["ide"] = {{"makespan", rational_to_json(*rep.ide_makespan)},
                    {"total_travel_time", rational_to_json(rep.ide_travel_time)},
                    {"total_delay", rational_to_json(rep.ide_total_delay)}};
        j["certificate"] = {{"theta_hat", rational_to_json(rep.certificate.theta_hat)},
                            {"makespan_ok", rep.certificate.makespan_ok},
                            {"psi_bound", rational_to_json(rep.certificate.psi_bound)},
                            {"psi_ok", rep.certificate.psi_ok},
                            {"tau_pmax", rational_to_json(rep.certificate.tau_pmax)},
                            {"tau_pmax_exact", rep.certificate.tau_pmax_exact}};
        j["opt"] = json::object();
        j["opt"]["bounded"] = rep.opt.bounded;
        if (rep.opt.bounded) {
            j["opt"]["makespan_lower"] = rational_to_json(rep.opt.lower);
            j["opt"]["makespan_upper"] = rational_to_json(rep.opt.upper);
            j["opt"]["delta"] = rational_to_json(rep.opt.delta);
            j["opt"]["witness_travel_time"] = rational_to_json(rep.opt.witness_travel_time);
        }
        j["opt"]["travel_time_lower"] = rational_to_json(rep.opt_travel_time_lb);
        if (rep.makespan_ratio_lower)
            j["makespan_ratio_lower"] = rational_to_json(*rep.makespan_ratio_lower);
        if (rep.travel_ratio_lower)
            j["travel_ratio_lower"] = rational_to_json(*rep.travel_ratio_lower);
    }
    return j;
}

int cmd_plot(const std::string& csv_path, const std::vector<std::string>& series,
             const std::string& out_path) {
    std::ifstream in(csv_path);
    if (!in) {
        std::cerr << "cannot open " << csv_path << "\n";
        return 2;
    }
    std::string header;
    if (!std::getline(in, header)) {
        std::cerr << "empty csv\n";
        return 2;
    }
    std::vector<std::string> cols;
    {
        std::stringstream ss(header);
        std::string c;
        while (std::getline(ss, c, ',')) cols.push_back(c);
    }
    auto col_of = [&](const std::string& name) -> int {
        // Prefer the exact sibling column when present.
        for (size_t i = 0; i < cols.size(); ++i)
            if (cols[i] == name + ".rational") return static_cast<int>(i);
        for (size_t i = 0; i < cols.size(); ++i)
            if (cols[i] == name) return static_cast<int>(i);
        return -1;
    };
    int time_col = col_of("time");
    std::vector<int> want;
    for (const auto& s : series) {
        int c = col_of(s);
        if (c < 0) {
            std::cerr << "unknown series name: " << s << "\n";
            return 2;
        }
        want.push_back(c);
    }
    std::vector<std::vector<Rational>> data(series.size());
    std::vector<Rational> times;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        times.push_back(parse_rat_or_die(cells[static_cast<size_t>(time_col)], "time"));
        for (size_t k = 0; k < want.size(); ++k)
            data[k].push_back(
                parse_rat_or_die(cells[static_cast<size_t>(want[k])], series[k].c_str()));
    }
    std::vector<std::pair<std::string, Pwl>> plots;
    for (size_t k = 0; k < series.size(); ++k) {
        if (times.empty()) {
            plots.push_back({series[k], Pwl::constant(Rational(0))});
        } else {
            // Duplicate time points cannot occur in our CSVs; rely on that.
            plots.push_back({series[k], Pwl(times, data[k])});
        }
    }
    write_text(out_path, svg_plot(plots));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Exact simulator and verifier for instantaneous dynamic equilibria in the "
                 "Vickrey fluid-queueing model"};
    app.require_subcommand(1);

    // gen
    auto* gen = app.add_subcommand("gen", "generate an instance file");
    std::string gen_spec, gen_out = "instance.json";
    std::vector<std::string> gen_args;
    gen->add_option("spec", gen_spec, "fig1 | blocking | slow-termination | poa")->required();
    gen->add_option("args", gen_args, "generator parameters (K [k|L])");
    gen->add_option("-o,--output", gen_out, "output path");

    // simulate
    auto* sim = app.add_subcommand("simulate", "compute an IDE flow");
    std::string sim_inst, sim_out = "out", sim_horizon;
    long sim_max_phases = 1000000;
    bool sim_exact = false;
    sim->add_option("-i,--instance", sim_inst)->required();
    sim->add_option("-o,--output", sim_out, "output directory");
    sim->add_option("--horizon", sim_horizon, "rational horizon cap");
    sim->add_option("--max-phases", sim_max_phases);
    sim->add_flag("--exact", sim_exact, "add exact p/q sibling columns to the CSV");

    // verify
    auto* ver = app.add_subcommand("verify", "check feasibility and the IDE property");
    std::string ver_inst, ver_flow;
    ver->add_option("-i,--instance", ver_inst)->required();
    ver->add_option("-f,--flow", ver_flow, "flow or trace JSON")->required();

    // analyze
    auto* ana = app.add_subcommand("analyze", "certificates, OPT bounds and PoA ratios");
    std::string ana_inst, ana_delta = "1", ana_out, ana_sink_csv;
    int ana_jobs = 1;
    ana->add_option("-i,--instance", ana_inst, "instance file, or a directory of instances")
        ->required();
    ana->add_option("--delta", ana_delta, "time-expansion granularity");
    ana->add_option("-o,--output", ana_out, "report path (stdout default)");
    ana->add_option("--sink-like-csv", ana_sink_csv, "write a whole-graph vol(t) scan");
    ana->add_option("--jobs", ana_jobs, "parallel instances when analyzing a directory");

    // poa
    auto* poa = app.add_subcommand("poa", "price-of-anarchy report");
    std::string poa_inst, poa_delta = "1", poa_out;
    poa->add_option("-i,--instance", poa_inst)->required();
    poa->add_option("--delta", poa_delta);
    poa->add_option("-o,--output", poa_out);

    // plot
    auto* plot = app.add_subcommand("plot", "render series from a CSV to SVG");
    std::string plot_csv, plot_out = "plot.svg";
    std::vector<std::string> plot_series;
    plot->add_option("-f,--csv", plot_csv)->required();
    plot->add_option("-s,--series", plot_series, "series names");
    plot->add_option("-o,--output", plot_out);

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) return cmd_gen(gen_spec, gen_args, gen_out);
        if (sim->parsed())
            return cmd_simulate(sim_inst, sim_out, sim_horizon, sim_max_phases, sim_exact);
        if (ver->parsed()) return cmd_verify(ver_inst, ver_flow);
        if (ana->parsed()) return cmd_analyze(ana_inst, ana_delta, ana_out, ana_sink_csv);
        if (poa->parsed()) return cmd_analyze(poa_inst, poa_delta, poa_out, "");
        if (plot->parsed()) return cmd_plot(plot_csv, plot_series, plot_out);
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 2;
    }
    return 2;
}
