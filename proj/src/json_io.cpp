#include "ideflow/json_io.hpp"

#include <fstream>
#include <stdexcept>

namespace ideflow {

json rational_to_json(const Rational& r) {
    if (is_integer(r)) {
        Int n = numerator(r);
        if (n >= std::numeric_limits<int64_t>::min() && n <= std::numeric_limits<int64_t>::max())
            return static_cast<int64_t>(n);
    }
    return to_string(r);
}

Rational rational_from_json(const json& j) {
    if (j.is_number_integer()) return Rational(Int(j.get<int64_t>()));
    if (j.is_string()) {
        auto r = parse_rational(j.get<std::string>());
        if (!r) throw std::runtime_error("bad rational literal: " + j.get<std::string>());
        return *r;
    }
    throw std::runtime_error("rational must be an integer or a \"p/q\" string: " + j.dump());
}

json stepfn_to_json(const StepFn& f) {
    json j;
    j["breakpoints"] = json::array();
    j["values"] = json::array();
    for (const auto& b : f.breakpoints()) j["breakpoints"].push_back(rational_to_json(b));
    for (const auto& v : f.values()) j["values"].push_back(rational_to_json(v));
    return j;
}

StepFn stepfn_from_json(const json& j) {
    if (!j.is_object() || !j.contains("breakpoints") || !j.contains("values"))
        throw std::runtime_error("step function needs \"breakpoints\" and \"values\"");
    std::vector<Rational> bps, vals;
    for (const auto& b : j.at("breakpoints")) bps.push_back(rational_from_json(b));
    for (const auto& v : j.at("values")) vals.push_back(rational_from_json(v));
    return StepFn(std::move(bps), std::move(vals));
}

json instance_to_json(const Instance& inst) {
    json j;
    j["nodes"] = inst.nodes;
    j["edges"] = json::array();
    for (const auto& e : inst.edges) {
        json je;
        je["id"] = e.id;
        je["tail"] = e.tail;
        je["head"] = e.head;
        je["tau"] = rational_to_json(e.tau);
        je["nu"] = rational_to_json(e.nu);
        j["edges"].push_back(je);
    }
    j["sink"] = inst.sink;
    j["inflows"] = json::object();
    for (const auto& [node, u] : inst.inflows) j["inflows"][node] = stepfn_to_json(u);
    return j;
}

Instance instance_from_json(const json& j) {
    Instance inst;
    try {
        for (const auto& n : j.at("nodes")) inst.nodes.push_back(n.get<std::string>());
        for (const auto& je : j.at("edges")) {
            Edge e;
            e.id = je.at("id").get<std::string>();
            e.tail = je.at("tail").get<std::string>();
            e.head = je.at("head").get<std::string>();
            e.tau = rational_from_json(je.at("tau"));
            e.nu = rational_from_json(je.at("nu"));
            inst.edges.push_back(std::move(e));
        }
        inst.sink = j.at("sink").get<std::string>();
        if (j.contains("inflows"))
            for (const auto& [node, ju] : j.at("inflows").items())
                inst.inflows[node] = stepfn_from_json(ju);
    } catch (const json::exception& ex) {
        throw std::runtime_error(std::string("instance parse error: ") + ex.what());
    }
    return inst;
}

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& ex) {
        throw std::runtime_error(path + ": " + ex.what());
    }
    return j;
}

void write_json_file(const json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << j.dump(2) << "\n";
}

void save_instance(const Instance& inst, const std::string& path) {
    write_json_file(instance_to_json(inst), path);
}

Instance load_instance(const std::string& path) {
    return instance_from_json(read_json_file(path));
}

}  // namespace ideflow
