#include "bundletrade/serialization.hpp"

#include "bundletrade/report.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace bundletrade {

using nlohmann::json;

ParseError::ParseError(std::size_t line, std::string field, const std::string& message)
    : std::runtime_error(
          (line ? "line " + std::to_string(line) + ": " : std::string()) +
          (field.empty() ? std::string() : "field \"" + field + "\": ") + message),
      line_(line),
      field_(std::move(field)) {}

namespace {

const json& require(const json& obj, const char* key, std::size_t line) {
    if (!obj.is_object()) throw ParseError(line, "", "expected a JSON object");
    auto it = obj.find(key);
    if (it == obj.end()) throw ParseError(line, key, "missing required field");
    return *it;
}

template <typename T>
T get_as(const json& obj, const char* key, std::size_t line) {
    const json& v = require(obj, key, line);
    try {
        return v.get<T>();
    } catch (const json::exception& e) {
        throw ParseError(line, key, std::string("wrong type: ") + e.what());
    }
}

json parse_line(const std::string& text, std::size_t line) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(line, "", std::string("invalid JSON: ") + e.what());
    }
}

bool blank(const std::string& s) {
    return s.find_first_not_of(" \t\r\n") == std::string::npos;
}

EventKind parse_kind(const json& obj, std::size_t line) {
    auto kind = get_as<std::string>(obj, "kind", line);
    if (kind == "customer") return EventKind::Customer;
    if (kind == "supplier") return EventKind::Supplier;
    throw ParseError(line, "kind", "expected \"customer\" or \"supplier\", got \"" + kind + "\"");
}

json step_to_json(const TraceStep& s) {
    json j;
    j["t"] = s.t;
    j["kind"] = std::string(to_string(s.kind));
    j["chosen"] = s.chosen ? json(*s.chosen) : json(nullptr);
    j["traded"] = s.traded;
    j["inventory_sold"] = s.inventory_sold;
    j["P"] = s.P;
    j["price"] = s.price;
    j["value"] = s.value;
    j["r_before"] = s.r_before;
    j["r_after"] = s.r_after;
    j["x_before"] = s.x_before;
    j["x_after"] = s.x_after;
    return j;
}

TraceStep step_from_json(const json& j, std::size_t line) {
    TraceStep s;
    s.t = get_as<std::size_t>(j, "t", line);
    s.kind = parse_kind(j, line);
    const json& chosen = require(j, "chosen", line);
    if (!chosen.is_null()) s.chosen = get_as<std::size_t>(j, "chosen", line);
    s.traded = get_as<bool>(j, "traded", line);
    s.inventory_sold = get_as<bool>(j, "inventory_sold", line);
    s.P = get_as<double>(j, "P", line);
    s.price = get_as<double>(j, "price", line);
    s.value = get_as<double>(j, "value", line);
    s.r_before = get_as<std::vector<Count>>(j, "r_before", line);
    s.r_after = get_as<std::vector<Count>>(j, "r_after", line);
    s.x_before = get_as<std::vector<double>>(j, "x_before", line);
    s.x_after = get_as<std::vector<double>>(j, "x_after", line);
    if (s.traded && !s.chosen) throw ParseError(line, "chosen", "traded step without a chosen bundle");
    return s;
}

}  // namespace

void write_instance(std::ostream& out, const Instance& inst) {
    json header;
    header["n"] = inst.catalog.size();
    header["w"] = inst.catalog.caps;
    header["eps"] = inst.eps;
    header["v"] = inst.declared_v;
    header["d"] = inst.declared_d;
    out << header.dump() << '\n';
    for (const Event& ev : inst.events) {
        json e;
        e["kind"] = std::string(to_string(ev.kind));
        json menu = json::array();
        for (const Bundle& b : ev.menu) menu.push_back({{"counts", b.counts}, {"value", b.value}});
        e["menu"] = std::move(menu);
        out << e.dump() << '\n';
    }
}

Instance read_instance(std::istream& in) {
    Instance inst;
    std::string text;
    std::size_t line = 0;
    bool have_header = false;
    while (std::getline(in, text)) {
        ++line;
        if (blank(text)) continue;
        json j = parse_line(text, line);
        if (!have_header) {
            auto n = get_as<std::size_t>(j, "n", line);
            inst.catalog.caps = get_as<std::vector<Count>>(j, "w", line);
            if (inst.catalog.caps.size() != n)
                throw ParseError(line, "w", "length " + std::to_string(inst.catalog.caps.size()) +
                                                " does not match n = " + std::to_string(n));
            inst.eps = get_as<double>(j, "eps", line);
            inst.declared_v = get_as<double>(j, "v", line);
            inst.declared_d = get_as<Count>(j, "d", line);
            have_header = true;
            continue;
        }
        Event ev;
        ev.kind = parse_kind(j, line);
        const json& menu = require(j, "menu", line);
        if (!menu.is_array()) throw ParseError(line, "menu", "expected an array");
        for (const json& b : menu) {
            Bundle bundle;
            bundle.counts = get_as<std::vector<Count>>(b, "counts", line);
            bundle.value = get_as<double>(b, "value", line);
            if (bundle.counts.size() != inst.catalog.size())
                throw ParseError(line, "counts", "length does not match n");
            ev.menu.push_back(std::move(bundle));
        }
        if (ev.menu.empty()) throw ParseError(line, "menu", "menu must not be empty");
        inst.events.push_back(std::move(ev));
    }
    if (!have_header) throw ParseError(0, "", "missing header line");
    return inst;
}

std::string instance_to_string(const Instance& inst) {
    std::ostringstream out;
    write_instance(out, inst);
    return out.str();
}

Instance instance_from_string(const std::string& text) {
    std::istringstream in(text);
    return read_instance(in);
}

void save_instance(const std::string& path, const Instance& inst) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    write_instance(out, inst);
}

Instance load_instance(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    return read_instance(in);
}

void write_trace(std::ostream& out, const Trace& trace) {
    json header;
    header["algorithm"] = std::string(to_string(trace.algorithm));
    header["mu"] = trace.params.mu;
    header["eta"] = trace.params.eta;
    header["delta"] = trace.params.delta;
    header["rho"] = trace.params.rho;
    header["seed"] = trace.params.seed;
    header["n"] = trace.catalog.size();
    header["w"] = trace.catalog.caps;
    header["eps"] = trace.eps;
    header["v"] = trace.declared_v;
    header["d"] = trace.declared_d;
    header["tau"] = trace.tau;
    header["assumption_violations"] = trace.assumption_violations;
    header["profit"] = trace.profit;
    header["steps"] = trace.steps.size();
    out << header.dump() << '\n';
    for (const TraceStep& s : trace.steps) out << step_to_json(s).dump() << '\n';
}

Trace read_trace(std::istream& in) {
    Trace trace;
    std::string text;
    std::size_t line = 0;
    bool have_header = false;
    std::size_t expected_steps = 0;
    while (std::getline(in, text)) {
        ++line;
        if (blank(text)) continue;
        json j = parse_line(text, line);
        if (!have_header) {
            auto algorithm = get_as<std::string>(j, "algorithm", line);
            if (algorithm == "trade") trace.algorithm = Algorithm::Trade;
            else if (algorithm == "truthful") trace.algorithm = Algorithm::Truthful;
            else throw ParseError(line, "algorithm", "unknown algorithm \"" + algorithm + "\"");
            trace.params.mu = get_as<double>(j, "mu", line);
            trace.params.eta = get_as<double>(j, "eta", line);
            trace.params.delta = get_as<double>(j, "delta", line);
            trace.params.rho = get_as<double>(j, "rho", line);
            trace.params.seed = get_as<std::uint64_t>(j, "seed", line);
            trace.catalog.caps = get_as<std::vector<Count>>(j, "w", line);
            if (get_as<std::size_t>(j, "n", line) != trace.catalog.size())
                throw ParseError(line, "w", "length does not match n");
            trace.eps = get_as<double>(j, "eps", line);
            trace.declared_v = get_as<double>(j, "v", line);
            trace.declared_d = get_as<Count>(j, "d", line);
            trace.tau = get_as<double>(j, "tau", line);
            trace.assumption_violations = get_as<std::size_t>(j, "assumption_violations", line);
            trace.profit = get_as<double>(j, "profit", line);
            expected_steps = get_as<std::size_t>(j, "steps", line);
            have_header = true;
            continue;
        }
        trace.steps.push_back(step_from_json(j, line));
        const TraceStep& s = trace.steps.back();
        const std::size_t n = trace.catalog.size();
        if (s.r_before.size() != n || s.r_after.size() != n || s.x_before.size() != n ||
            s.x_after.size() != n)
            throw ParseError(line, "r_before", "vector length does not match n");
    }
    if (!have_header) throw ParseError(0, "", "missing header line");
    if (trace.steps.size() != expected_steps)
        throw ParseError(0, "steps", "header announces " + std::to_string(expected_steps) +
                                         " steps, file has " + std::to_string(trace.steps.size()));
    return trace;
}

std::string trace_to_string(const Trace& trace) {
    std::ostringstream out;
    write_trace(out, trace);
    return out.str();
}

Trace trace_from_string(const std::string& text) {
    std::istringstream in(text);
    return read_trace(in);
}

void save_trace(const std::string& path, const Trace& trace) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    write_trace(out, trace);
}

Trace load_trace(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    return read_trace(in);
}

std::string report_to_json(const Report& report) {
    json out;
    out["checked"] = report.checked;
    json list = json::array();
    for (const ReportEntry& e : report.violations) {
        json v;
        v["constraint"] = e.constraint;
        v["t"] = e.t ? json(*e.t) : json(nullptr);
        v["s"] = e.s ? json(*e.s) : json(nullptr);
        if (e.item) v["item"] = *e.item;
        v["slack"] = e.slack;
        list.push_back(std::move(v));
    }
    out["violations"] = std::move(list);
    return out.dump();
}

}  // namespace bundletrade
