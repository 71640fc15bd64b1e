#include "qnc_cli/config.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include <json.hpp>

namespace qnc::cli {
namespace {

using json = nlohmann::json;

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::string join(const std::string& prefix, const std::string& key) {
    return prefix.empty() ? key : prefix + "." + key;
}

void reject_unknown(const json& obj, const std::string& path, std::set<std::string> allowed) {
    for (const auto& [key, value] : obj.items()) {
        if (!allowed.count(key)) {
            std::string valid;
            for (const auto& a : allowed) valid += (valid.empty() ? "" : ", ") + a;
            throw ConfigError(join(path, key), "unknown field (valid: " + valid + ")");
        }
    }
}

const json& object_at(const json& obj, const std::string& key, const std::string& path) {
    const json& v = obj.at(key);
    if (!v.is_object()) throw ConfigError(join(path, key), "expected an object");
    return v;
}

void read_number(const json& obj, const std::string& key, const std::string& path, double& out) {
    if (!obj.contains(key)) return;
    const json& v = obj.at(key);
    if (!v.is_number()) throw ConfigError(join(path, key), "expected a number");
    out = v.get<double>();
    if (!std::isfinite(out)) throw ConfigError(join(path, key), "must be finite");
}

void read_string(const json& obj, const std::string& key, const std::string& path, std::string& out) {
    if (!obj.contains(key)) return;
    const json& v = obj.at(key);
    if (!v.is_string()) throw ConfigError(join(path, key), "expected a string");
    out = v.get<std::string>();
}

void read_bool(const json& obj, const std::string& key, const std::string& path, bool& out) {
    if (!obj.contains(key)) return;
    const json& v = obj.at(key);
    if (!v.is_boolean()) throw ConfigError(join(path, key), "expected true or false");
    out = v.get<bool>();
}

template <typename Int>
void read_count(const json& obj, const std::string& key, const std::string& path, Int& out) {
    if (!obj.contains(key)) return;
    const json& v = obj.at(key);
    if (!v.is_number_integer() || v.get<long long>() < 0) {
        throw ConfigError(join(path, key), "expected a non-negative integer");
    }
    out = static_cast<Int>(v.get<long long>());
}

Format parse_format(const std::string& s, const std::string& path) {
    if (s == "csv") return Format::csv;
    if (s == "json") return Format::json;
    throw ConfigError(path, "unknown format '" + s + "' (valid: csv, json)");
}

std::string format_name(Format f) { return f == Format::csv ? "csv" : "json"; }

void read_sensor(const json& obj, SensorParams& p) {
    const std::string path = "sensor";
    reject_unknown(obj, path,
                   {"hbar", "mass", "omega_m", "gamma", "omega_0", "length", "alpha", "kappa",
                    "power", "input_amplitude"});
    read_number(obj, "hbar", path, p.hbar);
    read_number(obj, "mass", path, p.mass);
    read_number(obj, "omega_m", path, p.omega_m);
    read_number(obj, "gamma", path, p.gamma);
    read_number(obj, "omega_0", path, p.omega_0);
    read_number(obj, "length", path, p.length);

    int drives = 0;
    for (const char* k : {"alpha", "kappa", "power", "input_amplitude"}) drives += obj.contains(k);
    if (drives > 1) {
        throw ConfigError(path, "give at most one of alpha, kappa, power, input_amplitude");
    }
    try {
        p.validate();
    } catch (const InvalidParameter& e) {
        throw ConfigError(join(path, e.field()), e.what());
    }
    double v = 0.0;
    if (obj.contains("alpha")) {
        read_number(obj, "alpha", path, p.alpha);
    } else if (obj.contains("kappa")) {
        read_number(obj, "kappa", path, v);
        if (!(v >= 0.0)) throw ConfigError("sensor.kappa", "must be >= 0");
        p = p.with_coupling(v);
    } else if (obj.contains("power")) {
        read_number(obj, "power", path, v);
        if (!(v >= 0.0)) throw ConfigError("sensor.power", "must be >= 0");
        p = SensorParams::from_power(p.hbar, p.mass, p.omega_m, p.gamma, p.omega_0, p.length, v);
    } else if (obj.contains("input_amplitude")) {
        read_number(obj, "input_amplitude", path, v);
        if (!(v >= 0.0)) throw ConfigError("sensor.input_amplitude", "must be >= 0");
        p = SensorParams::from_input_amplitude(p.hbar, p.mass, p.omega_m, p.gamma, p.omega_0,
                                               p.length, v);
    }
}

void read_grid(const json& obj, GridSpec& g) {
    const std::string path = "grid";
    reject_unknown(obj, path, {"min", "max", "count", "spacing", "units", "pole_exclusion"});
    read_number(obj, "min", path, g.min);
    read_number(obj, "max", path, g.max);
    read_count(obj, "count", path, g.count);
    read_number(obj, "pole_exclusion", path, g.pole_exclusion);
    std::string s;
    read_string(obj, "spacing", path, s);
    if (s == "log") g.spacing = Spacing::log;
    else if (s == "lin") g.spacing = Spacing::lin;
    else if (!s.empty()) throw ConfigError("grid.spacing", "expected 'log' or 'lin', got '" + s + "'");
    s.clear();
    read_string(obj, "units", path, s);
    if (s == "omega_m") g.units = GridUnits::omega_m;
    else if (s == "absolute") g.units = GridUnits::absolute;
    else if (!s.empty()) throw ConfigError("grid.units", "expected 'omega_m' or 'absolute', got '" + s + "'");
}

void read_scheme(const json& obj, SchemeConfig& s) {
    const std::string path = "scheme";
    reject_unknown(obj, path, {"kind", "lowfreq_scale", "matching", "enforce_matching"});
    read_string(obj, "kind", path, s.kind);
    read_number(obj, "lowfreq_scale", path, s.lowfreq_scale);
    read_bool(obj, "enforce_matching", path, s.enforce_matching);
    if (obj.contains("matching")) {
        const json& m = obj.at("matching");
        if (m.is_null()) {
            s.matching.reset();
        } else {
            const json& mo = object_at(obj, "matching", path);
            reject_unknown(mo, "scheme.matching", {"mu", "nu", "g"});
            MatchingOverride o = s.matching.value_or(MatchingOverride{});
            read_number(mo, "mu", "scheme.matching", o.mu);
            read_number(mo, "nu", "scheme.matching", o.nu);
            read_number(mo, "g", "scheme.matching", o.g);
            s.matching = o;
        }
    }
}

void read_tolerances(const json& obj, Tolerances& t) {
    const std::string path = "tolerances";
    reject_unknown(obj, path,
                   {"cancellation", "rotation", "realizability", "matching", "certificate", "path"});
    read_number(obj, "cancellation", path, t.cancellation);
    read_number(obj, "rotation", path, t.rotation);
    read_number(obj, "realizability", path, t.realizability);
    read_number(obj, "matching", path, t.matching);
    read_number(obj, "certificate", path, t.certificate);
    read_number(obj, "path", path, t.path);
}

std::pair<std::size_t, std::size_t> line_and_column(std::string_view text, std::size_t byte) {
    std::size_t line = 1;
    std::size_t col = 1;
    for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

}  // namespace

FrequencyGrid GridSpec::build(const SensorParams& params) const {
    const double scale = units == GridUnits::omega_m ? params.omega_m : 1.0;
    if (!(scale > 0.0)) {
        throw ConfigError("grid.units", "omega_m units need omega_m > 0; use absolute units");
    }
    try {
        return spacing == Spacing::log
                   ? FrequencyGrid::logarithmic(min * scale, max * scale, count, pole_exclusion)
                   : FrequencyGrid::linear(min * scale, max * scale, count, pole_exclusion);
    } catch (const InvalidParameter& e) {
        throw ConfigError("grid", e.what());
    }
}

GridSpec parse_grid(std::string_view text, GridSpec base) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : text) {
        if (c == ':') {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    parts.push_back(cur);
    if (parts.size() != 4) {
        throw ConfigError("--grid", "expected min:max:count:log|lin, got '" + std::string(text) + "'");
    }
    try {
        std::size_t used = 0;
        base.min = std::stod(parts[0], &used);
        if (used != parts[0].size()) throw std::invalid_argument("min");
        base.max = std::stod(parts[1], &used);
        if (used != parts[1].size()) throw std::invalid_argument("max");
        const long long n = std::stoll(parts[2], &used);
        if (used != parts[2].size() || n <= 0) throw std::invalid_argument("count");
        base.count = static_cast<std::size_t>(n);
    } catch (const std::logic_error&) {
        throw ConfigError("--grid", "bad number in '" + std::string(text) + "'");
    }
    if (parts[3] == "log") base.spacing = Spacing::log;
    else if (parts[3] == "lin") base.spacing = Spacing::lin;
    else throw ConfigError("--grid", "spacing must be 'log' or 'lin', got '" + parts[3] + "'");
    return base;
}

void Tolerances::apply_override(std::string_view assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos) {
        throw ConfigError("--tolerance", "expected name=value, got '" + std::string(assignment) + "'");
    }
    const std::string name(assignment.substr(0, eq));
    const std::string value(assignment.substr(eq + 1));
    double* slot = nullptr;
    if (name == "cancellation") slot = &cancellation;
    else if (name == "rotation") slot = &rotation;
    else if (name == "realizability") slot = &realizability;
    else if (name == "matching") slot = &matching;
    else if (name == "certificate") slot = &certificate;
    else if (name == "path") slot = &path;
    else {
        throw ConfigError("--tolerance",
                          "unknown tolerance '" + name +
                              "' (valid: cancellation, rotation, realizability, matching, "
                              "certificate, path)");
    }
    try {
        std::size_t used = 0;
        const double v = std::stod(value, &used);
        if (used != value.size() || !(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument(name);
        *slot = v;
    } catch (const std::logic_error&) {
        throw ConfigError("tolerances." + name, "expected a positive number, got '" + value + "'");
    }
}

void RunConfig::validate() const {
    try {
        sensor.validate();
    } catch (const InvalidParameter& e) {
        throw ConfigError("sensor." + e.field(), e.what());
    }
    if (scheme.kind != "all") {
        try {
            parse_scheme_kind(scheme.kind);
        } catch (const InvalidParameter& e) {
            throw ConfigError("scheme.kind", e.what());
        }
    }
    if (!(scheme.lowfreq_scale >= 1.0)) throw ConfigError("scheme.lowfreq_scale", "must be >= 1");
    if (!(noise.squeeze_r >= 0.0)) throw ConfigError("noise.squeeze_r", "must be >= 0");
    if (!(grid.min > 0.0)) throw ConfigError("grid.min", "must be > 0");
    if (!(grid.max >= grid.min)) throw ConfigError("grid.max", "must be >= grid.min");
    if (grid.count == 0) throw ConfigError("grid.count", "must be > 0");
    if (!(grid.pole_exclusion >= 0.0)) throw ConfigError("grid.pole_exclusion", "must be >= 0");
    for (const auto& [name, v] :
         {std::pair{"cancellation", tolerances.cancellation}, {"rotation", tolerances.rotation},
          {"realizability", tolerances.realizability}, {"matching", tolerances.matching},
          {"certificate", tolerances.certificate}, {"path", tolerances.path}}) {
        if (!(v > 0.0)) throw ConfigError(std::string("tolerances.") + name, "must be > 0");
    }
}

RunConfig preset(std::string_view name) {
    RunConfig c;
    c.preset = std::string(name);
    if (name == "normalized") {
        c.sensor = SensorParams::normalized();
        return c;
    }
    const double omega_0 = kTwoPi * constants::speed_of_light / 1064e-9;
    if (name == "gw") {
        const double w = kTwoPi * 10.0;
        c.sensor = SensorParams::from_power(constants::hbar, 40.0, w, w, omega_0, 5000.0, 10.0);
        return c;
    }
    if (name == "micro") {
        const double w = kTwoPi * 5e7;
        c.sensor = SensorParams::from_power(constants::hbar, 1e-11, w, w, omega_0, 1e-4, 0.1);
        return c;
    }
    throw ConfigError("preset", "unknown preset '" + std::string(name) +
                                    "' (valid: gw, micro, normalized)");
}

std::string print_config(const RunConfig& c) {
    json j;
    j["preset"] = c.preset;
    j["sensor"] = {{"hbar", c.sensor.hbar},       {"mass", c.sensor.mass},
                   {"omega_m", c.sensor.omega_m}, {"gamma", c.sensor.gamma},
                   {"omega_0", c.sensor.omega_0}, {"length", c.sensor.length},
                   {"alpha", c.sensor.alpha}};
    j["scheme"] = {{"kind", c.scheme.kind},
                   {"lowfreq_scale", c.scheme.lowfreq_scale},
                   {"enforce_matching", c.scheme.enforce_matching}};
    if (c.scheme.matching) {
        j["scheme"]["matching"] = {
            {"mu", c.scheme.matching->mu}, {"nu", c.scheme.matching->nu}, {"g", c.scheme.matching->g}};
    }
    j["noise"] = {{"squeeze_r", c.noise.squeeze_r}, {"squeeze_angle", c.noise.squeeze_angle}};
    j["grid"] = {{"min", c.grid.min},
                 {"max", c.grid.max},
                 {"count", c.grid.count},
                 {"spacing", c.grid.spacing == Spacing::log ? "log" : "lin"},
                 {"units", c.grid.units == GridUnits::omega_m ? "omega_m" : "absolute"},
                 {"pole_exclusion", c.grid.pole_exclusion}};
    j["graph"] = {{"source", c.graph.source}, {"sink", c.graph.sink}};
    j["tolerances"] = {{"cancellation", c.tolerances.cancellation},
                       {"rotation", c.tolerances.rotation},
                       {"realizability", c.tolerances.realizability},
                       {"matching", c.tolerances.matching},
                       {"certificate", c.tolerances.certificate},
                       {"path", c.tolerances.path}};
    j["output"] = json::object();
    if (c.output.format) j["output"]["format"] = format_name(*c.output.format);
    j["output"]["path"] = c.output.path;
    j["threads"] = c.threads;
    return j.dump(2) + "\n";
}

RunConfig parse_config(std::string_view text, const RunConfig& base) {
    json j;
    try {
        j = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        const auto [line, col] = line_and_column(text, e.byte);
        throw ConfigError("line " + std::to_string(line) + ", column " + std::to_string(col),
                          "malformed JSON");
    }
    if (!j.is_object()) throw ConfigError("line 1, column 1", "top level must be a JSON object");
    reject_unknown(j, "",
                   {"preset", "sensor", "scheme", "noise", "grid", "graph", "tolerances", "output",
                    "threads"});

    RunConfig c = base;
    if (j.contains("preset")) {
        std::string name;
        read_string(j, "preset", "", name);
        c = preset(name);
    }
    if (j.contains("sensor")) read_sensor(object_at(j, "sensor", ""), c.sensor);
    if (j.contains("scheme")) read_scheme(object_at(j, "scheme", ""), c.scheme);
    if (j.contains("noise")) {
        const json& n = object_at(j, "noise", "");
        reject_unknown(n, "noise", {"squeeze_r", "squeeze_angle"});
        read_number(n, "squeeze_r", "noise", c.noise.squeeze_r);
        read_number(n, "squeeze_angle", "noise", c.noise.squeeze_angle);
    }
    if (j.contains("grid")) read_grid(object_at(j, "grid", ""), c.grid);
    if (j.contains("graph")) {
        const json& g = object_at(j, "graph", "");
        reject_unknown(g, "graph", {"source", "sink"});
        read_string(g, "source", "graph", c.graph.source);
        read_string(g, "sink", "graph", c.graph.sink);
    }
    if (j.contains("tolerances")) read_tolerances(object_at(j, "tolerances", ""), c.tolerances);
    if (j.contains("output")) {
        const json& o = object_at(j, "output", "");
        reject_unknown(o, "output", {"format", "path"});
        if (o.contains("format")) {
            if (o.at("format").is_null()) {
                c.output.format.reset();
            } else {
                std::string f;
                read_string(o, "format", "output", f);
                c.output.format = parse_format(f, "output.format");
            }
        }
        read_string(o, "path", "output", c.output.path);
    }
    read_count(j, "threads", "", c.threads);
    c.validate();
    return c;
}

RunConfig load_config(const std::string& path, const RunConfig& base) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path, "cannot open file");
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str(), base);
}

}  // namespace qnc::cli
