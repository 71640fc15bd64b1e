#include "qnc_cli/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <functional>
#include <limits>
#include <optional>

#include <json.hpp>

#include "qnc/flowgraph.hpp"
#include "qnc/noisebudget.hpp"

namespace qnc::cli {
namespace {

using ojson = nlohmann::ordered_json;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string num(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (v == 0.0) v = 0.0;  // drop the sign of negative zero
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.16e", v);
    return buf;
}

Format format_or(const RunConfig& c, Format fallback) { return c.output.format.value_or(fallback); }

void csv_header(std::ostream& out, const CommandContext& ctx, std::string_view command) {
    out << "# generated " << ctx.timestamp << " by qnc " << command << "\n";
}

ojson json_header(const CommandContext& ctx, std::string_view command) {
    ojson j;
    j["generated"] = ctx.timestamp;
    j["command"] = std::string(command);
    return j;
}

void write_json(std::ostream& out, const ojson& j) { out << j.dump(2) << "\n"; }

ojson matrix_json(const Matrix& m) {
    ojson rows = ojson::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        ojson row = ojson::array();
        for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string flag_name(SweepFlag f) {
    switch (f) {
        case SweepFlag::none: return "";
        case SweepFlag::near_pole: return "near_pole";
        case SweepFlag::singular: return "singular";
    }
    return "";
}

SchemeKind single_kind(const RunConfig& c) {
    if (c.scheme.kind == "all") {
        throw ConfigError("scheme.kind", "'all' is only accepted by verify");
    }
    return parse_scheme_kind(c.scheme.kind);
}

MatchedSqueezerParams matching_params(const RunConfig& c) {
    MatchedSqueezerParams sq = MatchedSqueezerParams::canonical(c.sensor);
    if (c.scheme.matching) {
        sq.mu = c.scheme.matching->mu;
        sq.nu = c.scheme.matching->nu;
        sq.g = c.scheme.matching->g;
    }
    return sq;
}

// ---------------------------------------------------------------- verify

struct Metric {
    std::string name;
    double value = 0.0;
    double limit = 0.0;
    bool pass() const { return value <= limit; }
};

struct VerifyLine {
    std::string scheme;
    bool claimed = true;
    std::vector<Metric> metrics;
    std::optional<bool> certified;
    std::string note;

    bool pass() const {
        if (!claimed) return true;
        if (certified && !*certified) return false;
        return std::all_of(metrics.begin(), metrics.end(), [](const Metric& m) { return m.pass(); });
    }
    std::string verdict() const { return claimed ? (pass() ? "PASS" : "FAIL") : "NO-CLAIM"; }
};

const std::vector<std::string> kMetricColumns = {
    "realizability", "cancellation", "rotation", "angle", "matching", "certificate"};

double max_unflagged(const std::vector<double>& v, const std::vector<bool>& flagged) {
    double m = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!flagged[i]) m = std::max(m, v[i]);
    }
    return m;
}

VerifyLine verify_rotation_scheme(const RunConfig& c, SchemeKind kind, const FrequencyGrid& grid) {
    const SchemeSetup setup = make_scheme(kind, c.sensor);
    const CancellationProfile prof = cancellation_profile(setup, c.sensor, grid);
    double angle = 0.0;
    for (std::size_t i = 0; i < prof.omega.size(); ++i) {
        if (prof.flagged[i]) continue;
        const double tphi = std::tan(unruh_rotation_angle(c.sensor, prof.omega[i]));
        const double ttheta = std::tan(variational_readout_angle(c.sensor, prof.omega[i]).theta);
        angle = std::max(angle, std::abs(ttheta + tphi) / std::max(1.0, std::abs(ttheta)));
    }
    VerifyLine line;
    line.scheme = std::string(to_string(kind));
    line.metrics = {
        {"realizability", check_realizability(setup.model), c.tolerances.realizability},
        {"rotation", prof.max_pointwise_residual, c.tolerances.rotation},
        {"angle", angle, c.tolerances.rotation},
    };
    return line;
}

VerifyLine verify_intracavity(const RunConfig& c, const FrequencyGrid& grid) {
    const MatchedSqueezerParams sq = matching_params(c);
    const MatchingResidual mr = matching_residual(c.sensor, sq);
    SchemeOptions opts;
    opts.matching = sq;
    opts.check = MatchingCheck::skip;
    const SchemeSetup setup = make_scheme(SchemeKind::intracavity_matched, c.sensor, opts);
    const CancellationProfile prof = cancellation_profile(setup, c.sensor, grid);

    const SignalFlowGraph graph = extract_graph(setup.model);
    const CancellationCertificate cert =
        cancellation_certificate(graph, setup.amplitude_source, setup.readout.quadrature, grid,
                                 c.tolerances.certificate);

    VerifyLine line;
    line.scheme = std::string(to_string(SchemeKind::intracavity_matched));
    line.metrics = {
        {"realizability", check_realizability(setup.model), c.tolerances.realizability},
        {"cancellation", prof.max_relative_residual, c.tolerances.cancellation},
        {"matching", std::max(mr.frequency_relative, mr.coupling_relative), c.tolerances.matching},
        {"certificate", cert.coefficient_residual, c.tolerances.certificate},
    };
    line.certified = cert.certified;
    if (!(sq.mu < 0.0)) line.note = "mu must be negative";
    if (std::max(mr.frequency_relative, mr.coupling_relative) > c.tolerances.matching) {
        char buf[256];
        std::snprintf(buf, sizeof buf, "mu*nu = %.17g vs -omega_m^2 = %.17g; mu*g^2 = %.17g vs -hbar*kappa^2/m = %.17g",
                      mr.frequency_lhs, mr.frequency_rhs, mr.coupling_lhs, mr.coupling_rhs);
        line.note = buf;
    }
    return line;
}

VerifyLine verify_io(const RunConfig& c, const std::vector<SchemeKind>& kinds,
                     const std::string& name, const FrequencyGrid& grid) {
    VerifyLine line;
    line.scheme = name;
    double real = 0.0;
    double cancel = 0.0;
    SchemeOptions opts;
    opts.lowfreq_scale = c.scheme.lowfreq_scale;
    for (SchemeKind k : kinds) {
        const SchemeSetup setup = make_scheme(k, c.sensor, opts);
        real = std::max(real, check_realizability(setup.model));
        cancel = std::max(cancel, cancellation_profile(setup, c.sensor, grid).max_relative_residual);
    }
    line.metrics = {
        {"realizability", real, c.tolerances.realizability},
        {"cancellation", cancel, c.tolerances.cancellation},
    };
    if (kinds.size() > 1) line.note = "input and output placement";
    return line;
}

std::vector<VerifyLine> run_verify(const RunConfig& c) {
    const FrequencyGrid grid = c.grid.build(c.sensor);
    std::vector<VerifyLine> lines;
    const std::string& k = c.scheme.kind;
    if (k == "all" || k == "unruh_input_rotation") {
        lines.push_back(verify_rotation_scheme(c, SchemeKind::unruh_input_rotation, grid));
    }
    if (k == "all" || k == "variational_readout") {
        lines.push_back(verify_rotation_scheme(c, SchemeKind::variational_readout, grid));
    }
    if (k == "all" || k == "intracavity_matched") lines.push_back(verify_intracavity(c, grid));
    if (k == "all") {
        lines.push_back(verify_io(c, {SchemeKind::input_matched, SchemeKind::output_matched},
                                  "io_matched", grid));
    }
    if (k == "input_matched" || k == "output_matched") {
        lines.push_back(verify_io(c, {parse_scheme_kind(k)}, k, grid));
    }
    if (k == "baseline") {
        VerifyLine line;
        line.scheme = "baseline";
        line.claimed = false;
        const SchemeSetup setup = make_scheme(SchemeKind::baseline, c.sensor);
        line.metrics = {{"realizability", check_realizability(setup.model), c.tolerances.realizability}};
        line.note = "no cancellation claimed";
        lines.push_back(line);
    }
    return lines;
}

}  // namespace

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

SchemeSetup build_setup(const RunConfig& config, SchemeKind kind) {
    SchemeOptions opts;
    opts.lowfreq_scale = config.scheme.lowfreq_scale;
    opts.check = MatchingCheck::skip;
    if (kind == SchemeKind::intracavity_matched) {
        opts.matching = matching_params(config);
        if (config.scheme.enforce_matching) {
            check_matching(config.sensor, *opts.matching, config.tolerances.matching);
        }
    }
    return make_scheme(kind, config.sensor, opts);
}

int cmd_model(const RunConfig& config, std::ostream& out, const CommandContext& ctx) {
    const SchemeKind kind = single_kind(config);
    const SchemeSetup setup = build_setup(config, kind);
    const StateSpaceModel& m = setup.model;
    const double realizability = check_realizability(m);
    const double out_comm = output_commutator_residual(m);

    if (format_or(config, Format::json) == Format::csv) {
        csv_header(out, ctx, "model");
        out << "matrix,row,col,value\n";
        const auto block = [&](const char* name, const Matrix& mat, const Labels& rows,
                               const Labels& cols) {
            for (Eigen::Index i = 0; i < mat.rows(); ++i) {
                for (Eigen::Index k = 0; k < mat.cols(); ++k) {
                    out << name << "," << rows[static_cast<std::size_t>(i)] << ","
                        << cols[static_cast<std::size_t>(k)] << "," << num(mat(i, k)) << "\n";
                }
            }
        };
        block("F", m.F(), m.state_labels(), m.state_labels());
        block("G", m.G(), m.state_labels(), m.input_labels());
        block("H", m.H(), m.output_labels(), m.state_labels());
        block("J", m.J(), m.output_labels(), m.input_labels());
        block("state_comm", m.state_comm(), m.state_labels(), m.state_labels());
        block("input_comm", m.input_comm(), m.input_labels(), m.input_labels());
        out << "realizability_residual,,," << num(realizability) << "\n";
        out << "output_commutator_residual,,," << num(out_comm) << "\n";
        return kOk;
    }
    ojson j = json_header(ctx, "model");
    j["scheme"] = config.scheme.kind;
    j["states"] = m.state_labels();
    j["inputs"] = m.input_labels();
    j["outputs"] = m.output_labels();
    j["F"] = matrix_json(m.F());
    j["G"] = matrix_json(m.G());
    j["H"] = matrix_json(m.H());
    j["J"] = matrix_json(m.J());
    j["state_comm"] = matrix_json(m.state_comm());
    j["input_comm"] = matrix_json(m.input_comm());
    ojson pairs = ojson::array();
    for (const auto& r : m.resonators()) {
        pairs.push_back({m.state_labels()[r.position], m.state_labels()[r.momentum]});
    }
    j["resonators"] = pairs;
    j["realizability_residual"] = realizability;
    j["output_commutator_residual"] = out_comm;
    write_json(out, j);
    return kOk;
}

int cmd_sweep(const RunConfig& config, std::ostream& out, const CommandContext& ctx) {
    const SchemeSetup setup = build_setup(config, single_kind(config));
    const StateSpaceModel& m = setup.model;
    SweepOptions opts;
    opts.threads = config.threads;
    const auto points = sweep(m, config.grid.build(config.sensor), opts);

    if (format_or(config, Format::csv) == Format::csv) {
        csv_header(out, ctx, "sweep");
        out << "omega";
        for (const auto& o : m.output_labels()) {
            for (const auto& i : m.input_labels()) {
                const std::string e = o + "/" + i;
                out << ",re(" << e << "),im(" << e << "),abs(" << e << ")";
            }
        }
        out << ",flag\n";
        for (const auto& p : points) {
            out << num(p.response.omega);
            for (Eigen::Index o = 0; o < p.response.entries.rows(); ++o) {
                for (Eigen::Index i = 0; i < p.response.entries.cols(); ++i) {
                    const Complex k = p.response.entries(o, i);
                    out << "," << num(k.real()) << "," << num(k.imag()) << "," << num(std::abs(k));
                }
            }
            out << "," << flag_name(p.flag) << "\n";
        }
        return kOk;
    }
    ojson j = json_header(ctx, "sweep");
    j["scheme"] = config.scheme.kind;
    j["inputs"] = m.input_labels();
    j["outputs"] = m.output_labels();
    ojson rows = ojson::array();
    for (const auto& p : points) {
        ojson row;
        row["omega"] = p.response.omega;
        row["flag"] = flag_name(p.flag);
        ojson k = ojson::array();
        for (Eigen::Index o = 0; o < p.response.entries.rows(); ++o) {
            ojson r = ojson::array();
            for (Eigen::Index i = 0; i < p.response.entries.cols(); ++i) {
                const Complex v = p.response.entries(o, i);
                r.push_back({v.real(), v.imag()});
            }
            k.push_back(std::move(r));
        }
        row["K"] = std::move(k);
        rows.push_back(std::move(row));
    }
    j["rows"] = std::move(rows);
    write_json(out, j);
    return kOk;
}

int cmd_budget(const RunConfig& config, std::ostream& out, const CommandContext& ctx) {
    const SchemeSetup setup = build_setup(config, single_kind(config));
    const BudgetCurve b = scheme_budget(setup, config.sensor, config.grid.build(config.sensor),
                                        config.noise.squeeze_r, config.noise.squeeze_angle);

    if (format_or(config, Format::csv) == Format::csv) {
        csv_header(out, ctx, "budget");
        out << "omega";
        for (const auto& s : b.sources) out << ",S(" << s << ")";
        out << ",total,signal_gain,force_referred,sql,ratio,flag\n";
        for (std::size_t i = 0; i < b.omega.size(); ++i) {
            out << num(b.omega[i]);
            for (std::size_t s = 0; s < b.sources.size(); ++s) out << "," << num(b.contributions[s][i]);
            out << "," << num(b.total[i]) << "," << num(b.signal_gain[i]) << ","
                << num(b.force_referred[i]) << "," << num(b.sql[i]) << "," << num(b.ratio[i]) << ","
                << (b.flagged[i] ? "flagged" : "") << "\n";
        }
        return kOk;
    }
    ojson j = json_header(ctx, "budget");
    j["scheme"] = config.scheme.kind;
    j["measured"] = setup.readout.name;
    j["squeeze_r"] = config.noise.squeeze_r;
    j["sources"] = b.sources;
    ojson rows = ojson::array();
    for (std::size_t i = 0; i < b.omega.size(); ++i) {
        ojson row;
        row["omega"] = b.omega[i];
        ojson contrib;
        for (std::size_t s = 0; s < b.sources.size(); ++s) contrib[b.sources[s]] = b.contributions[s][i];
        row["contributions"] = std::move(contrib);
        row["total"] = b.total[i];
        row["signal_gain"] = b.signal_gain[i];
        row["force_referred"] = b.force_referred[i];
        row["sql"] = b.sql[i];
        row["ratio"] = b.ratio[i];
        row["flagged"] = static_cast<bool>(b.flagged[i]);
        rows.push_back(std::move(row));
    }
    j["rows"] = std::move(rows);
    write_json(out, j);
    return kOk;
}

int cmd_verify(const RunConfig& config, std::ostream& out, const CommandContext& ctx) {
    const std::vector<VerifyLine> lines = run_verify(config);
    const bool all_pass =
        std::all_of(lines.begin(), lines.end(), [](const VerifyLine& l) { return l.pass(); });

    const auto find = [](const VerifyLine& l, const std::string& name) -> const Metric* {
        for (const auto& m : l.metrics) {
            if (m.name == name) return &m;
        }
        return nullptr;
    };
    if (format_or(config, Format::csv) == Format::csv) {
        csv_header(out, ctx, "verify");
        out << "scheme,verdict";
        for (const auto& c : kMetricColumns) out << "," << c << "_residual";
        out << ",certified,note\n";
        for (const auto& l : lines) {
            out << l.scheme << "," << l.verdict();
            for (const auto& c : kMetricColumns) {
                const Metric* m = find(l, c);
                out << "," << (m ? num(m->value) : "");
            }
            out << "," << (l.certified ? (*l.certified ? "CERTIFIED" : "NOT CERTIFIED") : "");
            std::string note = l.note;
            std::replace(note.begin(), note.end(), ',', ';');
            out << "," << note << "\n";
        }
    } else {
        ojson j = json_header(ctx, "verify");
        ojson arr = ojson::array();
        for (const auto& l : lines) {
            ojson e;
            e["scheme"] = l.scheme;
            e["verdict"] = l.verdict();
            ojson metrics = ojson::array();
            for (const auto& m : l.metrics) {
                metrics.push_back({{"name", m.name},
                                   {"residual", m.value},
                                   {"tolerance", m.limit},
                                   {"pass", m.pass()}});
            }
            e["metrics"] = std::move(metrics);
            if (l.certified) e["certificate"] = *l.certified ? "CERTIFIED" : "NOT CERTIFIED";
            e["note"] = l.note;
            arr.push_back(std::move(e));
        }
        j["schemes"] = std::move(arr);
        j["verdict"] = all_pass ? "PASS" : "FAIL";
        write_json(out, j);
    }
    return all_pass ? kOk : kVerifyFail;
}

int cmd_feasibility(const RunConfig& config, std::ostream& out, const CommandContext& ctx) {
    const SensorParams& p = config.sensor;
    const FeasibilityReport r = feasibility(p);
    const double g = p.g();
    const std::vector<std::pair<std::string, double>> fields = {
        {"omega_m", p.omega_m},
        {"gamma", p.gamma},
        {"length", p.length},
        {"g", g},
        {"opa_gain_floor", r.opa_gain_floor},
        {"opa_gain_required", r.opa_gain_required},
        {"aux_photon_number", r.aux_photon_number},
        {"backaction_significance", r.backaction_significance},
        {"mean_field_offset", r.mean_field_offset},
    };
    if (format_or(config, Format::csv) == Format::csv) {
        csv_header(out, ctx, "feasibility");
        out << "preset";
        for (const auto& f : fields) out << "," << f.first;
        out << "\n" << config.preset;
        for (const auto& f : fields) out << "," << num(f.second);
        out << "\n";
        return kOk;
    }
    ojson j = json_header(ctx, "feasibility");
    j["preset"] = config.preset;
    for (const auto& f : fields) j[f.first] = f.second;
    write_json(out, j);
    return kOk;
}

int cmd_graph(const RunConfig& config, std::ostream& out, const CommandContext& ctx) {
    const SchemeSetup setup = build_setup(config, single_kind(config));
    const SignalFlowGraph graph = extract_graph(setup.model);
    const double w = config.sensor.omega_m > 0.0 ? config.sensor.omega_m : config.sensor.gamma;
    PathOptions opts;
    opts.classify_at = 0.5 * w;
    opts.probes = {0.3 * w, 0.5 * w, 1.7 * w, 4.1 * w};
    const std::string source = config.graph.source.empty() ? setup.amplitude_input : config.graph.source;
    const std::string sink = config.graph.sink.empty() ? setup.readout.quadrature : config.graph.sink;
    const PathReport report = enumerate_paths(graph, source, sink, opts);
    const CancellationCertificate cert = cancellation_certificate(
        graph, report, config.grid.build(config.sensor), config.tolerances.certificate);
    const std::string verdict = cert.certified ? "CERTIFIED" : "NOT CERTIFIED";
    const double max_residual = max_unflagged(cert.residual, cert.flagged);
    const Complex s = laplace_point(opts.classify_at);

    if (format_or(config, Format::json) == Format::csv) {
        csv_header(out, ctx, "graph");
        out << "path,classification,route,re(gain),im(gain)\n";
        for (std::size_t i = 0; i < report.paths.size(); ++i) {
            const auto& p = report.paths[i];
            const Complex v = p.gain(s);
            out << i + 1 << "," << to_string(p.classification) << "," << p.describe(graph) << ","
                << num(v.real()) << "," << num(v.imag()) << "\n";
        }
        const Complex v = report.sum(s);
        out << "sum," << verdict << "," << report.source << " -> " << report.sink << ","
            << num(v.real()) << "," << num(v.imag()) << "\n";
        return kOk;
    }
    ojson j = json_header(ctx, "graph");
    j["scheme"] = config.scheme.kind;
    j["source"] = report.source;
    j["sink"] = report.sink;
    ojson nodes = ojson::array();
    for (const auto& n : graph.nodes()) nodes.push_back(n.name);
    j["nodes"] = std::move(nodes);
    ojson edges = ojson::array();
    for (const auto& e : graph.edges()) {
        edges.push_back({{"from", graph.nodes()[e.from].name},
                         {"to", graph.nodes()[e.to].name},
                         {"gain", e.gain}});
    }
    j["edges"] = std::move(edges);
    ojson paths = ojson::array();
    for (const auto& p : report.paths) {
        const Complex v = p.gain(s);
        paths.push_back({{"route", p.describe(graph)},
                         {"classification", std::string(to_string(p.classification))},
                         {"gain", p.gain.to_string()},
                         {"value_at_classify", {v.real(), v.imag()}}});
    }
    j["paths"] = std::move(paths);
    j["sum"] = report.sum.to_string();
    j["max_probe_deviation"] = report.max_probe_deviation;
    j["certificate"] = {{"verdict", verdict},
                        {"coefficient_residual", cert.coefficient_residual},
                        {"max_grid_residual", max_residual}};
    j["dot"] = to_dot(graph);
    write_json(out, j);
    return kOk;
}

int run_command(std::string_view name, const RunConfig& config, std::ostream& out,
                std::ostream& err, const CommandContext& ctx) {
    using Fn = int (*)(const RunConfig&, std::ostream&, const CommandContext&);
    static const std::vector<std::pair<std::string_view, Fn>> table = {
        {"model", cmd_model},   {"sweep", cmd_sweep},
        {"budget", cmd_budget}, {"verify", cmd_verify},
        {"feasibility", cmd_feasibility}, {"graph", cmd_graph},
    };
    const auto it = std::find_if(table.begin(), table.end(),
                                 [&](const auto& e) { return e.first == name; });
    if (it == table.end()) {
        err << "error: unknown command '" << name << "'\n";
        return kUsage;
    }
    try {
        return it->second(config, out, ctx);
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const InvalidParameter& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const LabelError& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const MatchingViolation& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const Error& e) {
        err << "numerical failure: " << e.what() << "\n";
        return kNumerical;
    }
}

}  // namespace qnc::cli
