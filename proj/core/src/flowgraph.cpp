#include "qnc/flowgraph.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <sstream>

#include "qnc/error.hpp"

namespace qnc {
namespace {

std::string short_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

FlowNode single_state_block(const StateSpaceModel& m, std::size_t i) {
    FlowNode n;
    n.kind = FlowNodeKind::state;
    n.name = m.state_labels()[i];
    n.members = {i};
    const double decay = m.F()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i));
    n.block = {{RationalFunction(Polynomial::constant(1.0), Polynomial::linear_factor(decay))}};
    return n;
}

FlowNode resonator_block(const StateSpaceModel& m, const ResonatorPair& pair) {
    const auto a = static_cast<Eigen::Index>(pair.position);
    const auto b = static_cast<Eigen::Index>(pair.momentum);
    const double faa = m.F()(a, a);
    const double fab = m.F()(a, b);
    const double fba = m.F()(b, a);
    const double fbb = m.F()(b, b);
    // (s I - M)^{-1} = adj / det for the 2x2 block M.
    const Polynomial det({faa * fbb - fab * fba, -(faa + fbb), 1.0});
    FlowNode n;
    n.kind = FlowNodeKind::resonator;
    n.name = "(" + m.state_labels()[pair.position] + "," + m.state_labels()[pair.momentum] + ")";
    n.members = {pair.position, pair.momentum};
    n.block = {
        {RationalFunction(Polynomial::linear_factor(fbb), det),
         RationalFunction(Polynomial::constant(fab), det)},
        {RationalFunction(Polynomial::constant(fba), det),
         RationalFunction(Polynomial::linear_factor(faa), det)},
    };
    return n;
}

}  // namespace

SignalFlowGraph::SignalFlowGraph(StateSpaceModel model, std::vector<FlowNode> nodes,
                                 std::vector<FlowEdge> edges)
    : model_(std::move(model)), nodes_(std::move(nodes)), edges_(std::move(edges)) {
    out_.assign(nodes_.size(), {});
    for (std::size_t e = 0; e < edges_.size(); ++e) out_[edges_[e].from].push_back(e);
    state_node_.assign(model_.num_states(), 0);
    state_port_.assign(model_.num_states(), 0);
    for (std::size_t n = 0; n < nodes_.size(); ++n) {
        for (std::size_t p = 0; p < nodes_[n].members.size(); ++p) {
            state_node_[nodes_[n].members[p]] = n;
            state_port_[nodes_[n].members[p]] = p;
        }
    }
}

std::size_t SignalFlowGraph::input_node(std::string_view label) const {
    for (std::size_t n = 0; n < nodes_.size(); ++n) {
        if (nodes_[n].kind == FlowNodeKind::input && nodes_[n].name == label) return n;
    }
    model_.input_index(label);  // throws with the valid labels
    throw LabelError("no input node '" + std::string(label) + "'");
}

std::size_t SignalFlowGraph::output_node(std::string_view label) const {
    for (std::size_t n = 0; n < nodes_.size(); ++n) {
        if (nodes_[n].kind == FlowNodeKind::output && nodes_[n].name == label) return n;
    }
    model_.output_index(label);
    throw LabelError("no output node '" + std::string(label) + "'");
}

SignalFlowGraph extract_graph(const StateSpaceModel& model) {
    std::vector<FlowNode> nodes;
    const std::size_t ns = model.num_states();

    std::vector<std::size_t> owner(ns, std::numeric_limits<std::size_t>::max());
    std::vector<std::size_t> port(ns, 0);
    std::vector<bool> paired(ns, false);
    for (const auto& pr : model.resonators()) paired[pr.position] = paired[pr.momentum] = true;

    for (std::size_t i = 0; i < model.num_inputs(); ++i) {
        nodes.push_back({FlowNodeKind::input, model.input_labels()[i], {}, {}});
    }
    const std::size_t first_block = nodes.size();
    for (const auto& pr : model.resonators()) {
        owner[pr.position] = owner[pr.momentum] = nodes.size();
        port[pr.position] = 0;
        port[pr.momentum] = 1;
        nodes.push_back(resonator_block(model, pr));
    }
    for (std::size_t i = 0; i < ns; ++i) {
        if (paired[i]) continue;
        owner[i] = nodes.size();
        nodes.push_back(single_state_block(model, i));
    }
    const std::size_t first_output = nodes.size();
    for (std::size_t o = 0; o < model.num_outputs(); ++o) {
        nodes.push_back({FlowNodeKind::output, model.output_labels()[o], {}, {}});
    }

    std::vector<FlowEdge> edges;
    const auto idx = [](std::size_t i) { return static_cast<Eigen::Index>(i); };
    for (std::size_t k = 0; k < ns; ++k) {
        for (std::size_t i = 0; i < model.num_inputs(); ++i) {
            const double v = model.G()(idx(k), idx(i));
            if (v != 0.0) edges.push_back({i, 0, owner[k], port[k], v});
        }
    }
    for (std::size_t k = 0; k < ns; ++k) {
        for (std::size_t l = 0; l < ns; ++l) {
            const double v = model.F()(idx(k), idx(l));
            if (v == 0.0 || owner[k] == owner[l]) continue;
            edges.push_back({owner[l], port[l], owner[k], port[k], v});
        }
    }
    for (std::size_t o = 0; o < model.num_outputs(); ++o) {
        for (std::size_t k = 0; k < ns; ++k) {
            const double v = model.H()(idx(o), idx(k));
            if (v != 0.0) edges.push_back({owner[k], port[k], first_output + o, 0, v});
        }
        for (std::size_t i = 0; i < model.num_inputs(); ++i) {
            const double v = model.J()(idx(o), idx(i));
            if (v != 0.0) edges.push_back({i, 0, first_output + o, 0, v});
        }
    }

    // Cycle check among block nodes (DFS colouring).
    std::vector<std::vector<std::size_t>> adj(nodes.size());
    for (const auto& e : edges) adj[e.from].push_back(e.to);
    std::vector<int> colour(nodes.size(), 0);
    std::vector<std::size_t> stack;
    std::function<void(std::size_t)> visit = [&](std::size_t n) {
        colour[n] = 1;
        stack.push_back(n);
        for (std::size_t m : adj[n]) {
            if (colour[m] == 1) {
                auto start = std::find(stack.begin(), stack.end(), m);
                std::string cycle;
                for (auto it = start; it != stack.end(); ++it) cycle += nodes[*it].name + " -> ";
                cycle += nodes[m].name;
                throw CycleError("state graph is cyclic after condensing resonator pairs: " + cycle);
            }
            if (colour[m] == 0) visit(m);
        }
        stack.pop_back();
        colour[n] = 2;
    };
    for (std::size_t n = first_block; n < first_output; ++n) {
        if (colour[n] == 0) visit(n);
    }

    return SignalFlowGraph(model, std::move(nodes), std::move(edges));
}

std::string_view to_string(PathClass c) {
    switch (c) {
        case PathClass::signal: return "signal";
        case PathClass::noise: return "noise";
        case PathClass::anti_noise: return "anti-noise";
        case PathClass::feedthrough: return "feedthrough";
    }
    return "unknown";
}

std::string FlowPath::describe(const SignalFlowGraph& graph) const {
    std::ostringstream os;
    const auto& nodes = graph.nodes();
    const auto& all = graph.edges();
    if (edges.empty()) return {};
    os << nodes[all[edges.front()].from].name;
    for (std::size_t i = 0; i < edges.size(); ++i) {
        const FlowEdge& e = all[edges[i]];
        const FlowNode& n = nodes[e.to];
        os << " -> ";
        if (n.kind == FlowNodeKind::resonator && i + 1 < edges.size()) {
            const FlowEdge& next = all[edges[i + 1]];
            os << "[" << graph.model().state_labels()[n.members[e.to_port]] << ">" << n.name << ">"
               << graph.model().state_labels()[n.members[next.from_port]] << "]";
        } else {
            os << n.name;
        }
    }
    return os.str();
}

PathReport enumerate_paths(const SignalFlowGraph& graph, std::string_view source,
                           std::string_view sink, const PathOptions& options) {
    const std::size_t src = graph.input_node(source);
    const std::size_t dst = graph.output_node(sink);
    const auto& nodes = graph.nodes();
    const auto& edges = graph.edges();
    const bool classical_source = graph.model().is_classical_input(graph.model().input_index(source));

    PathReport report;
    report.source = std::string(source);
    report.sink = std::string(sink);

    std::vector<std::size_t> trail;
    // Walks out of `node`, which was entered at `port` with accumulated gain.
    std::function<void(std::size_t, std::size_t, const RationalFunction&)> walk =
        [&](std::size_t node, std::size_t port, const RationalFunction& acc) {
            if (node == dst) {
                FlowPath path;
                path.edges = trail;
                path.gain = acc;
                path.nodes.push_back(nodes[src].name);
                for (std::size_t e : trail) path.nodes.push_back(nodes[edges[e].to].name);
                report.paths.push_back(std::move(path));
                return;
            }
            if (nodes[node].kind == FlowNodeKind::output) return;
            for (std::size_t e : graph.out_edges(node)) {
                const FlowEdge& edge = edges[e];
                RationalFunction g = acc * edge.gain;
                if (nodes[node].kind != FlowNodeKind::input) {
                    const RationalFunction& through = nodes[node].block[edge.from_port][port];
                    if (through.is_zero()) continue;
                    g = g * through;
                }
                trail.push_back(e);
                walk(edge.to, edge.to_port, g);
                trail.pop_back();
            }
        };
    walk(src, 0, RationalFunction::constant(1.0));

    // Common denominator over the distinct path denominators.
    std::vector<Polynomial> dens;
    for (const auto& p : report.paths) {
        if (std::find(dens.begin(), dens.end(), p.gain.denominator()) == dens.end()) {
            dens.push_back(p.gain.denominator());
        }
    }
    Polynomial common = Polynomial::constant(1.0);
    for (const auto& d : dens) common = common * d;
    Polynomial total;
    for (const auto& p : report.paths) {
        Polynomial aligned = p.gain.numerator();
        for (const auto& d : dens) {
            if (!(d == p.gain.denominator())) aligned = aligned * d;
        }
        total += aligned;
        report.aligned_numerators.push_back(std::move(aligned));
    }
    report.sum = RationalFunction(total, common);

    const Complex probe_s = laplace_point(options.classify_at);
    for (auto& p : report.paths) {
        if (p.edges.size() == 1) {
            p.classification = PathClass::feedthrough;
        } else if (classical_source) {
            p.classification = PathClass::signal;
        } else {
            p.classification = p.gain(probe_s).real() < 0.0 ? PathClass::anti_noise : PathClass::noise;
        }
    }

    std::vector<double> probes = options.probes;
    if (probes.empty()) probes.push_back(options.classify_at);
    for (double w : probes) {
        const TransferMatrix full = transfer_matrix(graph.model(), w);
        const Complex k = full.at(sink, source);
        const Complex s = laplace_point(w);
        double scale = full.entries.cwiseAbs().maxCoeff();
        for (const auto& p : report.paths) scale = std::max(scale, std::abs(p.gain(s)));
        const double diff = std::abs(report.sum(s) - k);
        report.max_probe_deviation =
            std::max(report.max_probe_deviation, scale > 0.0 ? diff / scale : diff);
    }
    return report;
}

CancellationCertificate cancellation_certificate(const SignalFlowGraph& graph,
                                                 const PathReport& report,
                                                 const FrequencyGrid& grid, double tolerance) {
    CancellationCertificate cert;
    const Polynomial& num = report.sum.numerator();
    std::size_t top_degree = num.coefficients().size();
    for (const auto& a : report.aligned_numerators) {
        top_degree = std::max(top_degree, a.coefficients().size());
    }
    for (std::size_t k = 0; k < top_degree; ++k) {
        double scale = 0.0;
        for (const auto& a : report.aligned_numerators) scale = std::max(scale, std::abs(a[k]));
        const double r = std::abs(num[k]);
        if (r == 0.0) continue;
        cert.coefficient_residual =
            std::max(cert.coefficient_residual,
                     scale > 0.0 ? r / scale : std::numeric_limits<double>::infinity());
    }
    cert.certified = cert.coefficient_residual <= tolerance;

    const auto poles = real_axis_poles(graph.model());
    for (double w : grid.points()) {
        bool flagged = false;
        for (double p : poles) {
            if (std::abs(w - p) <= grid.pole_exclusion() * p) flagged = true;
        }
        const Complex v = report.sum(laplace_point(w));
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) flagged = true;
        cert.omega.push_back(w);
        cert.flagged.push_back(flagged);
        cert.residual.push_back(flagged ? std::numeric_limits<double>::quiet_NaN() : std::abs(v));
    }
    return cert;
}

CancellationCertificate cancellation_certificate(const SignalFlowGraph& graph,
                                                 std::string_view source, std::string_view sink,
                                                 const FrequencyGrid& grid, double tolerance) {
    return cancellation_certificate(graph, enumerate_paths(graph, source, sink), grid, tolerance);
}

std::string to_dot(const SignalFlowGraph& graph) {
    std::ostringstream os;
    os << "digraph flow {\n  rankdir=LR;\n";
    const auto& nodes = graph.nodes();
    for (std::size_t n = 0; n < nodes.size(); ++n) {
        const FlowNode& node = nodes[n];
        os << "  n" << n << " [label=\"" << node.name;
        switch (node.kind) {
            case FlowNodeKind::input: os << "\", shape=plaintext"; break;
            case FlowNodeKind::output: os << "\", shape=plaintext"; break;
            case FlowNodeKind::state:
                os << "\\n1/(" << node.block[0][0].denominator().to_string() << ")\", shape=box";
                break;
            case FlowNodeKind::resonator:
                os << "\\ndet = " << node.block[0][0].denominator().to_string()
                   << "\", shape=box, style=rounded";
                break;
        }
        os << "];\n";
    }
    const auto& labels = graph.model().state_labels();
    for (const auto& e : graph.edges()) {
        os << "  n" << e.from << " -> n" << e.to << " [label=\"" << short_number(e.gain);
        if (nodes[e.from].kind == FlowNodeKind::resonator) {
            os << " (from " << labels[nodes[e.from].members[e.from_port]] << ")";
        }
        if (nodes[e.to].kind == FlowNodeKind::resonator) {
            os << " (into " << labels[nodes[e.to].members[e.to_port]] << ")";
        }
        os << "\"];\n";
    }
    os << "}\n";
    return os.str();
}

}  // namespace qnc
