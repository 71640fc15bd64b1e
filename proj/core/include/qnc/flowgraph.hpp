#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "qnc/linsys.hpp"
#include "qnc/polynomial.hpp"

namespace qnc {

// Flow graphs work in the Laplace variable s = -i Omega, so that
// K(Omega) = H (s I - F)^{-1} G + J and a state with self-decay gamma has
// block gain 1 / (s + gamma).

/// Converts a real frequency to the Laplace variable used by edge gains.
inline Complex laplace_point(double omega) { return Complex(0.0, -omega); }

enum class FlowNodeKind { input, output, state, resonator };

/// One node of the condensed graph. State nodes hold one model state and
/// resonator nodes hold a declared (position, momentum) pair; `block(x, e)`
/// is the gain from entering at member e to leaving at member x, i.e. the
/// entries of (s I - F_block)^{-1}.
struct FlowNode {
    FlowNodeKind kind = FlowNodeKind::state;
    std::string name;
    std::vector<std::size_t> members;  // model state indices (block nodes only)
    std::vector<std::vector<RationalFunction>> block;

    std::size_t size() const noexcept { return members.size(); }
};

/// Constant-gain edge between nodes; ports index into the node's members
/// (always 0 for inputs and outputs).
struct FlowEdge {
    std::size_t from = 0;
    std::size_t from_port = 0;
    std::size_t to = 0;
    std::size_t to_port = 0;
    double gain = 0.0;
};

class SignalFlowGraph {
public:
    SignalFlowGraph(StateSpaceModel model, std::vector<FlowNode> nodes, std::vector<FlowEdge> edges);

    const StateSpaceModel& model() const noexcept { return model_; }
    const std::vector<FlowNode>& nodes() const noexcept { return nodes_; }
    const std::vector<FlowEdge>& edges() const noexcept { return edges_; }
    const std::vector<std::size_t>& out_edges(std::size_t node) const { return out_[node]; }

    std::size_t input_node(std::string_view label) const;
    std::size_t output_node(std::string_view label) const;
    /// Node that owns a model state.
    std::size_t node_of_state(std::size_t state) const { return state_node_[state]; }
    std::size_t port_of_state(std::size_t state) const { return state_port_[state]; }

private:
    StateSpaceModel model_;
    std::vector<FlowNode> nodes_;
    std::vector<FlowEdge> edges_;
    std::vector<std::vector<std::size_t>> out_;
    std::vector<std::size_t> state_node_;
    std::vector<std::size_t> state_port_;
};

/// Builds the condensed flow graph: arrows run from each right-hand-side
/// variable to the left-hand-side variable it drives. Declared resonator pairs
/// become single second-order blocks; any remaining cycle throws CycleError
/// naming it.
SignalFlowGraph extract_graph(const StateSpaceModel& model);

enum class PathClass { signal, noise, anti_noise, feedthrough };

std::string_view to_string(PathClass c);

struct FlowPath {
    std::vector<std::size_t> edges;
    std::vector<std::string> nodes;  // node names, source to sink
    RationalFunction gain;
    PathClass classification = PathClass::noise;

    /// "xi1 -> a1 -> [p>(q,p)>q] -> a2 -> eta2"
    std::string describe(const SignalFlowGraph& graph) const;
};

struct PathOptions {
    /// Frequency at which noise/anti-noise signs are read. The classification
    /// is advisory only.
    double classify_at = 0.5;
    /// Frequencies at which the path sum is compared with transfer_matrix;
    /// empty means {classify_at}.
    std::vector<double> probes;
};

struct PathReport {
    std::string source;
    std::string sink;
    std::vector<FlowPath> paths;
    RationalFunction sum;
    /// Per path, its numerator over the common denominator of `sum`.
    std::vector<Polynomial> aligned_numerators;
    /// max over probes of |sum - K| / max(max |K entry|, max |path gain|).
    double max_probe_deviation = 0.0;
};

PathReport enumerate_paths(const SignalFlowGraph& graph, std::string_view source,
                           std::string_view sink, const PathOptions& options = {});

struct CancellationCertificate {
    bool certified = false;
    /// max over powers k of |sum numerator_k| / max_paths |aligned numerator_k|.
    double coefficient_residual = 0.0;
    std::vector<double> omega;
    std::vector<double> residual;  // |sum(s(Omega))|, NaN where flagged
    std::vector<bool> flagged;
};

/// Certified when every coefficient of the summed numerator is at most
/// `tolerance` relative to the largest path term of the same power. The grid
/// residual profile is always filled in.
CancellationCertificate cancellation_certificate(const SignalFlowGraph& graph,
                                                 const PathReport& report,
                                                 const FrequencyGrid& grid,
                                                 double tolerance = 1e-12);
CancellationCertificate cancellation_certificate(const SignalFlowGraph& graph,
                                                 std::string_view source, std::string_view sink,
                                                 const FrequencyGrid& grid,
                                                 double tolerance = 1e-12);

/// Graphviz DOT text; edge labels carry the constant gains, block nodes their
/// characteristic polynomial.
std::string to_dot(const SignalFlowGraph& graph);

}  // namespace qnc
