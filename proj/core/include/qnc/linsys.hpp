#pragma once

#include <complex>
#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace qnc {

using Matrix = Eigen::MatrixXd;
using CMatrix = Eigen::MatrixXcd;
using Complex = std::complex<double>;
using Labels = std::vector<std::string>;

/// Indices of a (position, momentum)-like pair of states that form one
/// resonator. Flow-graph extraction condenses each declared pair into a
/// single second-order block.
struct ResonatorPair {
    std::size_t position = 0;
    std::size_t momentum = 0;

    friend bool operator==(const ResonatorPair&, const ResonatorPair&) = default;
};

/// Linear quadrature model
///
///     dx/dt = F x + G w,    y = H x + J w
///
/// together with the equal-time commutator matrices of the state (Theta)
/// and of the inputs (Theta_w, zero rows/columns for classical inputs).
/// Immutable once constructed; the constructor validates shapes, label
/// uniqueness, finiteness and exact antisymmetry of both commutator matrices.
class StateSpaceModel {
public:
    struct Parts {
        Labels states;
        Labels inputs;
        Labels outputs;
        Matrix F;
        Matrix G;
        Matrix H;
        Matrix J;
        Matrix state_comm;
        Matrix input_comm;
        std::vector<ResonatorPair> resonators;
    };

    explicit StateSpaceModel(Parts parts);

    const Labels& state_labels() const noexcept { return p_.states; }
    const Labels& input_labels() const noexcept { return p_.inputs; }
    const Labels& output_labels() const noexcept { return p_.outputs; }

    const Matrix& F() const noexcept { return p_.F; }
    const Matrix& G() const noexcept { return p_.G; }
    const Matrix& H() const noexcept { return p_.H; }
    const Matrix& J() const noexcept { return p_.J; }
    const Matrix& state_comm() const noexcept { return p_.state_comm; }
    const Matrix& input_comm() const noexcept { return p_.input_comm; }
    const std::vector<ResonatorPair>& resonators() const noexcept { return p_.resonators; }
    const Parts& parts() const noexcept { return p_; }

    std::size_t num_states() const noexcept { return p_.states.size(); }
    std::size_t num_inputs() const noexcept { return p_.inputs.size(); }
    std::size_t num_outputs() const noexcept { return p_.outputs.size(); }

    // Lookups throw LabelError listing the valid labels.
    std::size_t state_index(std::string_view label) const;
    std::size_t input_index(std::string_view label) const;
    std::size_t output_index(std::string_view label) const;

    /// True when the input has an all-zero commutator row (a c-number signal).
    bool is_classical_input(std::size_t index) const;

private:
    Parts p_;
};

/// K(Omega) with the labels of the model it came from.
struct TransferMatrix {
    double omega = 0.0;
    CMatrix entries;
    Labels inputs;
    Labels outputs;

    Complex at(std::string_view output, std::string_view input) const;
};

class FrequencyGrid {
public:
    static constexpr double kDefaultPoleExclusion = 1e-6;

    explicit FrequencyGrid(std::vector<double> points,
                           double pole_exclusion = kDefaultPoleExclusion);

    static FrequencyGrid logarithmic(double min, double max, std::size_t count,
                                     double pole_exclusion = kDefaultPoleExclusion);
    static FrequencyGrid linear(double min, double max, std::size_t count,
                                double pole_exclusion = kDefaultPoleExclusion);

    const std::vector<double>& points() const noexcept { return points_; }
    double pole_exclusion() const noexcept { return pole_exclusion_; }
    std::size_t size() const noexcept { return points_.size(); }

private:
    std::vector<double> points_;
    double pole_exclusion_;
};

struct SolveOptions {
    // Reciprocal condition bound below which (i*Omega*I + F) counts as singular.
    double rcond_min = 1e-14;
};

/// K(Omega) = -H (i Omega I + F)^{-1} G + J, via a pivoted LU solve of the
/// diagonally balanced system. Throws SingularFrequency below rcond_min.
TransferMatrix transfer_matrix(const StateSpaceModel& model, double omega,
                               const SolveOptions& options = {});

enum class SweepFlag { none, near_pole, singular };

struct SweepPoint {
    TransferMatrix response;  // entries are NaN when flag == singular
    SweepFlag flag = SweepFlag::none;

    bool flagged() const noexcept { return flag != SweepFlag::none; }
};

struct SweepOptions {
    SolveOptions solve;
    // 0 or 1 evaluates sequentially; results are identical either way.
    unsigned threads = 1;
};

std::vector<SweepPoint> sweep(const StateSpaceModel& model, const FrequencyGrid& grid,
                              const SweepOptions& options = {});

/// Nonnegative real frequencies Omega at which (i Omega I + F) is singular,
/// i.e. eigenvalues of F on the imaginary axis.
std::vector<double> real_axis_poles(const StateSpaceModel& model);

/// Upstream output label -> downstream input label.
using Wiring = std::map<std::string, std::string>;

/// Series composition. Unwired upstream outputs and unwired downstream inputs
/// stay external; the composite inputs are the upstream inputs followed by the
/// unwired downstream inputs, and the outputs are the unwired upstream outputs
/// followed by the downstream outputs.
StateSpaceModel cascade(const StateSpaceModel& upstream, const StateSpaceModel& downstream,
                        const Wiring& wiring);

/// Zero-state block with J = I mapping inputs[i] to outputs[i].
StateSpaceModel identity_block(Labels inputs, Labels outputs, Matrix input_comm);

/// max|F Theta + Theta F^T + G Theta_w G^T| scaled by the largest entry of the
/// three summands. Zero when the flow preserves the canonical commutators.
double check_realizability(const StateSpaceModel& model);

/// Diagnostic only: max|Theta H^T + G Theta_w J^T| scaled the same way. Zero
/// when outputs commute with the state at equal times.
double output_commutator_residual(const StateSpaceModel& model);

/// Reorders states: new state i is old state perm[i]. Resonator pairs follow.
StateSpaceModel permute_states(const StateSpaceModel& model, const std::vector<std::size_t>& perm);

/// Same dynamics with new labels (empty vector keeps the old ones).
StateSpaceModel relabel(const StateSpaceModel& model, Labels states, Labels inputs, Labels outputs);

}  // namespace qnc
