#pragma once

#include <functional>
#include <numbers>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "qnc/linsys.hpp"
#include "qnc/optomech.hpp"
#include "qnc/readout.hpp"
#include "qnc/schemes.hpp"

namespace qnc {

// Spectral densities are double-sided and symmetrized; a vacuum quadrature
// has PSD 1/2 and the pair matrix of any pure Gaussian state has det = 1/4.

inline constexpr double kAmplitudeQuadrature = 0.0;
inline constexpr double kPhaseQuadrature = std::numbers::pi / 2.0;

struct Vacuum {
    friend bool operator==(const Vacuum&, const Vacuum&) = default;
};

/// Stationary squeezed vacuum. `angle` is the orientation of the squeezed
/// quadrature measured from the first quadrature of the pair, so
/// kPhaseQuadrature squeezes the second one by e^{-2r}.
struct Squeezed {
    double r = 0.0;
    double angle = kPhaseQuadrature;
    friend bool operator==(const Squeezed&, const Squeezed&) = default;
};

using PairState = std::variant<Vacuum, Squeezed>;

/// A quadrature pair of inputs described jointly. When `rotation` is set the
/// state applies to source quadratures (chi1, chi2) and the inputs are
/// xi = R(phi(Omega)) chi, R = [[cos, -sin], [sin, cos]].
struct PairSpec {
    std::string first;
    std::string second;
    PairState state;
    std::function<double(double)> rotation;
    std::string source_first;
    std::string source_second;
};

struct ClassicalSpec {
    std::string label;
    std::function<double(double)> psd;
};

class NoiseSpec {
public:
    NoiseSpec& vacuum(std::string first, std::string second);
    NoiseSpec& squeezed(std::string first, std::string second, double r,
                        double angle = kPhaseQuadrature);
    NoiseSpec& rotated(std::string first, std::string second, PairState base,
                       std::function<double(double)> phi, std::string source_first = "chi1",
                       std::string source_second = "chi2");
    NoiseSpec& classical(std::string label, std::function<double(double)> psd);
    NoiseSpec& silent(std::string label);

    /// Vacuum on every commuting-conjugate input pair of the model, silent
    /// classical inputs.
    static NoiseSpec vacuum_for(const StateSpaceModel& model);

    const std::vector<PairSpec>& pairs() const noexcept { return pairs_; }
    const std::vector<ClassicalSpec>& classical_inputs() const noexcept { return classical_; }
    const std::vector<std::string>& silent_inputs() const noexcept { return silent_; }

    /// 2x2 symmetrized spectral matrix of the pair's inputs at Omega.
    Eigen::Matrix2d pair_matrix(const PairSpec& pair, double omega) const;

private:
    std::vector<PairSpec> pairs_;
    std::vector<ClassicalSpec> classical_;
    std::vector<std::string> silent_;
};

/// Spectral matrix 1/2 R(angle) diag(e^{-2r}, e^{2r}) R(angle)^T.
Eigen::Matrix2d squeezed_matrix(double r, double angle);

struct OutputPsd {
    double omega = 0.0;
    /// Per-source contributions; quadrature pairs are split along the
    /// principal axes of their state nearest to the source labels, so every
    /// entry is >= 0 and the entries sum to `total`.
    std::vector<std::pair<std::string, double>> contributions;
    double total = 0.0;

    double contribution(std::string_view source) const;
};

/// Output PSD of the measured quadrature. Every model input must be covered
/// by exactly one entry of `spec` (MissingNoiseSpec otherwise).
OutputPsd output_psd(const TransferMatrix& K, const NoiseSpec& spec, const Readout& measured);

struct BudgetCurve {
    std::vector<double> omega;
    Labels sources;
    std::vector<std::vector<double>> contributions;  // [source][point]
    std::vector<double> total;
    std::vector<double> signal_gain;      // |signal transfer|^2
    std::vector<double> force_referred;   // total / |signal transfer|^2
    std::vector<double> sql;
    std::vector<double> ratio;            // force_referred / sql
    std::vector<bool> flagged;            // pole or singular point; values NaN
};

/// Force-referred noise of `model` read out by `measured`. The signal input
/// must be silent (or absent from `spec`) and is referred through
/// |K(signal -> measured)|^2. Throws ZeroSignalTransfer when that gain vanishes.
BudgetCurve force_sensitivity(const StateSpaceModel& model, const NoiseSpec& spec,
                              const FrequencyGrid& grid, const Readout& measured,
                              const SensorParams& params, const std::string& signal_input = "f");

/// chi2 squeezed by r, then the pair rotated by the frequency-dependent
/// angle phi(Omega) into (xi1, xi2); the force input is silent.
NoiseSpec apply_unruh_spec(const SensorParams& params, double r);

/// Noise spec a scheme is normally run with: the source pair squeezed by r
/// along `angle` (r = 0 is vacuum), rotated for the Unruh scheme, signal
/// input silent.
NoiseSpec scheme_noise_spec(const SchemeSetup& setup, double r,
                            double angle = kPhaseQuadrature);

BudgetCurve scheme_budget(const SchemeSetup& setup, const SensorParams& params,
                          const FrequencyGrid& grid, double r = 0.0,
                          double angle = kPhaseQuadrature);

}  // namespace qnc
