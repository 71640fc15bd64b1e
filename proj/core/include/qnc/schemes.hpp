#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qnc/linsys.hpp"
#include "qnc/optomech.hpp"
#include "qnc/readout.hpp"

namespace qnc {

enum class SchemeKind {
    baseline,
    unruh_input_rotation,
    variational_readout,
    intracavity_matched,
    input_matched,
    output_matched,
};

std::string_view to_string(SchemeKind kind);
/// Throws InvalidParameter for unknown names.
SchemeKind parse_scheme_kind(std::string_view name);

enum class SqueezerHost { sensor_cavity, input_squeezer, output_squeezer };

/// Couplings of the anti-noise resonator:
///     dq'/dt = mu p',   dp'/dt = nu q' + g a1,   da2/dt += g q'.
/// Cancellation needs mu nu = -omega_m^2 and mu g^2 = -hbar kappa^2 / m,
/// which forces mu < 0 (a negative-energy mode).
struct MatchedSqueezerParams {
    double mu = -1.0;
    double nu = 1.0;
    double g = 1.0;
    SqueezerHost host = SqueezerHost::sensor_cavity;
    double squeezer_gamma = 1.0;

    /// nu = -mu = omega_m, g = kappa sqrt(hbar / (m omega_m)), squeezer_gamma = gamma.
    static MatchedSqueezerParams canonical(const SensorParams& params,
                                           SqueezerHost host = SqueezerHost::sensor_cavity);
};

/// Both sides of the two matching conditions and their relative mismatch.
struct MatchingResidual {
    double frequency_lhs = 0.0;  // mu nu
    double frequency_rhs = 0.0;  // -omega_m^2
    double coupling_lhs = 0.0;   // mu g^2
    double coupling_rhs = 0.0;   // -hbar kappa^2 / m
    double frequency_relative = 0.0;
    double coupling_relative = 0.0;
};

MatchingResidual matching_residual(const SensorParams& params, const MatchedSqueezerParams& sq);

/// Throws MatchingViolation quoting both sides when either condition is off
/// by more than `tolerance` (relative) or mu >= 0.
void check_matching(const SensorParams& params, const MatchedSqueezerParams& sq,
                    double tolerance = 1e-12);

/// Input rotation phi with tan(phi) = -K_pm / K_cav, principal branch.
double unruh_rotation_angle(const SensorParams& params, double omega);

struct ReadoutAngle {
    double theta = 0.0;
    Complex signal_transfer;  // K_f cos(theta)
};

/// Readout angle theta with tan(theta) = K_pm / K_cav for the quadrature
/// -eta1 sin(theta) + eta2 cos(theta), principal branch.
ReadoutAngle variational_readout_angle(const SensorParams& params, double omega);

enum class MatchingCheck { enforce, skip };

/// Sensor augmented with the anti-noise pair (q', p'); states
/// (q, p, a1, a2, q', p'), [q', p'] = i.
StateSpaceModel build_intracavity_matched(const SensorParams& params,
                                          const MatchedSqueezerParams& sq,
                                          MatchingCheck check = MatchingCheck::enforce);

/// 2 gamma mu g^2 / ((-mu nu - Omega^2)(gamma - i Omega)^2)
Complex anti_noise_transfer(const MatchedSqueezerParams& sq, double gamma, double omega);

struct SqueezerLabels {
    Labels states = {"c1", "c2", "qs", "ps"};
    Labels inputs = {"xi1", "xi2"};
    Labels outputs = {"eta1", "eta2"};
};

/// Standalone cavity (no moving mirror) whose quadratures drive an auxiliary
/// resonator with mu = -omega_m, nu = omega_m, coupling g_s.
StateSpaceModel build_squeezer_block(double gamma_s, double g_s, double omega_m,
                                     const SqueezerLabels& labels = {});

enum class Placement { input, output };

/// Squeezer cascaded before (input) or after (output) the sensor. With
/// lowfreq_scale s > 1 the squeezer uses gamma_s = s gamma, g_s = sqrt(s) g,
/// which keeps g^2 / gamma and cancels only for Omega << gamma.
/// Input placement: inputs (xi1, xi2, f), outputs (eta1, eta2).
/// Output placement: inputs (f, xi1, xi2), outputs (zeta1, zeta2).
StateSpaceModel build_io_matched(const SensorParams& params, Placement placement,
                                 double lowfreq_scale = 1.0);

struct FeasibilityReport {
    double opa_gain_required = 0.0;        // (g L / c)^2
    double opa_gain_floor = 0.0;           // gamma omega_m (L / c)^2
    double aux_photon_number = 0.0;        // g^2 alpha^2 / omega_m^2
    double backaction_significance = 0.0;  // g^2 / (gamma omega_m)
    double mean_field_offset = 0.0;        // imaginary input displacement A_in g^2 / (gamma omega_m)
};

FeasibilityReport feasibility(const SensorParams& params, double length,
                              double speed_of_light = constants::speed_of_light);
inline FeasibilityReport feasibility(const SensorParams& params) {
    return feasibility(params, params.length);
}

/// Everything needed to run or verify one scheme: the model, how it is read
/// out, and (Unruh only) the frequency-dependent rotation of the input pair.
struct SchemeSetup {
    SchemeKind kind = SchemeKind::baseline;
    StateSpaceModel model;
    Readout readout;
    std::function<double(double)> input_rotation;
    std::string signal_input = "f";
    std::string amplitude_input = "xi1";
    std::string phase_input = "xi2";
    std::string amplitude_source = "xi1";  // "chi1" when rotated
    std::string phase_source = "xi2";      // "chi2" when rotated

    /// True for every kind except baseline.
    bool claims_cancellation() const { return kind != SchemeKind::baseline; }

    /// Transfers from (amplitude_source, phase_source) to the measured
    /// quadrature, with the input rotation applied.
    std::pair<Complex, Complex> source_transfers(const TransferMatrix& K) const;
    Complex signal_transfer(const TransferMatrix& K) const;
};

struct SchemeOptions {
    double lowfreq_scale = 1.0;
    std::optional<MatchedSqueezerParams> matching;
    MatchingCheck check = MatchingCheck::enforce;
};

SchemeSetup make_scheme(SchemeKind kind, const SensorParams& params,
                        const SchemeOptions& options = {});

/// Back-action residual |amplitude source -> measured| against |K_pm| on a grid.
struct CancellationProfile {
    std::vector<double> omega;
    std::vector<double> residual;
    std::vector<double> reference;
    std::vector<bool> flagged;
    double max_reference = 0.0;
    /// max over unflagged points of residual / max_reference.
    double max_relative_residual = 0.0;
    /// max over unflagged points of residual / reference (pointwise).
    double max_pointwise_residual = 0.0;
};

CancellationProfile cancellation_profile(const SchemeSetup& setup, const SensorParams& params,
                                         const FrequencyGrid& grid);

}  // namespace qnc
