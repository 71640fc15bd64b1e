#pragma once

#include "qnc/linsys.hpp"

namespace qnc {

namespace constants {
inline constexpr double hbar = 1.054571817e-34;         // J s
inline constexpr double speed_of_light = 299792458.0;  // m / s
}  // namespace constants

/// Physical parameters of a Fabry-Perot cavity with one harmonically bound
/// mirror, driven on resonance. SI units unless `hbar` is overridden (the
/// normalized preset sets hbar = m = omega_m = gamma = kappa = 1).
///
/// The drive is stored as the mean intracavity amplitude alpha; the
/// factories below convert from input amplitude or input power.
struct SensorParams {
    double hbar = constants::hbar;
    double mass = 1.0;     // kg
    double omega_m = 1.0;  // mechanical resonance, rad/s (0 = free mass)
    double gamma = 1.0;    // cavity amplitude decay rate, rad/s
    double omega_0 = 1.0;  // optical carrier, rad/s
    double length = 1.0;   // half the round-trip length, m
    double alpha = 1.0;    // mean intracavity amplitude, sqrt(photons)

    static SensorParams normalized();

    /// alpha = A_in * sqrt(2 / gamma), A_in in sqrt(photons / s).
    static SensorParams from_input_amplitude(double hbar, double mass, double omega_m, double gamma,
                                             double omega_0, double length, double input_amplitude);
    /// A_in = sqrt(P / (hbar omega_0)), P in W.
    static SensorParams from_power(double hbar, double mass, double omega_m, double gamma,
                                   double omega_0, double length, double power);

    /// Copy whose alpha is chosen so that kappa() == kappa.
    SensorParams with_coupling(double kappa) const;

    /// Throws InvalidParameter naming the first offending field.
    void validate() const;

    /// kappa = sqrt(2) alpha omega_0 / L.
    double kappa() const;
    /// g = kappa sqrt(hbar / (m omega_m)); requires omega_m > 0.
    double g() const;
    /// Mean input amplitude A_in = alpha sqrt(gamma / 2).
    double input_amplitude() const;

    friend bool operator==(const SensorParams&, const SensorParams&) = default;
};

/// Quadrature model with states (q, p, a1, a2), inputs (f, xi1, xi2) and
/// outputs (eta1, eta2). [q,p] = i hbar, [a1,a2] = i, [xi1,xi2] = i delta.
StateSpaceModel build_sensor(const SensorParams& params);

/// Closed-form cavity, ponderomotive and signal transfer functions.
class AnalyticTransfers {
public:
    explicit AnalyticTransfers(const SensorParams& params);

    /// (gamma + i Omega) / (gamma - i Omega)
    Complex cavity(double omega) const;
    /// (2 gamma hbar kappa^2 / m) / ((omega_m^2 - Omega^2) (gamma - i Omega)^2)
    Complex ponderomotive(double omega) const;
    /// Same function written through g:
    /// (g^2 / gamma omega_m) (omega_m^2 / (omega_m^2 - Omega^2)) (2 gamma^2 / (gamma - i Omega)^2)
    Complex ponderomotive_factored(double omega) const;
    /// K_pm (gamma - i Omega) / (hbar kappa sqrt(2 gamma))
    Complex signal(double omega) const;
    /// The real ratio K_pm / K_cav = 2 gamma hbar kappa^2 / (m (omega_m^2 - Omega^2)(gamma^2 + Omega^2)).
    double ponderomotive_to_cavity(double omega) const;

    const SensorParams& params() const noexcept { return params_; }

private:
    void check_pole(const char* name, double omega) const;

    SensorParams params_;
    double kappa_;
};

struct NumericAnalyticReport {
    double max_relative_deviation = 0.0;
    double max_zero_entry = 0.0;  // largest |(eta1,f)| or |(eta1,xi2)|
};

/// Compares transfer_matrix(build_sensor(params)) against the closed forms on
/// every grid point: (eta2,f) -> K_f, (eta2,xi1) -> K_pm, (eta2,xi2) and
/// (eta1,xi1) -> K_cav, (eta1,f) = (eta1,xi2) = 0.
NumericAnalyticReport verify_numeric_vs_analytic(const SensorParams& params,
                                                 const FrequencyGrid& grid);

/// Force-noise standard quantum limit hbar m |omega_m^2 - Omega^2|.
///
/// PSD convention: double-sided, symmetrized, vacuum quadrature PSD = 1/2.
/// The value is the minimum over kappa of the vacuum noise budget
/// (|K_pm|^2 + |K_cav|^2) / (2 |K_f|^2) read out in eta2, so it does not
/// depend on the drive amplitude in `params`. Throws PoleError at Omega = omega_m.
double sql_reference(const SensorParams& params, double omega);

/// The kappa at which the vacuum budget touches the SQL at frequency omega,
/// i.e. |K_pm(omega)| = 1.
double sql_optimal_coupling(const SensorParams& params, double omega);

}  // namespace qnc
