#include "qnc/optomech.hpp"

#include <algorithm>
#include <cmath>

#include "qnc/error.hpp"

namespace qnc {
namespace {

void require_positive(double v, const char* field) {
    if (!(v > 0.0) || !std::isfinite(v)) throw InvalidParameter(field, "must be finite and > 0");
}

void require_nonnegative(double v, const char* field) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw InvalidParameter(field, "must be finite and >= 0");
}

}  // namespace

SensorParams SensorParams::normalized() {
    SensorParams p;
    p.hbar = 1.0;
    p.mass = 1.0;
    p.omega_m = 1.0;
    p.gamma = 1.0;
    p.omega_0 = 1.0;
    p.length = 1.0;
    p.alpha = 1.0 / std::sqrt(2.0);
    return p;
}

SensorParams SensorParams::from_input_amplitude(double hbar, double mass, double omega_m,
                                                double gamma, double omega_0, double length,
                                                double input_amplitude) {
    require_positive(gamma, "gamma");
    require_nonnegative(input_amplitude, "input_amplitude");
    SensorParams p{hbar, mass, omega_m, gamma, omega_0, length,
                   input_amplitude * std::sqrt(2.0 / gamma)};
    p.validate();
    return p;
}

SensorParams SensorParams::from_power(double hbar, double mass, double omega_m, double gamma,
                                      double omega_0, double length, double power) {
    require_positive(hbar, "hbar");
    require_positive(omega_0, "omega_0");
    require_nonnegative(power, "power");
    return from_input_amplitude(hbar, mass, omega_m, gamma, omega_0, length,
                                std::sqrt(power / (hbar * omega_0)));
}

SensorParams SensorParams::with_coupling(double kappa) const {
    require_nonnegative(kappa, "kappa");
    SensorParams p = *this;
    p.alpha = kappa * length / (std::sqrt(2.0) * omega_0);
    p.validate();
    return p;
}

void SensorParams::validate() const {
    require_positive(hbar, "hbar");
    require_positive(mass, "mass");
    require_nonnegative(omega_m, "omega_m");
    require_positive(gamma, "gamma");
    require_positive(omega_0, "omega_0");
    require_positive(length, "length");
    require_nonnegative(alpha, "alpha");
}

double SensorParams::kappa() const { return std::sqrt(2.0) * alpha * omega_0 / length; }

double SensorParams::g() const {
    if (!(omega_m > 0.0)) {
        throw InvalidParameter("omega_m", "matched coupling g needs omega_m > 0 (free mass given)");
    }
    return kappa() * std::sqrt(hbar / (mass * omega_m));
}

double SensorParams::input_amplitude() const { return alpha * std::sqrt(gamma / 2.0); }

StateSpaceModel build_sensor(const SensorParams& params) {
    params.validate();
    const double kappa = params.kappa();
    const double root = std::sqrt(2.0 * params.gamma);

    StateSpaceModel::Parts p;
    p.states = {"q", "p", "a1", "a2"};
    p.inputs = {"f", "xi1", "xi2"};
    p.outputs = {"eta1", "eta2"};

    p.F = Matrix::Zero(4, 4);
    p.F(0, 1) = 1.0 / params.mass;
    p.F(1, 0) = -params.mass * params.omega_m * params.omega_m;
    p.F(1, 2) = params.hbar * kappa;
    p.F(2, 2) = -params.gamma;
    p.F(3, 0) = kappa;
    p.F(3, 3) = -params.gamma;

    p.G = Matrix::Zero(4, 3);
    p.G(1, 0) = 1.0;
    p.G(2, 1) = root;
    p.G(3, 2) = root;

    p.H = Matrix::Zero(2, 4);
    p.H(0, 2) = root;
    p.H(1, 3) = root;

    p.J = Matrix::Zero(2, 3);
    p.J(0, 1) = -1.0;
    p.J(1, 2) = -1.0;

    p.state_comm = Matrix::Zero(4, 4);
    p.state_comm(0, 1) = params.hbar;
    p.state_comm(1, 0) = -params.hbar;
    p.state_comm(2, 3) = 1.0;
    p.state_comm(3, 2) = -1.0;

    p.input_comm = Matrix::Zero(3, 3);
    p.input_comm(1, 2) = 1.0;
    p.input_comm(2, 1) = -1.0;

    p.resonators = {{0, 1}};
    return StateSpaceModel(std::move(p));
}

AnalyticTransfers::AnalyticTransfers(const SensorParams& params)
    : params_(params), kappa_(params.kappa()) {
    params_.validate();
}

void AnalyticTransfers::check_pole(const char* name, double omega) const {
    if (omega * omega == params_.omega_m * params_.omega_m) throw PoleError(name, omega);
}

Complex AnalyticTransfers::cavity(double omega) const {
    const Complex io(0.0, omega);
    return (params_.gamma + io) / (params_.gamma - io);
}

Complex AnalyticTransfers::ponderomotive(double omega) const {
    check_pole("K_pm", omega);
    const Complex d = params_.gamma - Complex(0.0, omega);
    const double num = 2.0 * params_.gamma * params_.hbar * kappa_ * kappa_ / params_.mass;
    return num / ((params_.omega_m * params_.omega_m - omega * omega) * d * d);
}

Complex AnalyticTransfers::ponderomotive_factored(double omega) const {
    check_pole("K_pm", omega);
    const double g = params_.g();
    const double wm2 = params_.omega_m * params_.omega_m;
    const Complex d = params_.gamma - Complex(0.0, omega);
    return (g * g / (params_.gamma * params_.omega_m)) * (wm2 / (wm2 - omega * omega)) *
           (2.0 * params_.gamma * params_.gamma / (d * d));
}

Complex AnalyticTransfers::signal(double omega) const {
    const Complex d = params_.gamma - Complex(0.0, omega);
    return ponderomotive(omega) * d / (params_.hbar * kappa_ * std::sqrt(2.0 * params_.gamma));
}

double AnalyticTransfers::ponderomotive_to_cavity(double omega) const {
    check_pole("K_pm/K_cav", omega);
    const double num = 2.0 * params_.gamma * params_.hbar * kappa_ * kappa_;
    return num / (params_.mass * (params_.omega_m * params_.omega_m - omega * omega) *
                  (params_.gamma * params_.gamma + omega * omega));
}

NumericAnalyticReport verify_numeric_vs_analytic(const SensorParams& params,
                                                 const FrequencyGrid& grid) {
    const StateSpaceModel model = build_sensor(params);
    const AnalyticTransfers analytic(params);
    NumericAnalyticReport report;
    auto rel = [](Complex num, Complex ref) { return std::abs(num - ref) / std::abs(ref); };
    for (double w : grid.points()) {
        const TransferMatrix K = transfer_matrix(model, w);
        const Complex kcav = analytic.cavity(w);
        const Complex kpm = analytic.ponderomotive(w);
        const Complex kf = analytic.signal(w);
        report.max_relative_deviation = std::max({report.max_relative_deviation,
                                                  rel(K.at("eta2", "f"), kf),
                                                  rel(K.at("eta2", "xi1"), kpm),
                                                  rel(K.at("eta2", "xi2"), kcav),
                                                  rel(K.at("eta1", "xi1"), kcav)});
        report.max_zero_entry = std::max({report.max_zero_entry, std::abs(K.at("eta1", "f")),
                                          std::abs(K.at("eta1", "xi2"))});
    }
    return report;
}

double sql_reference(const SensorParams& params, double omega) {
    params.validate();
    if (!(omega >= 0.0)) throw InvalidParameter("omega", "must be >= 0");
    if (omega == params.omega_m) throw PoleError("SQL", omega);
    return params.hbar * params.mass * std::abs(params.omega_m * params.omega_m - omega * omega);
}

double sql_optimal_coupling(const SensorParams& params, double omega) {
    params.validate();
    if (omega == params.omega_m) throw PoleError("SQL-optimal coupling", omega);
    const double detune = std::abs(params.omega_m * params.omega_m - omega * omega);
    return std::sqrt(params.mass * detune * (params.gamma * params.gamma + omega * omega) /
                     (2.0 * params.gamma * params.hbar));
}

}  // namespace qnc
