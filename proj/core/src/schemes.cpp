#include "qnc/schemes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "qnc/error.hpp"

namespace qnc {

Readout Readout::output(std::string label) {
    Readout r;
    r.in_phase.clear();
    r.quadrature = label;
    r.name = std::move(label);
    return r;
}

Readout Readout::homodyne(std::string y1, std::string y2, double theta, std::string name) {
    Readout r;
    r.in_phase = std::move(y1);
    r.quadrature = std::move(y2);
    r.angle = [theta](double) { return theta; };
    r.name = std::move(name);
    return r;
}

Readout Readout::variational(std::string y1, std::string y2, std::function<double(double)> theta,
                             std::string name) {
    Readout r;
    r.in_phase = std::move(y1);
    r.quadrature = std::move(y2);
    r.angle = std::move(theta);
    r.name = std::move(name);
    return r;
}

Eigen::RowVectorXcd Readout::weights(const TransferMatrix& K) const {
    const auto find = [&](const std::string& label) {
        auto it = std::find(K.outputs.begin(), K.outputs.end(), label);
        if (it == K.outputs.end()) {
            throw LabelError("readout output '" + label + "' not among model outputs");
        }
        return static_cast<Eigen::Index>(it - K.outputs.begin());
    };
    Eigen::RowVectorXcd c = Eigen::RowVectorXcd::Zero(static_cast<Eigen::Index>(K.outputs.size()));
    const double th = theta(K.omega);
    c(find(quadrature)) += std::cos(th);
    if (!in_phase.empty()) {
        c(find(in_phase)) += -std::sin(th);
    } else if (th != 0.0) {
        throw LabelError("rotated readout needs an in-phase output");
    }
    return c;
}

std::string_view to_string(SchemeKind kind) {
    switch (kind) {
        case SchemeKind::baseline: return "baseline";
        case SchemeKind::unruh_input_rotation: return "unruh_input_rotation";
        case SchemeKind::variational_readout: return "variational_readout";
        case SchemeKind::intracavity_matched: return "intracavity_matched";
        case SchemeKind::input_matched: return "input_matched";
        case SchemeKind::output_matched: return "output_matched";
    }
    return "unknown";
}

SchemeKind parse_scheme_kind(std::string_view name) {
    for (auto k : {SchemeKind::baseline, SchemeKind::unruh_input_rotation,
                   SchemeKind::variational_readout, SchemeKind::intracavity_matched,
                   SchemeKind::input_matched, SchemeKind::output_matched}) {
        if (to_string(k) == name) return k;
    }
    throw InvalidParameter("scheme", "unknown scheme '" + std::string(name) +
                                         "' (valid: baseline, unruh_input_rotation, "
                                         "variational_readout, intracavity_matched, "
                                         "input_matched, output_matched)");
}

MatchedSqueezerParams MatchedSqueezerParams::canonical(const SensorParams& params,
                                                       SqueezerHost host) {
    MatchedSqueezerParams sq;
    sq.nu = params.omega_m;
    sq.mu = -params.omega_m;
    sq.g = params.g();
    sq.host = host;
    sq.squeezer_gamma = params.gamma;
    return sq;
}

MatchingResidual matching_residual(const SensorParams& params, const MatchedSqueezerParams& sq) {
    MatchingResidual r;
    const double kappa = params.kappa();
    r.frequency_lhs = sq.mu * sq.nu;
    r.frequency_rhs = -params.omega_m * params.omega_m;
    r.coupling_lhs = sq.mu * sq.g * sq.g;
    r.coupling_rhs = -params.hbar * kappa * kappa / params.mass;
    auto rel = [](double a, double b) {
        const double scale = std::max(std::abs(a), std::abs(b));
        return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
    };
    r.frequency_relative = rel(r.frequency_lhs, r.frequency_rhs);
    r.coupling_relative = rel(r.coupling_lhs, r.coupling_rhs);
    return r;
}

void check_matching(const SensorParams& params, const MatchedSqueezerParams& sq,
                    double tolerance) {
    const MatchingResidual r = matching_residual(params, sq);
    std::ostringstream os;
    os.precision(17);
    bool bad = false;
    if (!(sq.mu < 0.0)) {
        os << "mu must be negative (mu = " << sq.mu << "); ";
        bad = true;
    }
    if (!(r.frequency_relative <= tolerance)) {
        os << "mu*nu = " << r.frequency_lhs << " but -omega_m^2 = " << r.frequency_rhs
           << " (relative mismatch " << r.frequency_relative << "); ";
        bad = true;
    }
    if (!(r.coupling_relative <= tolerance)) {
        os << "mu*g^2 = " << r.coupling_lhs << " but -hbar*kappa^2/m = " << r.coupling_rhs
           << " (relative mismatch " << r.coupling_relative << "); ";
        bad = true;
    }
    if (bad) {
        std::string msg = os.str();
        msg.resize(msg.size() - 2);
        throw MatchingViolation("matching violated: " + msg);
    }
}

double unruh_rotation_angle(const SensorParams& params, double omega) {
    return std::atan(-AnalyticTransfers(params).ponderomotive_to_cavity(omega));
}

ReadoutAngle variational_readout_angle(const SensorParams& params, double omega) {
    const AnalyticTransfers k(params);
    ReadoutAngle out;
    out.theta = std::atan(k.ponderomotive_to_cavity(omega));
    out.signal_transfer = k.signal(omega) * std::cos(out.theta);
    return out;
}

StateSpaceModel build_intracavity_matched(const SensorParams& params,
                                          const MatchedSqueezerParams& sq, MatchingCheck check) {
    if (sq.host != SqueezerHost::sensor_cavity) {
        throw InvalidParameter("host", "intracavity scheme needs host = sensor cavity");
    }
    if (check == MatchingCheck::enforce) check_matching(params, sq);

    const StateSpaceModel base = build_sensor(params);
    StateSpaceModel::Parts p = base.parts();
    p.states.insert(p.states.end(), {"q'", "p'"});

    auto grow = [](const Matrix& m, Eigen::Index rows, Eigen::Index cols) {
        Matrix out = Matrix::Zero(rows, cols);
        out.topLeftCorner(m.rows(), m.cols()) = m;
        return out;
    };
    p.F = grow(base.F(), 6, 6);
    p.F(4, 5) = sq.mu;
    p.F(5, 4) = sq.nu;
    p.F(5, 2) = sq.g;
    p.F(3, 4) = sq.g;
    p.G = grow(base.G(), 6, 3);
    p.H = grow(base.H(), 2, 6);
    p.state_comm = grow(base.state_comm(), 6, 6);
    p.state_comm(4, 5) = 1.0;
    p.state_comm(5, 4) = -1.0;
    p.resonators.push_back({4, 5});
    return StateSpaceModel(std::move(p));
}

Complex anti_noise_transfer(const MatchedSqueezerParams& sq, double gamma, double omega) {
    const double detune = -sq.mu * sq.nu - omega * omega;
    if (detune == 0.0) throw PoleError("anti-noise transfer", omega);
    const Complex d = gamma - Complex(0.0, omega);
    return 2.0 * gamma * sq.mu * sq.g * sq.g / (detune * d * d);
}

StateSpaceModel build_squeezer_block(double gamma_s, double g_s, double omega_m,
                                     const SqueezerLabels& labels) {
    if (!(gamma_s > 0.0) || !std::isfinite(gamma_s)) {
        throw InvalidParameter("squeezer_gamma", "must be finite and > 0");
    }
    if (!(omega_m > 0.0) || !std::isfinite(omega_m)) {
        throw InvalidParameter("omega_m", "must be finite and > 0");
    }
    if (!(g_s >= 0.0) || !std::isfinite(g_s)) {
        throw InvalidParameter("squeezer_g", "must be finite and >= 0");
    }
    const double root = std::sqrt(2.0 * gamma_s);

    StateSpaceModel::Parts p;
    p.states = labels.states;
    p.inputs = labels.inputs;
    p.outputs = labels.outputs;
    if (p.states.size() != 4 || p.inputs.size() != 2 || p.outputs.size() != 2) {
        throw DimensionError("squeezer block labels: need 4 states, 2 inputs, 2 outputs");
    }

    p.F = Matrix::Zero(4, 4);
    p.F(0, 0) = -gamma_s;
    p.F(1, 1) = -gamma_s;
    p.F(1, 2) = g_s;
    p.F(2, 3) = -omega_m;
    p.F(3, 2) = omega_m;
    p.F(3, 0) = g_s;

    p.G = Matrix::Zero(4, 2);
    p.G(0, 0) = root;
    p.G(1, 1) = root;
    p.H = Matrix::Zero(2, 4);
    p.H(0, 0) = root;
    p.H(1, 1) = root;
    p.J = -Matrix::Identity(2, 2);

    p.state_comm = Matrix::Zero(4, 4);
    p.state_comm(0, 1) = 1.0;
    p.state_comm(1, 0) = -1.0;
    p.state_comm(2, 3) = 1.0;
    p.state_comm(3, 2) = -1.0;
    p.input_comm = Matrix::Zero(2, 2);
    p.input_comm(0, 1) = 1.0;
    p.input_comm(1, 0) = -1.0;
    p.resonators = {{2, 3}};
    return StateSpaceModel(std::move(p));
}

StateSpaceModel build_io_matched(const SensorParams& params, Placement placement,
                                 double lowfreq_scale) {
    if (!(lowfreq_scale >= 1.0) || !std::isfinite(lowfreq_scale)) {
        throw InvalidParameter("lowfreq_scale", "must be finite and >= 1");
    }
    const StateSpaceModel sensor = build_sensor(params);
    const double gamma_s = lowfreq_scale * params.gamma;
    const double g_s = std::sqrt(lowfreq_scale) * params.g();

    if (placement == Placement::input) {
        SqueezerLabels labels;
        labels.outputs = {"s1", "s2"};
        const StateSpaceModel squeezer = build_squeezer_block(gamma_s, g_s, params.omega_m, labels);
        return cascade(squeezer, sensor, {{"s1", "xi1"}, {"s2", "xi2"}});
    }
    SqueezerLabels labels;
    labels.inputs = {"eta1", "eta2"};
    labels.outputs = {"zeta1", "zeta2"};
    const StateSpaceModel squeezer = build_squeezer_block(gamma_s, g_s, params.omega_m, labels);
    return cascade(sensor, squeezer, {{"eta1", "eta1"}, {"eta2", "eta2"}});
}

FeasibilityReport feasibility(const SensorParams& params, double length, double speed_of_light) {
    params.validate();
    if (!(length > 0.0)) throw InvalidParameter("length", "must be > 0");
    if (!(speed_of_light > 0.0)) throw InvalidParameter("speed_of_light", "must be > 0");
    const double g = params.g();
    const double g2 = g * g;
    const double rate2 = params.gamma * params.omega_m;
    const double transit2 = (length / speed_of_light) * (length / speed_of_light);

    FeasibilityReport r;
    r.opa_gain_required = g2 * transit2;
    r.opa_gain_floor = rate2 * transit2;
    r.aux_photon_number = g2 * params.alpha * params.alpha / (params.omega_m * params.omega_m);
    r.backaction_significance = g2 / rate2;
    r.mean_field_offset = params.input_amplitude() * g2 / rate2;
    return r;
}

std::pair<Complex, Complex> SchemeSetup::source_transfers(const TransferMatrix& K) const {
    const Eigen::RowVectorXcd c = readout.weights(K);
    const Complex k1 = c * K.entries.col(static_cast<Eigen::Index>(model.input_index(amplitude_input)));
    const Complex k2 = c * K.entries.col(static_cast<Eigen::Index>(model.input_index(phase_input)));
    if (!input_rotation) return {k1, k2};
    // xi = R(phi) chi with R = [[cos, -sin], [sin, cos]].
    const double phi = input_rotation(K.omega);
    const double cs = std::cos(phi);
    const double sn = std::sin(phi);
    return {k1 * cs + k2 * sn, -k1 * sn + k2 * cs};
}

Complex SchemeSetup::signal_transfer(const TransferMatrix& K) const {
    const Eigen::RowVectorXcd c = readout.weights(K);
    return c * K.entries.col(static_cast<Eigen::Index>(model.input_index(signal_input)));
}

SchemeSetup make_scheme(SchemeKind kind, const SensorParams& params,
                        const SchemeOptions& options) {
    auto setup_for = [&](StateSpaceModel model) { return SchemeSetup{kind, std::move(model), Readout{}, nullptr}; };

    switch (kind) {
        case SchemeKind::baseline: return setup_for(build_sensor(params));
        case SchemeKind::unruh_input_rotation: {
            SchemeSetup s = setup_for(build_sensor(params));
            s.input_rotation = [params](double w) { return unruh_rotation_angle(params, w); };
            s.amplitude_source = "chi1";
            s.phase_source = "chi2";
            return s;
        }
        case SchemeKind::variational_readout: {
            SchemeSetup s = setup_for(build_sensor(params));
            s.readout = Readout::variational(
                "eta1", "eta2",
                [params](double w) { return variational_readout_angle(params, w).theta; },
                "zeta2");
            return s;
        }
        case SchemeKind::intracavity_matched: {
            const MatchedSqueezerParams sq =
                options.matching ? *options.matching : MatchedSqueezerParams::canonical(params);
            return setup_for(build_intracavity_matched(params, sq, options.check));
        }
        case SchemeKind::input_matched:
            return setup_for(build_io_matched(params, Placement::input, options.lowfreq_scale));
        case SchemeKind::output_matched: {
            SchemeSetup s =
                setup_for(build_io_matched(params, Placement::output, options.lowfreq_scale));
            s.readout = Readout::output("zeta2");
            return s;
        }
    }
    throw InvalidParameter("scheme", "unhandled scheme kind");
}

CancellationProfile cancellation_profile(const SchemeSetup& setup, const SensorParams& params,
                                         const FrequencyGrid& grid) {
    const AnalyticTransfers analytic(params);
    const auto points = sweep(setup.model, grid);
    CancellationProfile prof;
    for (const auto& sp : points) {
        const double w = sp.response.omega;
        prof.omega.push_back(w);
        bool flagged = sp.flagged();
        double reference = std::numeric_limits<double>::quiet_NaN();
        double residual = std::numeric_limits<double>::quiet_NaN();
        try {
            reference = std::abs(analytic.ponderomotive(w));
            if (!flagged) residual = std::abs(setup.source_transfers(sp.response).first);
        } catch (const PoleError&) {
            flagged = true;
        }
        prof.flagged.push_back(flagged);
        prof.residual.push_back(residual);
        prof.reference.push_back(reference);
        if (!flagged) prof.max_reference = std::max(prof.max_reference, reference);
    }
    for (std::size_t i = 0; i < prof.omega.size(); ++i) {
        if (prof.flagged[i]) continue;
        if (prof.max_reference > 0.0) {
            prof.max_relative_residual =
                std::max(prof.max_relative_residual, prof.residual[i] / prof.max_reference);
        }
        if (prof.reference[i] > 0.0) {
            prof.max_pointwise_residual =
                std::max(prof.max_pointwise_residual, prof.residual[i] / prof.reference[i]);
        }
    }
    return prof;
}

}  // namespace qnc
