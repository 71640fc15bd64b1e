#include "qnc/noisebudget.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "qnc/error.hpp"

namespace qnc {
namespace {

struct Axes {
    Eigen::Matrix2d u;  // columns are the principal axes
    Eigen::Vector2d s;  // variances / (1/2) along each axis
};

// Principal axes of a pure Gaussian pair state, rotated as little as possible
// away from the pair's own quadratures.
Axes principal_axes(const PairState& state) {
    Axes ax;
    if (std::holds_alternative<Vacuum>(state)) {
        ax.u.setIdentity();
        ax.s << 1.0, 1.0;
        return ax;
    }
    const auto& sq = std::get<Squeezed>(state);
    if (!(sq.r >= 0.0) || !std::isfinite(sq.r)) throw InvalidParameter("r", "must be >= 0");
    const double quarter = std::numbers::pi / 2.0;
    const double k = std::round(sq.angle / quarter);
    const double residual = sq.angle - k * quarter;
    const bool swapped = static_cast<long long>(k) % 2 != 0;
    const double lo = std::exp(-2.0 * sq.r);
    const double hi = std::exp(2.0 * sq.r);
    ax.s << (swapped ? hi : lo), (swapped ? lo : hi);
    const double c = std::cos(residual);
    const double s = std::sin(residual);
    ax.u << c, -s, s, c;
    return ax;
}

Eigen::Matrix2d rotation(double phi) {
    Eigen::Matrix2d r;
    r << std::cos(phi), -std::sin(phi), std::sin(phi), std::cos(phi);
    return r;
}

Eigen::Matrix2d symmetric_form(const Eigen::Matrix2d& u, const Eigen::Vector2d& s) {
    Eigen::Matrix2d m = 0.5 * u * s.asDiagonal() * u.transpose();
    m(1, 0) = m(0, 1);
    return m;
}

constexpr double kZeroTransferRelative = 1e-13;

}  // namespace

Eigen::Matrix2d squeezed_matrix(double r, double angle) {
    const Axes ax = principal_axes(Squeezed{r, angle});
    return symmetric_form(ax.u, ax.s);
}

NoiseSpec& NoiseSpec::vacuum(std::string first, std::string second) {
    pairs_.push_back({first, second, Vacuum{}, {}, first, second});
    return *this;
}

NoiseSpec& NoiseSpec::squeezed(std::string first, std::string second, double r, double angle) {
    if (!(r >= 0.0) || !std::isfinite(r)) throw InvalidParameter("r", "must be finite and >= 0");
    pairs_.push_back({first, second, Squeezed{r, angle}, {}, first, second});
    return *this;
}

NoiseSpec& NoiseSpec::rotated(std::string first, std::string second, PairState base,
                              std::function<double(double)> phi, std::string source_first,
                              std::string source_second) {
    pairs_.push_back({std::move(first), std::move(second), base, std::move(phi),
                      std::move(source_first), std::move(source_second)});
    return *this;
}

NoiseSpec& NoiseSpec::classical(std::string label, std::function<double(double)> psd) {
    classical_.push_back({std::move(label), std::move(psd)});
    return *this;
}

NoiseSpec& NoiseSpec::silent(std::string label) {
    silent_.push_back(std::move(label));
    return *this;
}

NoiseSpec NoiseSpec::vacuum_for(const StateSpaceModel& model) {
    NoiseSpec spec;
    const Matrix& theta = model.input_comm();
    std::vector<bool> used(model.num_inputs(), false);
    for (std::size_t i = 0; i < model.num_inputs(); ++i) {
        if (used[i]) continue;
        if (model.is_classical_input(i)) {
            spec.silent(model.input_labels()[i]);
            used[i] = true;
            continue;
        }
        for (std::size_t j = i + 1; j < model.num_inputs(); ++j) {
            if (!used[j] &&
                theta(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) != 0.0) {
                spec.vacuum(model.input_labels()[i], model.input_labels()[j]);
                used[i] = used[j] = true;
                break;
            }
        }
        if (!used[i]) {
            throw MissingNoiseSpec("input '" + model.input_labels()[i] +
                                   "' has no conjugate partner to form a vacuum pair");
        }
    }
    return spec;
}

Eigen::Matrix2d NoiseSpec::pair_matrix(const PairSpec& pair, double omega) const {
    const Axes ax = principal_axes(pair.state);
    if (!pair.rotation) return symmetric_form(ax.u, ax.s);
    return symmetric_form(rotation(pair.rotation(omega)) * ax.u, ax.s);
}

double OutputPsd::contribution(std::string_view source) const {
    for (const auto& [label, value] : contributions) {
        if (label == source) return value;
    }
    throw LabelError("no noise contribution from '" + std::string(source) + "'");
}

OutputPsd output_psd(const TransferMatrix& K, const NoiseSpec& spec, const Readout& measured) {
    const Eigen::RowVectorXcd c = measured.weights(K);
    const Eigen::RowVectorXcd k = c * K.entries;

    auto index_of = [&](const std::string& label) {
        auto it = std::find(K.inputs.begin(), K.inputs.end(), label);
        if (it == K.inputs.end()) {
            throw LabelError("noise spec names unknown input '" + label + "'");
        }
        return static_cast<Eigen::Index>(it - K.inputs.begin());
    };

    std::vector<int> covered(K.inputs.size(), 0);
    auto cover = [&](Eigen::Index i) { ++covered[static_cast<std::size_t>(i)]; };

    OutputPsd out;
    out.omega = K.omega;
    double total = 0.0;
    for (const auto& pair : spec.pairs()) {
        const Eigen::Index i1 = index_of(pair.first);
        const Eigen::Index i2 = index_of(pair.second);
        cover(i1);
        cover(i2);
        Eigen::RowVector2cd kp(k(i1), k(i2));
        if (pair.rotation) kp = kp * rotation(pair.rotation(K.omega)).cast<Complex>();
        const Axes ax = principal_axes(pair.state);
        // Projecting onto the principal axes keeps strongly squeezed pairs
        // free of cancellation between e^{2r} and e^{-2r} terms.
        for (int j = 0; j < 2; ++j) {
            const Complex proj = kp(0) * ax.u(0, j) + kp(1) * ax.u(1, j);
            const double v = 0.5 * ax.s(j) * std::norm(proj);
            out.contributions.emplace_back(j == 0 ? pair.source_first : pair.source_second, v);
            total += v;
        }
    }
    for (const auto& cl : spec.classical_inputs()) {
        const Eigen::Index i = index_of(cl.label);
        cover(i);
        const double psd = cl.psd ? cl.psd(K.omega) : 0.0;
        if (!(psd >= 0.0)) throw InvalidParameter(cl.label, "classical PSD must be >= 0");
        const double v = std::norm(k(i)) * psd;
        out.contributions.emplace_back(cl.label, v);
        total += v;
    }
    for (const auto& label : spec.silent_inputs()) {
        cover(index_of(label));
        out.contributions.emplace_back(label, 0.0);
    }

    for (std::size_t i = 0; i < covered.size(); ++i) {
        if (covered[i] == 0) {
            throw MissingNoiseSpec("no noise specification for input '" + K.inputs[i] + "'");
        }
        if (covered[i] > 1) {
            throw MissingNoiseSpec("input '" + K.inputs[i] + "' specified more than once");
        }
    }
    out.total = total;
    return out;
}

BudgetCurve force_sensitivity(const StateSpaceModel& model, const NoiseSpec& spec,
                              const FrequencyGrid& grid, const Readout& measured,
                              const SensorParams& params, const std::string& signal_input) {
    const std::size_t sig = model.input_index(signal_input);
    NoiseSpec effective = spec;
    const bool mentioned =
        std::any_of(spec.pairs().begin(), spec.pairs().end(),
                    [&](const PairSpec& p) { return p.first == signal_input || p.second == signal_input; }) ||
        std::any_of(spec.classical_inputs().begin(), spec.classical_inputs().end(),
                    [&](const ClassicalSpec& c) { return c.label == signal_input; }) ||
        std::find(spec.silent_inputs().begin(), spec.silent_inputs().end(), signal_input) !=
            spec.silent_inputs().end();
    if (!mentioned) effective.silent(signal_input);

    const auto points = sweep(model, grid);
    const double nan = std::numeric_limits<double>::quiet_NaN();

    BudgetCurve curve;
    curve.omega = grid.points();
    const std::size_t n = points.size();
    curve.total.assign(n, nan);
    curve.signal_gain.assign(n, nan);
    curve.force_referred.assign(n, nan);
    curve.sql.assign(n, nan);
    curve.ratio.assign(n, nan);
    curve.flagged.assign(n, false);

    for (std::size_t i = 0; i < n; ++i) {
        const auto& sp = points[i];
        const double w = sp.response.omega;
        try {
            curve.sql[i] = sql_reference(params, w);
        } catch (const PoleError&) {
            curve.flagged[i] = true;
        }
        if (sp.flagged()) curve.flagged[i] = true;
        if (curve.flagged[i]) continue;

        const OutputPsd psd = output_psd(sp.response, effective, measured);
        if (curve.sources.empty()) {
            for (const auto& [label, v] : psd.contributions) curve.sources.push_back(label);
            curve.contributions.assign(curve.sources.size(), std::vector<double>(n, nan));
        }
        for (std::size_t s = 0; s < psd.contributions.size(); ++s) {
            curve.contributions[s][i] = psd.contributions[s].second;
        }
        const Complex ks =
            measured.weights(sp.response) * sp.response.entries.col(static_cast<Eigen::Index>(sig));
        const double gain = std::norm(ks);
        // Structurally absent paths still carry roundoff from the solve.
        const double floor = kZeroTransferRelative * sp.response.entries.cwiseAbs().maxCoeff();
        if (!(std::abs(ks) > floor)) throw ZeroSignalTransfer(w);
        curve.total[i] = psd.total;
        curve.signal_gain[i] = gain;
        curve.force_referred[i] = psd.total / gain;
        curve.ratio[i] = curve.force_referred[i] / curve.sql[i];
    }
    if (curve.sources.empty()) {
        // Every point flagged: still report the source layout.
        const TransferMatrix probe{0.0, CMatrix::Zero(static_cast<Eigen::Index>(model.num_outputs()),
                                                      static_cast<Eigen::Index>(model.num_inputs())),
                                   model.input_labels(), model.output_labels()};
        for (const auto& [label, v] : output_psd(probe, effective, measured).contributions) {
            curve.sources.push_back(label);
        }
        curve.contributions.assign(curve.sources.size(), std::vector<double>(n, nan));
    }
    return curve;
}

NoiseSpec apply_unruh_spec(const SensorParams& params, double r) {
    if (!(r >= 0.0) || !std::isfinite(r)) throw InvalidParameter("r", "must be finite and >= 0");
    NoiseSpec spec;
    spec.rotated("xi1", "xi2", Squeezed{r, kPhaseQuadrature},
                 [params](double w) { return unruh_rotation_angle(params, w); });
    spec.silent("f");
    return spec;
}

NoiseSpec scheme_noise_spec(const SchemeSetup& setup, double r, double angle) {
    if (setup.input_rotation) {
        NoiseSpec spec;
        spec.rotated(setup.amplitude_input, setup.phase_input, Squeezed{r, angle},
                     setup.input_rotation, setup.amplitude_source, setup.phase_source);
        spec.silent(setup.signal_input);
        return spec;
    }
    NoiseSpec spec;
    if (r == 0.0) {
        spec.vacuum(setup.amplitude_input, setup.phase_input);
    } else {
        spec.squeezed(setup.amplitude_input, setup.phase_input, r, angle);
    }
    spec.silent(setup.signal_input);
    return spec;
}

BudgetCurve scheme_budget(const SchemeSetup& setup, const SensorParams& params,
                          const FrequencyGrid& grid, double r, double angle) {
    return force_sensitivity(setup.model, scheme_noise_spec(setup, r, angle), grid,
                             setup.readout, params, setup.signal_input);
}

}  // namespace qnc
