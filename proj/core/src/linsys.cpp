#include "qnc/linsys.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <set>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "qnc/error.hpp"

namespace qnc {
namespace {

std::string join(const Labels& labels) {
    std::ostringstream os;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (i != 0) os << ", ";
        os << labels[i];
    }
    return os.str();
}

std::size_t find_label(const Labels& labels, std::string_view label, const char* kind) {
    auto it = std::find(labels.begin(), labels.end(), label);
    if (it == labels.end()) {
        throw LabelError("unknown " + std::string(kind) + " label '" + std::string(label) +
                         "' (valid: " + join(labels) + ")");
    }
    return static_cast<std::size_t>(it - labels.begin());
}

void require_unique(const Labels& labels, const char* kind) {
    std::set<std::string> seen;
    for (const auto& l : labels) {
        if (!seen.insert(l).second) {
            throw LabelError("duplicate " + std::string(kind) + " label '" + l + "'");
        }
    }
}

void require_shape(const Matrix& m, Eigen::Index rows, Eigen::Index cols, const char* name) {
    if (m.rows() != rows || m.cols() != cols) {
        std::ostringstream os;
        os << name << " is " << m.rows() << "x" << m.cols() << ", expected " << rows << "x"
           << cols;
        throw DimensionError(os.str());
    }
    if (!m.allFinite()) throw InvalidParameter(name, "non-finite entry");
}

void require_antisymmetric(const Matrix& m, const char* name) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (m(i, j) != -m(j, i)) throw InvalidParameter(name, "not antisymmetric");
        }
    }
}

double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

// Power-of-two diagonal similarity D^{-1} F D that equalizes off-diagonal row
// and column norms. Scaling by powers of two is exact, so it only changes the
// conditioning of the solve, never the transfer function.
Eigen::VectorXd balancing_scale(const Matrix& F) {
    const Eigen::Index n = F.rows();
    Eigen::VectorXd d = Eigen::VectorXd::Ones(n);
    Matrix B = F;
    for (int sweep = 0; sweep < 64; ++sweep) {
        bool converged = true;
        for (Eigen::Index i = 0; i < n; ++i) {
            double c = 0.0;
            double r = 0.0;
            for (Eigen::Index j = 0; j < n; ++j) {
                if (j == i) continue;
                c += std::abs(B(j, i));
                r += std::abs(B(i, j));
            }
            if (c == 0.0 || r == 0.0) continue;
            const double s = c + r;
            double f = 1.0;
            while (c < r / 2.0) {
                c *= 2.0;
                r /= 2.0;
                f *= 2.0;
            }
            while (c >= r * 2.0) {
                c /= 2.0;
                r *= 2.0;
                f /= 2.0;
            }
            if (c + r < 0.95 * s) {
                converged = false;
                d(i) *= f;
                B.col(i) *= f;
                B.row(i) /= f;
            }
        }
        if (converged) break;
    }
    return d;
}

CMatrix nan_matrix(Eigen::Index rows, Eigen::Index cols) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    return CMatrix::Constant(rows, cols, Complex(nan, nan));
}

}  // namespace

StateSpaceModel::StateSpaceModel(Parts parts) : p_(std::move(parts)) {
    const auto n = static_cast<Eigen::Index>(p_.states.size());
    const auto m = static_cast<Eigen::Index>(p_.inputs.size());
    const auto k = static_cast<Eigen::Index>(p_.outputs.size());
    require_unique(p_.states, "state");
    require_unique(p_.inputs, "input");
    require_unique(p_.outputs, "output");
    require_shape(p_.F, n, n, "F");
    require_shape(p_.G, n, m, "G");
    require_shape(p_.H, k, n, "H");
    require_shape(p_.J, k, m, "J");
    require_shape(p_.state_comm, n, n, "state_comm");
    require_shape(p_.input_comm, m, m, "input_comm");
    require_antisymmetric(p_.state_comm, "state_comm");
    require_antisymmetric(p_.input_comm, "input_comm");

    std::set<std::size_t> used;
    for (const auto& pair : p_.resonators) {
        if (pair.position >= p_.states.size() || pair.momentum >= p_.states.size() ||
            pair.position == pair.momentum) {
            throw DimensionError("resonator pair indices out of range");
        }
        if (!used.insert(pair.position).second || !used.insert(pair.momentum).second) {
            throw DimensionError("state '" + p_.states[pair.position] +
                                 "' appears in more than one resonator pair");
        }
    }
}

std::size_t StateSpaceModel::state_index(std::string_view label) const {
    return find_label(p_.states, label, "state");
}

std::size_t StateSpaceModel::input_index(std::string_view label) const {
    return find_label(p_.inputs, label, "input");
}

std::size_t StateSpaceModel::output_index(std::string_view label) const {
    return find_label(p_.outputs, label, "output");
}

bool StateSpaceModel::is_classical_input(std::size_t index) const {
    const auto i = static_cast<Eigen::Index>(index);
    return p_.input_comm.row(i).isZero(0.0);
}

Complex TransferMatrix::at(std::string_view output, std::string_view input) const {
    return entries(static_cast<Eigen::Index>(find_label(outputs, output, "output")),
                   static_cast<Eigen::Index>(find_label(inputs, input, "input")));
}

FrequencyGrid::FrequencyGrid(std::vector<double> points, double pole_exclusion)
    : points_(std::move(points)), pole_exclusion_(pole_exclusion) {
    if (points_.empty()) throw InvalidParameter("grid", "no frequency points");
    if (!(pole_exclusion_ >= 0.0) || !std::isfinite(pole_exclusion_)) {
        throw InvalidParameter("pole_exclusion", "must be finite and >= 0");
    }
    for (std::size_t i = 0; i < points_.size(); ++i) {
        if (!(points_[i] > 0.0) || !std::isfinite(points_[i])) {
            throw InvalidParameter("grid", "points must be finite and > 0");
        }
        if (i > 0 && !(points_[i] > points_[i - 1])) {
            throw InvalidParameter("grid", "points must be strictly increasing");
        }
    }
}

FrequencyGrid FrequencyGrid::logarithmic(double min, double max, std::size_t count,
                                         double pole_exclusion) {
    if (count == 0) throw InvalidParameter("grid", "count must be > 0");
    if (!(min > 0.0) || !(max >= min)) throw InvalidParameter("grid", "need 0 < min <= max");
    if (count == 1) return FrequencyGrid({min}, pole_exclusion);
    std::vector<double> pts(count);
    const double lo = std::log10(min);
    const double hi = std::log10(max);
    for (std::size_t i = 0; i < count; ++i) {
        pts[i] = std::pow(10.0, lo + (hi - lo) * static_cast<double>(i) /
                                         static_cast<double>(count - 1));
    }
    pts.front() = min;
    pts.back() = max;
    return FrequencyGrid(std::move(pts), pole_exclusion);
}

FrequencyGrid FrequencyGrid::linear(double min, double max, std::size_t count,
                                    double pole_exclusion) {
    if (count == 0) throw InvalidParameter("grid", "count must be > 0");
    if (!(min > 0.0) || !(max >= min)) throw InvalidParameter("grid", "need 0 < min <= max");
    if (count == 1) return FrequencyGrid({min}, pole_exclusion);
    std::vector<double> pts(count);
    for (std::size_t i = 0; i < count; ++i) {
        pts[i] = min + (max - min) * static_cast<double>(i) / static_cast<double>(count - 1);
    }
    pts.back() = max;
    return FrequencyGrid(std::move(pts), pole_exclusion);
}

TransferMatrix transfer_matrix(const StateSpaceModel& model, double omega,
                               const SolveOptions& options) {
    TransferMatrix out;
    out.omega = omega;
    out.inputs = model.input_labels();
    out.outputs = model.output_labels();

    const auto n = static_cast<Eigen::Index>(model.num_states());
    if (n == 0) {
        out.entries = model.J().cast<Complex>();
        return out;
    }

    const Eigen::VectorXd d = balancing_scale(model.F());
    const Eigen::VectorXd d_inv = d.cwiseInverse();

    CMatrix A = (d_inv.asDiagonal() * model.F() * d.asDiagonal()).cast<Complex>();
    A.diagonal().array() += Complex(0.0, omega);
    const CMatrix rhs = (d_inv.asDiagonal() * model.G()).cast<Complex>();

    Eigen::PartialPivLU<CMatrix> lu(A);
    const double rcond = lu.rcond();
    if (!(rcond >= options.rcond_min)) throw SingularFrequency(omega, rcond);

    const CMatrix z = lu.solve(rhs);
    const CMatrix Hs = (model.H() * d.asDiagonal()).cast<Complex>();
    out.entries = -(Hs * z) + model.J().cast<Complex>();
    if (!out.entries.allFinite()) throw SingularFrequency(omega, rcond);
    return out;
}

std::vector<double> real_axis_poles(const StateSpaceModel& model) {
    const auto n = static_cast<Eigen::Index>(model.num_states());
    if (n == 0) return {};
    const Eigen::VectorXd d = balancing_scale(model.F());
    const Matrix B = d.cwiseInverse().asDiagonal() * model.F() * d.asDiagonal();
    Eigen::EigenSolver<Matrix> es(B, false);
    const double scale = std::max(B.cwiseAbs().rowwise().sum().maxCoeff(),
                                  std::numeric_limits<double>::min());
    std::vector<double> poles;
    for (Eigen::Index i = 0; i < n; ++i) {
        const Complex lambda = es.eigenvalues()(i);
        if (std::abs(lambda.real()) <= 1e-8 * scale) poles.push_back(std::abs(lambda.imag()));
    }
    std::sort(poles.begin(), poles.end());
    std::vector<double> unique;
    for (double p : poles) {
        if (unique.empty() || std::abs(p - unique.back()) > 1e-9 * std::max(p, 1e-300)) {
            unique.push_back(p);
        }
    }
    return unique;
}

std::vector<SweepPoint> sweep(const StateSpaceModel& model, const FrequencyGrid& grid,
                              const SweepOptions& options) {
    const auto poles = real_axis_poles(model);
    const auto& pts = grid.points();
    std::vector<SweepPoint> out(pts.size());

    auto evaluate = [&](std::size_t i) {
        const double w = pts[i];
        SweepPoint& sp = out[i];
        for (double p : poles) {
            if (std::abs(w - p) <= grid.pole_exclusion() * p) sp.flag = SweepFlag::near_pole;
        }
        try {
            sp.response = transfer_matrix(model, w, options.solve);
        } catch (const SingularFrequency&) {
            sp.flag = SweepFlag::singular;
            sp.response.omega = w;
            sp.response.inputs = model.input_labels();
            sp.response.outputs = model.output_labels();
            sp.response.entries = nan_matrix(static_cast<Eigen::Index>(model.num_outputs()),
                                             static_cast<Eigen::Index>(model.num_inputs()));
        }
    };

    const std::size_t threads = std::min<std::size_t>(std::max(1u, options.threads), pts.size());
    if (threads <= 1) {
        for (std::size_t i = 0; i < pts.size(); ++i) evaluate(i);
        return out;
    }
    std::vector<std::future<void>> jobs;
    jobs.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) {
        jobs.push_back(std::async(std::launch::async, [&, t] {
            for (std::size_t i = t; i < pts.size(); i += threads) evaluate(i);
        }));
    }
    for (auto& j : jobs) j.get();
    return out;
}

StateSpaceModel cascade(const StateSpaceModel& up, const StateSpaceModel& down,
                        const Wiring& wiring) {
    const auto nu = static_cast<Eigen::Index>(up.num_states());
    const auto nd = static_cast<Eigen::Index>(down.num_states());

    // S(d, u) = 1 when upstream output u drives downstream input d.
    Matrix S = Matrix::Zero(static_cast<Eigen::Index>(down.num_inputs()),
                            static_cast<Eigen::Index>(up.num_outputs()));
    std::vector<bool> out_wired(up.num_outputs(), false);
    std::vector<bool> in_wired(down.num_inputs(), false);
    for (const auto& [from, to] : wiring) {
        const std::size_t u = up.output_index(from);
        const std::size_t di = down.input_index(to);
        if (in_wired[di]) {
            throw LabelError("downstream input '" + to + "' is wired more than once");
        }
        out_wired[u] = true;
        in_wired[di] = true;
        S(static_cast<Eigen::Index>(di), static_cast<Eigen::Index>(u)) = 1.0;
    }

    std::vector<Eigen::Index> free_inputs;
    for (std::size_t i = 0; i < in_wired.size(); ++i) {
        if (!in_wired[i]) free_inputs.push_back(static_cast<Eigen::Index>(i));
    }
    std::vector<Eigen::Index> free_outputs;
    for (std::size_t i = 0; i < out_wired.size(); ++i) {
        if (!out_wired[i]) free_outputs.push_back(static_cast<Eigen::Index>(i));
    }

    const auto mu = static_cast<Eigen::Index>(up.num_inputs());
    const auto mf = static_cast<Eigen::Index>(free_inputs.size());
    const auto kf = static_cast<Eigen::Index>(free_outputs.size());
    const auto kd = static_cast<Eigen::Index>(down.num_outputs());

    Matrix Gd_free(nd, mf);
    Matrix Jd_free(kd, mf);
    Matrix Theta_w_free(mf, mf);
    for (Eigen::Index c = 0; c < mf; ++c) {
        Gd_free.col(c) = down.G().col(free_inputs[static_cast<std::size_t>(c)]);
        Jd_free.col(c) = down.J().col(free_inputs[static_cast<std::size_t>(c)]);
        for (Eigen::Index r = 0; r < mf; ++r) {
            Theta_w_free(r, c) = down.input_comm()(free_inputs[static_cast<std::size_t>(r)],
                                                   free_inputs[static_cast<std::size_t>(c)]);
        }
    }
    Matrix Hu_free(kf, nu);
    Matrix Ju_free(kf, mu);
    for (Eigen::Index r = 0; r < kf; ++r) {
        Hu_free.row(r) = up.H().row(free_outputs[static_cast<std::size_t>(r)]);
        Ju_free.row(r) = up.J().row(free_outputs[static_cast<std::size_t>(r)]);
    }

    const Matrix GdS = down.G() * S;
    const Matrix JdS = down.J() * S;

    StateSpaceModel::Parts p;
    p.states = up.state_labels();
    p.states.insert(p.states.end(), down.state_labels().begin(), down.state_labels().end());
    p.inputs = up.input_labels();
    for (auto i : free_inputs) p.inputs.push_back(down.input_labels()[static_cast<std::size_t>(i)]);
    for (auto o : free_outputs) p.outputs.push_back(up.output_labels()[static_cast<std::size_t>(o)]);
    p.outputs.insert(p.outputs.end(), down.output_labels().begin(), down.output_labels().end());

    const Eigen::Index n = nu + nd;
    const Eigen::Index m = mu + mf;
    const Eigen::Index k = kf + kd;

    p.F = Matrix::Zero(n, n);
    p.F.topLeftCorner(nu, nu) = up.F();
    p.F.bottomLeftCorner(nd, nu) = GdS * up.H();
    p.F.bottomRightCorner(nd, nd) = down.F();

    p.G = Matrix::Zero(n, m);
    p.G.topLeftCorner(nu, mu) = up.G();
    p.G.bottomLeftCorner(nd, mu) = GdS * up.J();
    p.G.bottomRightCorner(nd, mf) = Gd_free;

    p.H = Matrix::Zero(k, n);
    p.H.topLeftCorner(kf, nu) = Hu_free;
    p.H.bottomLeftCorner(kd, nu) = JdS * up.H();
    p.H.bottomRightCorner(kd, nd) = down.H();

    p.J = Matrix::Zero(k, m);
    p.J.topLeftCorner(kf, mu) = Ju_free;
    p.J.bottomLeftCorner(kd, mu) = JdS * up.J();
    p.J.bottomRightCorner(kd, mf) = Jd_free;

    p.state_comm = Matrix::Zero(n, n);
    p.state_comm.topLeftCorner(nu, nu) = up.state_comm();
    p.state_comm.bottomRightCorner(nd, nd) = down.state_comm();
    p.input_comm = Matrix::Zero(m, m);
    p.input_comm.topLeftCorner(mu, mu) = up.input_comm();
    p.input_comm.bottomRightCorner(mf, mf) = Theta_w_free;

    p.resonators = up.resonators();
    for (auto r : down.resonators()) {
        r.position += static_cast<std::size_t>(nu);
        r.momentum += static_cast<std::size_t>(nu);
        p.resonators.push_back(r);
    }
    return StateSpaceModel(std::move(p));
}

StateSpaceModel identity_block(Labels inputs, Labels outputs, Matrix input_comm) {
    if (inputs.size() != outputs.size()) {
        throw DimensionError("identity block needs as many outputs as inputs");
    }
    const auto m = static_cast<Eigen::Index>(inputs.size());
    StateSpaceModel::Parts p;
    p.inputs = std::move(inputs);
    p.outputs = std::move(outputs);
    p.F = Matrix::Zero(0, 0);
    p.G = Matrix::Zero(0, m);
    p.H = Matrix::Zero(m, 0);
    p.J = Matrix::Identity(m, m);
    p.state_comm = Matrix::Zero(0, 0);
    p.input_comm = std::move(input_comm);
    return StateSpaceModel(std::move(p));
}

double check_realizability(const StateSpaceModel& model) {
    const Matrix a = model.F() * model.state_comm();
    const Matrix b = model.state_comm() * model.F().transpose();
    const Matrix c = model.G() * model.input_comm() * model.G().transpose();
    const double scale = std::max({max_abs(a), max_abs(b), max_abs(c)});
    if (scale == 0.0) return 0.0;
    return max_abs(a + b + c) / scale;
}

double output_commutator_residual(const StateSpaceModel& model) {
    const Matrix a = model.state_comm() * model.H().transpose();
    const Matrix b = model.G() * model.input_comm() * model.J().transpose();
    const double scale = std::max(max_abs(a), max_abs(b));
    if (scale == 0.0) return 0.0;
    return max_abs(a + b) / scale;
}

StateSpaceModel permute_states(const StateSpaceModel& model,
                               const std::vector<std::size_t>& perm) {
    const std::size_t n = model.num_states();
    if (perm.size() != n) throw DimensionError("permutation size mismatch");
    std::vector<std::size_t> inverse(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        if (perm[i] >= n || inverse[perm[i]] != n) throw DimensionError("not a permutation");
        inverse[perm[i]] = i;
    }
    Eigen::VectorXi idx(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) idx(static_cast<Eigen::Index>(i)) = static_cast<int>(perm[i]);

    StateSpaceModel::Parts p = model.parts();
    for (std::size_t i = 0; i < n; ++i) p.states[i] = model.state_labels()[perm[i]];
    p.F = model.F()(idx, idx);
    p.G = model.G()(idx, Eigen::all);
    p.H = model.H()(Eigen::all, idx);
    p.state_comm = model.state_comm()(idx, idx);
    for (auto& r : p.resonators) {
        r.position = inverse[r.position];
        r.momentum = inverse[r.momentum];
    }
    return StateSpaceModel(std::move(p));
}

StateSpaceModel relabel(const StateSpaceModel& model, Labels states, Labels inputs,
                        Labels outputs) {
    StateSpaceModel::Parts p = model.parts();
    auto apply = [](Labels& dst, Labels&& src, const char* kind) {
        if (src.empty()) return;
        if (src.size() != dst.size()) {
            throw DimensionError(std::string("relabel: wrong number of ") + kind + " labels");
        }
        dst = std::move(src);
    };
    apply(p.states, std::move(states), "state");
    apply(p.inputs, std::move(inputs), "input");
    apply(p.outputs, std::move(outputs), "output");
    return StateSpaceModel(std::move(p));
}

}  // namespace qnc
