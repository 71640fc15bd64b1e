#pragma once

#include <functional>
#include <string>

#include "qnc/linsys.hpp"

namespace qnc {

/// Homodyne readout of the quadrature
///
///     zeta(Omega) = -sin(theta(Omega)) y1 + cos(theta(Omega)) y2
///
/// of two model outputs y1 = `in_phase`, y2 = `quadrature`. An empty angle
/// function means theta = 0, i.e. y2 itself is measured.
struct Readout {
    std::string in_phase = "eta1";
    std::string quadrature = "eta2";
    std::function<double(double)> angle;
    std::string name = "eta2";

    static Readout output(std::string label);
    static Readout homodyne(std::string y1, std::string y2, double theta, std::string name);
    static Readout variational(std::string y1, std::string y2, std::function<double(double)> theta,
                               std::string name);

    double theta(double omega) const { return angle ? angle(omega) : 0.0; }

    /// Row c with c * K(:, j) the transfer from input j to the measured quadrature.
    Eigen::RowVectorXcd weights(const TransferMatrix& K) const;
};

}  // namespace qnc
