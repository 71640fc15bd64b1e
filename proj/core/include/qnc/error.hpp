#pragma once

#include <stdexcept>
#include <string>

namespace qnc {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A physical or numerical parameter is outside its admissible range.
class InvalidParameter : public Error {
public:
    InvalidParameter(std::string field, const std::string& what)
        : Error(field + ": " + what), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// Unknown, duplicated or inconsistent signal/state label.
class LabelError : public Error {
public:
    using Error::Error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

/// (i*Omega*I + F) is numerically singular at the requested frequency.
class SingularFrequency : public Error {
public:
    SingularFrequency(double omega, double rcond)
        : Error("system matrix singular at Omega = " + std::to_string(omega) +
                " (rcond = " + std::to_string(rcond) + ")"),
          omega_(omega), rcond_(rcond) {}

    double omega() const noexcept { return omega_; }
    double rcond() const noexcept { return rcond_; }

private:
    double omega_;
    double rcond_;
};

/// A closed-form transfer function was evaluated on its pole.
class PoleError : public Error {
public:
    PoleError(const std::string& function, double omega)
        : Error(function + " has a pole at Omega = " + std::to_string(omega)), omega_(omega) {}

    double omega() const noexcept { return omega_; }

private:
    double omega_;
};

/// Anti-noise couplings do not satisfy mu*nu = -omega_m^2 and mu*g^2 = -hbar*kappa^2/m.
class MatchingViolation : public Error {
public:
    using Error::Error;
};

/// The state graph still contains a cycle after condensing declared resonator pairs.
class CycleError : public Error {
public:
    using Error::Error;
};

/// A noise budget was requested for an input that has no noise description.
class MissingNoiseSpec : public Error {
public:
    using Error::Error;
};

/// The signal input does not reach the measured quadrature at some frequency.
class ZeroSignalTransfer : public Error {
public:
    explicit ZeroSignalTransfer(double omega)
        : Error("signal transfer vanishes at Omega = " + std::to_string(omega)), omega_(omega) {}

    double omega() const noexcept { return omega_; }

private:
    double omega_;
};

}  // namespace qnc
