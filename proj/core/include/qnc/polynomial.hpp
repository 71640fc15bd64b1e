#pragma once

#include <complex>
#include <string>
#include <vector>

namespace qnc {

/// Real polynomial in one variable, coefficients in ascending powers.
/// Trailing zero coefficients are trimmed; the zero polynomial has no
/// coefficients and degree -1.
class Polynomial {
public:
    Polynomial() = default;
    explicit Polynomial(std::vector<double> ascending);

    static Polynomial constant(double c);
    /// s - root
    static Polynomial linear_factor(double root);

    int degree() const noexcept { return static_cast<int>(c_.size()) - 1; }
    bool is_zero() const noexcept { return c_.empty(); }
    const std::vector<double>& coefficients() const noexcept { return c_; }
    /// Coefficient of s^k, zero beyond the degree.
    double operator[](std::size_t k) const noexcept { return k < c_.size() ? c_[k] : 0.0; }

    std::complex<double> operator()(std::complex<double> s) const;

    Polynomial& operator+=(const Polynomial& rhs);
    Polynomial& operator-=(const Polynomial& rhs);
    Polynomial& operator*=(double k);

    friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
    friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
    friend Polynomial operator*(const Polynomial& a, const Polynomial& b);
    friend Polynomial operator*(Polynomial a, double k) { return a *= k; }
    friend Polynomial operator*(double k, Polynomial a) { return a *= k; }
    friend bool operator==(const Polynomial&, const Polynomial&) = default;

    /// e.g. "1 + 2*s + s^2" with 17 significant digits.
    std::string to_string(const std::string& var = "s") const;

private:
    void trim();
    std::vector<double> c_;
};

/// num(s) / den(s) with a nonzero denominator. No cancellation of common
/// factors is attempted; equality is structural.
class RationalFunction {
public:
    RationalFunction() : num_(), den_(Polynomial::constant(1.0)) {}
    RationalFunction(Polynomial num, Polynomial den);
    static RationalFunction constant(double c);

    const Polynomial& numerator() const noexcept { return num_; }
    const Polynomial& denominator() const noexcept { return den_; }
    bool is_zero() const noexcept { return num_.is_zero(); }

    std::complex<double> operator()(std::complex<double> s) const;

    /// Shares the denominator when both are structurally equal, otherwise
    /// cross-multiplies.
    friend RationalFunction operator+(const RationalFunction& a, const RationalFunction& b);
    friend RationalFunction operator*(const RationalFunction& a, const RationalFunction& b);
    friend RationalFunction operator*(const RationalFunction& a, double k);

    std::string to_string(const std::string& var = "s") const;

private:
    Polynomial num_;
    Polynomial den_;
};

}  // namespace qnc
