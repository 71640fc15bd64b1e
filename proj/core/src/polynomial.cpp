#include "qnc/polynomial.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "qnc/error.hpp"

namespace qnc {
namespace {

std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

Polynomial::Polynomial(std::vector<double> ascending) : c_(std::move(ascending)) { trim(); }

Polynomial Polynomial::constant(double c) { return Polynomial({c}); }

Polynomial Polynomial::linear_factor(double root) { return Polynomial({-root, 1.0}); }

void Polynomial::trim() {
    while (!c_.empty() && c_.back() == 0.0) c_.pop_back();
}

std::complex<double> Polynomial::operator()(std::complex<double> s) const {
    std::complex<double> acc = 0.0;
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * s + *it;
    return acc;
}

Polynomial& Polynomial::operator+=(const Polynomial& rhs) {
    if (rhs.c_.size() > c_.size()) c_.resize(rhs.c_.size(), 0.0);
    for (std::size_t i = 0; i < rhs.c_.size(); ++i) c_[i] += rhs.c_[i];
    trim();
    return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& rhs) {
    if (rhs.c_.size() > c_.size()) c_.resize(rhs.c_.size(), 0.0);
    for (std::size_t i = 0; i < rhs.c_.size(); ++i) c_[i] -= rhs.c_[i];
    trim();
    return *this;
}

Polynomial& Polynomial::operator*=(double k) {
    for (auto& v : c_) v *= k;
    trim();
    return *this;
}

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    if (a.is_zero() || b.is_zero()) return {};
    std::vector<double> out(a.c_.size() + b.c_.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.c_.size(); ++i) {
        for (std::size_t j = 0; j < b.c_.size(); ++j) out[i + j] += a.c_[i] * b.c_[j];
    }
    return Polynomial(std::move(out));
}

std::string Polynomial::to_string(const std::string& var) const {
    if (c_.empty()) return "0";
    std::string out;
    for (std::size_t k = 0; k < c_.size(); ++k) {
        const double v = c_[k];
        if (v == 0.0) continue;
        std::string term;
        if (k == 0) {
            term = format_number(v);
        } else {
            term = (v == 1.0) ? "" : (v == -1.0 ? "-" : format_number(v) + "*");
            term += var;
            if (k > 1) term += "^" + std::to_string(k);
        }
        if (!out.empty()) {
            if (term.front() == '-') {
                out += " - " + term.substr(1);
                continue;
            }
            out += " + ";
        }
        out += term;
    }
    return out;
}

RationalFunction::RationalFunction(Polynomial num, Polynomial den)
    : num_(std::move(num)), den_(std::move(den)) {
    if (den_.is_zero()) throw InvalidParameter("denominator", "zero polynomial");
}

RationalFunction RationalFunction::constant(double c) {
    return RationalFunction(Polynomial::constant(c), Polynomial::constant(1.0));
}

std::complex<double> RationalFunction::operator()(std::complex<double> s) const {
    return num_(s) / den_(s);
}

RationalFunction operator+(const RationalFunction& a, const RationalFunction& b) {
    if (a.is_zero()) return b;
    if (b.is_zero()) return a;
    if (a.den_ == b.den_) return RationalFunction(a.num_ + b.num_, a.den_);
    return RationalFunction(a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_);
}

RationalFunction operator*(const RationalFunction& a, const RationalFunction& b) {
    return RationalFunction(a.num_ * b.num_, a.den_ * b.den_);
}

RationalFunction operator*(const RationalFunction& a, double k) {
    return RationalFunction(a.num_ * k, a.den_);
}

std::string RationalFunction::to_string(const std::string& var) const {
    return "(" + num_.to_string(var) + ") / (" + den_.to_string(var) + ")";
}

}  // namespace qnc
