#pragma once

// Closed forms written out independently of the library, for use as test
// oracles. Nothing here calls into qnc.

#include <cmath>
#include <complex>
#include <functional>

namespace oracle {

using C = std::complex<double>;

inline constexpr C I{0.0, 1.0};

struct Phys {
    double hbar = 1.0;
    double m = 1.0;
    double wm = 1.0;
    double gamma = 1.0;
    double kappa = 1.0;
};

inline C cavity(const Phys& p, double w) { return (p.gamma + I * w) / (p.gamma - I * w); }

inline C ponderomotive(const Phys& p, double w) {
    const C d = p.gamma - I * w;
    return 2.0 * p.gamma * p.hbar * p.kappa * p.kappa / p.m / ((p.wm * p.wm - w * w) * d * d);
}

inline C signal(const Phys& p, double w) {
    return ponderomotive(p, w) * (p.gamma - I * w) / (p.hbar * p.kappa * std::sqrt(2.0 * p.gamma));
}

// Hand-evaluated values for hbar = m = omega_m = gamma = kappa = 1, Omega = 1/2:
//   K_cav = (1 + i/2)/(1 - i/2) = (3 + 4i)/5
//   (1 - i/2)^2 = 3/4 - i, (omega_m^2 - Omega^2) = 3/4
//   K_pm = 2 / ((3/4)(3/4 - i)) = 32/25 + (128/75) i
//   K_f = K_pm (1 - i/2) / sqrt(2) = sqrt(2) (16/15 + 8/15 i)
inline const C kCavHalf{0.6, 0.8};
inline const C kPmHalf{32.0 / 25.0, 128.0 / 75.0};
inline const C kSignalHalf = std::sqrt(2.0) * C{16.0 / 15.0, 8.0 / 15.0};

/// Vacuum budget S_F = (|K_pm|^2 + |K_cav|^2) / (2 |K_f|^2) at coupling kappa.
inline double vacuum_force_noise(Phys p, double kappa, double w) {
    p.kappa = kappa;
    const double pm = std::norm(ponderomotive(p, w));
    const double cav = std::norm(cavity(p, w));
    return 0.5 * (pm + cav) / std::norm(signal(p, w));
}

/// Golden-section search over [lo, hi]; returns the minimising argument.
inline double golden_argmin(const std::function<double(double)>& f, double lo, double hi,
                            int iterations = 200) {
    const double r = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo;
    double b = hi;
    double c = b - r * (b - a);
    double d = a + r * (b - a);
    double fc = f(c);
    double fd = f(d);
    for (int i = 0; i < iterations && (b - a) > 1e-15 * (std::abs(a) + std::abs(b)); ++i) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

/// Coupling minimising the vacuum budget, found over log(kappa) after a
/// coarse bracketing scan.
inline double optimal_kappa_bruteforce(const Phys& p, double w) {
    const auto f = [&](double logk) { return vacuum_force_noise(p, std::exp(logk), w); };
    double best = 0.0;
    double best_val = INFINITY;
    for (double lk = -60.0; lk <= 60.0; lk += 0.25) {
        const double v = f(lk);
        if (v < best_val) {
            best_val = v;
            best = lk;
        }
    }
    return std::exp(golden_argmin(f, best - 0.5, best + 0.5));
}

/// Brute-force SQL: the vacuum budget at the brute-force optimal coupling.
inline double sql_bruteforce(const Phys& p, double w) {
    return vacuum_force_noise(p, optimal_kappa_bruteforce(p, w), w);
}

inline double rel(C a, C b) {
    const double s = std::max(std::abs(a), std::abs(b));
    return s == 0.0 ? 0.0 : std::abs(a - b) / s;
}

inline double rel(double a, double b) {
    const double s = std::max(std::abs(a), std::abs(b));
    return s == 0.0 ? 0.0 : std::abs(a - b) / s;
}

}  // namespace oracle
