#include <gtest/gtest.h>

#include "oracle.hpp"
#include "qnc/error.hpp"
#include "qnc/optomech.hpp"

using namespace qnc;

namespace {

oracle::Phys phys(const SensorParams& p) {
    return {p.hbar, p.mass, p.omega_m, p.gamma, p.kappa()};
}

}  // namespace

TEST(SensorParams, NormalizedHasUnitCoupling) {
    const auto p = SensorParams::normalized();
    EXPECT_DOUBLE_EQ(p.kappa(), 1.0);
    EXPECT_DOUBLE_EQ(p.g(), 1.0);
}

TEST(SensorParams, ValidationNamesTheField) {
    auto p = SensorParams::normalized();
    p.mass = -1.0;
    try {
        p.validate();
        FAIL();
    } catch (const InvalidParameter& e) {
        EXPECT_EQ(e.field(), "mass");
    }
    p = SensorParams::normalized();
    p.gamma = 0.0;
    EXPECT_THROW(p.validate(), InvalidParameter);
    p = SensorParams::normalized();
    p.length = std::numeric_limits<double>::infinity();
    EXPECT_THROW(p.validate(), InvalidParameter);
}

TEST(SensorParams, InputAmplitudeConsistent) {
    const auto p = SensorParams::from_input_amplitude(1.0, 2.0, 3.0, 0.4, 10.0, 2.0, 5.0);
    EXPECT_LT(oracle::rel(p.alpha, 5.0 * std::sqrt(2.0 / 0.4)), 1e-12);
    EXPECT_LT(oracle::rel(p.input_amplitude(), 5.0), 1e-12);
}

TEST(SensorParams, PowerFactory) {
    const double omega_0 = 1.77e15;
    const auto p = SensorParams::from_power(constants::hbar, 1.0, 1.0, 2.0, omega_0, 1.0, 1.0);
    const double a_in = std::sqrt(1.0 / (constants::hbar * omega_0));
    EXPECT_LT(oracle::rel(p.input_amplitude(), a_in), 1e-12);
}

TEST(SensorParams, CouplingDefinitions) {
    const auto p = SensorParams::from_power(constants::hbar, 40.0, 62.8, 62.8, 1.77e15, 5000.0, 10.0);
    EXPECT_LT(oracle::rel(p.kappa(), std::sqrt(2.0) * p.alpha * p.omega_0 / p.length), 1e-15);
    EXPECT_LT(oracle::rel(p.g() * p.g(), p.hbar * p.kappa() * p.kappa() / (p.mass * p.omega_m)),
              1e-12);
    EXPECT_LT(oracle::rel(p.with_coupling(3.0).kappa(), 3.0), 1e-15);
}

TEST(SensorParams, FreeMassAcceptedButHasNoG) {
    auto p = SensorParams::normalized();
    p.omega_m = 0.0;
    EXPECT_NO_THROW(build_sensor(p));
    EXPECT_NO_THROW(AnalyticTransfers(p).ponderomotive(0.5));
    EXPECT_THROW(p.g(), InvalidParameter);
}

TEST(BuildSensor, MatricesAsSpecified) {
    const auto m = build_sensor(SensorParams::normalized());
    EXPECT_EQ(m.state_labels(), (Labels{"q", "p", "a1", "a2"}));
    EXPECT_EQ(m.input_labels(), (Labels{"f", "xi1", "xi2"}));
    EXPECT_EQ(m.output_labels(), (Labels{"eta1", "eta2"}));
    Eigen::RowVector4d prow;
    prow << -1.0, 0.0, 1.0, 0.0;
    EXPECT_EQ(Eigen::RowVector4d(m.F().row(1)), prow);
    Matrix J(2, 3);
    J << 0, -1, 0, 0, 0, -1;
    EXPECT_EQ(m.J(), J);
    EXPECT_EQ(m.state_comm()(0, 1), 1.0);
    EXPECT_EQ(m.state_comm()(2, 3), 1.0);
    EXPECT_EQ(m.input_comm()(1, 2), 1.0);
    EXPECT_EQ(m.input_comm().row(0).norm(), 0.0);
}

TEST(BuildSensor, SiParametersKeepJ) {
    const auto m = build_sensor(
        SensorParams::from_power(constants::hbar, 1e-11, 3.1e8, 3.1e8, 1.77e15, 1e-4, 0.1));
    Matrix J(2, 3);
    J << 0, -1, 0, 0, 0, -1;
    EXPECT_EQ(m.J(), J);
    EXPECT_EQ(m.state_comm()(0, 1), constants::hbar);
}

TEST(AnalyticTransfers, DcValues) {
    const AnalyticTransfers a(SensorParams::normalized());
    EXPECT_EQ(a.cavity(0.0), Complex(1.0, 0.0));
    EXPECT_LT(oracle::rel(a.ponderomotive(0.0), Complex(2.0, 0.0)), 1e-15);
    EXPECT_LT(oracle::rel(a.signal(0.0), Complex(std::sqrt(2.0), 0.0)), 1e-15);
}

TEST(AnalyticTransfers, HalfResonanceHandValues) {
    const AnalyticTransfers a(SensorParams::normalized());
    EXPECT_LT(oracle::rel(a.cavity(0.5), oracle::kCavHalf), 1e-15);
    EXPECT_LT(oracle::rel(a.ponderomotive(0.5), oracle::kPmHalf), 1e-15);
    EXPECT_LT(oracle::rel(a.signal(0.5), oracle::kSignalHalf), 1e-15);
    EXPECT_LT(oracle::rel(a.ponderomotive_factored(0.5), a.ponderomotive(0.5)), 1e-14);
}

TEST(AnalyticTransfers, PoleAtResonance) {
    const AnalyticTransfers a(SensorParams::normalized());
    EXPECT_THROW(a.ponderomotive(1.0), PoleError);
    EXPECT_THROW(a.ponderomotive(-1.0), PoleError);
    EXPECT_THROW(a.signal(1.0), PoleError);
}

TEST(AnalyticTransfers, PropertiesOnGrid) {
    const auto p = SensorParams::from_power(constants::hbar, 40.0, 62.8, 31.4, 1.77e15, 5000.0, 10.0);
    const AnalyticTransfers a(p);
    const auto ph = phys(p);
    for (double x : {1e-3, 0.1, 0.5, 0.99, 1.01, 3.0, 100.0}) {
        const double w = x * p.omega_m;
        EXPECT_LE(std::abs(std::abs(a.cavity(w)) - 1.0), 1e-12);
        const Complex ratio = a.ponderomotive(w) / a.cavity(w);
        EXPECT_LE(std::abs(ratio.imag()), 1e-12 * std::abs(ratio));
        EXPECT_LT(oracle::rel(ratio.real(), a.ponderomotive_to_cavity(w)), 1e-12);
        const Complex lhs = a.signal(w) * p.hbar * p.kappa() * std::sqrt(2.0 * p.gamma);
        const Complex rhs = a.ponderomotive(w) * (p.gamma - Complex(0.0, w));
        EXPECT_LT(oracle::rel(lhs, rhs), 1e-14);
        EXPECT_LT(oracle::rel(a.ponderomotive(w), oracle::ponderomotive(ph, w)), 1e-13);
        EXPECT_LT(oracle::rel(a.ponderomotive_factored(w), a.ponderomotive(w)), 1e-13);
    }
}

TEST(AnalyticTransfers, MassCouplingScaling) {
    auto p = SensorParams::normalized();
    const Complex before = AnalyticTransfers(p).ponderomotive(0.3);
    p.mass *= 7.0;
    p = p.with_coupling(std::sqrt(7.0));
    EXPECT_LT(oracle::rel(AnalyticTransfers(p).ponderomotive(0.3), before), 1e-12);
}

TEST(NumericVsAnalytic, NormalizedGrid) {
    const auto rep =
        verify_numeric_vs_analytic(SensorParams::normalized(), FrequencyGrid::logarithmic(1e-3, 1e3, 200));
    EXPECT_LE(rep.max_relative_deviation, 1e-10);
    EXPECT_LE(rep.max_zero_entry, 1e-14);
}

TEST(NumericVsAnalytic, SinglePointAboveLinewidth) {
    const auto p = SensorParams::normalized();
    const auto rep = verify_numeric_vs_analytic(p, FrequencyGrid({10.0 * p.gamma}));
    EXPECT_LE(rep.max_relative_deviation, 1e-10);
    EXPECT_LE(rep.max_zero_entry, 1e-14);
}

TEST(Sql, BruteForceOracleAgreesWithClosedForm) {
    const auto p = SensorParams::normalized();
    for (double w : {0.0, 0.1, 0.5, 0.9, 1.3, 2.0, 10.0}) {
        const double brute = oracle::sql_bruteforce(phys(p), w);
        EXPECT_LT(oracle::rel(brute, sql_reference(p, w)), 1e-6) << w;
    }
    EXPECT_DOUBLE_EQ(sql_reference(p, 0.0), 1.0);
    EXPECT_DOUBLE_EQ(sql_reference(p, 2.0), 3.0);
}

TEST(Sql, SiParameters) {
    const auto p = SensorParams::from_power(constants::hbar, 40.0, 62.8, 62.8, 1.77e15, 5000.0, 10.0);
    for (double x : {0.2, 0.5, 3.0}) {
        const double w = x * p.omega_m;
        EXPECT_LT(oracle::rel(oracle::sql_bruteforce(phys(p), w), sql_reference(p, w)), 1e-6);
    }
}

TEST(Sql, VanishesTowardResonanceAndPolesAtIt) {
    const auto p = SensorParams::normalized();
    EXPECT_LT(sql_reference(p, 1.0 - 1e-9), 1e-8);
    EXPECT_THROW(sql_reference(p, 1.0), PoleError);
}

TEST(Sql, IndependentOfDrive) {
    auto p = SensorParams::normalized();
    const double a = sql_reference(p, 0.4);
    p.alpha = 123.0;
    EXPECT_EQ(sql_reference(p, 0.4), a);
}

TEST(Sql, OptimalCouplingTouchesLimit) {
    const auto p = SensorParams::normalized();
    for (double w : {0.1, 0.5, 2.0}) {
        const double k = sql_optimal_coupling(p, w);
        EXPECT_LT(oracle::rel(oracle::vacuum_force_noise(phys(p), k, w), sql_reference(p, w)), 1e-12);
        EXPECT_LT(oracle::rel(std::abs(AnalyticTransfers(p.with_coupling(k)).ponderomotive(w)), 1.0),
                  1e-12);
    }
}
