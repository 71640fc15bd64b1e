#include <gtest/gtest.h>

#include <numbers>

#include "oracle.hpp"
#include "qnc/error.hpp"
#include "qnc/noisebudget.hpp"

using namespace qnc;

namespace {

oracle::Phys phys(const SensorParams& p) { return {p.hbar, p.mass, p.omega_m, p.gamma, p.kappa()}; }

NoiseSpec baseline_vacuum() { return NoiseSpec{}.vacuum("xi1", "xi2").silent("f"); }

}  // namespace

TEST(SqueezedMatrix, PureStateBound) {
    for (double r : {0.0, 0.3, 1.0, 2.5}) {
        for (double angle : {0.0, 0.4, std::numbers::pi / 2, 2.0, -1.1}) {
            const Eigen::Matrix2d S = squeezed_matrix(r, angle);
            EXPECT_NEAR(S.determinant(), 0.25, 1e-12 * std::exp(4.0 * r));
            EXPECT_NEAR(S(0, 1), S(1, 0), 1e-15);
            const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(S);
            EXPECT_GE(es.eigenvalues().minCoeff(), 0.0);
        }
    }
}

TEST(SqueezedMatrix, PhaseQuadratureSqueezedExactly) {
    const Eigen::Matrix2d S = squeezed_matrix(1.0, kPhaseQuadrature);
    EXPECT_EQ(S(1, 1), 0.5 * std::exp(-2.0));
    EXPECT_EQ(S(0, 0), 0.5 * std::exp(2.0));
    EXPECT_EQ(S(0, 1), 0.0);
}

TEST(NoiseSpec, VacuumForPairsQuadratures) {
    const auto m = build_sensor(SensorParams::normalized());
    const auto spec = NoiseSpec::vacuum_for(m);
    ASSERT_EQ(spec.pairs().size(), 1u);
    EXPECT_EQ(spec.pairs()[0].first, "xi1");
    EXPECT_EQ(spec.pairs()[0].second, "xi2");
    EXPECT_EQ(spec.silent_inputs(), (std::vector<std::string>{"f"}));
}

TEST(OutputPsd, BaselineVacuum) {
    const auto p = SensorParams::normalized();
    const auto m = build_sensor(p);
    for (double w : {0.0, 0.2, 0.5, 3.0}) {
        const auto psd = output_psd(transfer_matrix(m, w), baseline_vacuum(), Readout{});
        const double pm = std::norm(oracle::ponderomotive(phys(p), w));
        EXPECT_LT(oracle::rel(psd.total, 0.5 * (pm + 1.0)), 1e-12);
        EXPECT_LT(oracle::rel(psd.contribution("xi1"), 0.5 * pm), 1e-12);
        EXPECT_LT(oracle::rel(psd.contribution("xi2"), 0.5), 1e-12);
        EXPECT_EQ(psd.contribution("f"), 0.0);
    }
}

TEST(OutputPsd, AllSilentIsZero) {
    const auto m = build_sensor(SensorParams::normalized());
    const auto spec = NoiseSpec{}.silent("f").silent("xi1").silent("xi2");
    EXPECT_EQ(output_psd(transfer_matrix(m, 0.3), spec, Readout{}).total, 0.0);
}

TEST(OutputPsd, MissingOrDuplicateSpec) {
    const auto K = transfer_matrix(build_sensor(SensorParams::normalized()), 0.3);
    EXPECT_THROW(output_psd(K, NoiseSpec{}.vacuum("xi1", "xi2"), Readout{}), MissingNoiseSpec);
    EXPECT_THROW(output_psd(K, baseline_vacuum().silent("xi1"), Readout{}), MissingNoiseSpec);
}

TEST(OutputPsd, ClassicalForceContribution) {
    const auto p = SensorParams::normalized();
    const auto K = transfer_matrix(build_sensor(p), 0.3);
    const auto spec = NoiseSpec{}.vacuum("xi1", "xi2").classical("f", [](double) { return 2.0; });
    const auto psd = output_psd(K, spec, Readout{});
    EXPECT_LT(oracle::rel(psd.contribution("f"), 2.0 * std::norm(oracle::signal(phys(p), 0.3))), 1e-12);
}

TEST(OutputPsd, ContributionsSumToTotalAndAreNonnegative) {
    const auto p = SensorParams::normalized();
    const auto m = build_sensor(p);
    for (double angle : {0.0, 0.3, kPhaseQuadrature, 2.2}) {
        for (double w : {0.05, 0.5, 2.0}) {
            const auto spec = NoiseSpec{}.squeezed("xi1", "xi2", 0.8, angle).silent("f");
            const auto psd = output_psd(transfer_matrix(m, w), spec,
                                        Readout::homodyne("eta1", "eta2", 0.4, "zeta"));
            double sum = 0.0;
            for (const auto& [src, v] : psd.contributions) {
                EXPECT_GE(v, 0.0);
                sum += v;
            }
            EXPECT_LT(oracle::rel(sum, psd.total), 1e-12);
        }
    }
}

TEST(OutputPsd, VacuumIsRotationInvariant) {
    const auto p = SensorParams::normalized();
    const auto m = build_sensor(p);
    for (double w : {0.05, 0.5, 2.0, 30.0}) {
        const auto K = transfer_matrix(m, w);
        const double plain = output_psd(K, baseline_vacuum(), Readout{}).total;
        for (double phi : {-1.2, 0.3, 2.9}) {
            const auto spec =
                NoiseSpec{}.rotated("xi1", "xi2", Vacuum{}, [phi](double) { return phi; }).silent("f");
            EXPECT_LT(oracle::rel(output_psd(K, spec, Readout{}).total, plain), 1e-12);
        }
    }
}

TEST(OutputPsd, RowNormConservedUnderRotation) {
    const auto p = SensorParams::normalized();
    const auto m = build_sensor(p);
    for (double w : {0.05, 0.5, 2.0}) {
        const auto K = transfer_matrix(m, w);
        const double expect = std::norm(K.at("eta2", "xi1")) + std::norm(K.at("eta2", "xi2"));
        for (double phi : {-1.2, 0.3, 2.9}) {
            const auto spec =
                NoiseSpec{}.rotated("xi1", "xi2", Vacuum{}, [phi](double) { return phi; }).silent("f");
            const auto psd = output_psd(K, spec, Readout{});
            const double norm2 = 2.0 * (psd.contribution("chi1") + psd.contribution("chi2"));
            EXPECT_LT(oracle::rel(norm2, expect), 1e-12);
        }
    }
}

TEST(UnruhSpec, VacuumInputLeavesBaselineUnchanged) {
    const auto p = SensorParams::normalized();
    const auto m = build_sensor(p);
    for (double w : {0.01, 0.5, 0.9, 1.5, 20.0}) {
        const auto K = transfer_matrix(m, w);
        const double rotated = output_psd(K, apply_unruh_spec(p, 0.0), Readout{}).total;
        const double pm = std::norm(oracle::ponderomotive(phys(p), w));
        EXPECT_LT(oracle::rel(rotated, 0.5 * (pm + 1.0)), 1e-12) << w;
    }
}

TEST(UnruhSpec, SqueezedRotatedInput) {
    const auto p = SensorParams::normalized();
    const auto m = build_sensor(p);
    for (double r : {0.5, 1.0, 3.0}) {
        for (double w : {0.01, 0.5, 1.5, 20.0}) {
            const auto psd = output_psd(transfer_matrix(m, w), apply_unruh_spec(p, r), Readout{});
            const double pm = std::norm(oracle::ponderomotive(phys(p), w));
            EXPECT_LT(oracle::rel(psd.total, 0.5 * std::exp(-2.0 * r) * (pm + 1.0)), 1e-10) << r << " " << w;
            EXPECT_LE(psd.contribution("chi1"), 1e-20 * psd.total);
        }
    }
}

TEST(UnruhSpec, LargeSqueezingDrivesNoiseDown) {
    const auto p = SensorParams::normalized();
    const auto K = transfer_matrix(build_sensor(p), 0.3);
    EXPECT_LT(output_psd(K, apply_unruh_spec(p, 15.0), Readout{}).total, 1e-12);
}

TEST(ForceSensitivity, BaselineOracle) {
    const auto p = SensorParams::normalized().with_coupling(0.7);
    const auto grid = FrequencyGrid::logarithmic(1e-2, 1e2, 60);
    const auto b = force_sensitivity(build_sensor(p), baseline_vacuum(), grid, Readout{}, p);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double w = grid.points()[i];
        EXPECT_FALSE(b.flagged[i]);
        const double expect = oracle::vacuum_force_noise(phys(p), p.kappa(), w);
        EXPECT_LT(oracle::rel(b.force_referred[i], expect), 1e-12);
        EXPECT_LT(oracle::rel(b.sql[i], sql_reference(p, w)), 1e-15);
        EXPECT_GE(b.ratio[i], 1.0 - 1e-12);
    }
}

TEST(ForceSensitivity, RatioOneAtOptimalCoupling) {
    const auto base = SensorParams::normalized();
    for (double w : {0.05, 0.3, 0.7, 1.4, 6.0}) {
        const auto p = base.with_coupling(sql_optimal_coupling(base, w));
        const auto b = force_sensitivity(build_sensor(p), baseline_vacuum(), FrequencyGrid({w}), Readout{}, p);
        EXPECT_NEAR(b.ratio[0], 1.0, 1e-6);
    }
}

TEST(ForceSensitivity, ResonanceFlaggedAsNaN) {
    const auto p = SensorParams::normalized();
    const auto b = force_sensitivity(build_sensor(p), baseline_vacuum(), FrequencyGrid({0.5, 1.0, 2.0}),
                                     Readout{}, p);
    EXPECT_TRUE(b.flagged[1]);
    EXPECT_TRUE(std::isnan(b.force_referred[1]));
    EXPECT_FALSE(b.flagged[0]);
}

TEST(ForceSensitivity, ZeroSignalTransferThrows) {
    const auto p = SensorParams::normalized();
    EXPECT_THROW(force_sensitivity(build_sensor(p), baseline_vacuum(), FrequencyGrid({0.5}),
                                   Readout::output("eta1"), p),
                 ZeroSignalTransfer);
}

TEST(SchemeBudget, NoBackActionTermWithAnyScheme) {
    const auto p = SensorParams::normalized();
    const auto grid = FrequencyGrid::logarithmic(1e-2, 1e2, 80);
    const AnalyticTransfers a(p);
    for (auto k : {SchemeKind::unruh_input_rotation, SchemeKind::variational_readout,
                   SchemeKind::intracavity_matched, SchemeKind::input_matched, SchemeKind::output_matched}) {
        const auto setup = make_scheme(k, p);
        const auto b = scheme_budget(setup, p, grid);
        for (std::size_t i = 0; i < grid.size(); ++i) {
            EXPECT_LE(b.contributions[0][i], 1e-20 * b.total[i]) << to_string(k) << " " << grid.points()[i];
            // Shot noise alone: 1/2 |row|^2 over the phase source with |row|^2 = |K_pm|^2 + 1
            // after a rotation, 1 otherwise.
            const double w = grid.points()[i];
            const double row = (k == SchemeKind::unruh_input_rotation) ? std::norm(a.ponderomotive(w)) + 1.0
                               : (k == SchemeKind::variational_readout)
                                   ? std::pow(std::cos(variational_readout_angle(p, w).theta), 2)
                                   : 1.0;
            EXPECT_LT(oracle::rel(b.total[i], 0.5 * row), 1e-10) << to_string(k);
        }
    }
}

TEST(SchemeBudget, SqueezingScalesForceNoise) {
    const auto p = SensorParams::normalized();
    const auto grid = FrequencyGrid::logarithmic(1e-2, 1e2, 40);
    for (auto k : {SchemeKind::unruh_input_rotation, SchemeKind::variational_readout,
                   SchemeKind::intracavity_matched, SchemeKind::input_matched, SchemeKind::output_matched}) {
        const auto setup = make_scheme(k, p);
        const auto b0 = scheme_budget(setup, p, grid, 0.0);
        for (double r : {0.5, 1.0, 2.0}) {
            const auto br = scheme_budget(setup, p, grid, r);
            for (std::size_t i = 0; i < grid.size(); ++i) {
                EXPECT_LT(oracle::rel(br.force_referred[i], std::exp(-2.0 * r) * b0.force_referred[i]), 1e-10)
                    << to_string(k) << " r=" << r;
            }
        }
    }
}

TEST(SchemeBudget, MatchedBeatsSqlAroundResonance) {
    const auto base = SensorParams::normalized();
    // backaction_significance g^2 / (gamma omega_m) = 10.
    const auto p = base.with_coupling(std::sqrt(10.0));
    const auto b = scheme_budget(make_scheme(SchemeKind::intracavity_matched, p), p,
                                 FrequencyGrid::linear(0.5, 1.5, 41));
    std::size_t below = 0;
    for (std::size_t i = 0; i < b.omega.size(); ++i) {
        if (!b.flagged[i] && b.ratio[i] < 1.0) ++below;
    }
    EXPECT_GT(below, 0u);
    // Baseline at the same coupling stays above.
    const auto bb = scheme_budget(make_scheme(SchemeKind::baseline, p), p, FrequencyGrid::linear(0.5, 1.5, 41));
    for (std::size_t i = 0; i < bb.omega.size(); ++i) {
        if (!bb.flagged[i]) {
            EXPECT_GE(bb.ratio[i], 1.0 - 1e-12);
        }
    }
}
