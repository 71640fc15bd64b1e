#include <gtest/gtest.h>

#include <random>

#include "oracle.hpp"
#include "qnc/error.hpp"
#include "qnc/flowgraph.hpp"
#include "qnc/schemes.hpp"

using namespace qnc;

namespace {

std::vector<std::pair<std::string, StateSpaceModel>> shipped_models() {
    const auto p = SensorParams::normalized();
    return {
        {"baseline", build_sensor(p)},
        {"intracavity", build_intracavity_matched(p, MatchedSqueezerParams::canonical(p))},
        {"squeezer", build_squeezer_block(p.gamma, p.g(), p.omega_m)},
        {"input_matched", build_io_matched(p, Placement::input)},
        {"output_matched", build_io_matched(p, Placement::output)},
    };
}

}  // namespace

TEST(ExtractGraph, SensorCondensesMechanicalPair) {
    const auto g = extract_graph(build_sensor(SensorParams::normalized()));
    int resonators = 0;
    for (const auto& n : g.nodes()) resonators += n.kind == FlowNodeKind::resonator;
    EXPECT_EQ(resonators, 1);
    EXPECT_EQ(g.node_of_state(0), g.node_of_state(1));
    EXPECT_EQ(g.port_of_state(1), 1u);
}

TEST(ExtractGraph, UndeclaredPairIsACycle) {
    StateSpaceModel::Parts p = build_sensor(SensorParams::normalized()).parts();
    p.resonators.clear();
    try {
        extract_graph(StateSpaceModel(p));
        FAIL();
    } catch (const CycleError& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("q"), std::string::npos);
        EXPECT_NE(msg.find("p"), std::string::npos);
    }
}

TEST(ExtractGraph, ResonatorBlockIsTheResolvent) {
    const auto p = SensorParams::normalized();
    const auto m = build_intracavity_matched(p, {-0.7, 2.0, 0.3}, MatchingCheck::skip);
    const auto g = extract_graph(m);
    for (const auto& node : g.nodes()) {
        if (node.kind != FlowNodeKind::resonator) continue;
        Eigen::Matrix2d f;
        for (int a = 0; a < 2; ++a) {
            for (int b = 0; b < 2; ++b) {
                f(a, b) = m.F()(static_cast<Eigen::Index>(node.members[a]),
                                static_cast<Eigen::Index>(node.members[b]));
            }
        }
        for (double w : {0.1, 0.6, 3.0}) {
            const Complex s = laplace_point(w);
            const Eigen::Matrix2cd inv = (s * Eigen::Matrix2cd::Identity() - f.cast<Complex>()).inverse();
            for (int x = 0; x < 2; ++x) {
                for (int e = 0; e < 2; ++e) {
                    EXPECT_LT(std::abs(node.block[x][e](s) - inv(x, e)), 1e-12 * std::max(1.0, std::abs(inv(x, e))));
                }
            }
        }
    }
}

TEST(EnumeratePaths, BaselineShotNoiseRoutes) {
    const auto p = SensorParams::normalized();
    const auto g = extract_graph(build_sensor(p));
    const auto rep = enumerate_paths(g, "xi2", "eta2");
    ASSERT_EQ(rep.paths.size(), 2u);
    bool feedthrough = false;
    for (const auto& path : rep.paths) {
        if (path.classification == PathClass::feedthrough) {
            feedthrough = true;
            EXPECT_EQ(path.gain(laplace_point(0.3)), Complex(-1.0, 0.0));
        } else {
            // 2 gamma / (s + gamma)
            const Complex s = laplace_point(0.3);
            EXPECT_LT(oracle::rel(path.gain(s), 2.0 / (s + 1.0)), 1e-15);
        }
    }
    EXPECT_TRUE(feedthrough);
    for (double w : {0.0, 0.4, 7.0}) {
        EXPECT_LT(oracle::rel(rep.sum(laplace_point(w)), oracle::cavity({}, w)), 1e-14);
    }
}

TEST(EnumeratePaths, BaselineBackActionSinglePath) {
    const auto g = extract_graph(build_sensor(SensorParams::normalized()));
    const auto rep = enumerate_paths(g, "xi1", "eta2");
    ASSERT_EQ(rep.paths.size(), 1u);
    EXPECT_EQ(rep.paths[0].describe(g), "xi1 -> a1 -> [p>(q,p)>q] -> a2 -> eta2");
    EXPECT_LT(oracle::rel(rep.sum(laplace_point(0.5)), oracle::kPmHalf), 1e-14);
}

TEST(EnumeratePaths, BaselineSignalPath) {
    const auto g = extract_graph(build_sensor(SensorParams::normalized()));
    const auto rep = enumerate_paths(g, "f", "eta2");
    ASSERT_EQ(rep.paths.size(), 1u);
    EXPECT_EQ(rep.paths[0].classification, PathClass::signal);
    EXPECT_LT(oracle::rel(rep.sum(laplace_point(0.5)), oracle::kSignalHalf), 1e-14);
}

TEST(EnumeratePaths, DisconnectedGivesEmptyReport) {
    const auto g = extract_graph(build_sensor(SensorParams::normalized()));
    const auto rep = enumerate_paths(g, "f", "eta1");
    EXPECT_TRUE(rep.paths.empty());
    EXPECT_TRUE(rep.sum.is_zero());
    EXPECT_LE(rep.max_probe_deviation, 1e-15);
}

TEST(EnumeratePaths, MatchedHasNoiseAndAntiNoise) {
    const auto p = SensorParams::normalized();
    const auto g = extract_graph(build_intracavity_matched(p, MatchedSqueezerParams::canonical(p)));
    const auto rep = enumerate_paths(g, "xi1", "eta2");
    ASSERT_EQ(rep.paths.size(), 2u);
    const Complex s = laplace_point(0.5);
    EXPECT_LT(std::abs(rep.paths[0].gain(s) + rep.paths[1].gain(s)), 1e-15);
    EXPECT_TRUE(rep.sum.is_zero());
}

TEST(EnumeratePaths, SqueezerBlockMatchesAntiNoiseClosedForm) {
    const auto p = SensorParams::normalized();
    const auto g = extract_graph(build_squeezer_block(p.gamma, p.g(), p.omega_m));
    const auto rep = enumerate_paths(g, "xi1", "eta2");
    ASSERT_EQ(rep.paths.size(), 1u);
    EXPECT_NE(rep.paths[0].describe(g).find("(qs,ps)"), std::string::npos);
    const MatchedSqueezerParams sq{-p.omega_m, p.omega_m, p.g()};
    for (double w : {0.1, 0.5, 2.0}) {
        EXPECT_LT(oracle::rel(rep.sum(laplace_point(w)), anti_noise_transfer(sq, p.gamma, w)), 1e-13);
    }
}

TEST(EnumeratePaths, UnknownLabelsNameValidOnes) {
    const auto g = extract_graph(build_sensor(SensorParams::normalized()));
    try {
        enumerate_paths(g, "xi9", "eta2");
        FAIL();
    } catch (const LabelError& e) {
        EXPECT_NE(std::string(e.what()).find("xi1"), std::string::npos);
    }
    EXPECT_THROW(enumerate_paths(g, "xi1", "eta9"), LabelError);
}

TEST(EnumeratePaths, PathSumsMatchTransferEverywhere) {
    std::mt19937_64 rng(20261015);
    std::uniform_real_distribution<double> logw(-2.0, 2.0);
    PathOptions opts;
    for (int i = 0; i < 10; ++i) opts.probes.push_back(std::pow(10.0, logw(rng)));
    for (const auto& [name, model] : shipped_models()) {
        const auto g = extract_graph(model);
        for (const auto& in : model.input_labels()) {
            for (const auto& out : model.output_labels()) {
                const auto rep = enumerate_paths(g, in, out, opts);
                EXPECT_LE(rep.max_probe_deviation, 1e-10) << name << " " << in << "->" << out;
            }
        }
    }
}

TEST(Certificate, MatchedIsCertified) {
    const auto p = SensorParams::normalized();
    const auto g = extract_graph(build_intracavity_matched(p, MatchedSqueezerParams::canonical(p)));
    const auto grid = FrequencyGrid::logarithmic(1e-3, 1e3, 400);
    const auto cert = cancellation_certificate(g, "xi1", "eta2", grid);
    EXPECT_TRUE(cert.certified);
    const double max_pm = 2.0 / (1.0 - 1e-6);
    for (std::size_t i = 0; i < cert.omega.size(); ++i) {
        if (!cert.flagged[i]) {
            EXPECT_LE(cert.residual[i], 1e-10 * max_pm);
        }
    }
}

TEST(Certificate, BaselineResidualIsPonderomotive) {
    const auto p = SensorParams::normalized();
    const auto g = extract_graph(build_sensor(p));
    const auto grid = FrequencyGrid::logarithmic(1e-2, 1e2, 50);
    const auto cert = cancellation_certificate(g, "xi1", "eta2", grid);
    EXPECT_FALSE(cert.certified);
    for (std::size_t i = 0; i < cert.omega.size(); ++i) {
        EXPECT_LT(oracle::rel(cert.residual[i], std::abs(oracle::ponderomotive({}, cert.omega[i]))), 1e-12);
    }
}

TEST(Certificate, DetunedCouplingLeavesProportionalResidual) {
    const auto p = SensorParams::normalized();
    auto sq = MatchedSqueezerParams::canonical(p);
    sq.g *= 1.01;
    const auto g = extract_graph(build_intracavity_matched(p, sq, MatchingCheck::skip));
    const auto cert = cancellation_certificate(g, "xi1", "eta2", FrequencyGrid({1e-3, 0.1, 0.5, 3.0}));
    EXPECT_FALSE(cert.certified);
    const double factor = 1.01 * 1.01 - 1.0;
    for (std::size_t i = 0; i < cert.omega.size(); ++i) {
        EXPECT_LT(oracle::rel(cert.residual[i], factor * std::abs(oracle::ponderomotive({}, cert.omega[i]))), 1e-9);
    }
}

TEST(Certificate, ResonanceIsFlagged) {
    const auto p = SensorParams::normalized();
    const auto g = extract_graph(build_sensor(p));
    const auto cert = cancellation_certificate(g, "xi1", "eta2", FrequencyGrid({0.5, 1.0}));
    EXPECT_FALSE(cert.flagged[0]);
    EXPECT_TRUE(cert.flagged[1]);
    EXPECT_TRUE(std::isnan(cert.residual[1]));
}

TEST(Dot, ContainsNodesAndGains) {
    const auto p = SensorParams::normalized();
    const auto dot = to_dot(extract_graph(build_intracavity_matched(p, MatchedSqueezerParams::canonical(p))));
    EXPECT_EQ(dot.rfind("digraph", 0), 0u);
    EXPECT_NE(dot.find("(q',p')"), std::string::npos);
    EXPECT_NE(dot.find("xi1"), std::string::npos);
    EXPECT_NE(dot.find("->"), std::string::npos);
}

TEST(PathClass, Names) {
    EXPECT_EQ(to_string(PathClass::anti_noise), "anti-noise");
    EXPECT_EQ(to_string(PathClass::feedthrough), "feedthrough");
}
