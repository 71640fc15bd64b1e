#include <benchmark/benchmark.h>

#include "qnc/flowgraph.hpp"
#include "qnc/noisebudget.hpp"
#include "qnc/schemes.hpp"

using namespace qnc;

namespace {

const SensorParams kParams = SensorParams::normalized();

void BM_TransferMatrix(benchmark::State& state) {
    const auto m = build_intracavity_matched(kParams, MatchedSqueezerParams::canonical(kParams));
    double w = 0.3;
    for (auto _ : state) {
        benchmark::DoNotOptimize(transfer_matrix(m, w));
        w = w < 10.0 ? w * 1.01 : 0.3;
    }
}
BENCHMARK(BM_TransferMatrix);

void BM_Sweep(benchmark::State& state) {
    const auto m = build_io_matched(kParams, Placement::input);
    const auto grid = FrequencyGrid::logarithmic(1e-3, 1e3, static_cast<std::size_t>(state.range(0)));
    SweepOptions opts;
    opts.threads = static_cast<unsigned>(state.range(1));
    for (auto _ : state) benchmark::DoNotOptimize(sweep(m, grid, opts));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Sweep)->Args({400, 1})->Args({4000, 1})->Args({4000, 4});

void BM_SchemeBudget(benchmark::State& state) {
    const auto setup = make_scheme(SchemeKind::variational_readout, kParams);
    const auto grid = FrequencyGrid::logarithmic(1e-3, 1e3, 400);
    for (auto _ : state) benchmark::DoNotOptimize(scheme_budget(setup, kParams, grid, 1.0));
}
BENCHMARK(BM_SchemeBudget);

void BM_EnumeratePaths(benchmark::State& state) {
    const auto g = extract_graph(build_io_matched(kParams, Placement::output));
    for (auto _ : state) benchmark::DoNotOptimize(enumerate_paths(g, "xi1", "zeta2"));
}
BENCHMARK(BM_EnumeratePaths);

void BM_Certificate(benchmark::State& state) {
    const auto g = extract_graph(build_intracavity_matched(kParams, MatchedSqueezerParams::canonical(kParams)));
    const auto grid = FrequencyGrid::logarithmic(1e-3, 1e3, 400);
    for (auto _ : state) benchmark::DoNotOptimize(cancellation_certificate(g, "xi1", "eta2", grid));
}
BENCHMARK(BM_Certificate);

}  // namespace
BENCHMARK_MAIN();
