#include "malign/alignment.hpp"
#include "malign/harness.hpp"
#include "malign/lle.hpp"
#include "malign/localizer.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace malign;

namespace {

const ExperimentSetup& demo_setup() {
    static const ExperimentSetup setup = make_setup(demo_environment(), ExperimentConfig{});
    return setup;
}

void BM_FindNeighbors(benchmark::State& state) {
    const auto& s = demo_setup();
    const auto k = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(find_neighbors(s.truth.rss, k));
}
BENCHMARK(BM_FindNeighbors)->Arg(10)->Arg(24)->Arg(50);

void BM_ComputeWeights(benchmark::State& state) {
    const auto& s = demo_setup();
    const auto nbrs = find_neighbors(s.truth.rss, static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(compute_weights(s.truth.rss, nbrs, kDefaultRidge));
}
BENCHMARK(BM_ComputeWeights)->Arg(10)->Arg(24)->Arg(50);

void BM_ComputeEmbedding(benchmark::State& state) {
    const auto& s = demo_setup();
    const PreparedSource src = prepare_source(make_source(s, SourceKind::plan_coords));
    JointLaplacian lz;
    lz.matrix = Eigen::MatrixXd(src.cost);
    lz.paired = s.grid.size();
    for (auto _ : state) benchmark::DoNotOptimize(compute_embedding(lz, 3));
}
BENCHMARK(BM_ComputeEmbedding)->Unit(benchmark::kMillisecond);

void BM_Localize(benchmark::State& state) {
    const auto& s = demo_setup();
    const PreparedSource src = prepare_source(make_source(s, SourceKind::plan_coords));
    std::mt19937_64 rng(1);
    const auto C = calibration_count(s.grid.size(), static_cast<double>(state.range(0)));
    const TrialData trial = draw_trial(s, C, 11, false, 3.0, rng);
    const LocalizationRequest req{trial.observations, Mode::stationary, {}};
    for (auto _ : state) benchmark::DoNotOptimize(localize(src, trial.calibration, req));
}
BENCHMARK(BM_Localize)->Arg(10)->Arg(25)->Arg(50)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
