#include "bench_common.hpp"

#include <benchmark/benchmark.h>

using namespace nidsrobust;

namespace {

// Arg 0: training rows; 123 columns as in the full feature space.
void BM_RankFeatures(benchmark::State& state) {
    const auto b = bench::corpus(static_cast<std::size_t>(state.range(0)), 123);
    for (auto _ : state) benchmark::DoNotOptimize(rank_features(b.train_x, b.train_y));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(b.train_x.samples()));
}
BENCHMARK(BM_RankFeatures)->Arg(2000)->Arg(20000)->Unit(benchmark::kMillisecond);

void BM_SelectTopK(benchmark::State& state) {
    const auto b = bench::corpus(20000, 123);
    const auto ranking = rank_features(b.train_x, b.train_y);
    for (auto _ : state)
        benchmark::DoNotOptimize(select_top_k(b.train_x, ranking, static_cast<std::size_t>(state.range(0))));
}
BENCHMARK(BM_SelectTopK)->Arg(12)->Arg(123)->Unit(benchmark::kMillisecond);

void BM_Synth(benchmark::State& state) {
    SynthSpec s;
    s.informative = 10;
    for (auto _ : state) benchmark::DoNotOptimize(synth_dataset(s, 20000, 123, 1));
}
BENCHMARK(BM_Synth)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
