#include "bench_common.hpp"

#include "nidsrobust/neuralnet.hpp"

#include <benchmark/benchmark.h>

using namespace nidsrobust;

namespace {

// Arg 0: preset depth; batch of 256 rows over 30 features.
void BM_Forward(benchmark::State& state) {
    const auto b = bench::corpus(2000, 30);
    const auto net = init_network(ArchitectureSpec::preset(static_cast<int>(state.range(0)), 30, Activation::relu), 1);
    const Matrix x = b.train_x.values.topRows(256);
    for (auto _ : state) benchmark::DoNotOptimize(predict_proba(net, x));
    state.SetItemsProcessed(state.iterations() * x.rows());
}
BENCHMARK(BM_Forward)->DenseRange(1, 5);

void BM_ForwardBackward(benchmark::State& state) {
    const auto b = bench::corpus(2000, 30);
    const auto net = init_network(ArchitectureSpec::preset(static_cast<int>(state.range(0)), 30, Activation::relu,
                                                           0.5),
                                  1);
    const Matrix x = b.train_x.values.topRows(256);
    const std::vector<int> y(b.train_y.ids.begin(), b.train_y.ids.begin() + 256);
    Seed seed = 0;
    for (auto _ : state) {
        const auto fr = forward(net, x, Mode::train, ++seed);
        benchmark::DoNotOptimize(param_gradients(net, x, y, fr.trace));
    }
    state.SetItemsProcessed(state.iterations() * x.rows());
}
BENCHMARK(BM_ForwardBackward)->DenseRange(1, 5);

void BM_InputGradients(benchmark::State& state) {
    const auto b = bench::corpus(2000, 30);
    const auto net = init_network(ArchitectureSpec::preset(static_cast<int>(state.range(0)), 30, Activation::tanh), 1);
    const Matrix& x = b.test_x.values;
    for (auto _ : state) benchmark::DoNotOptimize(input_gradients(net, x, b.test_y.ids));
    state.SetItemsProcessed(state.iterations() * x.rows());
}
BENCHMARK(BM_InputGradients)->Arg(1)->Arg(5);

void BM_FitEpoch(benchmark::State& state) {
    const auto b = bench::corpus(4000, 30);
    TrainingConfig tc;
    tc.epochs = 1;
    for (auto _ : state) {
        auto net = init_network(ArchitectureSpec::preset(static_cast<int>(state.range(0)), 30, Activation::relu), 1);
        benchmark::DoNotOptimize(fit(std::move(net), b, tc));
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(b.train_x.samples()));
}
BENCHMARK(BM_FitEpoch)->Arg(1)->Arg(5)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
