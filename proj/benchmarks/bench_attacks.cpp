#include "bench_common.hpp"

#include "nidsrobust/attacks.hpp"

#include <benchmark/benchmark.h>

using namespace nidsrobust;

namespace {

// Arg 0: 0 = fgsm, 1 = bim, 2 = pgd. Untrained depth-3 network; attack cost
// does not depend on the weights.
void BM_Attack(benchmark::State& state) {
    const auto b = bench::corpus(5000, 30);
    const auto net = init_network(ArchitectureSpec::preset(3, 30, Activation::relu), 1);
    const auto kind = static_cast<AttackKind>(state.range(0));
    const auto cfg = AttackConfig::defaults(kind, 0.3, 5);
    for (auto _ : state) benchmark::DoNotOptimize(run_attack(net, b.test_x.values, b.test_y.ids, cfg));
    state.SetItemsProcessed(state.iterations() * b.test_x.values.rows());
    state.SetLabel(std::string(to_string(kind)));
}
BENCHMARK(BM_Attack)->DenseRange(0, 2)->Unit(benchmark::kMillisecond);

void BM_AttackClipped(benchmark::State& state) {
    const auto b = bench::corpus(5000, 30);
    const auto net = init_network(ArchitectureSpec::preset(3, 30, Activation::relu), 1);
    auto cfg = AttackConfig::defaults(AttackKind::pgd, 0.3, 5);
    cfg.clip_to_feature_range = true;
    for (auto _ : state) benchmark::DoNotOptimize(attack_batch(net, b, cfg));
    state.SetItemsProcessed(state.iterations() * b.test_x.values.rows());
}
BENCHMARK(BM_AttackClipped)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
