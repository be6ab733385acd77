// Serial reference against the OpenMP kernels.

#include <benchmark/benchmark.h>

#include "duio/datagen.hpp"
#include "duio/design_data.hpp"
#include "duio/metrics.hpp"
#include "duio/presets.hpp"

using namespace duio;

namespace {

Execution mode(const benchmark::State& state) { return state.range(0) ? Execution::Parallel : Execution::Serial; }

void BM_CollectAll(benchmark::State& state) {
    const PlantModel m = two_mass_spring();
    for (auto _ : state) {
        benchmark::DoNotOptimize(collect_all(m, 50, Excitation{}, 1, mode(state)));
    }
}

void BM_AnalyzeNodes(benchmark::State& state) {
    const auto data = design_view(collect_all(two_mass_spring(), 50, Excitation{}, 1));
    for (auto _ : state) {
        benchmark::DoNotOptimize(analyze_nodes(data, {}, mode(state)));
    }
}

void BM_MonteCarlo(benchmark::State& state) {
    MonteCarloSetup s{two_mass_spring(), two_mass_spring_graph()};
    s.design.gamma_override = 5.0;
    s.grant_unknown_matrices = true;
    s.run.horizon = 10.0;
    s.run.dt = 1e-2;
    for (auto _ : state) {
        benchmark::DoNotOptimize(monte_carlo_compare(s, 8, 2024, mode(state)));
    }
}

}  // namespace

BENCHMARK(BM_CollectAll)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AnalyzeNodes)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MonteCarlo)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
