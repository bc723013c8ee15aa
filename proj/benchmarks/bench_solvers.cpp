#include <benchmark/benchmark.h>

#include "pilot/posterior.hpp"
#include "pilot/solver_base.hpp"
#include "pilot/solver_extended.hpp"
#include "pilot/validation.hpp"

using namespace pilot;

namespace {

ModelParams symmetric(double sigma) {
    return ModelParams(ModelFields{
        .h = 1, .l = -1, .h_dag = 1, .l_dag = -1, .k = 1, .alpha = 0.1, .sigma = sigma});
}

void BM_SolveTwoThreshold(benchmark::State& state) {
    const ModelParams m = symmetric(static_cast<double>(state.range(0)) / 10.0);
    for (auto _ : state) benchmark::DoNotOptimize(solve(m));
}
BENCHMARK(BM_SolveTwoThreshold)->Arg(1)->Arg(10)->Arg(1000)->Arg(10000);

void BM_SolveExtended(benchmark::State& state) {
    const ModelParams m = ModelParams::expansion_multiple(1, -1, 1, 5, 0.1, 1);
    for (auto _ : state) benchmark::DoNotOptimize(solve_extended(m));
}
BENCHMARK(BM_SolveExtended);

void BM_Sweep(benchmark::State& state) {
    const ModelParams m = symmetric(1);
    const auto grid = sigma_grid(0.05, 500, 40, true);
    for (auto _ : state) benchmark::DoNotOptimize(sweep_sigma(m, grid, 0.525, 1));
}
BENCHMARK(BM_Sweep)->Unit(benchmark::kMillisecond);

void BM_GridOracle(benchmark::State& state) {
    const ModelParams m = symmetric(1);
    for (auto _ : state) {
        benchmark::DoNotOptimize(grid_value_iteration(m, static_cast<std::size_t>(state.range(0))));
    }
}
BENCHMARK(BM_GridOracle)->Arg(2001)->Arg(4001)->Unit(benchmark::kMillisecond);

void BM_MonteCarloPolicy(benchmark::State& state) {
    const ModelParams m = symmetric(1);
    const ThresholdSolution s = solve(m);
    McOptions opt;
    opt.reps = static_cast<std::size_t>(state.range(0));
    opt.threads = 1;
    for (auto _ : state) {
        benchmark::DoNotOptimize(mc_policy_value(0.525, s.lower(), s.upper(), m, opt));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MonteCarloPolicy)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_SimulatePath(benchmark::State& state) {
    const ModelParams m = symmetric(1);
    std::uint64_t i = 0;
    for (auto _ : state) benchmark::DoNotOptimize(simulate_path(0.5, m, 1e-3, 1.0, 1, i++));
    state.SetItemsProcessed(state.iterations() * 1000);
}
BENCHMARK(BM_SimulatePath);

}  // namespace

BENCHMARK_MAIN();
