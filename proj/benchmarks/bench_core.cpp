#include <benchmark/benchmark.h>

#include "cbre/cumulant.hpp"
#include "cbre/forward_sim.hpp"

namespace {

using namespace cbre;

const EnvLevyCharacteristics& bench_chars() {
    static const EnvLevyCharacteristics chars(
        0.0, 0.5, MeasureSpec(MeasureKind::env, {{0.3, 1.0}}, {}), 1e-2);
    return chars;
}

void BM_env_path(benchmark::State& state) {
    const double dt = 1.0 / static_cast<double>(state.range(0));
    std::uint64_t k = 0;
    for (auto _ : state) {
        Stream stream(1, StreamKind::env_path, k++);
        benchmark::DoNotOptimize(simulate_env(bench_chars(), 1.0, dt, stream));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_env_path)->Arg(1000)->Arg(10000);

void BM_solve_u(benchmark::State& state) {
    const double dt = 1.0 / static_cast<double>(state.range(0));
    Stream stream(2, StreamKind::env_path, 0);
    const EnvironmentPath env = simulate_env(bench_chars(), 1.0, dt, stream);
    const BranchingMechanism bm(0.3, 1.0, MeasureSpec::empty(MeasureKind::branching));
    for (auto _ : state) {
        benchmark::DoNotOptimize(solve_u(env, 0.0, 1.0, 1.0, bm, 1e-8));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_solve_u)->Arg(1000)->Arg(10000);

void BM_forward_path(benchmark::State& state) {
    const double dt = 1.0 / static_cast<double>(state.range(0));
    Stream env_stream(3, StreamKind::env_path, 0);
    const EnvironmentPath env = simulate_env(bench_chars(), 1.0, dt, env_stream);
    const BranchingMechanism bm(
        0.3, 1.0, MeasureSpec(MeasureKind::branching, {{0.5, 0.5}}, {}));
    SimConfig cfg;
    cfg.dt = dt;
    ForwardModel model(bm, ImmigrationMechanism{}, bench_chars(), cfg);
    model.bind(env);
    std::uint64_t k = 0;
    for (auto _ : state) {
        Stream stream(3, StreamKind::branching, k++);
        benchmark::DoNotOptimize(model.simulate(1.0, stream));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_forward_path)->Arg(1000)->Arg(10000);

}  // namespace

BENCHMARK_MAIN();
