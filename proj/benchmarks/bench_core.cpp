#include <benchmark/benchmark.h>

#include <cstdint>
#include <filesystem>

#include "cilab/dataset.hpp"
#include "cilab/field.hpp"
#include "cilab/losses.hpp"
#include "cilab/solver.hpp"

using namespace cilab;

namespace {

Field seeded_field(int n, std::uint64_t seed) {
    CounterRng rng(seed);
    return sample_initial_condition(rng, n, 0.02);
}

void bm_laplacian(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const auto p = PdeParams::create(0.005, 4.7, 1e-3, 100, n);
    const Field u = seeded_field(n, 1);
    for (auto _ : state) {
        benchmark::DoNotOptimize(laplacian_dirichlet(u, p));
    }
    state.SetItemsProcessed(state.iterations() * n * n);
}

void bm_euler_step(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const auto p = PdeParams::create(0.005, 4.7, 1e-3, 100, n);
    const Field u = seeded_field(n, 2);
    for (auto _ : state) {
        benchmark::DoNotOptimize(euler_step(u, p));
    }
    state.SetItemsProcessed(state.iterations() * n * n);
}

void bm_simulate_100(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const auto p = PdeParams::create(0.005, 4.7, 1e-3, 100, n);
    const Field u = seeded_field(n, 3);
    for (auto _ : state) {
        benchmark::DoNotOptimize(simulate(u, p, 100));
    }
}

void bm_energy(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const auto p = PdeParams::create(0.005, 4.7, 1e-3, 100, n);
    const Field u = seeded_field(n, 4);
    for (auto _ : state) {
        benchmark::DoNotOptimize(lyapunov_energy(u, p));
    }
    state.SetItemsProcessed(state.iterations() * n * n);
}

void bm_generate_dataset(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    DatasetMeta meta;
    meta.grid_n = n;
    meta.n_samples = 8;
    meta.pde = PdeParams::create(0.005, 4.7, 1e-3, 100, n);
    meta.init_amp = 0.02;
    meta.seed = 7;
    meta.scale = 50.0;
    const auto out = std::filesystem::temp_directory_path() / "cilab_bench.cip";
    for (auto _ : state) {
        benchmark::DoNotOptimize(generate_dataset(meta, out));
    }
    std::filesystem::remove(out);
    std::filesystem::remove(std::filesystem::temp_directory_path() /
                            "cilab_bench.meta.json");
    state.SetItemsProcessed(state.iterations() * 8);
}

BENCHMARK(bm_laplacian)->Arg(32)->Arg(128);
BENCHMARK(bm_euler_step)->Arg(32)->Arg(128);
BENCHMARK(bm_simulate_100)->Arg(32)->Arg(64);
BENCHMARK(bm_energy)->Arg(32)->Arg(128);
BENCHMARK(bm_generate_dataset)->Arg(32);

} // namespace

BENCHMARK_MAIN();
