#include <benchmark/benchmark.h>

#include <Eigen/Core>

#include "relight/radiosity.hpp"
#include "relight/rng.hpp"
#include "relight/scene_gen.hpp"

using namespace relight;

namespace {

Scene bench_scene(int patches) {
    Rng rng(4242);
    SceneGenParams params;
    params.min_patches = patches;
    params.max_patches = patches;
    return random_scene(rng, params);
}

}  // namespace

static void BM_AssembleKernel(benchmark::State& state) {
    const Scene scene = bench_scene(static_cast<int>(state.range(0)));
    const int threads = static_cast<int>(state.range(1));
    for (auto _ : state) benchmark::DoNotOptimize(assemble_kernel(scene, threads));
}
BENCHMARK(BM_AssembleKernel)->Args({50, 1})->Args({150, 1})->Args({150, 4});

static void BM_SolveNeumann(benchmark::State& state) {
    const Scene scene = bench_scene(static_cast<int>(state.range(0)));
    const KernelMatrix kernel = assemble_kernel(scene, 4);
    Rng rng(7);
    const Eigen::VectorXd e = random_emittance(rng, scene);
    for (auto _ : state) benchmark::DoNotOptimize(solve_neumann(scene, kernel, e, 1e-12));
}
BENCHMARK(BM_SolveNeumann)->Arg(50)->Arg(150);

static void BM_SolveDirect(benchmark::State& state) {
    const Scene scene = bench_scene(static_cast<int>(state.range(0)));
    const KernelMatrix kernel = assemble_kernel(scene, 4);
    Rng rng(7);
    const Eigen::VectorXd e = random_emittance(rng, scene);
    for (auto _ : state) benchmark::DoNotOptimize(solve_direct(scene, kernel, e));
}
BENCHMARK(BM_SolveDirect)->Arg(50)->Arg(150);

BENCHMARK_MAIN();
