#include <benchmark/benchmark.h>

#include <Eigen/Core>

#include "relight/metrics.hpp"
#include "relight/rng.hpp"

using namespace relight;

namespace {

Eigen::MatrixXd bench_cloud(std::uint64_t seed, int n, int d) {
    Rng rng(seed);
    Eigen::MatrixXd pts(n, d);
    for (int i = 0; i < n * d; ++i) pts.data()[i] = rng.normal();
    return pts;
}

}  // namespace

static void BM_Fid(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const int d = static_cast<int>(state.range(1));
    const EmbeddingSet a(bench_cloud(11, n, d));
    const EmbeddingSet b(bench_cloud(12, n, d));
    for (auto _ : state) benchmark::DoNotOptimize(fid(a, b));
}
BENCHMARK(BM_Fid)->Args({200, 16})->Args({1000, 16})->Args({1000, 64});

static void BM_Lfid(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const int d = 8;
    const EmbeddingSet base(bench_cloud(13, n, d));
    Rng rng(14);
    Eigen::VectorXd p(d);
    for (int i = 0; i < d; ++i) p[i] = rng.normal();
    for (auto _ : state) benchmark::DoNotOptimize(lfid(base, n / 2, p));
}
BENCHMARK(BM_Lfid)->Arg(200)->Arg(800);
