#include <benchmark/benchmark.h>

#include <Eigen/Dense>

#include "relight/conefit.hpp"
#include "relight/egm.hpp"
#include "relight/rng.hpp"

using namespace relight;

namespace {

GeneratorSet bench_generators(int ng, int dim) {
    Rng rng(91);
    Eigen::MatrixXd g(dim, ng);
    for (int i = 0; i < dim * ng; ++i) g.data()[i] = rng.uniform(0.05, 1.0);
    return GeneratorSet(g);
}

Eigen::VectorXd bench_target(int dim) {
    Rng rng(92);
    Eigen::VectorXd t(dim);
    for (int i = 0; i < dim; ++i) t[i] = rng.normal();
    return t;
}

SecondMoment bench_moment(int n) {
    Rng rng(93);
    Eigen::MatrixXd a(n, n);
    for (int i = 0; i < n * n; ++i) a.data()[i] = rng.normal();
    return make_second_moment((a.transpose() * a).eval());
}

}  // namespace

static void BM_FitExact(benchmark::State& state) {
    const int ng = static_cast<int>(state.range(0));
    const GeneratorSet gens = bench_generators(ng, 4 * ng);
    const Eigen::VectorXd target = bench_target(4 * ng);
    for (auto _ : state) benchmark::DoNotOptimize(fit_exact(target, gens));
}
BENCHMARK(BM_FitExact)->Arg(4)->Arg(10);

static void BM_FitApprox(benchmark::State& state) {
    const GeneratorSet gens = bench_generators(8, 32);
    const Eigen::VectorXd target = bench_target(32);
    const int n_gd = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(fit_approx(target, gens, n_gd));
}
BENCHMARK(BM_FitApprox)->Arg(1)->Arg(100)->Arg(500);

static void BM_EgmFit(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const SecondMoment moment = bench_moment(n);
    for (auto _ : state) benchmark::DoNotOptimize(egm_fit(moment, n / 4));
}
BENCHMARK(BM_EgmFit)->Arg(16)->Arg(64);

static void BM_LpRegretBound(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    Eigen::VectorXd lam(n);
    for (int i = 0; i < n; ++i) lam[i] = static_cast<double>(n - i);
    for (auto _ : state)
        benchmark::DoNotOptimize(lp_regret_bound(lam, n / 2, 0.75 * n));
}
BENCHMARK(BM_LpRegretBound)->Arg(8)->Arg(12);

static void BM_IsotonicFit(benchmark::State& state) {
    Rng rng(94);
    const int n = static_cast<int>(state.range(0));
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = rng.normal();
    for (auto _ : state) benchmark::DoNotOptimize(isotonic_decreasing_fit(v));
}
BENCHMARK(BM_IsotonicFit)->Arg(100)->Arg(10000);
