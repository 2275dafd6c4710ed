#include <benchmark/benchmark.h>

#include "noprop/baselines.hpp"
#include "noprop/finite_time.hpp"
#include "noprop/stationary.hpp"

using namespace noprop;

static void BM_NormalDraws(benchmark::State& state) {
    RngStream rng(1);
    double sink = 0.0;
    for (auto _ : state) sink += rng.next_normal();
    benchmark::DoNotOptimize(sink);
}
BENCHMARK(BM_NormalDraws);

static void BM_TentOrbitStep(benchmark::State& state) {
    const SystemSpec sys = make_tent_map();
    const auto noise = GaussianNoise::isotropic(1, 0.1);
    RngStream rng(2);
    Vector x = Vector::Zero(1);
    for (auto _ : state) x = project(sys, sys.step(3.0, 0, x) + noise.sample(rng));
    benchmark::DoNotOptimize(x);
}
BENCHMARK(BM_TentOrbitStep);

static void BM_ChaoticNetStep(benchmark::State& state) {
    const SystemSpec sys = make_chaotic_net();
    const auto noise = GaussianNoise::isotropic(9, 0.5);
    RngStream rng(3);
    Vector x = Vector::Zero(9);
    for (auto _ : state) x = sys.step(0.0, 0, x) + noise.sample(rng);
    benchmark::DoNotOptimize(x);
}
BENCHMARK(BM_ChaoticNetStep);

static void BM_StationaryTent(benchmark::State& state) {
    const SystemSpec sys = make_tent_map();
    const auto noise = GaussianNoise::isotropic(1, 0.1);
    StationaryConfig cfg;
    cfg.gamma = 3.0;
    cfg.W = 7;
    cfg.L = state.range(0);
    cfg.m_pre = 1000;
    cfg.phi = make_coordinate_observable();
    for (auto _ : state) {
        auto est = estimate_stationary(sys, noise, cfg);
        benchmark::DoNotOptimize(est.value);
    }
    state.SetItemsProcessed(state.iterations() * (cfg.L + cfg.m_pre));
}
BENCHMARK(BM_StationaryTent)->Arg(10000)->Arg(100000);

static void BM_FiniteTimeChaoticNet(benchmark::State& state) {
    const SystemSpec sys = make_chaotic_net();
    FiniteTimeConfig cfg;
    cfg.T = 50;
    cfg.L = state.range(0);
    cfg.gamma = 0.0;
    cfg.noise = GaussianNoise::isotropic(9, 0.5);
    cfg.phi = make_mean_observable(9);
    cfg.initial = [](RngStream& rng) {
        Vector x(9);
        for (int i = 0; i < 9; ++i) x[i] = rng.next_normal();
        return x;
    };
    for (auto _ : state) {
        auto est = estimate_finite_time(sys, cfg);
        benchmark::DoNotOptimize(est.value);
    }
    state.SetItemsProcessed(state.iterations() * cfg.L * cfg.T);
}
BENCHMARK(BM_FiniteTimeChaoticNet)->Arg(1000)->Arg(10000);

static void BM_GridTransitionMatrix(benchmark::State& state) {
    const SystemSpec sys = make_tent_map();
    for (auto _ : state) {
        auto p = grid_transition_matrix(sys, 3.0, 0.1, static_cast<int>(state.range(0)));
        benchmark::DoNotOptimize(p(0, 0));
    }
}
BENCHMARK(BM_GridTransitionMatrix)->Arg(500)->Arg(2000);

BENCHMARK_MAIN();
