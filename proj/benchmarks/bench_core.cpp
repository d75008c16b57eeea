#include "xva/gpr.hpp"
#include "xva/market.hpp"
#include "xva/reference.hpp"
#include "xva/risky.hpp"
#include "xva/stochastic.hpp"

#include <benchmark/benchmark.h>

#include <cmath>
#include <memory>
#include <random>

using namespace xva;

namespace {

PointSet gaussian_points(std::size_t n, std::size_t d, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> normal;
    PointSet x(n, d);
    for (auto& v : x.reshaped()) v = normal(gen);
    return x;
}

std::vector<double> smooth_targets(const PointSet& x) {
    std::vector<double> y(static_cast<std::size_t>(x.rows()));
    for (Eigen::Index i = 0; i < x.rows(); ++i) y[i] = std::max(1.0 - std::exp(x.row(i).mean()), 0.0);
    return y;
}

void BM_GprFit(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const PointSet x = gaussian_points(n, 2, 1);
    const auto y = smooth_targets(x);
    const auto init = default_kernel_params(x, y);
    for (auto _ : state) benchmark::DoNotOptimize(fit(x, y, init));
}
BENCHMARK(BM_GprFit)->Arg(250)->Arg(500)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_GaussianIntegrator(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const std::size_t d = 2;
    const PointSet x = gaussian_points(n, d, 2);
    const auto model = fit(x, smooth_targets(x), {1.0, 0.5, 1e-3}, {.optimize = false});
    const Matrix cov = 0.025 * 0.0625 * Matrix::Identity(d, d);
    const PointSet centres = gaussian_points(n, d, 3);
    const GaussianIntegrator integ(model, cov);
    for (auto _ : state) benchmark::DoNotOptimize(integ.evaluate(centres));
}
BENCHMARK(BM_GaussianIntegrator)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_MeanPredictions(benchmark::State& state) {
    const PointSet x = gaussian_points(500, 2, 4);
    const auto shared = std::make_shared<const PointSet>(x);
    const auto y = smooth_targets(x);
    const auto a = fit_shared(shared, y, {1.0, 0.5, 1e-3}, {.optimize = false});
    const auto b = fit_shared(shared, y, {1.0, 0.7, 1e-3}, {.optimize = false});
    const PointSet q = gaussian_points(static_cast<std::size_t>(state.range(0)), 2, 5);
    const TrainedGPR* models[] = {&a, &b};
    for (auto _ : state) benchmark::DoNotOptimize(mean_predictions(models, q));
}
BENCHMARK(BM_MeanPredictions)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_CrrAmericanRisky(benchmark::State& state) {
    const MarketParams m = MarketParams::uniform(1, 100.0, 0.03, 0.0, 0.25, 0.2, 1.0, 40);
    CreditParams credit{0.04, 0.04, 0.3, 0.3, FundingMode::Uncollateralized};
    const auto dc = derive_constants(m, credit);
    for (auto _ : state) {
        benchmark::DoNotOptimize(crr_tree_1d(m, put_payoff(100.0), static_cast<int>(state.range(0)),
                                             ExerciseSchedule::american(),
                                             RiskyModel{dc, MtmConvention::RiskyMark}));
    }
}
BENCHMARK(BM_CrrAmericanRisky)->Arg(1000)->Arg(4000)->Unit(benchmark::kMillisecond);

void BM_ImplicitUpdate(benchmark::State& state) {
    DerivedConstants dc;
    dc.c_plus = 0.024;
    dc.c_minus = 0.052;
    double e = -3.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(solve_implicit_prop1(e, 0.5, dc, 0.025));
        e = e > 3.0 ? -3.0 : e + 1e-3;
    }
}
BENCHMARK(BM_ImplicitUpdate);

void BM_StateClouds(benchmark::State& state) {
    const auto d = static_cast<std::size_t>(state.range(0));
    const MarketParams m = MarketParams::uniform(d, 100.0, 0.03, 0.0, 0.25, 0.2, 1.0, 40);
    for (auto _ : state) benchmark::DoNotOptimize(build_state_clouds(m, 2000, RngPolicy::for_dimension(d)));
}
BENCHMARK(BM_StateClouds)->Arg(2)->Arg(20)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
