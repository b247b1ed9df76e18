#include <benchmark/benchmark.h>

#include "transitcast/diagnostics.hpp"
#include "transitcast/hawkes.hpp"
#include "transitcast/simulate.hpp"

namespace tc = transitcast;

namespace {

const auto kParams = tc::HawkesParams::make(0.5, 1.0, 2.0);

// About one event per hour at these parameters.
tc::EventSeries series(double hours) { return tc::simulate(kParams, tc::EventSeries({}, 0.0), 0.0, hours, 1); }

void BM_LogLikelihood(benchmark::State& state) {
    const auto s = series(static_cast<double>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(tc::log_likelihood_with_grad(kParams, s));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(s.size()));
}
BENCHMARK(BM_LogLikelihood)->Arg(1000)->Arg(10000)->Arg(100000);

void BM_FitMle(benchmark::State& state) {
    const auto s = series(static_cast<double>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(tc::fit_mle(s));
}
BENCHMARK(BM_FitMle)->Arg(5000)->Unit(benchmark::kMillisecond);

void BM_Simulate(benchmark::State& state) {
    std::uint64_t seed = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            tc::simulate(kParams, tc::EventSeries({}, 0.0), 0.0, static_cast<double>(state.range(0)), ++seed));
    }
}
BENCHMARK(BM_Simulate)->Arg(5000)->Unit(benchmark::kMillisecond);

void BM_TimeRescaleKs(benchmark::State& state) {
    const auto s = series(static_cast<double>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(tc::ks_exp1(tc::time_rescale(kParams, s)));
}
BENCHMARK(BM_TimeRescaleKs)->Arg(10000);

}  // namespace

BENCHMARK_MAIN();
