#include <benchmark/benchmark.h>

#include "transitcast/bench.hpp"
#include "transitcast/features.hpp"
#include "transitcast/models.hpp"

namespace tc = transitcast;

namespace {

// Training rows of the all-groups blend on a 1671-day synthetic series.
const tc::PreparedSplit& split() {
    static const tc::PreparedSplit s = [] {
        tc::SynthDailyOptions o;
        o.n_days = 1671;
        o.weekly_amplitude = 40;
        o.noise_sd = 5;
        const auto d = tc::build_windows(tc::synth_daily(o), tc::Blend{true, true, true}, tc::Representation::scaled);
        return tc::prepare_split(d);
    }();
    return s;
}

void BM_Fit(benchmark::State& state, tc::ModelKind kind) {
    const auto& s = split();
    for (auto _ : state) {
        auto m = tc::make_regressor(kind);
        m->fit(s.X_train, s.y_train, tc::FitContext{1, s.feature_names});
        benchmark::DoNotOptimize(m->predict(s.X_test));
    }
}
BENCHMARK_CAPTURE(BM_Fit, linear, tc::ModelKind::linear)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Fit, ridge, tc::ModelKind::ridge)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Fit, lasso, tc::ModelKind::lasso)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Fit, knn, tc::ModelKind::knn)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Fit, random_forest, tc::ModelKind::random_forest)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Fit, gradient_boosting, tc::ModelKind::gradient_boosting)->Unit(benchmark::kMillisecond);

void BM_BenchmarkCycle(benchmark::State& state) {
    tc::SynthDailyOptions o;
    o.n_days = 400;
    o.weekly_amplitude = 40;
    o.noise_sd = 5;
    const auto series = tc::synth_daily(o);
    const std::vector<tc::ModelSpec> models{tc::model_spec(tc::ModelKind::linear)};
    tc::BenchmarkOptions b;
    b.n_cycles = 1;
    for (auto _ : state) benchmark::DoNotOptimize(tc::bootstrap_benchmark(series, models, b));
}
BENCHMARK(BM_BenchmarkCycle)->Unit(benchmark::kMillisecond);

}  // namespace
