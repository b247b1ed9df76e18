#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "cli/manifest.hpp"

namespace transitcast::cli {

struct CommonArgs {
    std::string out_dir{"."};
    std::uint64_t seed{0};
    unsigned threads{1};
};

// Daily CSV input plus the column mapping, e.g. {"target=delays"}.
struct DailyInputArgs {
    std::string daily;
    std::vector<std::string> schema;
};

// Event CSV input. An empty origin means midnight of the first event's day.
struct EventInputArgs {
    std::string events;
    std::string origin;
    double end_hours{0.0};  // 0: horizon is the last event
};

struct IngestArgs {
    DailyInputArgs daily;
    EventInputArgs events;
    long long max_gap_days{0};  // 0: any gap is accepted and reported
};

struct SynthArgs {
    std::size_t days{730};
    double weekly_amplitude{40.0};
    double seasonal_amplitude{0.0};
    double weather_effect{0.0};
    double noise_sd{5.0};
    double base{100.0};
    std::string start{"2019-01-01"};
};

struct FitHawkesArgs {
    EventInputArgs events;
    int restarts{5};
    int max_iterations{500};
    double tolerance{1e-8};
    bool diagnose{false};
    std::size_t grid{200};
};

// Params come from a fit/params JSON file or explicit values.
struct ParamsArgs {
    std::string params;
    double mu{0.0};
    double alpha{0.0};
    double beta{0.0};
};

struct SimulateArgs {
    ParamsArgs params;
    double horizon{1000.0};
    std::string origin;
    std::size_t event_cap{0};  // 0: library default
};

struct DiagnoseArgs {
    EventInputArgs events;
    ParamsArgs params;
    std::size_t grid{200};
    double kernel_max_lag{0.0};  // 0: five half-lives
};

struct ForecastArgs {
    EventInputArgs events;
    ParamsArgs params;
    std::string mode{"compensator"};
    double day_length{24.0};
    std::size_t samples{200};
    std::size_t next_event_samples{1000};
    bool evaluate{false};
    double eval_fraction{0.2};
};

struct BenchmarkArgs {
    DailyInputArgs daily;
    std::size_t cycles{100};
    double train_fraction{0.8};
    std::size_t window{5};
    std::vector<std::string> models;  // empty: the full ten-model lineup
    std::string resample{"sorted_full"};
    std::string selection{"test"};
    std::string scaler_scope{"train"};
    double validation_fraction{0.2};
    bool quiet{false};
};

struct ImportanceArgs {
    DailyInputArgs daily;
    std::string model{"random_forest"};
    std::string blend{"all"};
    std::string representation{"raw"};
    std::size_t window{5};
    double train_fraction{0.8};
    std::size_t repeats{10};
    bool save_model{false};
};

// Each returns the process exit code; library errors propagate.
int cmd_ingest(const CommonArgs& common, const IngestArgs& args, Manifest& manifest, std::ostream& out);
int cmd_synth(const CommonArgs& common, const SynthArgs& args, Manifest& manifest, std::ostream& out);
int cmd_fit_hawkes(const CommonArgs& common, const FitHawkesArgs& args, Manifest& manifest, std::ostream& out);
int cmd_simulate(const CommonArgs& common, const SimulateArgs& args, Manifest& manifest, std::ostream& out);
int cmd_diagnose(const CommonArgs& common, const DiagnoseArgs& args, Manifest& manifest, std::ostream& out);
int cmd_forecast(const CommonArgs& common, const ForecastArgs& args, Manifest& manifest, std::ostream& out);
int cmd_benchmark(const CommonArgs& common, const BenchmarkArgs& args, Manifest& manifest, std::ostream& out,
                  std::ostream& err);
int cmd_importance(const CommonArgs& common, const ImportanceArgs& args, Manifest& manifest, std::ostream& out);

}  // namespace transitcast::cli
