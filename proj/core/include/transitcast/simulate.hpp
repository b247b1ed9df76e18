#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "transitcast/data.hpp"
#include "transitcast/hawkes.hpp"
#include "transitcast/random.hpp"

namespace transitcast {

inline constexpr std::size_t kDefaultEventCap = 10'000'000;

struct SimulationOptions {
    // Required for supercritical parameters (alpha/beta >= 1); otherwise
    // defaults to kDefaultEventCap.
    std::optional<std::size_t> event_cap;
};

// Ogata thinning on (t_start, t_end], conditioned on `history` (all of
// whose events must be <= t_start). Returns only the new events, with
// horizon t_end. Deterministic in seed.
EventSeries simulate(const HawkesParams& p, const EventSeries& history, double t_start, double t_end,
                     std::uint64_t seed, const SimulationOptions& options = {});

// First event strictly after `now` under thinning, given events <= now.
double simulate_first_event(const HawkesParams& p, std::span<const double> history, double now, Rng& rng);

struct NextEventForecast {
    std::vector<double> samples;  // waiting times, hours
    double mean{0.0};
    double median{0.0};
    std::map<double, double> quantiles;  // 0.1, 0.5, 0.9
};

// Sample i uses seed derive_seed(seed, i), so output is independent of threads.
NextEventForecast forecast_next_event(const HawkesParams& p, const EventSeries& history, double now,
                                      std::size_t n_samples, std::uint64_t seed, unsigned threads = 1);

enum class DailyForecastMode { compensator, monte_carlo };

std::string_view to_string(DailyForecastMode mode);
DailyForecastMode parse_daily_forecast_mode(std::string_view text);

struct DailyForecast {
    std::int64_t day_index{0};
    double expected_count{0.0};
    DailyForecastMode method{DailyForecastMode::compensator};
};

// compensator: Lambda(day_end) - Lambda(day_start) from realized history
// (in-sample). monte_carlo: mean simulated count in the window over
// n_samples runs using only events before day_start (out-of-sample).
DailyForecast forecast_daily(const HawkesParams& p, const EventSeries& series, double day_start, double day_end,
                             DailyForecastMode mode, std::size_t n_samples = 0, std::uint64_t seed = 0,
                             unsigned threads = 1);

// Consecutive windows of `day_length` hours covering [0, horizon]; the last
// window is clipped at the horizon.
std::vector<DailyForecast> forecast_days(const HawkesParams& p, const EventSeries& series, double day_length,
                                         DailyForecastMode mode, std::size_t n_samples = 0, std::uint64_t seed = 0,
                                         unsigned threads = 1);

// Event counts per window, same partition as forecast_days.
std::vector<double> observed_daily_counts(const EventSeries& series, double day_length);

double score_daily_rmse(std::span<const DailyForecast> forecasts, std::span<const double> observed);

struct NextEventEvaluation {
    std::size_t n_scored{0};
    double rmse{0.0};
    std::vector<double> predicted;  // Monte Carlo mean waiting time
    std::vector<double> realized;   // T_{i+1} - T_i
};

// Rolling evaluation over the final eval_fraction of events: at each event
// time forecast the wait to the next one from all history up to it.
NextEventEvaluation evaluate_next_event(const HawkesParams& p, const EventSeries& series, double eval_fraction = 0.2,
                                        std::size_t n_samples = 1000, std::uint64_t seed = 0, unsigned threads = 1);

}  // namespace transitcast
