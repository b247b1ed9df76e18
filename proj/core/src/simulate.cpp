#include "transitcast/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "transitcast/parallel.hpp"
#include "transitcast/random.hpp"

namespace transitcast {

namespace {

// Excitation sum_{T_i <= t} exp(-beta (t - T_i)) (unscaled by alpha).
double excitation_at(const HawkesParams& p, std::span<const double> history, double t) {
    double s = 0.0;
    for (double ti : history) {
        if (ti <= t) s += std::exp(-p.beta * (t - ti));
    }
    return s;
}

// Linear-interpolated quantile of sorted data (type 7).
double quantile_sorted(std::span<const double> sorted, double q) {
    if (sorted.empty()) return 0.0;
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

constexpr double kBoundSlack = 1e-12;

}  // namespace

EventSeries simulate(const HawkesParams& p, const EventSeries& history, double t_start, double t_end,
                     std::uint64_t seed, const SimulationOptions& options) {
    p.validate();
    if (!(t_end > t_start) || !(t_start >= 0.0) || !std::isfinite(t_end)) {
        throw ArgumentError("simulate requires 0 <= t_start < t_end < inf");
    }
    if (!history.empty() && history.times().back() > t_start) {
        throw ArgumentError("simulate: history extends past t_start");
    }
    if (!p.stable() && !options.event_cap) {
        throw ArgumentError("simulate: supercritical parameters (alpha/beta >= 1) need an explicit event cap");
    }
    const std::size_t cap = options.event_cap.value_or(kDefaultEventCap);

    Rng rng(seed);
    double t = t_start;
    double excitation = excitation_at(p, history.times(), t_start);
    std::vector<double> events;
    for (;;) {
        const double bound = p.mu + p.alpha * excitation;
        const double wait = -std::log(open_uniform(rng)) / bound;
        double candidate = t + wait;
        if (candidate > t_end) break;
        if (candidate <= t) candidate = std::nextafter(t, INFINITY);
        excitation *= std::exp(-p.beta * (candidate - t));
        t = candidate;
        const double lambda = p.mu + p.alpha * excitation;
        if (lambda > bound * (1.0 + kBoundSlack)) {
            throw InvariantError("thinning bound violated: lambda exceeds its upper bound");
        }
        if (open_uniform(rng) * bound <= lambda) {
            if (events.size() >= cap) {
                throw SimulationOverflowError("simulation exceeded the event cap of " + std::to_string(cap));
            }
            events.push_back(t);
            excitation += 1.0;
        }
    }
    return EventSeries::unnormalized(std::move(events), t_end);
}

double simulate_first_event(const HawkesParams& p, std::span<const double> history, double now, Rng& rng) {
    double t = now;
    double excitation = excitation_at(p, history, now);
    for (;;) {
        const double bound = p.mu + p.alpha * excitation;
        double candidate = t - std::log(open_uniform(rng)) / bound;
        if (candidate <= t) candidate = std::nextafter(t, INFINITY);
        excitation *= std::exp(-p.beta * (candidate - t));
        t = candidate;
        if (open_uniform(rng) * bound <= p.mu + p.alpha * excitation) return t;
    }
}

NextEventForecast forecast_next_event(const HawkesParams& p, const EventSeries& history, double now,
                                      std::size_t n_samples, std::uint64_t seed, unsigned threads) {
    p.validate();
    if (n_samples < 1) throw ArgumentError("forecast_next_event requires n_samples >= 1");
    if (!history.empty() && history.times().back() > now) {
        throw ArgumentError("forecast_next_event: `now` precedes the last history event");
    }
    // Only the events that still contribute meaningfully matter.
    const double window = 50.0 * p.half_life();
    const auto& ts = history.times();
    const auto first = std::lower_bound(ts.begin(), ts.end(), now - window);
    const std::span<const double> recent(first, ts.end());

    NextEventForecast out;
    out.samples.resize(n_samples);
    parallel_for(n_samples, threads, [&](std::size_t i) {
        Rng rng(derive_seed(seed, i));
        out.samples[i] = simulate_first_event(p, recent, now, rng) - now;
    });
    std::vector<double> sorted = out.samples;
    std::sort(sorted.begin(), sorted.end());
    out.mean = std::accumulate(out.samples.begin(), out.samples.end(), 0.0) / static_cast<double>(n_samples);
    out.median = quantile_sorted(sorted, 0.5);
    for (double q : {0.1, 0.5, 0.9}) out.quantiles[q] = quantile_sorted(sorted, q);
    return out;
}

std::string_view to_string(DailyForecastMode mode) {
    return mode == DailyForecastMode::compensator ? "compensator" : "monte_carlo";
}

DailyForecastMode parse_daily_forecast_mode(std::string_view text) {
    if (text == "compensator") return DailyForecastMode::compensator;
    if (text == "monte_carlo" || text == "monte-carlo") return DailyForecastMode::monte_carlo;
    throw ArgumentError("unknown forecast mode '" + std::string(text) + "'");
}

DailyForecast forecast_daily(const HawkesParams& p, const EventSeries& series, double day_start, double day_end,
                             DailyForecastMode mode, std::size_t n_samples, std::uint64_t seed, unsigned threads) {
    p.validate();
    if (!(day_start < day_end)) throw ArgumentError("forecast_daily requires day_start < day_end");
    DailyForecast out;
    out.method = mode;
    out.day_index = static_cast<std::int64_t>(std::floor(day_start / (day_end - day_start) + 1e-9));
    if (mode == DailyForecastMode::compensator) {
        out.expected_count = compensator(p, series, day_end) - compensator(p, series, day_start);
        out.expected_count = std::max(out.expected_count, 0.0);
        return out;
    }
    if (n_samples == 0) throw ArgumentError("monte_carlo forecast requires n_samples >= 1");
    const EventSeries history = series.before(day_start);
    std::vector<double> counts(n_samples);
    parallel_for(n_samples, threads, [&](std::size_t i) {
        counts[i] = static_cast<double>(simulate(p, history, day_start, day_end, derive_seed(seed, i)).size());
    });
    out.expected_count = std::accumulate(counts.begin(), counts.end(), 0.0) / static_cast<double>(n_samples);
    return out;
}

std::vector<DailyForecast> forecast_days(const HawkesParams& p, const EventSeries& series, double day_length,
                                         DailyForecastMode mode, std::size_t n_samples, std::uint64_t seed,
                                         unsigned threads) {
    if (!(day_length > 0.0)) throw ArgumentError("day_length must be > 0");
    const double horizon = series.horizon();
    const auto n_days = static_cast<std::size_t>(std::ceil(horizon / day_length - 1e-12));
    std::vector<DailyForecast> out;
    out.reserve(n_days);
    if (mode == DailyForecastMode::compensator) {
        double previous = 0.0;
        for (std::size_t d = 0; d < n_days; ++d) {
            const double end = std::min(static_cast<double>(d + 1) * day_length, horizon);
            const double current = compensator(p, series, end);
            out.push_back({static_cast<std::int64_t>(d), current - previous, mode});
            previous = current;
        }
        return out;
    }
    for (std::size_t d = 0; d < n_days; ++d) {
        const double start = static_cast<double>(d) * day_length;
        const double end = std::min(start + day_length, horizon);
        auto f = forecast_daily(p, series, start, end, mode, n_samples, derive_seed(seed, d), threads);
        f.day_index = static_cast<std::int64_t>(d);
        out.push_back(f);
    }
    return out;
}

std::vector<double> observed_daily_counts(const EventSeries& series, double day_length) {
    if (!(day_length > 0.0)) throw ArgumentError("day_length must be > 0");
    const auto n_days = static_cast<std::size_t>(std::ceil(series.horizon() / day_length - 1e-12));
    std::vector<double> counts(n_days, 0.0);
    for (double t : series.times()) {
        // Window d covers (d L, (d+1) L]; an event at exactly 0 belongs to day 0.
        auto d = static_cast<std::size_t>(std::max(0.0, std::ceil(t / day_length) - 1.0));
        if (d >= n_days) d = n_days - 1;
        counts[d] += 1.0;
    }
    return counts;
}

double score_daily_rmse(std::span<const DailyForecast> forecasts, std::span<const double> observed) {
    if (forecasts.size() != observed.size() || forecasts.empty()) {
        throw ArgumentError("score_daily_rmse requires equal non-empty lengths");
    }
    double sse = 0.0;
    for (std::size_t i = 0; i < forecasts.size(); ++i) {
        const double e = forecasts[i].expected_count - observed[i];
        sse += e * e;
    }
    return std::sqrt(sse / static_cast<double>(forecasts.size()));
}

NextEventEvaluation evaluate_next_event(const HawkesParams& p, const EventSeries& series, double eval_fraction,
                                        std::size_t n_samples, std::uint64_t seed, unsigned threads) {
    p.validate();
    if (!(eval_fraction > 0.0 && eval_fraction < 1.0)) throw ArgumentError("eval_fraction must be in (0, 1)");
    const auto& ts = series.times();
    if (ts.size() < 2) throw InsufficientDataError("next-event evaluation needs at least 2 events");
    const auto n = ts.size();
    auto first = static_cast<std::size_t>(std::floor(static_cast<double>(n) * (1.0 - eval_fraction)));
    first = std::min(first, n - 2);
    NextEventEvaluation out;
    const std::size_t m = n - 1 - first;
    out.predicted.resize(m);
    out.realized.resize(m);
    const double window = 50.0 * p.half_life();
    parallel_for(m, threads, [&](std::size_t k) {
        const std::size_t i = first + k;
        const double now = ts[i];
        const auto lo = std::lower_bound(ts.begin(), ts.begin() + static_cast<std::ptrdiff_t>(i) + 1, now - window);
        const std::span<const double> recent(lo, ts.begin() + static_cast<std::ptrdiff_t>(i) + 1);
        const std::uint64_t event_seed = derive_seed(seed, i);
        double sum = 0.0;
        for (std::size_t s = 0; s < n_samples; ++s) {
            Rng rng(derive_seed(event_seed, s));
            sum += simulate_first_event(p, recent, now, rng) - now;
        }
        out.predicted[k] = sum / static_cast<double>(n_samples);
        out.realized[k] = ts[i + 1] - now;
    });
    double sse = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
        const double e = out.predicted[k] - out.realized[k];
        sse += e * e;
    }
    out.n_scored = m;
    out.rmse = std::sqrt(sse / static_cast<double>(m));
    return out;
}

}  // namespace transitcast
