#include "transitcast/hawkes.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Core>

#include "optimize.hpp"
#include "transitcast/parallel.hpp"
#include "transitcast/random.hpp"

namespace transitcast {

namespace {

void require_in_horizon(const EventSeries& series, double t) {
    if (!(t >= 0.0 && t <= series.horizon())) {
        throw RangeError("time " + std::to_string(t) + " outside [0, " + std::to_string(series.horizon()) + "]");
    }
}

void require_strictly_increasing(const EventSeries& series) {
    const auto& ts = series.times();
    for (std::size_t i = 1; i < ts.size(); ++i) {
        if (!(ts[i] > ts[i - 1])) {
            throw InvariantError("event times must be strictly increasing (index " + std::to_string(i) + ")");
        }
    }
}

double truncation_window(const HawkesParams& p, double half_lives) {
    if (!(half_lives > 0.0)) throw ArgumentError("truncation_half_lives must be > 0");
    return std::isinf(half_lives) ? half_lives : half_lives * p.half_life();
}

}  // namespace

HawkesParams HawkesParams::make(double mu, double alpha, double beta) {
    HawkesParams p{mu, alpha, beta};
    p.validate();
    return p;
}

void HawkesParams::validate() const {
    auto ok = [](double v) { return std::isfinite(v) && v > 0.0; };
    if (!ok(mu) || !ok(alpha) || !ok(beta)) {
        throw ArgumentError("Hawkes parameters must be finite and positive (mu=" + std::to_string(mu) +
                            ", alpha=" + std::to_string(alpha) + ", beta=" + std::to_string(beta) + ")");
    }
}

double HawkesParams::half_life() const noexcept { return std::numbers::ln2 / beta; }

double branching_ratio(const HawkesParams& p) { return p.branching_ratio(); }
double half_life(const HawkesParams& p) { return p.half_life(); }

double intensity(const HawkesParams& p, const EventSeries& series, double t, double truncation_half_lives) {
    p.validate();
    require_in_horizon(series, t);
    const double window = truncation_window(p, truncation_half_lives);
    const auto& ts = series.times();
    const auto end = std::lower_bound(ts.begin(), ts.end(), t);
    double excitation = 0.0;
    for (auto it = end; it != ts.begin();) {
        --it;
        const double age = t - *it;
        if (age > window) break;
        excitation += std::exp(-p.beta * age);
    }
    return p.mu + p.alpha * excitation;
}

std::vector<double> intensity_on_grid(const HawkesParams& p, const EventSeries& series, std::span<const double> grid,
                                      double truncation_half_lives) {
    p.validate();
    const double window = truncation_window(p, truncation_half_lives);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        require_in_horizon(series, grid[k]);
        if (k > 0 && grid[k] < grid[k - 1]) throw ArgumentError("intensity grid must be sorted");
    }
    const auto& ts = series.times();
    std::vector<double> out;
    out.reserve(grid.size());
    if (std::isinf(window)) {
        // Exact recursion: carry the excitation just after the last event.
        std::size_t next = 0;
        double last = 0.0;
        double state = 0.0;
        for (double g : grid) {
            while (next < ts.size() && ts[next] < g) {
                state = state * std::exp(-p.beta * (ts[next] - last)) + 1.0;
                last = ts[next++];
            }
            const double excitation = next == 0 ? 0.0 : state * std::exp(-p.beta * (g - last));
            out.push_back(p.mu + p.alpha * excitation);
        }
        return out;
    }
    std::size_t lo = 0;
    std::size_t hi = 0;
    for (double g : grid) {
        while (hi < ts.size() && ts[hi] < g) ++hi;
        while (lo < hi && g - ts[lo] > window) ++lo;
        double excitation = 0.0;
        for (std::size_t j = lo; j < hi; ++j) excitation += std::exp(-p.beta * (g - ts[j]));
        out.push_back(p.mu + p.alpha * excitation);
    }
    return out;
}

std::vector<double> intensities_at_events(const HawkesParams& p, const EventSeries& series) {
    p.validate();
    require_strictly_increasing(series);
    const auto& ts = series.times();
    std::vector<double> out(ts.size());
    double a = 0.0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        if (i > 0) a = std::exp(-p.beta * (ts[i] - ts[i - 1])) * (1.0 + a);
        out[i] = p.mu + p.alpha * a;
    }
    return out;
}

double compensator(const HawkesParams& p, const EventSeries& series, double t) {
    p.validate();
    require_in_horizon(series, t);
    const auto& ts = series.times();
    const auto end = std::lower_bound(ts.begin(), ts.end(), t);
    double mass = 0.0;
    for (auto it = ts.begin(); it != end; ++it) mass += -std::expm1(-p.beta * (t - *it));
    return p.mu * t + p.branching_ratio() * mass;
}

std::vector<double> compensator_at_events(const HawkesParams& p, const EventSeries& series) {
    p.validate();
    require_strictly_increasing(series);
    const auto& ts = series.times();
    std::vector<double> out(ts.size());
    // Sum over earlier events of (1 - exp(-beta (T_i - T_j))) = i - A_i, but
    // accumulated as its own recursion to avoid cancellation:
    //   M_i = M_{i-1} + (1 + A_{i-1}) (1 - exp(-beta dT)).
    double a = 0.0;
    double mass = 0.0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        if (i > 0) {
            const double dt = ts[i] - ts[i - 1];
            mass += (1.0 + a) * -std::expm1(-p.beta * dt);
            a = std::exp(-p.beta * dt) * (1.0 + a);
        }
        out[i] = p.mu * ts[i] + p.branching_ratio() * mass;
    }
    return out;
}

LikelihoodEvaluation log_likelihood_with_grad(const HawkesParams& p, const EventSeries& series) {
    p.validate();
    require_strictly_increasing(series);
    const auto& ts = series.times();
    const double horizon = series.horizon();

    double a = 0.0;  // sum_{j<i} exp(-beta (T_i - T_j))
    double b = 0.0;  // sum_{j<i} (T_i - T_j) exp(-beta (T_i - T_j))
    double sum_log = 0.0;
    double g_mu = 0.0;
    double g_alpha = 0.0;
    double g_beta = 0.0;
    double tail_mass = 0.0;    // sum_i (1 - exp(-beta (T - T_i)))
    double tail_moment = 0.0;  // sum_i (T - T_i) exp(-beta (T - T_i))

    for (std::size_t i = 0; i < ts.size(); ++i) {
        if (i > 0) {
            const double dt = ts[i] - ts[i - 1];
            const double decay = std::exp(-p.beta * dt);
            b = decay * (b + dt * (1.0 + a));
            a = decay * (1.0 + a);
        }
        const double lambda = p.mu + p.alpha * a;
        sum_log += std::log(lambda);
        g_mu += 1.0 / lambda;
        g_alpha += a / lambda;
        g_beta -= p.alpha * b / lambda;

        const double remaining = horizon - ts[i];
        tail_mass += -std::expm1(-p.beta * remaining);
        tail_moment += remaining * std::exp(-p.beta * remaining);
    }

    const double ratio = p.branching_ratio();
    LikelihoodEvaluation out;
    out.value = sum_log - p.mu * horizon - ratio * tail_mass;
    out.gradient = {g_mu - horizon, g_alpha - tail_mass / p.beta,
                    g_beta + ratio / p.beta * tail_mass - ratio * tail_moment};
    if (!std::isfinite(out.value) || !std::isfinite(out.gradient[0]) || !std::isfinite(out.gradient[1]) ||
        !std::isfinite(out.gradient[2])) {
        throw NumericError("non-finite Hawkes log-likelihood");
    }
    return out;
}

double log_likelihood(const HawkesParams& p, const EventSeries& series) {
    return log_likelihood_with_grad(p, series).value;
}

std::array<double, 3> log_likelihood_grad(const HawkesParams& p, const EventSeries& series) {
    return log_likelihood_with_grad(p, series).gradient;
}

std::span<const InitialGuess> initialization_grid() {
    static constexpr std::array<InitialGuess, 9> grid{{
        {0.2, 0.1}, {0.2, 1.0}, {0.2, 10.0},
        {0.5, 0.1}, {0.5, 1.0}, {0.5, 10.0},
        {0.8, 0.1}, {0.8, 1.0}, {0.8, 10.0},
    }};
    return grid;
}

HawkesParams initial_params(const EventSeries& series, std::uint64_t seed, int index) {
    if (series.horizon() <= 0.0) throw InsufficientDataError("event series has zero horizon");
    const auto grid = initialization_grid();
    // Seeded Fisher-Yates over the grid; restart k takes slot k mod 9.
    std::array<std::size_t, 9> order{};
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng(seed);
    for (std::size_t i = order.size() - 1; i > 0; --i) {
        const auto j = static_cast<std::size_t>(open_uniform(rng) * static_cast<double>(i + 1));
        std::swap(order[i], order[std::min(j, i)]);
    }
    const auto& guess = grid[order[static_cast<std::size_t>(index) % order.size()]];
    double ratio = guess.branching_ratio;
    double half = guess.half_life;
    if (index >= static_cast<int>(order.size())) {
        Rng jitter(derive_seed(seed, static_cast<std::uint64_t>(index)));
        std::normal_distribution<double> normal(0.0, 0.3);
        ratio = std::min(0.95, ratio * std::exp(normal(jitter)));
        half *= std::exp(normal(jitter));
    }
    const double beta = std::numbers::ln2 / half;
    const double mu = 0.5 * static_cast<double>(series.size()) / series.horizon();
    return HawkesParams{mu, ratio * beta, beta};
}

FitResult fit_mle(const EventSeries& series, const FitOptions& options) {
    if (series.size() < 3) {
        throw InsufficientDataError("Hawkes fit needs at least 3 events, got " + std::to_string(series.size()));
    }
    if (options.n_restarts < 1) throw ArgumentError("n_restarts must be >= 1");
    require_strictly_increasing(series);
    const double n = static_cast<double>(series.size());

    const detail::Objective objective = [&](const Eigen::VectorXd& x, Eigen::VectorXd& grad) {
        const HawkesParams p{std::exp(x[0]), std::exp(x[1]), std::exp(x[2])};
        if (!(p.mu > 0.0 && p.alpha > 0.0 && p.beta > 0.0) || !std::isfinite(p.mu) || !std::isfinite(p.alpha) ||
            !std::isfinite(p.beta)) {
            return std::numeric_limits<double>::infinity();
        }
        try {
            const auto eval = log_likelihood_with_grad(p, series);
            grad[0] = -eval.gradient[0] * p.mu / n;
            grad[1] = -eval.gradient[1] * p.alpha / n;
            grad[2] = -eval.gradient[2] * p.beta / n;
            return -eval.value / n;
        } catch (const NumericError&) {
            return std::numeric_limits<double>::infinity();
        }
    };

    detail::BfgsOptions bfgs;
    bfgs.max_iterations = options.max_iterations;
    bfgs.gradient_tolerance = options.tolerance;

    const auto restarts = static_cast<std::size_t>(options.n_restarts);
    std::vector<detail::BfgsResult> results(restarts);
    parallel_for(restarts, options.threads, [&](std::size_t k) {
        const auto start = initial_params(series, options.seed, static_cast<int>(k));
        Eigen::VectorXd x0(3);
        x0 << std::log(start.mu), std::log(start.alpha), std::log(start.beta);
        results[k] = detail::minimize_bfgs(objective, x0, bfgs);
    });

    int best = -1;
    int converged_count = 0;
    for (std::size_t k = 0; k < restarts; ++k) {
        const auto& r = results[k];
        if (!r.finite_start || !std::isfinite(r.value)) continue;
        if (r.converged) ++converged_count;
        if (best < 0 || r.value < results[static_cast<std::size_t>(best)].value) best = static_cast<int>(k);
    }

    FitResult out;
    out.n_events = series.size();
    out.n_restarts_used = options.n_restarts;
    out.n_restarts_converged = converged_count;
    if (best < 0) {
        throw HawkesFitError("Hawkes fit: every restart started from a non-finite likelihood", out);
    }
    const auto& win = results[static_cast<std::size_t>(best)];
    out.params = HawkesParams{std::exp(win.x[0]), std::exp(win.x[1]), std::exp(win.x[2])};
    out.log_likelihood = log_likelihood(out.params, series);
    out.converged = win.converged;
    out.n_iterations = win.iterations;
    out.best_restart = best;
    out.gradient_norm = win.gradient_norm;
    if (converged_count == 0) {
        throw HawkesFitError("Hawkes fit did not converge in any of " + std::to_string(options.n_restarts) +
                                 " restarts (best gradient norm " + std::to_string(win.gradient_norm) + ")",
                             out);
    }
    return out;
}

}  // namespace transitcast
