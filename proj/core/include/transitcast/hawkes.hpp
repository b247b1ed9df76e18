#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "transitcast/data.hpp"
#include "transitcast/errors.hpp"

namespace transitcast {

// Exponential-kernel Hawkes process:
//   lambda(t) = mu + sum_{T_i < t} alpha * exp(-beta * (t - T_i))
struct HawkesParams {
    double mu{0.0};     // events/hour
    double alpha{0.0};  // events/hour added per event
    double beta{0.0};   // 1/hour

    // Throws ArgumentError unless all three are finite and > 0.
    static HawkesParams make(double mu, double alpha, double beta);
    void validate() const;

    double branching_ratio() const noexcept { return alpha / beta; }
    double half_life() const noexcept;
    bool stable() const noexcept { return branching_ratio() < 1.0; }

    bool operator==(const HawkesParams&) const = default;
};

double branching_ratio(const HawkesParams& p);
double half_life(const HawkesParams& p);

inline constexpr double kDefaultTruncationHalfLives = 20.0;
inline constexpr double kNoTruncation = std::numeric_limits<double>::infinity();

// lambda(t), summing only events within truncation_half_lives * half-life
// of t. t must lie in [0, horizon].
double intensity(const HawkesParams& p, const EventSeries& series, double t,
                 double truncation_half_lives = kDefaultTruncationHalfLives);

// lambda on a sorted grid of times in one merged pass, O(N + G).
std::vector<double> intensity_on_grid(const HawkesParams& p, const EventSeries& series,
                                      std::span<const double> grid,
                                      double truncation_half_lives = kDefaultTruncationHalfLives);

// lambda(T_i) for every event via A_1 = 0, A_i = exp(-beta dT) (1 + A_{i-1}).
std::vector<double> intensities_at_events(const HawkesParams& p, const EventSeries& series);

// Lambda(t) = mu t + (alpha/beta) sum_{T_i < t} (1 - exp(-beta (t - T_i))).
double compensator(const HawkesParams& p, const EventSeries& series, double t);

// Lambda(T_i) for every event in one pass.
std::vector<double> compensator_at_events(const HawkesParams& p, const EventSeries& series);

double log_likelihood(const HawkesParams& p, const EventSeries& series);

// (d/dmu, d/dalpha, d/dbeta) of log_likelihood.
std::array<double, 3> log_likelihood_grad(const HawkesParams& p, const EventSeries& series);

struct LikelihoodEvaluation {
    double value{0.0};
    std::array<double, 3> gradient{};
};

// Value and gradient in a single O(N) pass.
LikelihoodEvaluation log_likelihood_with_grad(const HawkesParams& p, const EventSeries& series);

struct FitOptions {
    int n_restarts{5};
    int max_iterations{500};
    // Infinity norm of the log-space gradient of -loglik / N.
    double tolerance{1e-8};
    std::uint64_t seed{0};
    unsigned threads{1};
};

struct FitResult {
    HawkesParams params;
    double log_likelihood{-std::numeric_limits<double>::infinity()};
    std::size_t n_events{0};
    bool converged{false};
    int n_iterations{0};        // iterations of the winning restart
    int n_restarts_used{0};     // restarts executed
    int n_restarts_converged{0};
    int best_restart{-1};
    double gradient_norm{std::numeric_limits<double>::infinity()};  // log-space, per event
};

// Raised when no restart converges; carries the best finite iterate seen.
class HawkesFitError : public NonConvergenceError {
public:
    HawkesFitError(const std::string& what, FitResult best)
        : NonConvergenceError(what), best_(best) {}
    const FitResult& best_effort() const noexcept { return best_; }

private:
    FitResult best_;
};

// Maximum likelihood over (log mu, log alpha, log beta) by BFGS with the
// analytic gradient, best of options.n_restarts starts. Restarts are
// independent; the winner is the highest likelihood, lowest index on ties.
FitResult fit_mle(const EventSeries& series, const FitOptions& options = {});

// The (branching ratio, half-life) grid the restarts draw initial values from.
struct InitialGuess {
    double branching_ratio;
    double half_life;
};
std::span<const InitialGuess> initialization_grid();

// Starting point for restart `index` (deterministic in seed and index).
HawkesParams initial_params(const EventSeries& series, std::uint64_t seed, int index);

}  // namespace transitcast
