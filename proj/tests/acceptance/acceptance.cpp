// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "support/oracles.hpp"
#include "transitcast/bench.hpp"
#include "transitcast/diagnostics.hpp"
#include "transitcast/hawkes.hpp"
#include "transitcast/models.hpp"
#include "transitcast/simulate.hpp"

namespace tc = transitcast;

namespace {

struct Outcome {
    bool pass{false};
    std::string detail;
    bool skipped{false};
};

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

tc::HawkesParams random_params(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> mu(0.05, 3.0);
    std::uniform_real_distribution<double> beta(0.1, 8.0);
    std::uniform_real_distribution<double> n(0.0, 0.98);
    const double b = beta(rng);
    return tc::HawkesParams::make(mu(rng), std::max(n(rng), 1e-3) * b, b);
}

std::string fmt(const char* format, double a, double b = 0.0, double c = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, format, a, b, c);
    return buf;
}

// 1. O(N) likelihood, intensities and compensator against brute force.
Outcome likelihood_oracles() {
    std::mt19937_64 rng(101);
    double worst_ll = 0.0;
    double worst_lam = 0.0;
    double worst_comp = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const auto p = random_params(rng);
        const auto n = std::uniform_int_distribution<std::size_t>(1, 500)(rng);
        const double horizon = std::uniform_real_distribution<double>(10.0, 1000.0)(rng);
        const tc::EventSeries s(oracle::random_times(rng, n, horizon), horizon);
        worst_ll = std::max(worst_ll, rel(tc::log_likelihood(p, s), oracle::log_likelihood(p, s.times(), horizon)));
        const auto lam = tc::intensities_at_events(p, s);
        for (std::size_t i = 0; i < s.size(); ++i) {
            worst_lam = std::max(worst_lam, rel(lam[i], oracle::intensity(p, s.times(), s[i])));
        }
        const double t_mid = std::uniform_real_distribution<double>(0.0, horizon)(rng);
        for (double t : {t_mid, horizon}) {
            worst_comp = std::max(worst_comp, rel(tc::compensator(p, s, t), oracle::compensator_quadrature(p, s.times(), t)));
        }
    }
    return {worst_ll <= 1e-9 && worst_lam <= 1e-9 && worst_comp <= 1e-6,
            fmt("max rel err loglik %.2e, intensity %.2e, compensator %.2e", worst_ll, worst_lam, worst_comp)};
}

// Log-likelihood in long double, O(N^2), for finite differences free of
// double rounding.
long double ll_long(long double mu, long double alpha, long double beta, const std::vector<double>& t, double horizon) {
    long double ll = 0.0L;
    for (std::size_t i = 0; i < t.size(); ++i) {
        long double lam = mu;
        for (std::size_t j = 0; j < i; ++j) lam += alpha * std::exp(-beta * (t[i] - t[j]));
        ll += std::log(lam);
    }
    long double integral = mu * horizon;
    for (double ti : t) integral += alpha / beta * (1.0L - std::exp(-beta * (horizon - ti)));
    return ll - integral;
}

// 2. Analytic gradient against central differences.
Outcome gradient_check() {
    std::mt19937_64 rng(202);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const auto p = random_params(rng);
        const auto n = std::uniform_int_distribution<std::size_t>(1, 150)(rng);
        const double horizon = std::uniform_real_distribution<double>(10.0, 200.0)(rng);
        const auto times = oracle::random_times(rng, n, horizon);
        const auto g = tc::log_likelihood_grad(p, tc::EventSeries(times, horizon));
        const std::array<long double, 3> x{p.mu, p.alpha, p.beta};
        for (std::size_t k = 0; k < 3; ++k) {
            const long double h = 1e-6L * x[k];
            auto up = x;
            auto down = x;
            up[k] += h;
            down[k] -= h;
            const long double fd =
                (ll_long(up[0], up[1], up[2], times, horizon) - ll_long(down[0], down[1], down[2], times, horizon)) /
                (2.0L * h);
            worst = std::max(worst, rel(g[k], static_cast<double>(fd)));
        }
    }
    return {worst <= 1e-4, fmt("max rel err %.2e over 300 components", worst)};
}

// 3. Simulate-then-fit recovery.
Outcome simulate_then_fit() {
    const auto truth = tc::HawkesParams::make(0.5, 1.0, 2.0);
    int ok = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto s = tc::simulate(truth, tc::EventSeries({}, 0.0), 0.0, 5000.0, tc::derive_seed(303, seed));
        tc::FitOptions o;
        o.seed = seed;
        try {
            const auto f = tc::fit_mle(s, o);
            if (rel(f.params.mu, 0.5) <= 0.1 && rel(f.params.alpha, 1.0) <= 0.1 && rel(f.params.beta, 2.0) <= 0.1) ++ok;
        } catch (const tc::HawkesFitError&) {
        }
    }
    return {ok >= 18, fmt("%.0f/20 seeds within 10%% on every parameter", ok)};
}

// 4. Time-rescaling KS test and calibration endpoint under the true model.
Outcome calibration() {
    const auto truth = tc::HawkesParams::make(0.5, 1.0, 2.0);
    int passing = 0;
    double worst_ratio = 0.0;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const auto s = tc::simulate(truth, tc::EventSeries({}, 0.0), 0.0, 5000.0, tc::derive_seed(404, seed));
        if (tc::ks_exp1(tc::time_rescale(truth, s)).p_value > 0.01) ++passing;
        const auto curve = tc::cumulative_calibration(truth, s, 200);
        worst_ratio = std::max(worst_ratio, std::abs(curve.back().expected / static_cast<double>(curve.back().observed) - 1.0));
    }
    return {passing >= 45 && worst_ratio < 0.05,
            fmt("KS p > 0.01 in %.0f/50 seeds; max |Lambda(T)/N - 1| = %.4f", passing, worst_ratio)};
}

tc::DailySeries contiguous(std::size_t days) {
    tc::SynthDailyOptions o;
    o.n_days = days;
    o.weekly_amplitude = 10;
    o.noise_sd = 1;
    return tc::synth_daily(o);
}

// 5. Row bookkeeping of the windowing and split.
Outcome bookkeeping() {
    std::ostringstream detail;
    bool pass = true;
    for (auto [days, rows, train, test] : {std::array<std::size_t, 4>{1671, 1666, 1333, 333},
                                           std::array<std::size_t, 4>{4199, 4194, 3355, 839}}) {
        const auto d = tc::build_windows(contiguous(days), {}, tc::Representation::raw, 5);
        const auto [tr, te] = tc::chrono_split(d, 0.8);
        pass = pass && d.rows() == rows && tr.rows() == train && te.rows() == test;
        detail << days << " days -> " << d.rows() << " rows (" << tr.rows() << "/" << te.rows() << "); ";
    }
    const auto bins = tc::rice_bins(1671);
    detail << "rice_bins(1671) = " << bins;
    return {pass && bins == 24, detail.str()};
}

// 6. Model oracles.
Outcome model_oracles() {
    std::mt19937_64 rng(606);
    std::normal_distribution<double> z(0.0, 1.0);
    auto problem = [&](int n, int p) {
        Eigen::MatrixXd X(n, p);
        Eigen::VectorXd y(n);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < p; ++j) X(i, j) = z(rng) * (j + 1) + j;
            y[i] = 2.0 + X.row(i).sum() * 0.3 + z(rng);
        }
        return std::pair{X, y};
    };
    auto linear = [](const tc::Regressor& r) -> const tc::LinearModelBase& {
        return dynamic_cast<const tc::LinearModelBase&>(r);
    };
    std::ostringstream detail;

    const auto [X, y] = problem(300, 6);
    auto ols = tc::make_regressor(tc::ModelKind::linear);
    ols->fit(X, y);
    const auto ref = oracle::normal_equations(X, y);
    const double ols_err = std::max((linear(*ols).coefficients() - ref.coef).cwiseAbs().maxCoeff(),
                                    std::abs(linear(*ols).intercept() - ref.intercept));
    detail << "OLS " << fmt("%.1e", ols_err);

    auto ridge = tc::make_regressor(tc::ModelKind::ridge, {{"lambda", 1e-10}});
    ridge->fit(X, y);
    const double ridge_err = (linear(*ridge).coefficients() - linear(*ols).coefficients()).cwiseAbs().maxCoeff();
    detail << ", ridge->OLS " << fmt("%.1e", ridge_err);

    // Smallest lambda with an all-zero solution: max |<z_j, y - ybar>| / n.
    const double n = static_cast<double>(X.rows());
    const Eigen::VectorXd yc = y.array() - y.mean();
    double lambda_max = 0.0;
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
        const Eigen::VectorXd xc = X.col(j).array() - X.col(j).mean();
        lambda_max = std::max(lambda_max, std::abs(xc.dot(yc)) / (n * std::sqrt(xc.squaredNorm() / n)));
    }
    auto lasso = tc::make_regressor(tc::ModelKind::lasso, {{"lambda", lambda_max * (1.0 + 1e-12)}});
    lasso->fit(X, y);
    auto lasso_below = tc::make_regressor(tc::ModelKind::lasso, {{"lambda", lambda_max * 0.999}});
    lasso_below->fit(X, y);
    const bool lasso_ok = linear(*lasso).coefficients().isZero(0.0) && !linear(*lasso_below).coefficients().isZero(0.0);
    detail << ", lasso zeroing " << (lasso_ok ? "exact" : "wrong");

    auto knn = tc::make_regressor(tc::ModelKind::knn, {{"k", 1}});
    knn->fit(X, y);
    const bool knn_ok = knn->predict(X) == y;
    detail << ", knn self-retrieval " << (knn_ok ? "exact" : "wrong");

    int monotone = 0;
    for (int trial = 0; trial < 50; ++trial) {
        Eigen::MatrixXd Xp(80, 3);
        Eigen::VectorXd yp(80);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        const Eigen::Vector3d beta(u(rng), u(rng), u(rng));
        for (int i = 0; i < 80; ++i) {
            for (int j = 0; j < 3; ++j) Xp(i, j) = u(rng);
            std::poisson_distribution<int> pois(std::exp(1.0 + Xp.row(i).dot(beta)));
            yp[i] = pois(rng);
        }
        auto m = tc::make_regressor(tc::ModelKind::poisson);
        m->fit(Xp, yp);
        const auto& trace = dynamic_cast<const tc::PoissonRegressor&>(*m).log_likelihood_trace();
        bool up = trace.size() >= 2;
        for (std::size_t i = 1; i < trace.size(); ++i) up = up && trace[i] >= trace[i - 1];
        monotone += up ? 1 : 0;
    }
    detail << ", Poisson monotone " << monotone << "/50";
    return {ols_err <= 1e-8 && ridge_err <= 1e-6 && lasso_ok && knn_ok && monotone == 50, detail.str()};
}

// 7. Direction of the covariate-group effects on synthetic data.
Outcome benchmark_directionality() {
    tc::SynthDailyOptions synth;
    synth.n_days = 400;
    synth.weekly_amplitude = 40;
    synth.noise_sd = 10;
    synth.seed = 2;
    const auto series = tc::synth_daily(synth);
    tc::BenchmarkOptions o;
    o.n_cycles = 20;
    o.seed = 1;
    const std::vector<tc::ModelSpec> models{tc::model_spec(tc::ModelKind::random_forest),
                                            tc::model_spec(tc::ModelKind::linear)};
    const auto report = tc::bootstrap_benchmark(series, models, o);
    bool pass = true;
    std::ostringstream detail;
    for (std::size_t m = 0; m < models.size(); ++m) {
        const auto d = tc::group_improvement(report, m);
        pass = pass && d.at("dow") < 0.0 && d.at("weather") >= 0.0;
        detail << models[m].name << fmt(": dow %+.3f, weather %+.3f; ", d.at("dow"), d.at("weather"));
    }
    return {pass, detail.str() + "20 cycles"};
}

// 8. Three-parameter gamma recovery.
Outcome gamma_recovery() {
    std::mt19937_64 rng(808);
    std::gamma_distribution<double> g(3.92, 32.03);
    std::vector<double> x(100000);
    for (auto& v : x) v = -11.6 + g(rng);
    const auto fit = tc::fit_gamma3(x);
    const bool pass = rel(fit.shape, 3.92) <= 0.05 && rel(fit.scale, 32.03) <= 0.05 && std::abs(fit.location + 11.6) <= 5.0;
    return {pass, fmt("shape %.3f, scale %.2f, location %.2f", fit.shape, fit.scale, fit.location)};
}

// 9. Byte-identical outputs across runs and thread counts.
Outcome determinism() {
    tc::SynthDailyOptions synth;
    synth.n_days = 150;
    synth.weekly_amplitude = 30;
    synth.noise_sd = 5;
    synth.seed = 9;
    const auto series = tc::synth_daily(synth);
    const std::vector<tc::ModelSpec> models{tc::model_spec(tc::ModelKind::random_forest, {{"n_trees", 10}}),
                                            tc::model_spec(tc::ModelKind::gradient_boosting, {{"n_trees", 10}}),
                                            tc::model_spec(tc::ModelKind::knn)};
    auto bench = [&](unsigned threads) {
        tc::BenchmarkOptions o;
        o.n_cycles = 3;
        o.seed = 99;
        o.threads = threads;
        return tc::to_json(tc::bootstrap_benchmark(series, models, o)).dump();
    };
    const auto b1 = bench(1);
    const bool bench_ok = b1 == bench(1) && b1 == bench(4);

    const auto p = tc::HawkesParams::make(0.5, 1.0, 2.0);
    auto events = [&] {
        std::ostringstream out;
        tc::write_event_csv(tc::simulate(p, tc::EventSeries({}, 0.0), 0.0, 2000.0, 77),
                            tc::CivilDateTime{tc::CivilDate{2019, 1, 1}}, out);
        return out.str();
    };
    const bool sim_ok = events() == events();
    const auto n1 = tc::forecast_next_event(p, tc::EventSeries({}, 0.0), 0.0, 500, 5, 1).samples;
    const bool forecast_ok = n1 == tc::forecast_next_event(p, tc::EventSeries({}, 0.0), 0.0, 500, 5, 4).samples;
    std::ostringstream detail;
    detail << "benchmark " << (bench_ok ? "identical" : "differs") << ", simulation "
           << (sim_ok ? "identical" : "differs") << ", next-event " << (forecast_ok ? "identical" : "differs")
           << " (threads 1 vs 4)";
    return {bench_ok && sim_ok && forecast_ok, detail.str()};
}

// 10. Optional: reference fit on the real alert series.
Outcome real_data() {
    const char* events_path = std::getenv("TRANSITCAST_REAL_EVENTS");
    if (events_path == nullptr || *events_path == '\0') {
        return {true, "set TRANSITCAST_REAL_EVENTS to an event CSV to run", true};
    }
    const char* origin_text = std::getenv("TRANSITCAST_REAL_ORIGIN");
    const auto origin = tc::CivilDateTime::parse(origin_text ? origin_text : "2019-01-01T00:00:00");
    const auto s = tc::parse_event_csv(events_path, tc::EventCsvOptions{origin, std::nullopt});
    const auto fit = tc::fit_mle(s);
    const auto& q = fit.params;
    const double d = tc::ks_exp1(tc::time_rescale(q, s)).d_statistic;
    const auto days = tc::forecast_days(q, s, 24.0, tc::DailyForecastMode::compensator);
    const double daily = tc::score_daily_rmse(days, tc::observed_daily_counts(s, 24.0));
    const double next = tc::evaluate_next_event(q, s, 0.2, 1000, 1).rmse;
    const bool params_ok = rel(q.mu, 0.438) <= 0.05 && rel(q.alpha, 1.884) <= 0.05 && rel(q.beta, 2.087) <= 0.05;
    const bool pass = params_ok && std::abs(d - 0.170) <= 0.02 && rel(daily, 137.43) <= 0.15 && rel(next, 0.670) <= 0.15;
    std::ostringstream detail;
    detail << fmt("mu %.3f alpha %.3f beta %.3f; ", q.mu, q.alpha, q.beta)
           << fmt("KS D %.3f; daily RMSE %.2f; ", d, daily) << fmt("next-event RMSE %.3f h", next);
    return {pass, detail.str()};
}

}  // namespace

int main() {
    struct Criterion {
        const char* id;
        const char* name;
        std::function<Outcome()> run;
        double budget_seconds;  // 0: no runtime requirement
    };
    const std::vector<Criterion> criteria{
        {"AC1", "likelihood oracles", likelihood_oracles, 30.0},
        {"AC2", "gradient check", gradient_check, 10.0},
        {"AC3", "simulate-then-fit", simulate_then_fit, 120.0},
        {"AC4", "calibration", calibration, 0.0},
        {"AC5", "window and split bookkeeping", bookkeeping, 0.0},
        {"AC6", "model oracles", model_oracles, 0.0},
        {"AC7", "benchmark directionality", benchmark_directionality, 600.0},
        {"AC8", "gamma recovery", gamma_recovery, 0.0},
        {"AC9", "determinism", determinism, 0.0},
        {"AC10", "real-data reproduction", real_data, 0.0},
    };
    int failures = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome r;
        try {
            r = c.run();
        } catch (const std::exception& e) {
            r = {false, std::string("exception: ") + e.what()};
        }
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (c.budget_seconds > 0.0 && seconds > c.budget_seconds) {
            r.pass = false;
            r.detail += fmt(" [over the %.0f s budget]", c.budget_seconds);
        }
        const char* status = r.skipped ? "SKIP" : r.pass ? "PASS" : "FAIL";
        std::printf("%s %s %s: %s (%.1f s)\n", status, c.id, c.name, r.detail.c_str(), seconds);
        std::fflush(stdout);
        if (!r.pass) ++failures;
    }
    return failures == 0 ? 0 : 1;
}
