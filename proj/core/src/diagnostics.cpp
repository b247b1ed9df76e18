#include "transitcast/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>

namespace transitcast {

RescaledIntervals time_rescale(const HawkesParams& p, const EventSeries& series) {
    p.validate();
    const auto& ts = series.times();
    if (ts.size() < 2) throw InsufficientDataError("time rescaling needs at least 2 events");
    RescaledIntervals out;
    out.u.reserve(ts.size() - 1);
    const double ratio = p.branching_ratio();
    double a = 0.0;
    for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
        const double gap = ts[i + 1] - ts[i];
        if (!(gap > 0.0)) throw InvariantError("time rescaling needs strictly increasing events");
        // Excitation just after T_i is alpha (1 + A_i); integrate its decay.
        out.u.push_back(p.mu * gap + ratio * (1.0 + a) * -std::expm1(-p.beta * gap));
        a = std::exp(-p.beta * gap) * (1.0 + a);
    }
    return out;
}

double kolmogorov_survival(double x) {
    constexpr double kTermTolerance = 1e-10;
    if (!(x > 0.0)) return 1.0;
    if (x < 1.18) {
        // Jacobi-theta form of K(x); converges fast for small x.
        const double w = std::numbers::pi * std::numbers::pi / (8.0 * x * x);
        const double scale = std::sqrt(2.0 * std::numbers::pi) / x;
        double cdf = 0.0;
        for (int k = 1; k < 1000; ++k) {
            const double odd = 2.0 * k - 1.0;
            const double term = scale * std::exp(-odd * odd * w);
            cdf += term;
            if (term < kTermTolerance) break;
        }
        return std::clamp(1.0 - cdf, 0.0, 1.0);
    }
    double q = 0.0;
    for (int k = 1; k < 1000; ++k) {
        const double term = 2.0 * std::exp(-2.0 * k * k * x * x);
        q += (k % 2 == 1) ? term : -term;
        if (term < kTermTolerance) break;
    }
    return std::clamp(q, 0.0, 1.0);
}

KsResult ks_exp1(const RescaledIntervals& u) { return ks_exp1(std::span<const double>(u.u)); }

KsResult ks_exp1(std::span<const double> u) {
    if (u.empty()) throw ArgumentError("KS test needs a non-empty sample");
    std::vector<double> sorted(u.begin(), u.end());
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double cdf = sorted[i] <= 0.0 ? 0.0 : -std::expm1(-sorted[i]);
        const double above = static_cast<double>(i + 1) / n - cdf;
        const double below = cdf - static_cast<double>(i) / n;
        d = std::max({d, above, below});
    }
    KsResult out;
    out.d_statistic = std::clamp(d, 0.0, 1.0);
    out.n = sorted.size();
    out.p_value = kolmogorov_survival(std::sqrt(n) * out.d_statistic);
    return out;
}

std::vector<EcdfPoint> ecdf_vs_exp1(std::span<const double> u) {
    std::vector<double> sorted(u.begin(), u.end());
    std::sort(sorted.begin(), sorted.end());
    std::vector<EcdfPoint> out;
    out.reserve(sorted.size());
    const double n = static_cast<double>(sorted.size());
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        out.push_back({sorted[i], static_cast<double>(i + 1) / n, -std::expm1(-std::max(sorted[i], 0.0))});
    }
    return out;
}

std::vector<CalibrationPoint> cumulative_calibration(const HawkesParams& p, const EventSeries& series,
                                                     std::size_t n_grid) {
    p.validate();
    if (n_grid < 2) throw ArgumentError("calibration grid needs at least 2 points");
    const auto& ts = series.times();
    const double horizon = series.horizon();
    const double ratio = p.branching_ratio();
    std::vector<CalibrationPoint> out;
    out.reserve(n_grid);

    // Merged pass. For the last event T_k strictly before t:
    //   sum_{j<=k} (1 - e^{-beta(t-T_j)}) = M_k + (1 + A_k)(1 - e^{-beta(t-T_k)}).
    std::size_t strictly_before = 0;
    double a = 0.0;
    double mass = 0.0;
    for (std::size_t g = 0; g < n_grid; ++g) {
        const double t = g + 1 == n_grid ? horizon : horizon * static_cast<double>(g) / static_cast<double>(n_grid - 1);
        while (strictly_before < ts.size() && ts[strictly_before] < t) {
            if (strictly_before > 0) {
                const double dt = ts[strictly_before] - ts[strictly_before - 1];
                mass += (1.0 + a) * -std::expm1(-p.beta * dt);
                a = std::exp(-p.beta * dt) * (1.0 + a);
            }
            ++strictly_before;
        }
        double kernel_mass = 0.0;
        if (strictly_before > 0) {
            const double last = ts[strictly_before - 1];
            kernel_mass = mass + (1.0 + a) * -std::expm1(-p.beta * (t - last));
        }
        const auto observed = static_cast<std::size_t>(std::upper_bound(ts.begin(), ts.end(), t) - ts.begin());
        out.push_back({t, observed, p.mu * t + ratio * kernel_mass});
    }
    return out;
}

std::vector<KernelPoint> kernel_curve(const HawkesParams& p, double max_lag, std::size_t n_points) {
    p.validate();
    if (n_points < 2 || !(max_lag > 0.0)) throw ArgumentError("kernel_curve needs max_lag > 0 and n_points >= 2");
    std::vector<KernelPoint> out;
    out.reserve(n_points);
    for (std::size_t i = 0; i < n_points; ++i) {
        const double lag = max_lag * static_cast<double>(i) / static_cast<double>(n_points - 1);
        out.push_back({lag, p.alpha * std::exp(-p.beta * lag)});
    }
    return out;
}

namespace {
__extension__ typedef unsigned __int128 Wide;
}  // namespace

std::size_t rice_bins(std::size_t n) {
    if (n < 1) throw ArgumentError("rice_bins needs n >= 1");
    // Smallest k with k >= 2 n^(1/3), i.e. k^3 >= 8 n.
    const Wide target = static_cast<Wide>(n) * 8u;
    auto k = static_cast<std::size_t>(std::ceil(2.0 * std::cbrt(static_cast<double>(n))));
    auto cube = [](std::size_t v) { return static_cast<Wide>(v) * v * v; };
    while (k > 1 && cube(k - 1) >= target) --k;
    while (cube(k) < target) ++k;
    return k;
}

std::vector<HistogramBin> histogram(std::span<const double> samples, std::size_t n_bins) {
    if (samples.empty()) throw ArgumentError("histogram needs a non-empty sample");
    if (n_bins < 1) throw ArgumentError("histogram needs n_bins >= 1");
    for (double v : samples) {
        if (!std::isfinite(v)) throw ArgumentError("histogram sample contains a non-finite value");
    }
    const auto [lo_it, hi_it] = std::minmax_element(samples.begin(), samples.end());
    const double lo = *lo_it;
    const double hi = *hi_it;
    if (lo == hi) return {HistogramBin{lo - 0.5, lo + 0.5, samples.size()}};

    const double width = (hi - lo) / static_cast<double>(n_bins);
    std::vector<HistogramBin> bins(n_bins);
    for (std::size_t b = 0; b < n_bins; ++b) {
        bins[b].left = lo + width * static_cast<double>(b);
        bins[b].right = b + 1 == n_bins ? hi : lo + width * static_cast<double>(b + 1);
        bins[b].count = 0;
    }
    for (double v : samples) {
        auto b = static_cast<std::size_t>((v - lo) / width);
        if (b >= n_bins) b = n_bins - 1;
        // Guard the rounding at interior edges so v lands in [left, right).
        while (b > 0 && v < bins[b].left) --b;
        while (b + 1 < n_bins && v >= bins[b + 1].left) ++b;
        ++bins[b].count;
    }
    return bins;
}

namespace {

// Solves log(k) - digamma(k) = s for k > 0 by Newton from Minka's start.
double solve_gamma_shape(double s) {
    double k = (3.0 - s + std::sqrt((s - 3.0) * (s - 3.0) + 24.0 * s)) / (12.0 * s);
    for (int iter = 0; iter < 100; ++iter) {
        const double f = std::log(k) - boost::math::digamma(k) - s;
        const double df = 1.0 / k - boost::math::trigamma(k);
        double next = k - f / df;
        if (!(next > 0.0)) next = k / 2.0;
        if (std::abs(next - k) <= 1e-13 * k) return next;
        k = next;
    }
    return k;
}

struct Moments {
    double mean{0.0};
    double mean_log{0.0};
};

}  // namespace

GammaFit fit_gamma_fixed_location(std::span<const double> samples, double location) {
    if (samples.empty()) throw ArgumentError("gamma fit needs a non-empty sample");
    Moments m;
    for (double x : samples) {
        const double y = x - location;
        if (!(y > 0.0)) throw FitError("gamma location must lie below every sample");
        m.mean += y;
        m.mean_log += std::log(y);
    }
    const double n = static_cast<double>(samples.size());
    m.mean /= n;
    m.mean_log /= n;
    const double s = std::log(m.mean) - m.mean_log;
    if (!(s > 0.0)) throw FitError("gamma fit: degenerate sample");
    GammaFit fit;
    fit.location = location;
    fit.shape = solve_gamma_shape(s);
    fit.scale = m.mean / fit.shape;
    fit.log_likelihood =
        n * ((fit.shape - 1.0) * m.mean_log - fit.shape - fit.shape * std::log(fit.scale) - std::lgamma(fit.shape));
    return fit;
}

double gamma3_log_likelihood(std::span<const double> samples, const GammaFit& fit) {
    double ll = 0.0;
    for (double x : samples) {
        const double y = x - fit.location;
        if (!(y > 0.0)) return -std::numeric_limits<double>::infinity();
        ll += (fit.shape - 1.0) * std::log(y) - y / fit.scale;
    }
    const double n = static_cast<double>(samples.size());
    return ll - n * (fit.shape * std::log(fit.scale) + std::lgamma(fit.shape));
}

GammaFit fit_gamma3(std::span<const double> samples) {
    if (samples.size() < 20) throw InsufficientDataError("3-parameter gamma fit needs at least 20 samples");
    const double n = static_cast<double>(samples.size());
    const double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : samples) ss += (x - mean) * (x - mean);
    const double sd = std::sqrt(ss / (n - 1.0));
    if (!(sd > 0.0) || !std::isfinite(sd)) throw FitError("3-parameter gamma fit: zero-variance sample");
    const double lowest = *std::min_element(samples.begin(), samples.end());

    constexpr std::size_t kGrid = 50;
    const double grid_lo = lowest - 3.0 * sd;
    const double grid_hi = lowest - 1e-6;
    auto grid_at = [&](std::size_t i) {
        return grid_lo + (grid_hi - grid_lo) * static_cast<double>(i) / static_cast<double>(kGrid - 1);
    };
    auto profile = [&](double loc) {
        try {
            return fit_gamma_fixed_location(samples, loc);
        } catch (const FitError&) {
            GammaFit bad;
            bad.location = loc;
            bad.log_likelihood = -std::numeric_limits<double>::infinity();
            return bad;
        }
    };

    GammaFit best = profile(grid_at(0));
    std::size_t best_index = 0;
    for (std::size_t i = 1; i < kGrid; ++i) {
        const auto f = profile(grid_at(i));
        if (f.log_likelihood > best.log_likelihood) {
            best = f;
            best_index = i;
        }
    }
    if (!std::isfinite(best.log_likelihood)) throw FitError("3-parameter gamma fit failed on every location");

    // Golden-section refinement between the neighbouring grid points.
    double a = grid_at(best_index == 0 ? 0 : best_index - 1);
    double b = grid_at(std::min(best_index + 1, kGrid - 1));
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    GammaFit fc = profile(c);
    GammaFit fd = profile(d);
    for (int iter = 0; iter < 200 && (b - a) > 1e-10 * (1.0 + std::abs(a)); ++iter) {
        if (fc.log_likelihood >= fd.log_likelihood) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = profile(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = profile(d);
        }
    }
    for (const auto* f : {&fc, &fd}) {
        if (f->log_likelihood > best.log_likelihood) best = *f;
    }
    return best;
}

}  // namespace transitcast
