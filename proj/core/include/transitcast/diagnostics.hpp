#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "transitcast/data.hpp"
#include "transitcast/hawkes.hpp"

namespace transitcast {

// Compensator increments between consecutive events; i.i.d. Exp(1) under
// a correctly specified model (time-rescaling theorem).
struct RescaledIntervals {
    std::vector<double> u;
};

RescaledIntervals time_rescale(const HawkesParams& p, const EventSeries& series);

struct KsResult {
    double d_statistic{0.0};
    double p_value{1.0};
    std::size_t n{0};
};

// Asymptotic Kolmogorov survival function Q(x) = P(sqrt(n) D > x).
double kolmogorov_survival(double x);

// One-sample KS test of u against Exp(1), asymptotic p-value.
KsResult ks_exp1(const RescaledIntervals& u);
KsResult ks_exp1(std::span<const double> u);

struct EcdfPoint {
    double x;
    double ecdf;
    double exp1_cdf;
};

std::vector<EcdfPoint> ecdf_vs_exp1(std::span<const double> u);

struct CalibrationPoint {
    double t;
    std::size_t observed;  // N(t) = #{T_i <= t}
    double expected;       // Lambda(t)
};

// Uniform grid of n_grid points over [0, horizon].
std::vector<CalibrationPoint> cumulative_calibration(const HawkesParams& p, const EventSeries& series,
                                                     std::size_t n_grid);

struct KernelPoint {
    double lag;
    double value;  // alpha * exp(-beta * lag)
};

std::vector<KernelPoint> kernel_curve(const HawkesParams& p, double max_lag, std::size_t n_points);

// Rice's rule: ceil(2 n^(1/3)), computed exactly in integers.
std::size_t rice_bins(std::size_t n);

struct HistogramBin {
    double left;
    double right;
    std::size_t count;
};

// Equal-width bins over [min, max]; the last bin is closed on the right.
// A constant sample yields one bin of width 1 centred on the value.
std::vector<HistogramBin> histogram(std::span<const double> samples, std::size_t n_bins);

struct GammaFit {
    double shape{0.0};
    double scale{0.0};
    double location{0.0};
    double log_likelihood{0.0};
};

// Three-parameter gamma MLE by profiling (shape, scale) over the location.
GammaFit fit_gamma3(std::span<const double> samples);

// Two-parameter gamma MLE of y > 0 with the location fixed.
GammaFit fit_gamma_fixed_location(std::span<const double> samples, double location);

double gamma3_log_likelihood(std::span<const double> samples, const GammaFit& fit);

}  // namespace transitcast
