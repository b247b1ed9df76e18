#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "transitcast/diagnostics.hpp"
#include "transitcast/simulate.hpp"

namespace tc = transitcast;

TEST(Kolmogorov, MatchesScipyKstwobign) {
    // scipy.stats.kstwobign.sf
    const std::pair<double, double> table[] = {
        {0.3, 0.9999906941986655},  {0.5, 0.9639452436648751},   {0.8, 0.5441424115741981},
        {1.0, 0.26999967167735456}, {1.36, 0.049485876755377876}, {1.63, 0.009846364888486529},
        {2.5, 7.453306344157342e-06},
    };
    for (auto [x, q] : table) EXPECT_NEAR(tc::kolmogorov_survival(x), q, 1e-9) << x;
    EXPECT_EQ(tc::kolmogorov_survival(0.0), 1.0);
}

TEST(Kolmogorov, ContinuousAtBranchSwitch) {
    EXPECT_NEAR(tc::kolmogorov_survival(std::nextafter(1.18, 0.0)), tc::kolmogorov_survival(1.18), 1e-9);
}

TEST(KsExp1, MatchesScipyKstest) {
    const std::vector<double> u{0.1, 0.5, 1.2, 2.0, 0.05, 0.7, 3.1, 0.9};
    const auto r = tc::ks_exp1(u);
    EXPECT_NEAR(r.d_statistic, 0.15483741803595957, 1e-14);
    EXPECT_NEAR(r.p_value, 0.9907924076165132, 1e-9);
    EXPECT_EQ(r.n, 8u);
}

TEST(TimeRescale, MatchesCompensatorDifferences) {
    const auto p = tc::HawkesParams::make(0.5, 1.0, 2.0);
    const auto s = tc::simulate(p, tc::EventSeries({}, 0.0), 0.0, 400.0, 13);
    const auto u = tc::time_rescale(p, s).u;
    ASSERT_EQ(u.size(), s.size() - 1);
    for (std::size_t i = 0; i < u.size(); i += 11) {
        const double expected = tc::compensator(p, s, s[i + 1]) - tc::compensator(p, s, s[i]);
        ASSERT_NEAR(u[i], expected, 1e-9 * std::max(1.0, expected));
    }
    EXPECT_GT(tc::ks_exp1(u).p_value, 0.001);
}

TEST(TimeRescale, WrongModelIsRejected) {
    const auto truth = tc::HawkesParams::make(0.5, 1.5, 2.0);
    const auto s = tc::simulate(truth, tc::EventSeries({}, 0.0), 0.0, 3000.0, 14);
    const auto poisson = tc::HawkesParams::make(static_cast<double>(s.size()) / s.horizon(), 1e-9, 1.0);
    EXPECT_LT(tc::ks_exp1(tc::time_rescale(poisson, s)).p_value, 1e-6);
}

TEST(Calibration, GridAndCounts) {
    const auto p = tc::HawkesParams::make(0.5, 1.0, 2.0);
    const tc::EventSeries s({1.0, 2.0, 3.0}, 4.0);
    const auto c = tc::cumulative_calibration(p, s, 5);
    ASSERT_EQ(c.size(), 5u);
    EXPECT_EQ(c.front().t, 0.0);
    EXPECT_EQ(c.back().t, 4.0);
    EXPECT_EQ(c[2].observed, 2u);  // t = 2 counts T_i <= t
    EXPECT_EQ(c.back().observed, 3u);
    EXPECT_NEAR(c.back().expected, tc::compensator(p, s, 4.0), 1e-12);
}

TEST(KernelCurve, Values) {
    const auto p = tc::HawkesParams::make(0.5, 1.0, 2.0);
    const auto k = tc::kernel_curve(p, 2.0, 3);
    ASSERT_EQ(k.size(), 3u);
    EXPECT_EQ(k[0].value, 1.0);
    EXPECT_NEAR(k[2].value, std::exp(-4.0), 1e-15);
}

TEST(RiceBins, ExactInIntegers) {
    EXPECT_EQ(tc::rice_bins(1671), 24u);
    EXPECT_EQ(tc::rice_bins(1), 2u);
    EXPECT_EQ(tc::rice_bins(1000), 20u);  // exact cube: 2 * 10
    EXPECT_EQ(tc::rice_bins(1001), 21u);
    EXPECT_EQ(tc::rice_bins(125), 10u);
    for (std::size_t n = 1; n < 5000; ++n) {
        const auto k = tc::rice_bins(n);
        ASSERT_GE(k * k * k, 8 * n) << n;
        ASSERT_LT((k - 1) * (k - 1) * (k - 1), 8 * n) << n;
    }
}

TEST(Histogram, EqualWidthLastBinClosed) {
    const std::vector<double> x{0.0, 1.0, 2.0, 3.0, 4.0};
    const auto h = tc::histogram(x, 4);
    ASSERT_EQ(h.size(), 4u);
    EXPECT_EQ(h[0].count, 1u);
    EXPECT_EQ(h[3].count, 2u);  // 3 and the max
    std::size_t total = 0;
    for (const auto& b : h) total += b.count;
    EXPECT_EQ(total, x.size());
    const auto one = tc::histogram(std::vector<double>{7.0, 7.0}, 5);
    ASSERT_EQ(one.size(), 1u);
    EXPECT_EQ(one[0].left, 6.5);
    EXPECT_EQ(one[0].count, 2u);
}

TEST(GammaFixedLocation, MatchesScipy) {
    const std::vector<double> x{1.2, 3.4, 2.2, 0.7, 5.1, 2.9, 1.8, 4.4, 2.5, 3.0, 0.9, 1.1};
    const auto g = tc::fit_gamma_fixed_location(x, 0.0);
    EXPECT_NEAR(g.shape, 3.062007390414251, 1e-5 * 3.06);
    EXPECT_NEAR(g.scale, 0.7946856499925474, 1e-5);
    EXPECT_NEAR(g.log_likelihood, -19.567627711026645, 1e-8);
    const auto shifted = tc::fit_gamma_fixed_location(x, 0.5);
    EXPECT_NEAR(shifted.shape, 1.6191417321629302, 1e-5 * 1.62);
    EXPECT_NEAR(shifted.scale, 1.1940482386002678, 1e-5);
    EXPECT_THROW(tc::fit_gamma_fixed_location(x, 0.7), tc::FitError);
}

TEST(Gamma3, RecoversParameters) {
    std::mt19937_64 rng(31);
    std::gamma_distribution<double> dist(4.0, 2.5);
    std::vector<double> x(100000);
    for (auto& v : x) v = 10.0 + dist(rng);
    const auto g = tc::fit_gamma3(x);
    EXPECT_NEAR(g.shape, 4.0, 0.4);
    EXPECT_NEAR(g.scale, 2.5, 0.25);
    EXPECT_NEAR(g.location, 10.0, 0.5);
    EXPECT_NEAR(g.log_likelihood, tc::gamma3_log_likelihood(x, g), 1e-6 * std::abs(g.log_likelihood));
    EXPECT_THROW(tc::fit_gamma3(std::vector<double>(5, 1.0)), tc::InsufficientDataError);
}
