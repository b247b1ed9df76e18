#include <gtest/gtest.h>

#include <chrono>
#include <map>
#include <sstream>

#include "transitcast/data.hpp"
#include "transitcast/errors.hpp"

namespace tc = transitcast;

namespace {

const std::string kHeader = "date,target,pressure,wind_speed,avg_temp,precipitation\n";

tc::DailySeries parse(const std::string& text, const tc::DailySchema& schema = {}) {
    std::istringstream in(text);
    return tc::parse_daily_csv(in, schema, "mem.csv");
}

tc::EventSeries parse_events(const std::string& text, tc::CivilDateTime origin, std::optional<double> end = {}) {
    std::istringstream in(text);
    return tc::parse_event_csv(in, tc::EventCsvOptions{origin, end}, "events.csv");
}

}  // namespace

TEST(CivilDate, ParseAndFormat) {
    const auto d = tc::CivilDate::parse("2023-07-29");
    EXPECT_EQ(d.year, 2023);
    EXPECT_EQ(d.month, 7u);
    EXPECT_EQ(d.day, 29u);
    EXPECT_EQ(d.to_string(), "2023-07-29");
    EXPECT_THROW(tc::CivilDate::parse("2023-02-29"), tc::ArgumentError);
    EXPECT_THROW(tc::CivilDate::parse("2023-7-29"), tc::ArgumentError);
    EXPECT_THROW(tc::CivilDate::parse("2023-07-29x"), tc::ArgumentError);
    EXPECT_NO_THROW(tc::CivilDate::parse("2020-02-29"));
}

TEST(CivilDate, DaysBetweenMatchesStudySpan) {
    // 2019-01-01 .. 2023-07-29 inclusive is 1671 days.
    EXPECT_EQ(tc::days_between(tc::CivilDate{2019, 1, 1}, tc::CivilDate{2023, 7, 29}) + 1, 1671);
    EXPECT_EQ(tc::CivilDate(2019, 12, 31).plus_days(1), tc::CivilDate(2020, 1, 1));
}

TEST(Calendar, KnownDates) {
    EXPECT_EQ(tc::derive_calendar({2019, 1, 1}), (tc::CalendarFields{1, tc::Season::winter}));
    EXPECT_EQ(tc::derive_calendar({2020, 6, 15}), (tc::CalendarFields{0, tc::Season::summer}));
    EXPECT_EQ(tc::derive_calendar({2023, 12, 1}), (tc::CalendarFields{4, tc::Season::winter}));
    EXPECT_EQ(tc::derive_calendar({2021, 3, 1}).season, tc::Season::spring);
    EXPECT_EQ(tc::derive_calendar({2021, 11, 30}).season, tc::Season::fall);
}

TEST(Calendar, ExhaustiveAgainstChrono) {
    // Independent oracle: std::chrono::weekday (Sunday = 0).
    using namespace std::chrono;
    for (tc::CivilDate d{2016, 1, 1}; d < tc::CivilDate{2025, 1, 1}; d = d.plus_days(1)) {
        const auto cal = tc::derive_calendar(d);
        const unsigned iso = weekday{sys_days{year{d.year} / month{d.month} / day{d.day}}}.iso_encoding();
        ASSERT_EQ(cal.day_of_week, static_cast<int>(iso) - 1) << d.to_string();
        const int m = static_cast<int>(d.month);
        const auto expected = m == 12 || m <= 2 ? tc::Season::winter
                              : m <= 5          ? tc::Season::spring
                              : m <= 8          ? tc::Season::summer
                                                : tc::Season::fall;
        ASSERT_EQ(cal.season, expected) << d.to_string();
    }
}

TEST(DailyCsv, ThreeRows) {
    const auto s = parse(kHeader + "2019-01-01,10,1000,5,1,0\n2019-01-02,20,1001,6,2,0.5\n2019-01-03,30,1002,7,3,0\n");
    ASSERT_EQ(s.size(), 3u);
    EXPECT_EQ(s.targets(), (std::vector<double>{10, 20, 30}));
    EXPECT_EQ(s[1].day_of_week, 2);
    EXPECT_TRUE(s.gaps().empty());
}

TEST(DailyCsv, SortsRowsAndReportsGaps) {
    const auto s = parse(kHeader + "2019-01-05,5,0,0,0,0\n2019-01-01,1,0,0,0,0\n2019-01-02,2,0,0,0,0\n");
    EXPECT_EQ(s.targets(), (std::vector<double>{1, 2, 5}));
    const auto gaps = s.gaps();
    ASSERT_EQ(gaps.size(), 1u);
    EXPECT_EQ(gaps[0].missing_days, 2);
    EXPECT_EQ(gaps[0].last_before, tc::CivilDate(2019, 1, 2));
}

TEST(DailyCsv, MissingColumnNamesTheColumn) {
    try {
        parse("date,target,pressure,wind_speed,avg_temp\n2019-01-01,1,0,0,0\n");
        FAIL() << "expected SchemaError";
    } catch (const tc::SchemaError& e) {
        EXPECT_EQ(e.column(), "precipitation");
        EXPECT_NE(std::string(e.what()).find("precipitation"), std::string::npos);
    }
}

TEST(DailyCsv, BadCellReportsLine) {
    try {
        parse(kHeader + "2019-01-01,1,0,0,0,0\n2019-01-02,abc,0,0,0,0\n");
        FAIL() << "expected ParseError";
    } catch (const tc::ParseError& e) {
        EXPECT_EQ(e.line(), 3u);
        EXPECT_NE(std::string(e.what()).find("mem.csv:3"), std::string::npos);
    }
}

TEST(DailyCsv, DuplicateDate) {
    EXPECT_THROW(parse(kHeader + "2019-01-01,1,0,0,0,0\n2019-01-01,2,0,0,0,0\n"), tc::DuplicateDateError);
}

TEST(DailyCsv, NegativeTargetRejected) {
    EXPECT_THROW(parse(kHeader + "2019-01-01,-1,0,0,0,0\n"), tc::ParseError);
}

TEST(DailyCsv, SchemaMapAndQuotedFields) {
    tc::DailySchema schema;
    schema.target = "delays";
    schema.date = "day";
    const auto s = parse("day,\"delays\",pressure,wind_speed,avg_temp,precipitation,extra\n"
                         "2019-01-01,337,1,2,3,4,\"a,b\"\n",
                         schema);
    ASSERT_EQ(s.size(), 1u);
    EXPECT_EQ(s[0].target, 337.0);
    EXPECT_EQ(s[0].precipitation, 4.0);
}

TEST(DailyCsv, RoundTripIsBitExact) {
    tc::SynthDailyOptions o;
    o.n_days = 60;
    o.weekly_amplitude = 30;
    o.noise_sd = 3.3;
    o.seed = 11;
    const auto s = tc::synth_daily(o);
    std::ostringstream out;
    tc::write_daily_csv(s, out);
    const auto back = parse(out.str());
    ASSERT_EQ(back.size(), s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        EXPECT_EQ(back[i].date, s[i].date);
        EXPECT_EQ(back[i].target, s[i].target);
        EXPECT_EQ(back[i].pressure, s[i].pressure);
        EXPECT_EQ(back[i].wind_speed, s[i].wind_speed);
        EXPECT_EQ(back[i].avg_temp, s[i].avg_temp);
        EXPECT_EQ(back[i].precipitation, s[i].precipitation);
    }
    std::ostringstream again;
    tc::write_daily_csv(back, again);
    EXPECT_EQ(out.str(), again.str());
}

TEST(EventCsv, HoursSinceOrigin) {
    const tc::CivilDateTime origin{tc::CivilDate{2019, 1, 1}};
    const auto s = parse_events("timestamp\n2019-01-01T01:00:00\n2019-01-01T02:00:00\n", origin);
    EXPECT_EQ(s.times(), (std::vector<double>{1.0, 2.0}));
    EXPECT_EQ(s.horizon(), 2.0);
}

TEST(EventCsv, SortsAndUsesConfiguredEnd) {
    const tc::CivilDateTime origin{tc::CivilDate{2019, 1, 1}};
    const auto s = parse_events("timestamp\n2019-01-01T05:00:00\n2019-01-01 02:00:00\n", origin, 10.0);
    EXPECT_EQ(s.times(), (std::vector<double>{2.0, 5.0}));
    EXPECT_EQ(s.horizon(), 10.0);
}

TEST(EventCsv, TiesAreJitteredStrictlyIncreasing) {
    const tc::CivilDateTime origin{tc::CivilDate{2019, 1, 1}};
    const auto s = parse_events("timestamp\n2019-01-01T03:00:00\n2019-01-01T03:00:00\n2019-01-01T03:00:00\n", origin);
    ASSERT_EQ(s.size(), 3u);
    for (std::size_t i = 1; i < s.size(); ++i) EXPECT_GT(s[i], s[i - 1]);
    EXPECT_NEAR(s[2] - s[0], 2 * tc::kTieJitterHours, 1e-12);
    EXPECT_LE(s.times().back(), s.horizon());
}

TEST(EventCsv, Errors) {
    const tc::CivilDateTime origin{tc::CivilDate{2019, 1, 2}};
    EXPECT_THROW(parse_events("timestamp\n2019-01-01T03:00:00\n", origin), tc::RangeError);
    EXPECT_THROW(parse_events("timestamp\n", origin), tc::EmptySeriesError);
    EXPECT_THROW(parse_events("", origin), tc::EmptySeriesError);
    EXPECT_THROW(parse_events("timestamp\n2019-01-02T25:00:00\n", origin), tc::ParseError);
}

TEST(EventCsv, FractionalSeconds) {
    const tc::CivilDateTime origin{tc::CivilDate{2019, 1, 1}};
    const auto s = parse_events("timestamp\n2019-01-01T00:00:36.5\n", origin);
    EXPECT_NEAR(s[0], 36.5 / 3600.0, 1e-15);
}

TEST(EventSeries, Invariants) {
    EXPECT_THROW(tc::EventSeries({-1.0}, 5.0), tc::RangeError);
    EXPECT_THROW(tc::EventSeries({6.0}, 5.0), tc::RangeError);
    const tc::EventSeries s({3.0, 1.0, 2.0}, 5.0);
    EXPECT_EQ(s.times(), (std::vector<double>{1.0, 2.0, 3.0}));
    EXPECT_EQ(s.before(2.5).size(), 2u);
}

TEST(SynthDaily, ConstantWhenAllEffectsOff) {
    tc::SynthDailyOptions o;
    o.n_days = 30;
    const auto s = tc::synth_daily(o);
    for (const auto& r : s.records()) EXPECT_EQ(r.target, 100.0);
}

TEST(SynthDaily, DeterministicInSeed) {
    tc::SynthDailyOptions o;
    o.n_days = 50;
    o.noise_sd = 4;
    o.seed = 99;
    const auto a = tc::synth_daily(o);
    const auto b = tc::synth_daily(o);
    EXPECT_EQ(a.targets(), b.targets());
    o.seed = 100;
    EXPECT_NE(a.targets(), tc::synth_daily(o).targets());
}

TEST(SynthDaily, WeekdayMeansFollowProfile) {
    tc::SynthDailyOptions o;
    o.n_days = 700;
    o.weekly_amplitude = 50;
    o.noise_sd = 2;
    o.seed = 5;
    const auto s = tc::synth_daily(o);
    std::map<int, std::pair<double, int>> by_day;
    for (const auto& r : s.records()) {
        by_day[r.day_of_week].first += r.target;
        by_day[r.day_of_week].second += 1;
    }
    const auto profile = tc::synth_weekday_profile();
    for (auto& [d, acc] : by_day) {
        const double mean = acc.first / acc.second;
        EXPECT_NEAR(mean, 100.0 + 50.0 * profile[static_cast<std::size_t>(d)], 1.0) << "weekday " << d;
    }
}

TEST(SynthDaily, RejectsShortSeries) {
    tc::SynthDailyOptions o;
    o.n_days = 9;
    EXPECT_THROW(tc::synth_daily(o), tc::ArgumentError);
}
