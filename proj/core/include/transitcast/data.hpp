#pragma once

#include <chrono>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace transitcast {

struct CivilDate {
    int year{1970};
    unsigned month{1};
    unsigned day{1};

    auto operator<=>(const CivilDate&) const = default;

    bool valid() const noexcept;
    std::chrono::sys_days to_sys_days() const;
    static CivilDate from_sys_days(std::chrono::sys_days d);

    // Strict YYYY-MM-DD. Throws ArgumentError on anything else.
    static CivilDate parse(std::string_view text);
    std::string to_string() const;

    CivilDate plus_days(std::int64_t days) const;
};

// Days from a to b (negative if b precedes a).
std::int64_t days_between(const CivilDate& a, const CivilDate& b);

struct CivilDateTime {
    CivilDate date;
    unsigned hour{0};
    unsigned minute{0};
    double second{0.0};

    // YYYY-MM-DDTHH:MM:SS, optional fractional seconds; a space may replace 'T'.
    static CivilDateTime parse(std::string_view text);
    // Whole seconds, rounded to nearest.
    std::string to_string() const;

    // Signed hours from `origin` to this instant.
    double hours_since(const CivilDateTime& origin) const;
    static CivilDateTime from_hours(const CivilDateTime& origin, double hours);
};

enum class Season { winter, spring, summer, fall };

std::string_view to_string(Season s);

struct CalendarFields {
    int day_of_week;  // Monday = 0
    Season season;    // meteorological: DJF, MAM, JJA, SON

    bool operator==(const CalendarFields&) const = default;
};

CalendarFields derive_calendar(const CivilDate& date);

struct DailyRecord {
    CivilDate date;
    double target{0.0};
    double pressure{0.0};       // hPa
    double wind_speed{0.0};     // km/h
    double avg_temp{0.0};       // degrees C
    double precipitation{0.0};  // mm
    int day_of_week{0};
    Season season{Season::winter};
};

// Builds a record with its calendar fields derived from the date.
DailyRecord make_daily_record(CivilDate date, double target, double pressure = 0.0,
                              double wind_speed = 0.0, double avg_temp = 0.0,
                              double precipitation = 0.0);

struct DateGap {
    CivilDate last_before;
    CivilDate first_after;
    std::int64_t missing_days;
};

// Daily observations with strictly increasing dates. Gaps are permitted and
// reported by gaps(); windowing drops windows that straddle one.
class DailySeries {
public:
    DailySeries() = default;
    explicit DailySeries(std::vector<DailyRecord> records);

    const std::vector<DailyRecord>& records() const noexcept { return records_; }
    std::size_t size() const noexcept { return records_.size(); }
    bool empty() const noexcept { return records_.empty(); }
    const DailyRecord& operator[](std::size_t i) const { return records_[i]; }

    std::vector<DateGap> gaps() const;
    std::vector<double> targets() const;

private:
    std::vector<DailyRecord> records_;
};

// Maps the canonical fields onto column names of an arbitrary CSV.
struct DailySchema {
    std::string date{"date"};
    std::string target{"target"};
    std::string pressure{"pressure"};
    std::string wind_speed{"wind_speed"};
    std::string avg_temp{"avg_temp"};
    std::string precipitation{"precipitation"};
};

DailySeries parse_daily_csv(const std::filesystem::path& path, const DailySchema& schema = {});
DailySeries parse_daily_csv(std::istream& in, const DailySchema& schema,
                            std::string_view source_name = "<stream>");

// Canonical layout: date,target,pressure,wind_speed,avg_temp,precipitation.
// Numbers use the shortest representation that round-trips.
void write_daily_csv(const DailySeries& series, std::ostream& out);
void write_daily_csv(const DailySeries& series, const std::filesystem::path& path);

// Offset applied to the later of two equal timestamps (hours).
inline constexpr double kTieJitterHours = 1e-6;

// Event times in hours since an origin, observed on [0, horizon].
class EventSeries {
public:
    EventSeries() = default;

    // Sorts, separates ties by kTieJitterHours in arrival order, and
    // extends the horizon to cover the last event if jitter pushed past it.
    // Throws RangeError for negative or non-finite times or a time beyond
    // the horizon.
    EventSeries(std::vector<double> times, double horizon);

    // Keeps the times as given (range-checked only). Operations that need
    // strict ordering validate it themselves.
    static EventSeries unnormalized(std::vector<double> times, double horizon);

    const std::vector<double>& times() const noexcept { return times_; }
    double horizon() const noexcept { return horizon_; }
    std::size_t size() const noexcept { return times_.size(); }
    bool empty() const noexcept { return times_.empty(); }
    double operator[](std::size_t i) const { return times_[i]; }

    // Events with time strictly less than t.
    EventSeries before(double t) const;

private:
    std::vector<double> times_;
    double horizon_{0.0};
};

struct EventCsvOptions {
    CivilDateTime origin;
    std::optional<double> end_hours;  // horizon = max(last event, end_hours)
};

EventSeries parse_event_csv(const std::filesystem::path& path, const EventCsvOptions& options);
EventSeries parse_event_csv(std::istream& in, const EventCsvOptions& options,
                            std::string_view source_name = "<stream>");
void write_event_csv(const EventSeries& series, const CivilDateTime& origin, std::ostream& out);

struct SynthDailyOptions {
    std::size_t n_days{730};
    double weekly_amplitude{0.0};
    double seasonal_amplitude{0.0};
    double weather_effect{0.0};
    double noise_sd{0.0};
    std::uint64_t seed{0};
    double base{100.0};
    CivilDate start{2019, 1, 1};
};

// Weekday profile used by synth_daily; every weekday has a distinct value.
std::span<const double, 7> synth_weekday_profile();

// target = base + weekly_amplitude * profile[dow]
//        + seasonal_amplitude * sin(2 pi * day_of_year / 365.25)
//        + weather_effect * precipitation + N(0, noise_sd), floored at 0.
// Weather columns are drawn independently of the target.
DailySeries synth_daily(const SynthDailyOptions& options);

}  // namespace transitcast
