#include "transitcast/data.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

#include "csv.hpp"
#include "transitcast/errors.hpp"
#include "transitcast/random.hpp"
#include "transitcast/serialize.hpp"

namespace transitcast {

namespace {

using namespace std::chrono;

bool parse_uint(std::string_view text, unsigned& out) {
    if (text.empty()) return false;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
    return ec == std::errc{} && ptr == text.data() + text.size();
}

std::string two_digits(unsigned v) {
    std::string s = std::to_string(v);
    return s.size() < 2 ? "0" + s : s;
}

}  // namespace

bool CivilDate::valid() const noexcept {
    return year_month_day{std::chrono::year{year}, std::chrono::month{month}, std::chrono::day{day}}.ok();
}

sys_days CivilDate::to_sys_days() const {
    return sys_days{year_month_day{std::chrono::year{year}, std::chrono::month{month}, std::chrono::day{day}}};
}

CivilDate CivilDate::from_sys_days(sys_days d) {
    const year_month_day ymd{d};
    return CivilDate{static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                     static_cast<unsigned>(ymd.day())};
}

CivilDate CivilDate::parse(std::string_view text) {
    while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
    while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
    unsigned y = 0, m = 0, d = 0;
    if (text.size() != 10 || text[4] != '-' || text[7] != '-' || !parse_uint(text.substr(0, 4), y) ||
        !parse_uint(text.substr(5, 2), m) || !parse_uint(text.substr(8, 2), d)) {
        throw ArgumentError("invalid date '" + std::string(text) + "', expected YYYY-MM-DD");
    }
    CivilDate date{static_cast<int>(y), m, d};
    if (!date.valid()) throw ArgumentError("invalid calendar date '" + std::string(text) + "'");
    return date;
}

std::string CivilDate::to_string() const {
    std::string y = std::to_string(year);
    while (y.size() < 4) y.insert(y.begin(), '0');
    return y + "-" + two_digits(month) + "-" + two_digits(day);
}

CivilDate CivilDate::plus_days(std::int64_t n) const {
    return from_sys_days(to_sys_days() + days{n});
}

std::int64_t days_between(const CivilDate& a, const CivilDate& b) {
    return (b.to_sys_days() - a.to_sys_days()).count();
}

CivilDateTime CivilDateTime::parse(std::string_view text) {
    while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
    while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
    auto fail = [&] {
        return ArgumentError("invalid timestamp '" + std::string(text) + "', expected YYYY-MM-DDTHH:MM:SS");
    };
    if (text.size() < 19 || (text[10] != 'T' && text[10] != ' ') || text[13] != ':' || text[16] != ':') {
        throw fail();
    }
    CivilDateTime out;
    try {
        out.date = CivilDate::parse(text.substr(0, 10));
    } catch (const ArgumentError&) {
        throw fail();
    }
    unsigned sec_whole = 0;
    if (!parse_uint(text.substr(11, 2), out.hour) || !parse_uint(text.substr(14, 2), out.minute) ||
        !parse_uint(text.substr(17, 2), sec_whole) || out.hour > 23 || out.minute > 59 || sec_whole > 60) {
        throw fail();
    }
    out.second = sec_whole;
    if (text.size() > 19) {
        if (text[19] != '.') throw fail();
        const auto frac = detail::parse_double("0" + std::string(text.substr(19)));
        if (!frac || text.size() == 20) throw fail();
        out.second += *frac;
    }
    return out;
}

std::string CivilDateTime::to_string() const {
    const auto whole = static_cast<long long>(std::llround(second));
    // 59.6 s rolls into the next minute (and possibly the next day).
    const long long total = static_cast<long long>(hour) * 3600 + minute * 60 + whole;
    const long long day_shift = total / 86400;
    const long long rem = total % 86400;
    const CivilDate d = date.plus_days(day_shift);
    return d.to_string() + "T" + two_digits(static_cast<unsigned>(rem / 3600)) + ":" +
           two_digits(static_cast<unsigned>((rem / 60) % 60)) + ":" + two_digits(static_cast<unsigned>(rem % 60));
}

double CivilDateTime::hours_since(const CivilDateTime& origin) const {
    const auto day_diff = static_cast<double>(days_between(origin.date, date));
    const double sec_diff = (static_cast<double>(hour) - origin.hour) * 3600.0 +
                            (static_cast<double>(minute) - origin.minute) * 60.0 + (second - origin.second);
    return day_diff * 24.0 + sec_diff / 3600.0;
}

CivilDateTime CivilDateTime::from_hours(const CivilDateTime& origin, double hours) {
    const double origin_seconds = origin.hour * 3600.0 + origin.minute * 60.0 + origin.second;
    const double total = origin_seconds + hours * 3600.0;
    const double day_count = std::floor(total / 86400.0);
    double rem = total - day_count * 86400.0;
    CivilDateTime out;
    out.date = origin.date.plus_days(static_cast<std::int64_t>(day_count));
    out.hour = static_cast<unsigned>(rem / 3600.0);
    rem -= out.hour * 3600.0;
    out.minute = static_cast<unsigned>(rem / 60.0);
    out.second = rem - out.minute * 60.0;
    return out;
}

std::string_view to_string(Season s) {
    switch (s) {
        case Season::winter: return "winter";
        case Season::spring: return "spring";
        case Season::summer: return "summer";
        case Season::fall: return "fall";
    }
    return "unknown";
}

CalendarFields derive_calendar(const CivilDate& date) {
    const weekday wd{date.to_sys_days()};
    const int dow = static_cast<int>(wd.iso_encoding()) - 1;
    Season season = Season::winter;
    switch (date.month) {
        case 3: case 4: case 5: season = Season::spring; break;
        case 6: case 7: case 8: season = Season::summer; break;
        case 9: case 10: case 11: season = Season::fall; break;
        default: season = Season::winter; break;
    }
    return {dow, season};
}

DailyRecord make_daily_record(CivilDate date, double target, double pressure, double wind_speed,
                              double avg_temp, double precipitation) {
    const auto cal = derive_calendar(date);
    return DailyRecord{date, target, pressure, wind_speed, avg_temp, precipitation, cal.day_of_week, cal.season};
}

DailySeries::DailySeries(std::vector<DailyRecord> records) : records_(std::move(records)) {
    for (std::size_t i = 0; i < records_.size(); ++i) {
        const auto& r = records_[i];
        if (!r.date.valid()) throw InvariantError("invalid date in daily series");
        if (!(r.target >= 0.0)) throw InvariantError("negative target on " + r.date.to_string());
        if (derive_calendar(r.date) != CalendarFields{r.day_of_week, r.season}) {
            throw InvariantError("calendar fields inconsistent with date " + r.date.to_string());
        }
        if (i > 0 && !(records_[i - 1].date < r.date)) {
            throw InvariantError("daily series dates must be strictly increasing at " + r.date.to_string());
        }
    }
}

std::vector<DateGap> DailySeries::gaps() const {
    std::vector<DateGap> out;
    for (std::size_t i = 1; i < records_.size(); ++i) {
        const auto step = days_between(records_[i - 1].date, records_[i].date);
        if (step > 1) out.push_back({records_[i - 1].date, records_[i].date, step - 1});
    }
    return out;
}

std::vector<double> DailySeries::targets() const {
    std::vector<double> out;
    out.reserve(records_.size());
    for (const auto& r : records_) out.push_back(r.target);
    return out;
}

DailySeries parse_daily_csv(const std::filesystem::path& path, const DailySchema& schema) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open daily CSV '" + path.string() + "'");
    return parse_daily_csv(in, schema, path.string());
}

DailySeries parse_daily_csv(std::istream& in, const DailySchema& schema, std::string_view source_name) {
    const std::string source{source_name};
    detail::CsvReader reader(in);
    const auto header = reader.next();
    if (!header) throw EmptySeriesError(source + ": empty file, header row required");

    const std::array<const std::string*, 6> wanted{&schema.date,     &schema.target,   &schema.pressure,
                                                   &schema.wind_speed, &schema.avg_temp, &schema.precipitation};
    std::array<std::size_t, 6> index{};
    for (std::size_t k = 0; k < wanted.size(); ++k) {
        const auto it = std::find(header->fields.begin(), header->fields.end(), *wanted[k]);
        if (it == header->fields.end()) {
            throw SchemaError(*wanted[k], source + ": missing column '" + *wanted[k] + "'");
        }
        index[k] = static_cast<std::size_t>(it - header->fields.begin());
    }

    std::vector<DailyRecord> records;
    std::map<CivilDate, std::size_t> seen;
    while (auto row = reader.next()) {
        const auto where = source + ":" + std::to_string(row->line);
        if (row->fields.size() != header->fields.size()) {
            throw ParseError(row->line, where + ": expected " + std::to_string(header->fields.size()) +
                                            " fields, found " + std::to_string(row->fields.size()));
        }
        CivilDate date;
        try {
            date = CivilDate::parse(row->fields[index[0]]);
        } catch (const ArgumentError& e) {
            throw ParseError(row->line, where + ": " + e.what());
        }
        std::array<double, 5> values{};
        for (std::size_t k = 1; k < 6; ++k) {
            const auto v = detail::parse_double(row->fields[index[k]]);
            if (!v) {
                throw ParseError(row->line, where + ": cannot parse '" + row->fields[index[k]] + "' in column '" +
                                                *wanted[k] + "'");
            }
            values[k - 1] = *v;
        }
        if (values[0] < 0.0) throw ParseError(row->line, where + ": negative target");
        if (const auto [it, inserted] = seen.emplace(date, row->line); !inserted) {
            throw DuplicateDateError(where + ": duplicate date " + date.to_string() + " (first seen on line " +
                                     std::to_string(it->second) + ")");
        }
        records.push_back(make_daily_record(date, values[0], values[1], values[2], values[3], values[4]));
    }
    std::sort(records.begin(), records.end(),
              [](const DailyRecord& a, const DailyRecord& b) { return a.date < b.date; });
    return DailySeries(std::move(records));
}

void write_daily_csv(const DailySeries& series, std::ostream& out) {
    out << "date,target,pressure,wind_speed,avg_temp,precipitation\n";
    for (const auto& r : series.records()) {
        out << r.date.to_string() << ',' << format_number(r.target) << ',' << format_number(r.pressure) << ','
            << format_number(r.wind_speed) << ',' << format_number(r.avg_temp) << ','
            << format_number(r.precipitation) << '\n';
    }
}

void write_daily_csv(const DailySeries& series, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write '" + path.string() + "'");
    write_daily_csv(series, out);
}

namespace {

void check_range(const std::vector<double>& times, double horizon) {
    if (!std::isfinite(horizon) || horizon < 0.0) throw RangeError("event horizon must be finite and >= 0");
    for (double t : times) {
        if (!std::isfinite(t) || t < 0.0) throw RangeError("event time before origin or not finite");
    }
}

}  // namespace

EventSeries::EventSeries(std::vector<double> times, double horizon) {
    check_range(times, horizon);
    std::stable_sort(times.begin(), times.end());
    for (std::size_t i = 1; i < times.size(); ++i) {
        if (times[i] <= times[i - 1]) {
            times[i] = times[i - 1] + kTieJitterHours;
            // At very large magnitudes the jitter can vanish in rounding.
            if (times[i] <= times[i - 1]) times[i] = std::nextafter(times[i - 1], INFINITY);
        }
    }
    if (!times.empty() && times.back() > horizon) {
        // Only jitter may legitimately carry an event past the horizon.
        if (times.back() - horizon > kTieJitterHours * static_cast<double>(times.size())) {
            throw RangeError("event time beyond horizon");
        }
        horizon = times.back();
    }
    times_ = std::move(times);
    horizon_ = horizon;
}

EventSeries EventSeries::unnormalized(std::vector<double> times, double horizon) {
    check_range(times, horizon);
    for (double t : times) {
        if (t > horizon) throw RangeError("event time beyond horizon");
    }
    EventSeries s;
    s.times_ = std::move(times);
    s.horizon_ = horizon;
    return s;
}

EventSeries EventSeries::before(double t) const {
    const auto end = std::lower_bound(times_.begin(), times_.end(), t);
    EventSeries s;
    s.times_.assign(times_.begin(), end);
    s.horizon_ = std::min(horizon_, std::max(t, 0.0));
    if (!s.times_.empty()) s.horizon_ = std::max(s.horizon_, s.times_.back());
    return s;
}

EventSeries parse_event_csv(const std::filesystem::path& path, const EventCsvOptions& options) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open event CSV '" + path.string() + "'");
    return parse_event_csv(in, options, path.string());
}

EventSeries parse_event_csv(std::istream& in, const EventCsvOptions& options, std::string_view source_name) {
    const std::string source{source_name};
    detail::CsvReader reader(in);
    const auto header = reader.next();
    if (!header) throw EmptySeriesError(source + ": empty file, header row required");
    std::vector<double> times;
    while (auto row = reader.next()) {
        const auto where = source + ":" + std::to_string(row->line);
        CivilDateTime stamp;
        try {
            stamp = CivilDateTime::parse(row->fields.front());
        } catch (const ArgumentError& e) {
            throw ParseError(row->line, where + ": " + e.what());
        }
        const double h = stamp.hours_since(options.origin);
        if (h < 0.0) throw RangeError(where + ": event " + row->fields.front() + " precedes origin");
        times.push_back(h);
    }
    if (times.empty()) throw EmptySeriesError(source + ": no events");
    double horizon = *std::max_element(times.begin(), times.end());
    if (options.end_hours) horizon = std::max(horizon, *options.end_hours);
    return EventSeries(std::move(times), horizon);
}

void write_event_csv(const EventSeries& series, const CivilDateTime& origin, std::ostream& out) {
    out << "timestamp\n";
    for (double t : series.times()) out << CivilDateTime::from_hours(origin, t).to_string() << '\n';
}

std::span<const double, 7> synth_weekday_profile() {
    // Mon..Sun: weekday plateau with distinct levels, deep weekend trough.
    static constexpr std::array<double, 7> profile{0.55, 0.75, 0.85, 0.65, 0.45, -1.25, -2.0};
    return profile;
}

DailySeries synth_daily(const SynthDailyOptions& o) {
    if (o.n_days < 10) throw ArgumentError("synth_daily requires n_days >= 10");
    if (o.noise_sd < 0.0) throw ArgumentError("noise_sd must be >= 0");
    Rng rng(o.seed);
    std::normal_distribution<double> standard(0.0, 1.0);
    const auto profile = synth_weekday_profile();
    std::vector<DailyRecord> records;
    records.reserve(o.n_days);
    for (std::size_t i = 0; i < o.n_days; ++i) {
        const CivilDate date = o.start.plus_days(static_cast<std::int64_t>(i));
        const auto cal = derive_calendar(date);
        const auto jan1 = CivilDate{date.year, 1, 1};
        const double doy = static_cast<double>(days_between(jan1, date));
        const double seasonal_phase = std::sin(2.0 * std::numbers::pi * doy / 365.25);

        // Weather draws happen unconditionally so the stream does not
        // depend on the amplitudes.
        const double pressure = 1013.0 + 8.0 * standard(rng);
        const double wind = std::abs(15.0 + 6.0 * standard(rng));
        const double temp = 10.0 - 12.0 * std::cos(2.0 * std::numbers::pi * (doy - 15.0) / 365.25) + 3.0 * standard(rng);
        const double wet = open_uniform(rng);
        const double amount = -5.0 * std::log(open_uniform(rng));
        const double precipitation = wet < 0.3 ? amount : 0.0;
        const double noise = standard(rng);

        double target = o.base + o.weekly_amplitude * profile[static_cast<std::size_t>(cal.day_of_week)] +
                        o.seasonal_amplitude * seasonal_phase + o.weather_effect * precipitation +
                        o.noise_sd * noise;
        target = std::max(target, 0.0);
        records.push_back(make_daily_record(date, target, pressure, wind, temp, precipitation));
    }
    return DailySeries(std::move(records));
}

}  // namespace transitcast
