#include "transitcast/features.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "transitcast/errors.hpp"
#include "transitcast/serialize.hpp"

namespace transitcast {

namespace {

constexpr std::array<std::string_view, 7> kDayNames{"mon", "tue", "wed", "thu", "fri", "sat", "sun"};
constexpr std::array<std::string_view, 4> kSeasonNames{"winter", "spring", "summer", "fall"};
constexpr std::array<std::string_view, 4> kWeatherNames{"pressure", "wind_speed", "avg_temp", "precipitation"};

// Appends one day's values in the column order of per_day_variables().
void append_day(const DailyRecord& r, Blend blend, bool onehot, std::vector<double>& row) {
    row.push_back(r.target);
    if (blend.dow) {
        if (onehot) {
            for (int d = 0; d < 7; ++d) row.push_back(r.day_of_week == d ? 1.0 : 0.0);
        } else {
            row.push_back(static_cast<double>(r.day_of_week));
        }
    }
    if (blend.season) {
        const int s = static_cast<int>(r.season);
        if (onehot) {
            for (int k = 0; k < 4; ++k) row.push_back(s == k ? 1.0 : 0.0);
        } else {
            row.push_back(static_cast<double>(s));
        }
    }
    if (blend.weather) {
        row.push_back(r.pressure);
        row.push_back(r.wind_speed);
        row.push_back(r.avg_temp);
        row.push_back(r.precipitation);
    }
}

}  // namespace

Blend Blend::from_mask(int mask) {
    if (mask < 0 || mask > 7) throw ArgumentError("blend mask out of range");
    return Blend{(mask & 1) != 0, (mask & 2) != 0, (mask & 4) != 0};
}

std::string Blend::name() const {
    std::string out;
    auto add = [&](std::string_view part) {
        if (!out.empty()) out += '+';
        out += part;
    };
    if (dow) add("dow");
    if (season) add("season");
    if (weather) add("weather");
    return out.empty() ? "lag_only" : out;
}

Blend Blend::parse(std::string_view text) {
    Blend b;
    if (text == "lag_only" || text == "none" || text.empty()) return b;
    if (text == "all") return Blend{true, true, true};
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto end = std::min(text.find_first_of("+,", pos), text.size());
        const auto part = text.substr(pos, end - pos);
        if (part == "dow") {
            b.dow = true;
        } else if (part == "season") {
            b.season = true;
        } else if (part == "weather") {
            b.weather = true;
        } else {
            throw ArgumentError("unknown covariate group '" + std::string(part) + "'");
        }
        pos = end + 1;
    }
    return b;
}

std::array<Blend, 8> all_blends() {
    std::array<Blend, 8> out;
    for (int m = 0; m < 8; ++m) out[static_cast<std::size_t>(m)] = Blend::from_mask(m);
    return out;
}

std::string_view to_string(Representation r) {
    switch (r) {
        case Representation::raw: return "raw";
        case Representation::scaled: return "scaled";
        case Representation::onehot: return "onehot";
        case Representation::scaled_onehot: return "scaled_onehot";
    }
    return "unknown";
}

Representation parse_representation(std::string_view text) {
    if (text == "raw") return Representation::raw;
    if (text == "scaled") return Representation::scaled;
    if (text == "onehot") return Representation::onehot;
    if (text == "scaled_onehot") return Representation::scaled_onehot;
    throw ArgumentError("unknown representation '" + std::string(text) + "'");
}

std::vector<std::string> per_day_variables(Blend blend, Representation representation) {
    const bool onehot = is_onehot(representation);
    std::vector<std::string> names{"target"};
    if (blend.dow) {
        if (onehot) {
            for (auto d : kDayNames) names.push_back("dow_" + std::string(d));
        } else {
            names.emplace_back("dow");
        }
    }
    if (blend.season) {
        if (onehot) {
            for (auto s : kSeasonNames) names.push_back("season_" + std::string(s));
        } else {
            names.emplace_back("season");
        }
    }
    if (blend.weather) {
        for (auto w : kWeatherNames) names.emplace_back(w);
    }
    return names;
}

WindowedDataset WindowedDataset::slice(std::size_t begin, std::size_t end) const {
    if (begin > end || end > rows()) throw ArgumentError("dataset slice out of range");
    WindowedDataset out;
    const auto n = static_cast<Eigen::Index>(end - begin);
    out.X = X.middleRows(static_cast<Eigen::Index>(begin), n);
    out.y = y.segment(static_cast<Eigen::Index>(begin), n);
    out.row_dates.assign(row_dates.begin() + static_cast<std::ptrdiff_t>(begin),
                         row_dates.begin() + static_cast<std::ptrdiff_t>(end));
    out.feature_names = feature_names;
    out.blend = blend;
    out.representation = representation;
    out.window = window;
    return out;
}

WindowedDataset build_windows(const DailySeries& series, Blend blend, Representation representation,
                              std::size_t window) {
    return build_windows(std::span<const DailyRecord>(series.records()), blend, representation,
                         WindowOptions{window, GapPolicy::drop});
}

WindowedDataset build_windows(std::span<const DailyRecord> records, Blend blend, Representation representation,
                              const WindowOptions& options) {
    const std::size_t w = options.window;
    if (w < 1) throw ArgumentError("window must be >= 1");
    if (records.size() <= w) {
        throw ArgumentError("series of length " + std::to_string(records.size()) + " too short for a " +
                            std::to_string(w) + "-day window");
    }
    const bool onehot = is_onehot(representation);
    const auto vars = per_day_variables(blend, representation);

    WindowedDataset out;
    out.blend = blend;
    out.representation = representation;
    out.window = w;
    for (std::size_t lag = w; lag >= 1; --lag) {
        for (const auto& v : vars) out.feature_names.push_back(v + "_lag" + std::to_string(lag));
    }

    std::vector<std::size_t> usable;
    usable.reserve(records.size() - w);
    for (std::size_t d = w; d < records.size(); ++d) {
        bool keep = true;
        if (options.gaps == GapPolicy::drop) {
            for (std::size_t k = d - w; k < d && keep; ++k) {
                keep = days_between(records[k].date, records[k + 1].date) == 1;
            }
        }
        if (keep) {
            usable.push_back(d);
        } else {
            ++out.dropped_windows;
        }
    }

    const auto cols = static_cast<Eigen::Index>(out.feature_names.size());
    out.X.resize(static_cast<Eigen::Index>(usable.size()), cols);
    out.y.resize(static_cast<Eigen::Index>(usable.size()));
    out.row_dates.reserve(usable.size());
    std::vector<double> row;
    row.reserve(static_cast<std::size_t>(cols));
    for (std::size_t r = 0; r < usable.size(); ++r) {
        const std::size_t d = usable[r];
        row.clear();
        for (std::size_t k = d - w; k < d; ++k) append_day(records[k], blend, onehot, row);
        const auto ri = static_cast<Eigen::Index>(r);
        for (Eigen::Index c = 0; c < cols; ++c) out.X(ri, c) = row[static_cast<std::size_t>(c)];
        out.y[ri] = records[d].target;
        out.row_dates.push_back(records[d].date);
    }
    if (!out.X.allFinite() || !out.y.allFinite()) throw InvariantError("windowed dataset contains non-finite values");
    return out;
}

Scaler Scaler::fit(const Eigen::MatrixXd& X) {
    if (X.rows() == 0) throw ArgumentError("cannot fit a scaler on zero rows");
    Scaler s;
    const auto n = static_cast<double>(X.rows());
    s.means_ = X.colwise().mean().transpose();
    s.stddevs_.resize(X.cols());
    s.passthrough_.assign(static_cast<std::size_t>(X.cols()), false);
    for (Eigen::Index c = 0; c < X.cols(); ++c) {
        const double var = (X.col(c).array() - s.means_[c]).square().sum() / n;
        s.stddevs_[c] = std::sqrt(var);
        const double col_min = X.col(c).minCoeff();
        const double col_max = X.col(c).maxCoeff();
        if (col_min == col_max || !(s.stddevs_[c] > 0.0)) s.passthrough_[static_cast<std::size_t>(c)] = true;
    }
    return s;
}

Eigen::MatrixXd Scaler::apply(const Eigen::MatrixXd& X) const {
    if (X.cols() != means_.size()) throw ArgumentError("scaler column count mismatch");
    Eigen::MatrixXd out = X;
    for (Eigen::Index c = 0; c < X.cols(); ++c) {
        if (passthrough_[static_cast<std::size_t>(c)]) continue;
        out.col(c) = (X.col(c).array() - means_[c]) / stddevs_[c];
    }
    return out;
}

Scaler fit_scaler(const Eigen::MatrixXd& X_train) { return Scaler::fit(X_train); }

Eigen::MatrixXd apply_scaler(const Scaler& scaler, const Eigen::MatrixXd& X) { return scaler.apply(X); }

std::string Experiment::name() const { return blend.name() + "/" + std::string(to_string(representation)); }

std::vector<Experiment> enumerate_experiments() {
    std::vector<Experiment> out;
    for (const auto& blend : all_blends()) {
        for (auto rep : {Representation::raw, Representation::scaled, Representation::onehot,
                         Representation::scaled_onehot}) {
            if (is_onehot(rep) && !blend.has_categorical()) continue;
            out.push_back({blend, rep});
        }
    }
    return out;
}

void write_dataset_csv(const WindowedDataset& dataset, std::ostream& out) {
    out << "date";
    for (const auto& name : dataset.feature_names) out << ',' << name;
    out << ",target\n";
    for (Eigen::Index r = 0; r < dataset.X.rows(); ++r) {
        out << dataset.row_dates[static_cast<std::size_t>(r)].to_string();
        for (Eigen::Index c = 0; c < dataset.X.cols(); ++c) out << ',' << format_number(dataset.X(r, c));
        out << ',' << format_number(dataset.y[r]) << '\n';
    }
}

}  // namespace transitcast
