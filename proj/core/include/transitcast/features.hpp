#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "transitcast/data.hpp"

namespace transitcast {

// Optional covariate groups added on top of the lagged target.
struct Blend {
    bool dow{false};
    bool season{false};
    bool weather{false};

    auto operator<=>(const Blend&) const = default;

    bool has_categorical() const noexcept { return dow || season; }
    // bit 0 = dow, bit 1 = season, bit 2 = weather
    int mask() const noexcept { return (dow ? 1 : 0) | (season ? 2 : 0) | (weather ? 4 : 0); }
    static Blend from_mask(int mask);

    // "lag_only", or the groups joined by '+', e.g. "dow+weather".
    std::string name() const;
    static Blend parse(std::string_view text);
};

// The eight blends in mask order (lag_only first).
std::array<Blend, 8> all_blends();

enum class Representation { raw, scaled, onehot, scaled_onehot };

std::string_view to_string(Representation r);
Representation parse_representation(std::string_view text);
constexpr bool is_scaled(Representation r) noexcept {
    return r == Representation::scaled || r == Representation::scaled_onehot;
}
constexpr bool is_onehot(Representation r) noexcept {
    return r == Representation::onehot || r == Representation::scaled_onehot;
}

// Flattened sliding-window design matrix. Row k predicts y[k] = target on
// row_dates[k] from the `window` preceding records. Columns run oldest lag
// first; within a lag: target, day-of-week, season, weather.
//
// X holds the unscaled encoding (integer codes or indicators). For scaled
// representations the z-scoring is applied after the train/test split
// (see bench::prepare_split) so scaler statistics come from training rows.
struct WindowedDataset {
    Eigen::MatrixXd X;
    Eigen::VectorXd y;
    std::vector<CivilDate> row_dates;
    std::vector<std::string> feature_names;
    Blend blend;
    Representation representation{Representation::raw};
    std::size_t window{5};
    std::size_t dropped_windows{0};

    std::size_t rows() const noexcept { return static_cast<std::size_t>(X.rows()); }
    std::size_t cols() const noexcept { return static_cast<std::size_t>(X.cols()); }

    // Rows [begin, end) as a new dataset.
    WindowedDataset slice(std::size_t begin, std::size_t end) const;
};

enum class GapPolicy {
    drop,        // a window whose dates are not consecutive days is skipped
    positional,  // windows follow record order regardless of dates
};

struct WindowOptions {
    std::size_t window{5};
    GapPolicy gaps{GapPolicy::drop};
};

WindowedDataset build_windows(const DailySeries& series, Blend blend, Representation representation,
                              std::size_t window = 5);
WindowedDataset build_windows(std::span<const DailyRecord> records, Blend blend, Representation representation,
                              const WindowOptions& options);

// Column names for a blend/representation, without lag suffixes.
std::vector<std::string> per_day_variables(Blend blend, Representation representation);

// Per-column z-scoring. Columns with zero variance pass through unchanged.
class Scaler {
public:
    Scaler() = default;
    static Scaler fit(const Eigen::MatrixXd& X);

    Eigen::MatrixXd apply(const Eigen::MatrixXd& X) const;

    const Eigen::VectorXd& means() const noexcept { return means_; }
    const Eigen::VectorXd& stddevs() const noexcept { return stddevs_; }
    bool passthrough(Eigen::Index col) const { return passthrough_[static_cast<std::size_t>(col)]; }

private:
    Eigen::VectorXd means_;
    Eigen::VectorXd stddevs_;  // population (ddof = 0)
    std::vector<bool> passthrough_;
};

Scaler fit_scaler(const Eigen::MatrixXd& X_train);
Eigen::MatrixXd apply_scaler(const Scaler& scaler, const Eigen::MatrixXd& X);

struct Experiment {
    Blend blend;
    Representation representation;

    bool operator==(const Experiment&) const = default;
    std::string name() const;
};

// Every (blend, representation) pair, dropping the one-hot variants of
// blends with no categorical group: 6 * 4 + 2 * 2 = 28 experiments.
std::vector<Experiment> enumerate_experiments();

// Header: feature_names..., target; first column date.
void write_dataset_csv(const WindowedDataset& dataset, std::ostream& out);

}  // namespace transitcast
