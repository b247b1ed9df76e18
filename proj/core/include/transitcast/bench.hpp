#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "transitcast/data.hpp"
#include "transitcast/features.hpp"
#include "transitcast/models.hpp"

namespace transitcast {

// Training rows: fraction * rows rounded to nearest, halves rounded up.
// Throws ArgumentError if either side would be empty.
std::size_t chrono_train_size(std::size_t rows, double train_fraction);
std::pair<WindowedDataset, WindowedDataset> chrono_split(const WindowedDataset& dataset, double train_fraction = 0.8);

double rmse(std::span<const double> predicted, std::span<const double> actual);
double rmse(const Eigen::VectorXd& predicted, const Eigen::VectorXd& actual);

enum class ScalerScope {
    train,  // statistics from training rows only
    full,   // statistics from all rows (leaks test information; for comparison runs)
};

struct PreparedSplit {
    Eigen::MatrixXd X_train;
    Eigen::VectorXd y_train;
    Eigen::MatrixXd X_test;
    Eigen::VectorXd y_test;
    std::vector<std::string> feature_names;
};

// Chronological split, then z-scoring for scaled representations.
PreparedSplit prepare_split(const WindowedDataset& dataset, double train_fraction = 0.8,
                            ScalerScope scope = ScalerScope::train);

// A benchmark entry. Entries without a kind (svr, mlp) are placeholders that
// keep the ten-model report shape; all their experiments are skipped.
struct ModelSpec {
    std::string name;
    std::optional<ModelKind> kind;
    Hyperparameters hyperparameters;

    bool implemented() const noexcept { return kind.has_value(); }
};

ModelSpec model_spec(ModelKind kind, Hyperparameters overrides = {});
// Accepts every ModelKind name plus the placeholders "svr" and "mlp".
ModelSpec parse_model_spec(std::string_view name);
// The ten models of the original comparison, placeholders included.
std::vector<ModelSpec> full_lineup();

enum class ResampleMode {
    sorted_full,  // resample all days, sort by date, then window and split
    train_only,   // window and split the original series, resample training rows
};
enum class SelectionMode {
    test,        // representation per blend chosen by test RMSE
    validation,  // chosen on the last part of the training rows, then scored on test
};

std::string_view to_string(ResampleMode mode);
ResampleMode parse_resample_mode(std::string_view text);
std::string_view to_string(SelectionMode mode);
SelectionMode parse_selection_mode(std::string_view text);
std::string_view to_string(ScalerScope scope);
ScalerScope parse_scaler_scope(std::string_view text);

struct BenchmarkOptions {
    std::size_t n_cycles{100};
    double train_fraction{0.8};
    std::size_t window{5};
    std::uint64_t seed{0};
    unsigned threads{1};
    ResampleMode resample{ResampleMode::sorted_full};
    SelectionMode selection{SelectionMode::test};
    ScalerScope scaler_scope{ScalerScope::train};
    double validation_fraction{0.2};  // of the training rows, selection = validation only
    // Called after each finished cycle with (finished, total). May be called
    // from worker threads, but never concurrently.
    std::function<void(std::size_t, std::size_t)> progress;
};

enum class ExperimentStatus { completed, failed, skipped };
std::string_view to_string(ExperimentStatus status);

struct ExperimentOutcome {
    ExperimentStatus status{ExperimentStatus::skipped};
    double rmse{0.0};  // test RMSE, NaN unless completed
    double selection_rmse{0.0};  // RMSE used to pick the representation
    std::string message;
};

struct ModelCycle {
    std::vector<ExperimentOutcome> outcomes;  // aligned with BenchmarkReport::experiments
    // Test RMSE of the chosen representation per blend (mask order), NaN if
    // no representation of the blend completed.
    std::array<double, 8> blend_rmse{};
    std::array<std::optional<Representation>, 8> blend_representation{};
    double no_additional_rmse{0.0};  // lag-only blend
    double any_data_rmse{0.0};       // best blend
};

struct CycleResult {
    std::size_t cycle_index{0};
    std::uint64_t seed{0};
    std::size_t train_rows{0};
    std::size_t test_rows{0};
    std::vector<ModelCycle> models;  // aligned with BenchmarkReport::models
};

// Mean and percentile interval (2.5th / 97.5th, linear interpolation) of
// the finite values.
struct Distribution {
    std::vector<double> values;
    double mean{0.0};
    double ci_low{0.0};
    double ci_high{0.0};
};
Distribution summarize(std::vector<double> values);

struct ExperimentSummary {
    double mean_rmse{0.0};  // over cycles where the experiment completed
    std::size_t completed{0};
    std::size_t failed{0};
    std::size_t skipped{0};
};

struct ModelSummary {
    ModelSpec spec;
    Distribution no_additional;
    Distribution any_data;
    std::optional<Experiment> best;  // lowest mean test RMSE over cycles
    std::vector<ExperimentSummary> experiments;
    std::map<std::string, double> group_deltas;  // dow, season, weather
    std::size_t completed{0};
    std::size_t failed{0};
    std::size_t skipped{0};
};

struct BenchmarkReport {
    BenchmarkOptions options;
    std::size_t series_days{0};
    std::vector<Experiment> experiments;
    std::vector<ModelSummary> models;
    std::vector<CycleResult> cycles;
    std::map<std::string, double> group_deltas;  // over cycles and models
};

BenchmarkReport bootstrap_benchmark(const DailySeries& series, std::span<const ModelSpec> models,
                                    const BenchmarkOptions& options);

// For each group g: mean over cycles and models of
//   min RMSE over blends with g  -  min RMSE over blends without g.
// Negative means the group helps.
std::map<std::string, double> group_improvement(const BenchmarkReport& report);
// Same, restricted to one model.
std::map<std::string, double> group_improvement(const BenchmarkReport& report, std::size_t model_index);

nlohmann::json to_json(const BenchmarkReport& report);
// One row per model: headline RMSE means and intervals.
void write_model_bars_csv(const BenchmarkReport& report, std::ostream& out);
// One row per (model, group), plus model "all".
void write_group_deltas_csv(const BenchmarkReport& report, std::ostream& out);

struct FeatureImportance {
    std::string feature;
    double mean_delta_rmse{0.0};
};

// RMSE increase when one column is shuffled, averaged over n_repeats.
// Sorted descending; equal scores keep column order. Throws StateError for
// an unfitted model.
std::vector<FeatureImportance> permutation_importance(const Regressor& model, const Eigen::MatrixXd& X,
                                                      const Eigen::VectorXd& y,
                                                      std::span<const std::string> feature_names,
                                                      std::size_t n_repeats, std::uint64_t seed);

}  // namespace transitcast
