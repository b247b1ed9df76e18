#include "transitcast/bench.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <numeric>
#include <ostream>

#include "transitcast/errors.hpp"
#include "transitcast/parallel.hpp"
#include "transitcast/random.hpp"
#include "transitcast/serialize.hpp"

namespace transitcast {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr std::array<std::pair<std::string_view, int>, 3> kGroups{{{"dow", 1}, {"season", 2}, {"weather", 4}}};

// Seeds for (cycle, model, experiment). Each level is re-mixed so that
// swapping the two indices does not give the same stream.
std::uint64_t fit_seed(std::uint64_t cycle_seed, std::size_t model, std::size_t experiment) {
    return splitmix64(derive_seed(splitmix64(derive_seed(cycle_seed, model)), experiment));
}

WindowedDataset select_rows(const WindowedDataset& ds, std::span<const std::size_t> rows) {
    WindowedDataset out;
    out.X.resize(static_cast<Eigen::Index>(rows.size()), ds.X.cols());
    out.y.resize(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out.X.row(static_cast<Eigen::Index>(i)) = ds.X.row(static_cast<Eigen::Index>(rows[i]));
        out.y[static_cast<Eigen::Index>(i)] = ds.y[static_cast<Eigen::Index>(rows[i])];
        out.row_dates.push_back(ds.row_dates[rows[i]]);
    }
    out.feature_names = ds.feature_names;
    out.blend = ds.blend;
    out.representation = ds.representation;
    out.window = ds.window;
    return out;
}

PreparedSplit finish_split(const WindowedDataset& train, const WindowedDataset& test, ScalerScope scope) {
    PreparedSplit out;
    out.feature_names = train.feature_names;
    out.y_train = train.y;
    out.y_test = test.y;
    if (!is_scaled(train.representation)) {
        out.X_train = train.X;
        out.X_test = test.X;
        return out;
    }
    Scaler scaler;
    if (scope == ScalerScope::train) {
        scaler = Scaler::fit(train.X);
    } else {
        Eigen::MatrixXd all(train.X.rows() + test.X.rows(), train.X.cols());
        all << train.X, test.X;
        scaler = Scaler::fit(all);
    }
    out.X_train = scaler.apply(train.X);
    out.X_test = scaler.apply(test.X);
    return out;
}

std::vector<std::size_t> bootstrap_indices(std::size_t n, Rng& rng) {
    std::vector<std::size_t> idx(n);
    for (auto& i : idx) i = std::min(n - 1, static_cast<std::size_t>(open_uniform(rng) * static_cast<double>(n)));
    std::sort(idx.begin(), idx.end());
    return idx;
}

double percentile(const std::vector<double>& sorted, double p) {
    const double h = static_cast<double>(sorted.size() - 1) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

// Fits on train and scores on test; failures are recorded, not thrown.
struct Scored {
    ExperimentStatus status{ExperimentStatus::failed};
    double rmse{kNaN};
    std::string message;
};

Scored score(const ModelSpec& spec, const PreparedSplit& split, std::uint64_t seed) {
    Scored out;
    try {
        auto model = make_regressor(*spec.kind, spec.hyperparameters);
        model->fit(split.X_train, split.y_train, FitContext{seed, split.feature_names, 1});
        out.rmse = rmse(model->predict(split.X_test), split.y_test);
        if (std::isfinite(out.rmse)) {
            out.status = ExperimentStatus::completed;
        } else {
            out.message = "non-finite test RMSE";
            out.rmse = kNaN;
        }
    } catch (const Error& e) {
        out.message = e.what();
    }
    return out;
}

// Picks the representation per blend and fills the headline numbers.
void select_representations(const std::vector<Experiment>& experiments, ModelCycle& mc) {
    std::array<double, 8> best_selection;
    best_selection.fill(std::numeric_limits<double>::infinity());
    mc.blend_rmse.fill(kNaN);
    for (std::size_t e = 0; e < experiments.size(); ++e) {
        const auto& o = mc.outcomes[e];
        if (o.status != ExperimentStatus::completed) continue;
        const auto b = static_cast<std::size_t>(experiments[e].blend.mask());
        if (o.selection_rmse < best_selection[b]) {
            best_selection[b] = o.selection_rmse;
            mc.blend_rmse[b] = o.rmse;
            mc.blend_representation[b] = experiments[e].representation;
        }
    }
    mc.no_additional_rmse = mc.blend_rmse[0];
    mc.any_data_rmse = kNaN;
    for (double v : mc.blend_rmse) {
        if (std::isfinite(v) && !(v >= mc.any_data_rmse)) mc.any_data_rmse = v;
    }
}

CycleResult run_cycle(const DailySeries& series, std::span<const ModelSpec> models,
                      const std::vector<Experiment>& experiments, const BenchmarkOptions& options,
                      std::size_t cycle) {
    CycleResult result;
    result.cycle_index = cycle;
    result.seed = derive_seed(options.seed, cycle);
    result.models.resize(models.size());
    for (auto& mc : result.models) mc.outcomes.resize(experiments.size());

    Rng rng(result.seed);
    std::vector<DailyRecord> resampled;
    std::vector<std::size_t> train_rows;
    if (options.resample == ResampleMode::sorted_full) {
        const auto& records = series.records();
        for (auto i : bootstrap_indices(records.size(), rng)) resampled.push_back(records[i]);
    }

    for (std::size_t e = 0; e < experiments.size(); ++e) {
        const auto& ex = experiments[e];
        WindowedDataset train;
        WindowedDataset test;
        if (options.resample == ResampleMode::sorted_full) {
            const auto ds = build_windows(resampled, ex.blend, ex.representation,
                                          WindowOptions{options.window, GapPolicy::positional});
            std::tie(train, test) = chrono_split(ds, options.train_fraction);
        } else {
            const auto ds = build_windows(series, ex.blend, ex.representation, options.window);
            const auto [full_train, full_test] = chrono_split(ds, options.train_fraction);
            // Rows are identical across experiments, so one draw serves all.
            if (train_rows.empty()) train_rows = bootstrap_indices(full_train.rows(), rng);
            train = select_rows(full_train, train_rows);
            test = full_test;
        }
        result.train_rows = train.rows();
        result.test_rows = test.rows();

        const auto split = finish_split(train, test, options.scaler_scope);
        std::optional<PreparedSplit> inner;
        if (options.selection == SelectionMode::validation) {
            const auto [inner_train, validation] = chrono_split(train, 1.0 - options.validation_fraction);
            inner = finish_split(inner_train, validation, options.scaler_scope);
        }

        for (std::size_t m = 0; m < models.size(); ++m) {
            auto& outcome = result.models[m].outcomes[e];
            if (!models[m].implemented()) {
                outcome.status = ExperimentStatus::skipped;
                outcome.rmse = outcome.selection_rmse = kNaN;
                outcome.message = "not implemented";
                continue;
            }
            const auto seed = fit_seed(result.seed, m, e);
            const auto tested = score(models[m], split, seed);
            outcome.status = tested.status;
            outcome.rmse = tested.rmse;
            outcome.selection_rmse = tested.rmse;
            outcome.message = tested.message;
            if (inner && tested.status == ExperimentStatus::completed) {
                const auto validated = score(models[m], *inner, seed);
                outcome.selection_rmse = validated.rmse;
                if (validated.status != ExperimentStatus::completed) {
                    outcome.status = ExperimentStatus::failed;
                    outcome.rmse = kNaN;
                    outcome.message = "validation fit: " + validated.message;
                }
            }
        }
    }
    for (auto& mc : result.models) select_representations(experiments, mc);
    return result;
}

std::vector<double> cycle_group_deltas(const ModelCycle& mc) {
    std::vector<double> out;
    for (const auto& [name, bit] : kGroups) {
        double with = std::numeric_limits<double>::infinity();
        double without = with;
        for (int b = 0; b < 8; ++b) {
            const double v = mc.blend_rmse[static_cast<std::size_t>(b)];
            if (!std::isfinite(v)) continue;
            double& slot = (b & bit) ? with : without;
            slot = std::min(slot, v);
        }
        out.push_back(std::isfinite(with) && std::isfinite(without) ? with - without : kNaN);
    }
    return out;
}

std::map<std::string, double> mean_group_deltas(const BenchmarkReport& report, std::size_t first_model,
                                                std::size_t end_model) {
    std::array<double, 3> sum{};
    std::array<std::size_t, 3> count{};
    for (const auto& cycle : report.cycles) {
        for (std::size_t m = first_model; m < end_model; ++m) {
            const auto deltas = cycle_group_deltas(cycle.models[m]);
            for (std::size_t g = 0; g < 3; ++g) {
                if (std::isfinite(deltas[g])) {
                    sum[g] += deltas[g];
                    ++count[g];
                }
            }
        }
    }
    std::map<std::string, double> out;
    for (std::size_t g = 0; g < 3; ++g) {
        out[std::string(kGroups[g].first)] = count[g] ? sum[g] / static_cast<double>(count[g]) : kNaN;
    }
    return out;
}

nlohmann::json distribution_json(const Distribution& d) {
    return {{"mean", d.mean}, {"ci_low", d.ci_low}, {"ci_high", d.ci_high}, {"n", d.values.size()},
            {"values", d.values}};
}

}  // namespace

std::size_t chrono_train_size(std::size_t rows, double train_fraction) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw ArgumentError("train_fraction must lie in (0, 1)");
    const auto train = static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(rows) + 0.5));
    if (train == 0 || train >= rows) {
        throw ArgumentError("chronological split of " + std::to_string(rows) + " rows leaves an empty side");
    }
    return train;
}

std::pair<WindowedDataset, WindowedDataset> chrono_split(const WindowedDataset& dataset, double train_fraction) {
    const auto train = chrono_train_size(dataset.rows(), train_fraction);
    return {dataset.slice(0, train), dataset.slice(train, dataset.rows())};
}

double rmse(std::span<const double> predicted, std::span<const double> actual) {
    if (predicted.size() != actual.size()) throw ArgumentError("rmse: length mismatch");
    if (predicted.empty()) throw ArgumentError("rmse: empty input");
    double sum = 0.0;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        const double d = predicted[i] - actual[i];
        sum += d * d;
    }
    return std::sqrt(sum / static_cast<double>(predicted.size()));
}

double rmse(const Eigen::VectorXd& predicted, const Eigen::VectorXd& actual) {
    return rmse(std::span<const double>(predicted.data(), static_cast<std::size_t>(predicted.size())),
                std::span<const double>(actual.data(), static_cast<std::size_t>(actual.size())));
}

PreparedSplit prepare_split(const WindowedDataset& dataset, double train_fraction, ScalerScope scope) {
    const auto [train, test] = chrono_split(dataset, train_fraction);
    return finish_split(train, test, scope);
}

ModelSpec model_spec(ModelKind kind, Hyperparameters overrides) {
    make_regressor(kind, overrides);  // validates the overrides
    return ModelSpec{std::string(to_string(kind)), kind, std::move(overrides)};
}

ModelSpec parse_model_spec(std::string_view name) {
    if (name == "svr" || name == "mlp") return ModelSpec{std::string(name), std::nullopt, {}};
    return model_spec(parse_model_kind(name));
}

std::vector<ModelSpec> full_lineup() {
    std::vector<ModelSpec> out;
    for (auto kind : all_model_kinds()) out.push_back(model_spec(kind));
    out.push_back(parse_model_spec("svr"));
    out.push_back(parse_model_spec("mlp"));
    return out;
}

std::string_view to_string(ResampleMode mode) {
    return mode == ResampleMode::sorted_full ? "sorted_full" : "train_only";
}

ResampleMode parse_resample_mode(std::string_view text) {
    if (text == "sorted_full") return ResampleMode::sorted_full;
    if (text == "train_only") return ResampleMode::train_only;
    throw ArgumentError("unknown resample mode '" + std::string(text) + "'");
}

std::string_view to_string(SelectionMode mode) { return mode == SelectionMode::test ? "test" : "validation"; }

SelectionMode parse_selection_mode(std::string_view text) {
    if (text == "test") return SelectionMode::test;
    if (text == "validation") return SelectionMode::validation;
    throw ArgumentError("unknown selection mode '" + std::string(text) + "'");
}

std::string_view to_string(ScalerScope scope) { return scope == ScalerScope::train ? "train" : "full"; }

ScalerScope parse_scaler_scope(std::string_view text) {
    if (text == "train") return ScalerScope::train;
    if (text == "full") return ScalerScope::full;
    throw ArgumentError("unknown scaler scope '" + std::string(text) + "'");
}

std::string_view to_string(ExperimentStatus status) {
    switch (status) {
        case ExperimentStatus::completed: return "completed";
        case ExperimentStatus::failed: return "failed";
        case ExperimentStatus::skipped: return "skipped";
    }
    return "unknown";
}

Distribution summarize(std::vector<double> values) {
    Distribution d;
    std::erase_if(values, [](double v) { return !std::isfinite(v); });
    d.values = values;
    if (values.empty()) {
        d.mean = d.ci_low = d.ci_high = kNaN;
        return d;
    }
    d.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
    std::sort(values.begin(), values.end());
    d.ci_low = percentile(values, 0.025);
    d.ci_high = percentile(values, 0.975);
    return d;
}

BenchmarkReport bootstrap_benchmark(const DailySeries& series, std::span<const ModelSpec> models,
                                    const BenchmarkOptions& options) {
    if (options.n_cycles == 0) throw ArgumentError("n_cycles must be >= 1");
    if (models.empty()) throw ArgumentError("no models to benchmark");
    if (options.window < 1) throw ArgumentError("window must be >= 1");
    if (series.size() <= options.window) throw InsufficientDataError("series too short for the window");
    chrono_train_size(series.size() - options.window, options.train_fraction);
    if (options.selection == SelectionMode::validation &&
        !(options.validation_fraction > 0.0 && options.validation_fraction < 1.0)) {
        throw ArgumentError("validation_fraction must lie in (0, 1)");
    }

    BenchmarkReport report;
    report.options = options;
    report.options.progress = nullptr;
    report.series_days = series.size();
    report.experiments = enumerate_experiments();
    report.cycles.resize(options.n_cycles);

    std::mutex progress_mutex;
    std::size_t finished = 0;
    parallel_for(options.n_cycles, options.threads, [&](std::size_t c) {
        report.cycles[c] = run_cycle(series, models, report.experiments, options, c);
        if (options.progress) {
            std::lock_guard lock(progress_mutex);
            options.progress(++finished, options.n_cycles);
        }
    });

    for (std::size_t m = 0; m < models.size(); ++m) {
        ModelSummary s;
        s.spec = models[m];
        s.experiments.resize(report.experiments.size());
        std::vector<double> no_additional;
        std::vector<double> any_data;
        std::vector<double> sums(report.experiments.size(), 0.0);
        for (const auto& cycle : report.cycles) {
            const auto& mc = cycle.models[m];
            no_additional.push_back(mc.no_additional_rmse);
            any_data.push_back(mc.any_data_rmse);
            for (std::size_t e = 0; e < mc.outcomes.size(); ++e) {
                auto& es = s.experiments[e];
                switch (mc.outcomes[e].status) {
                    case ExperimentStatus::completed:
                        ++es.completed;
                        sums[e] += mc.outcomes[e].rmse;
                        break;
                    case ExperimentStatus::failed: ++es.failed; break;
                    case ExperimentStatus::skipped: ++es.skipped; break;
                }
            }
        }
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t e = 0; e < s.experiments.size(); ++e) {
            auto& es = s.experiments[e];
            es.mean_rmse = es.completed ? sums[e] / static_cast<double>(es.completed) : kNaN;
            s.completed += es.completed;
            s.failed += es.failed;
            s.skipped += es.skipped;
            if (es.completed && es.mean_rmse < best) {
                best = es.mean_rmse;
                s.best = report.experiments[e];
            }
        }
        s.no_additional = summarize(std::move(no_additional));
        s.any_data = summarize(std::move(any_data));
        report.models.push_back(std::move(s));
    }
    for (std::size_t m = 0; m < models.size(); ++m) report.models[m].group_deltas = group_improvement(report, m);
    report.group_deltas = group_improvement(report);
    return report;
}

std::map<std::string, double> group_improvement(const BenchmarkReport& report) {
    return mean_group_deltas(report, 0, report.models.size());
}

std::map<std::string, double> group_improvement(const BenchmarkReport& report, std::size_t model_index) {
    if (model_index >= report.models.size()) throw ArgumentError("model index out of range");
    return mean_group_deltas(report, model_index, model_index + 1);
}

nlohmann::json to_json(const BenchmarkReport& report) {
    const auto& o = report.options;
    nlohmann::json doc;
    doc["format"] = "transitcast-benchmark";
    doc["version"] = 1;
    doc["options"] = {{"n_cycles", o.n_cycles},
                      {"train_fraction", o.train_fraction},
                      {"window", o.window},
                      {"seed", o.seed},
                      {"resample", to_string(o.resample)},
                      {"selection", to_string(o.selection)},
                      {"scaler_scope", to_string(o.scaler_scope)},
                      {"validation_fraction", o.validation_fraction}};
    doc["series_days"] = report.series_days;
    nlohmann::json experiments = nlohmann::json::array();
    for (const auto& e : report.experiments) experiments.push_back(e.name());
    doc["experiments"] = experiments;

    std::size_t completed = 0;
    std::size_t failed = 0;
    std::size_t skipped = 0;
    nlohmann::json models = nlohmann::json::array();
    for (const auto& s : report.models) {
        nlohmann::json m;
        m["name"] = s.spec.name;
        m["implemented"] = s.spec.implemented();
        m["hyperparameters"] = s.spec.hyperparameters;
        m["no_additional_rmse"] = distribution_json(s.no_additional);
        m["any_data_rmse"] = distribution_json(s.any_data);
        m["best_blend"] = s.best ? nlohmann::json(s.best->blend.name()) : nlohmann::json();
        m["best_representation"] = s.best ? nlohmann::json(to_string(s.best->representation)) : nlohmann::json();
        m["group_deltas"] = s.group_deltas;
        m["counts"] = {{"completed", s.completed}, {"failed", s.failed}, {"skipped", s.skipped}};
        nlohmann::json per_experiment = nlohmann::json::array();
        for (std::size_t e = 0; e < s.experiments.size(); ++e) {
            const auto& es = s.experiments[e];
            per_experiment.push_back({{"experiment", report.experiments[e].name()},
                                      {"mean_rmse", es.mean_rmse},
                                      {"completed", es.completed},
                                      {"failed", es.failed},
                                      {"skipped", es.skipped}});
        }
        m["experiments"] = per_experiment;
        completed += s.completed;
        failed += s.failed;
        skipped += s.skipped;
        models.push_back(std::move(m));
    }
    doc["models"] = models;
    doc["group_deltas"] = report.group_deltas;
    doc["counts"] = {{"completed", completed}, {"failed", failed}, {"skipped", skipped}};

    nlohmann::json cycles = nlohmann::json::array();
    for (const auto& c : report.cycles) {
        nlohmann::json per_model = nlohmann::json::array();
        for (std::size_t m = 0; m < c.models.size(); ++m) {
            const auto& mc = c.models[m];
            nlohmann::json blends = nlohmann::json::object();
            for (std::size_t b = 0; b < 8; ++b) {
                if (!mc.blend_representation[b]) continue;
                blends[Blend::from_mask(static_cast<int>(b)).name()] = {
                    {"rmse", mc.blend_rmse[b]}, {"representation", to_string(*mc.blend_representation[b])}};
            }
            nlohmann::json failures = nlohmann::json::array();
            for (std::size_t e = 0; e < mc.outcomes.size(); ++e) {
                if (mc.outcomes[e].status != ExperimentStatus::failed) continue;
                failures.push_back({{"experiment", report.experiments[e].name()}, {"message", mc.outcomes[e].message}});
            }
            per_model.push_back({{"model", report.models[m].spec.name},
                                 {"no_additional_rmse", mc.no_additional_rmse},
                                 {"any_data_rmse", mc.any_data_rmse},
                                 {"blends", blends},
                                 {"failures", failures}});
        }
        cycles.push_back({{"cycle", c.cycle_index},
                          {"seed", c.seed},
                          {"train_rows", c.train_rows},
                          {"test_rows", c.test_rows},
                          {"models", per_model}});
    }
    doc["cycles"] = cycles;
    return doc;
}

void write_model_bars_csv(const BenchmarkReport& report, std::ostream& out) {
    out << "model,status,no_additional_mean,no_additional_ci_low,no_additional_ci_high,"
           "any_data_mean,any_data_ci_low,any_data_ci_high,best_blend,best_representation,"
           "completed,failed,skipped\n";
    for (const auto& s : report.models) {
        out << s.spec.name << ',' << (s.spec.implemented() ? "ok" : "not_implemented");
        for (const auto* d : {&s.no_additional, &s.any_data}) {
            out << ',' << format_number(d->mean) << ',' << format_number(d->ci_low) << ','
                << format_number(d->ci_high);
        }
        out << ',' << (s.best ? s.best->blend.name() : "") << ','
            << (s.best ? std::string(to_string(s.best->representation)) : "") << ',' << s.completed << ','
            << s.failed << ',' << s.skipped << '\n';
    }
}

void write_group_deltas_csv(const BenchmarkReport& report, std::ostream& out) {
    out << "model,group,mean_delta_rmse\n";
    for (const auto& s : report.models) {
        for (const auto& [group, delta] : s.group_deltas) out << s.spec.name << ',' << group << ',' << format_number(delta) << '\n';
    }
    for (const auto& [group, delta] : report.group_deltas) out << "all," << group << ',' << format_number(delta) << '\n';
}

std::vector<FeatureImportance> permutation_importance(const Regressor& model, const Eigen::MatrixXd& X,
                                                      const Eigen::VectorXd& y,
                                                      std::span<const std::string> feature_names,
                                                      std::size_t n_repeats, std::uint64_t seed) {
    if (!model.fitted()) throw StateError("permutation importance needs a fitted model");
    if (n_repeats < 1) throw ArgumentError("n_repeats must be >= 1");
    if (feature_names.size() != static_cast<std::size_t>(X.cols())) {
        throw ArgumentError("feature_names length does not match X columns");
    }
    if (X.rows() != y.size() || X.rows() == 0) throw ArgumentError("X and y must have the same, non-zero, row count");

    const double baseline = rmse(model.predict(X), y);
    Eigen::MatrixXd work = X;
    std::vector<FeatureImportance> out;
    const auto n = static_cast<std::size_t>(X.rows());
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(j)));
        double total = 0.0;
        for (std::size_t r = 0; r < n_repeats; ++r) {
            for (std::size_t i = n - 1; i > 0; --i) {
                const auto k = std::min(i, static_cast<std::size_t>(open_uniform(rng) * static_cast<double>(i + 1)));
                std::swap(work(static_cast<Eigen::Index>(i), j), work(static_cast<Eigen::Index>(k), j));
            }
            total += rmse(model.predict(work), y) - baseline;
        }
        work.col(j) = X.col(j);
        out.push_back({feature_names[static_cast<std::size_t>(j)], total / static_cast<double>(n_repeats)});
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const FeatureImportance& a, const FeatureImportance& b) { return a.mean_delta_rmse > b.mean_delta_rmse; });
    return out;
}

}  // namespace transitcast
