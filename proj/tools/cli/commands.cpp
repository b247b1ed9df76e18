#include "cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>

#include "transitcast/bench.hpp"
#include "transitcast/data.hpp"
#include "transitcast/diagnostics.hpp"
#include "transitcast/errors.hpp"
#include "transitcast/features.hpp"
#include "transitcast/hawkes.hpp"
#include "transitcast/models.hpp"
#include "transitcast/serialize.hpp"
#include "transitcast/simulate.hpp"

namespace transitcast::cli {

namespace {

const CivilDateTime kEpoch{CivilDate{1970, 1, 1}};
const CivilDateTime kDefaultOrigin{CivilDate{2019, 1, 1}};

std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

DailySchema parse_schema(const std::vector<std::string>& entries) {
    DailySchema schema;
    for (const auto& entry : entries) {
        const auto eq = entry.find('=');
        if (eq == std::string::npos) throw ArgumentError("schema entry '" + entry + "' is not field=column");
        const auto field = entry.substr(0, eq);
        const auto column = entry.substr(eq + 1);
        if (field == "date") {
            schema.date = column;
        } else if (field == "target") {
            schema.target = column;
        } else if (field == "pressure") {
            schema.pressure = column;
        } else if (field == "wind_speed") {
            schema.wind_speed = column;
        } else if (field == "avg_temp") {
            schema.avg_temp = column;
        } else if (field == "precipitation") {
            schema.precipitation = column;
        } else {
            throw ArgumentError("unknown schema field '" + field + "'");
        }
    }
    return schema;
}

DailySeries load_daily(const DailyInputArgs& args, Manifest& manifest) {
    if (args.daily.empty()) throw ArgumentError("--daily is required");
    manifest.add_input(args.daily);
    return parse_daily_csv(args.daily, parse_schema(args.schema));
}

struct LoadedEvents {
    EventSeries series;
    CivilDateTime origin;
};

LoadedEvents load_events(const EventInputArgs& args, Manifest& manifest) {
    if (args.events.empty()) throw ArgumentError("--events is required");
    if (args.end_hours < 0.0) throw ArgumentError("--end-hours must be >= 0");
    manifest.add_input(args.events);
    CivilDateTime origin;
    if (args.origin.empty()) {
        const auto absolute = parse_event_csv(args.events, EventCsvOptions{kEpoch, std::nullopt});
        if (absolute.empty()) throw EmptySeriesError("event file '" + args.events + "' has no events");
        const auto day = static_cast<std::int64_t>(std::floor(absolute[0] / 24.0));
        origin = CivilDateTime{kEpoch.date.plus_days(day)};
    } else {
        origin = CivilDateTime::parse(args.origin);
    }
    std::optional<double> end;
    if (args.end_hours > 0.0) end = args.end_hours;
    return {parse_event_csv(args.events, EventCsvOptions{origin, end}), origin};
}

struct LoadedParams {
    HawkesParams params;
    std::optional<CivilDateTime> origin;
};

LoadedParams load_params(const ParamsArgs& args, Manifest& manifest) {
    LoadedParams out;
    if (args.params.empty()) {
        out.params = HawkesParams::make(args.mu, args.alpha, args.beta);
        return out;
    }
    manifest.add_input(args.params);
    std::ifstream in(args.params);
    if (!in) throw InputError("cannot open params file '" + args.params + "'");
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
        const nlohmann::json* node = &doc;
        if (node->contains("fit")) node = &node->at("fit");
        if (node->contains("params")) node = &node->at("params");
        out.params = node->get<HawkesParams>();
        if (doc.contains("origin")) out.origin = CivilDateTime::parse(doc.at("origin").get<std::string>());
    } catch (const nlohmann::json::exception& e) {
        throw InputError("params file '" + args.params + "': " + e.what());
    }
    return out;
}

template <class Row>
std::string to_csv(const std::string& header, const std::vector<Row>& rows, auto&& format_row) {
    std::ostringstream os;
    os << header << '\n';
    for (const auto& r : rows) os << format_row(r) << '\n';
    return os.str();
}

KsResult write_diagnostics(const HawkesParams& p, const EventSeries& series, std::size_t grid, double max_lag,
                           std::uint64_t seed, Manifest& manifest) {
    const auto rescaled = time_rescale(p, series);
    const auto ks = ks_exp1(rescaled);
    const double total = compensator(p, series, series.horizon());
    if (max_lag <= 0.0) max_lag = 5.0 * p.half_life();

    std::vector<std::size_t> idx(rescaled.u.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    manifest.write_output("rescaled.csv", to_csv("index,u", idx, [&](std::size_t i) {
                              return std::to_string(i) + ',' + format_number(rescaled.u[i]);
                          }));
    manifest.write_output("ecdf.csv", to_csv("x,ecdf,exp1_cdf", ecdf_vs_exp1(rescaled.u), [](const EcdfPoint& e) {
                              return format_number(e.x) + ',' + format_number(e.ecdf) + ',' + format_number(e.exp1_cdf);
                          }));
    manifest.write_output("calibration.csv",
                          to_csv("t,observed,expected", cumulative_calibration(p, series, grid),
                                 [](const CalibrationPoint& c) {
                                     return format_number(c.t) + ',' + std::to_string(c.observed) + ',' +
                                            format_number(c.expected);
                                 }));
    manifest.write_output("kernel.csv", to_csv("lag,value", kernel_curve(p, max_lag, 101), [](const KernelPoint& k) {
                              return format_number(k.lag) + ',' + format_number(k.value);
                          }));
    nlohmann::json doc;
    doc["seed"] = seed;
    doc["params"] = p;
    doc["n_events"] = series.size();
    doc["horizon_hours"] = series.horizon();
    doc["ks"] = ks;
    doc["compensator_total"] = total;
    doc["calibration_ratio"] = series.empty() ? nlohmann::json() : nlohmann::json(total / static_cast<double>(series.size()));
    manifest.write_json("diagnostics.json", doc);
    return ks;
}

void print_fit_table(const FitResult& fit, std::ostream& out) {
    const auto& p = fit.params;
    out << "n events      " << fit.n_events << '\n'
        << "mu            " << fixed(p.mu, 4) << " events/h\n"
        << "alpha         " << fixed(p.alpha, 4) << " events/h per event\n"
        << "beta          " << fixed(p.beta, 4) << " 1/h\n"
        << "branching     " << fixed(p.branching_ratio(), 4) << '\n'
        << "half-life     " << fixed(p.half_life(), 4) << " h\n"
        << "log-lik       " << fixed(fit.log_likelihood, 3) << '\n'
        << "converged     " << (fit.converged ? "yes" : "no") << " (" << fit.n_restarts_converged << '/'
        << fit.n_restarts_used << " restarts)\n";
}

nlohmann::json fit_document(const FitResult& fit, const CivilDateTime& origin, const EventSeries& series,
                            std::uint64_t seed) {
    return {{"format", "transitcast-hawkes-fit"},
            {"version", 1},
            {"seed", seed},
            {"origin", origin.to_string()},
            {"horizon_hours", series.horizon()},
            {"fit", fit}};
}

}  // namespace

int cmd_ingest(const CommonArgs& common, const IngestArgs& args, Manifest& manifest, std::ostream& out) {
    if (args.daily.daily.empty() && args.events.events.empty()) {
        throw ArgumentError("ingest needs --daily and/or --events");
    }
    if (args.max_gap_days < 0) throw ArgumentError("--max-gap-days must be >= 0");
    nlohmann::json summary;
    summary["seed"] = common.seed;

    if (!args.daily.daily.empty()) {
        const auto series = load_daily(args.daily, manifest);
        if (series.empty()) throw EmptySeriesError("daily file '" + args.daily.daily + "' has no rows");
        nlohmann::json gaps = nlohmann::json::array();
        std::int64_t missing = 0;
        for (const auto& g : series.gaps()) {
            if (args.max_gap_days > 0 && g.missing_days > args.max_gap_days) {
                throw InputError("gap of " + std::to_string(g.missing_days) + " days after " +
                                 g.last_before.to_string() + " exceeds --max-gap-days");
            }
            gaps.push_back({{"after", g.last_before.to_string()},
                            {"before", g.first_after.to_string()},
                            {"missing_days", g.missing_days}});
            missing += g.missing_days;
        }
        const auto targets = series.targets();
        const double mean = std::accumulate(targets.begin(), targets.end(), 0.0) / static_cast<double>(targets.size());
        double ss = 0.0;
        for (double t : targets) ss += (t - mean) * (t - mean);
        const auto bins = histogram(targets, rice_bins(targets.size()));

        nlohmann::json daily;
        daily["rows"] = series.size();
        daily["first_date"] = series.records().front().date.to_string();
        daily["last_date"] = series.records().back().date.to_string();
        daily["gaps"] = gaps;
        daily["missing_days"] = missing;
        daily["target"] = {{"min", *std::min_element(targets.begin(), targets.end())},
                           {"max", *std::max_element(targets.begin(), targets.end())},
                           {"mean", mean},
                           {"sd", std::sqrt(ss / static_cast<double>(targets.size()))}};
        daily["histogram_bins"] = bins.size();
        try {
            daily["gamma_fit"] = fit_gamma3(targets);
        } catch (const Error& e) {
            daily["gamma_fit"] = nullptr;
            daily["gamma_fit_error"] = e.what();
        }
        summary["daily"] = daily;

        std::ostringstream csv;
        write_daily_csv(series, csv);
        manifest.write_output("daily.csv", csv.str());
        manifest.write_output("histogram.csv", to_csv("left,right,count", bins, [](const HistogramBin& b) {
                                  return format_number(b.left) + ',' + format_number(b.right) + ',' +
                                         std::to_string(b.count);
                              }));
        out << "daily rows " << series.size() << ", " << daily["first_date"].get<std::string>() << " .. "
            << daily["last_date"].get<std::string>() << ", gaps " << gaps.size() << ", target range "
            << format_number(daily["target"]["min"].get<double>()) << " .. "
            << format_number(daily["target"]["max"].get<double>()) << '\n';
    }

    if (!args.events.events.empty()) {
        const auto [series, origin] = load_events(args.events, manifest);
        summary["events"] = {{"n_events", series.size()},
                             {"origin", origin.to_string()},
                             {"horizon_hours", series.horizon()},
                             {"first_hours", series.empty() ? nlohmann::json() : nlohmann::json(series[0])},
                             {"last_hours", series.empty() ? nlohmann::json() : nlohmann::json(series.times().back())}};
        std::ostringstream csv;
        write_event_csv(series, origin, csv);
        manifest.write_output("events.csv", csv.str());
        out << "events " << series.size() << ", origin " << origin.to_string() << ", horizon "
            << format_number(series.horizon()) << " h\n";
    }
    manifest.write_json("summary.json", summary);
    return 0;
}

int cmd_synth(const CommonArgs& common, const SynthArgs& args, Manifest& manifest, std::ostream& out) {
    SynthDailyOptions options;
    options.n_days = args.days;
    options.weekly_amplitude = args.weekly_amplitude;
    options.seasonal_amplitude = args.seasonal_amplitude;
    options.weather_effect = args.weather_effect;
    options.noise_sd = args.noise_sd;
    options.base = args.base;
    options.start = CivilDate::parse(args.start);
    options.seed = common.seed;
    const auto series = synth_daily(options);
    std::ostringstream csv;
    write_daily_csv(series, csv);
    manifest.write_output("daily.csv", csv.str());
    out << "wrote " << series.size() << " synthetic days\n";
    return 0;
}

int cmd_fit_hawkes(const CommonArgs& common, const FitHawkesArgs& args, Manifest& manifest, std::ostream& out) {
    const auto [series, origin] = load_events(args.events, manifest);
    FitOptions options;
    options.n_restarts = args.restarts;
    options.max_iterations = args.max_iterations;
    options.tolerance = args.tolerance;
    options.seed = common.seed;
    options.threads = common.threads;

    FitResult fit;
    int code = 0;
    try {
        fit = fit_mle(series, options);
    } catch (const HawkesFitError& e) {
        // Keep the best-effort parameters on disk before reporting failure.
        fit = e.best_effort();
        code = 3;
        out << "warning: " << e.what() << '\n';
    }
    manifest.write_json("fit.json", fit_document(fit, origin, series, common.seed));
    print_fit_table(fit, out);
    if (args.diagnose && code == 0) {
        const auto ks = write_diagnostics(fit.params, series, args.grid, 0.0, common.seed, manifest);
        out << "KS D          " << fixed(ks.d_statistic, 4) << " (p = " << format_number(ks.p_value) << ")\n";
    }
    return code;
}

int cmd_simulate(const CommonArgs& common, const SimulateArgs& args, Manifest& manifest, std::ostream& out) {
    const auto loaded = load_params(args.params, manifest);
    if (!(args.horizon > 0.0)) throw ArgumentError("--horizon must be > 0");
    CivilDateTime origin = kDefaultOrigin;
    if (!args.origin.empty()) {
        origin = CivilDateTime::parse(args.origin);
    } else if (loaded.origin) {
        origin = *loaded.origin;
    }
    SimulationOptions options;
    if (args.event_cap > 0) options.event_cap = args.event_cap;
    const auto events = simulate(loaded.params, EventSeries({}, 0.0), 0.0, args.horizon, common.seed, options);

    std::ostringstream csv;
    write_event_csv(events, origin, csv);
    manifest.write_output("events.csv", csv.str());
    manifest.write_json("simulate.json", {{"seed", common.seed},
                                          {"params", loaded.params},
                                          {"origin", origin.to_string()},
                                          {"horizon_hours", args.horizon},
                                          {"n_events", events.size()}});
    out << "simulated " << events.size() << " events over " << format_number(args.horizon) << " h\n";
    return 0;
}

int cmd_diagnose(const CommonArgs& common, const DiagnoseArgs& args, Manifest& manifest, std::ostream& out) {
    const auto [series, origin] = load_events(args.events, manifest);
    const auto loaded = load_params(args.params, manifest);
    const auto ks = write_diagnostics(loaded.params, series, args.grid, args.kernel_max_lag, common.seed, manifest);
    out << "KS D " << fixed(ks.d_statistic, 4) << ", p = " << format_number(ks.p_value) << ", n = " << ks.n << '\n';
    return 0;
}

int cmd_forecast(const CommonArgs& common, const ForecastArgs& args, Manifest& manifest, std::ostream& out) {
    const auto [series, origin] = load_events(args.events, manifest);
    const auto loaded = load_params(args.params, manifest);
    const auto& p = loaded.params;
    const auto mode = parse_daily_forecast_mode(args.mode);
    const auto days = forecast_days(p, series, args.day_length, mode, args.samples, common.seed, common.threads);
    const auto observed = observed_daily_counts(series, args.day_length);
    const double daily_rmse = score_daily_rmse(days, observed);

    std::ostringstream csv;
    csv << "day_index,expected_count,observed,method\n";
    double total = 0.0;
    for (std::size_t i = 0; i < days.size(); ++i) {
        total += days[i].expected_count;
        csv << days[i].day_index << ',' << format_number(days[i].expected_count) << ','
            << format_number(observed[i]) << ',' << to_string(days[i].method) << '\n';
    }
    manifest.write_output("forecast.csv", csv.str());

    nlohmann::json doc;
    doc["seed"] = common.seed;
    doc["params"] = p;
    doc["mode"] = to_string(mode);
    doc["day_length_hours"] = args.day_length;
    doc["n_days"] = days.size();
    doc["daily_rmse"] = daily_rmse;
    doc["expected_total"] = total;
    doc["compensator_total"] = compensator(p, series, series.horizon());
    doc["next_event"] = forecast_next_event(p, series, series.horizon(), args.next_event_samples,
                                            derive_seed(common.seed, 1), common.threads);
    if (args.evaluate) {
        const auto eval = evaluate_next_event(p, series, args.eval_fraction, args.next_event_samples,
                                              derive_seed(common.seed, 2), common.threads);
        doc["next_event_evaluation"] = {{"n_scored", eval.n_scored}, {"rmse_hours", eval.rmse}};
        out << "next-event RMSE " << fixed(eval.rmse, 4) << " h over " << eval.n_scored << " events\n";
    }
    manifest.write_json("forecast.json", doc);
    out << "daily RMSE " << fixed(daily_rmse, 3) << " over " << days.size() << " days (" << to_string(mode) << ")\n";
    return 0;
}

int cmd_benchmark(const CommonArgs& common, const BenchmarkArgs& args, Manifest& manifest, std::ostream& out,
                  std::ostream& err) {
    const auto series = load_daily(args.daily, manifest);
    std::vector<ModelSpec> specs;
    if (args.models.empty()) {
        specs = full_lineup();
    } else {
        for (const auto& name : args.models) specs.push_back(parse_model_spec(name));
    }
    BenchmarkOptions options;
    options.n_cycles = args.cycles;
    options.train_fraction = args.train_fraction;
    options.window = args.window;
    options.seed = common.seed;
    options.threads = common.threads;
    options.resample = parse_resample_mode(args.resample);
    options.selection = parse_selection_mode(args.selection);
    options.scaler_scope = parse_scaler_scope(args.scaler_scope);
    options.validation_fraction = args.validation_fraction;
    if (!args.quiet) {
        options.progress = [&err](std::size_t done, std::size_t total) {
            err << "cycle " << done << '/' << total << '\n';
        };
    }
    const auto report = bootstrap_benchmark(series, specs, options);

    manifest.write_json("benchmark.json", to_json(report));
    std::ostringstream bars;
    write_model_bars_csv(report, bars);
    manifest.write_output("model_bars.csv", bars.str());
    std::ostringstream deltas;
    write_group_deltas_csv(report, deltas);
    manifest.write_output("group_deltas.csv", deltas.str());

    for (const auto& m : report.models) {
        out << m.spec.name << ": ";
        if (!m.spec.implemented()) {
            out << "not implemented\n";
            continue;
        }
        out << "no-additional " << fixed(m.no_additional.mean, 3) << ", any-data " << fixed(m.any_data.mean, 3);
        if (m.failed > 0) out << ", " << m.failed << " failed";
        out << '\n';
    }
    for (const auto& [group, delta] : report.group_deltas) out << "delta " << group << ' ' << fixed(delta, 3) << '\n';
    return 0;
}

int cmd_importance(const CommonArgs& common, const ImportanceArgs& args, Manifest& manifest, std::ostream& out) {
    const auto series = load_daily(args.daily, manifest);
    const auto kind = parse_model_kind(args.model);
    const auto dataset = build_windows(series, Blend::parse(args.blend), parse_representation(args.representation),
                                       args.window);
    const auto split = prepare_split(dataset, args.train_fraction);
    auto model = make_regressor(kind);
    model->fit(split.X_train, split.y_train, FitContext{common.seed, split.feature_names, common.threads});
    const double test_rmse = rmse(model->predict(split.X_test), split.y_test);
    const auto ranking = permutation_importance(*model, split.X_test, split.y_test, split.feature_names, args.repeats,
                                                derive_seed(common.seed, 1));

    std::ostringstream csv;
    csv << "rank,feature,mean_delta_rmse\n";
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t i = 0; i < ranking.size(); ++i) {
        csv << i + 1 << ',' << ranking[i].feature << ',' << format_number(ranking[i].mean_delta_rmse) << '\n';
        rows.push_back({{"feature", ranking[i].feature}, {"mean_delta_rmse", ranking[i].mean_delta_rmse}});
    }
    manifest.write_output("importance.csv", csv.str());
    manifest.write_json("importance.json", {{"seed", common.seed},
                                            {"model", args.model},
                                            {"blend", Blend::parse(args.blend).name()},
                                            {"representation", args.representation},
                                            {"train_rows", split.X_train.rows()},
                                            {"test_rows", split.X_test.rows()},
                                            {"test_rmse", test_rmse},
                                            {"importance", rows}});
    if (args.save_model) manifest.write_json("model.json", model->to_json());
    out << "test RMSE " << fixed(test_rmse, 3) << "; top features:\n";
    for (std::size_t i = 0; i < std::min<std::size_t>(5, ranking.size()); ++i) {
        out << "  " << ranking[i].feature << ' ' << fixed(ranking[i].mean_delta_rmse, 3) << '\n';
    }
    return 0;
}

}  // namespace transitcast::cli
