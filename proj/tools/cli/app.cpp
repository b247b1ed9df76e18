#include "cli/app.hpp"

#include <exception>
#include <functional>
#include <map>
#include <memory>
#include <ostream>

#include "cli/commands.hpp"
#include "cli/options.hpp"
#include "transitcast/errors.hpp"

namespace transitcast::cli {

namespace {

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const InputError*>(&e) || dynamic_cast<const ArgumentError*>(&e) ||
        dynamic_cast<const RangeError*>(&e) || dynamic_cast<const DomainError*>(&e)) {
        return kExitInput;
    }
    if (dynamic_cast<const NumericError*>(&e)) return kExitNonConvergence;
    return kExitInternal;
}

struct Command {
    CLI::App* app{nullptr};
    std::unique_ptr<OptionSet> options;
    std::string config_path;
    CommonArgs common;
    std::function<int(Manifest&)> body;
};

void add_common(Command& c) {
    c.app->add_option("--config", c.config_path, "JSON config file (flags override its values)");
    c.options->add("out", c.common.out_dir, "Output directory");
    c.options->add("seed", c.common.seed, "Random seed");
    c.options->add("threads", c.common.threads, "Worker threads (results do not depend on it)");
}

void add_daily(OptionSet& o, DailyInputArgs& a) {
    o.add("daily", a.daily, "Daily CSV file");
    o.add("schema", a.schema, "Column mapping field=column (date, target, pressure, wind_speed, avg_temp, precipitation)")
        ->delimiter(',');
}

void add_events(OptionSet& o, EventInputArgs& a) {
    o.add("events", a.events, "Event CSV with a timestamp column");
    o.add("origin", a.origin, "Time origin YYYY-MM-DDTHH:MM:SS (default: midnight of the first event)");
    o.add("end-hours", a.end_hours, "Observation horizon in hours since origin (0: last event)");
}

void add_params(OptionSet& o, ParamsArgs& a) {
    o.add("params", a.params, "Fit or parameter JSON file");
    o.add("mu", a.mu, "Baseline rate (events/h), when --params is absent");
    o.add("alpha", a.alpha, "Jump size (events/h), when --params is absent");
    o.add("beta", a.beta, "Decay rate (1/h), when --params is absent");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    std::vector<const char*> argv;
    argv.reserve(args.size() + 1);
    argv.push_back("transitcast");
    for (const auto& a : args) argv.push_back(a.c_str());
    return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Transit demand forecasting: Hawkes delay models and daily benchmarks", "transitcast"};
    app.require_subcommand(1);
    app.set_version_flag("--version", TRANSITCAST_VERSION);

    IngestArgs ingest;
    SynthArgs synth;
    FitHawkesArgs fit;
    SimulateArgs sim;
    DiagnoseArgs diag;
    ForecastArgs forecast;
    BenchmarkArgs bench;
    ImportanceArgs importance;

    std::map<std::string, Command> commands;
    auto define = [&](const std::string& name, const std::string& help) -> Command& {
        auto& c = commands[name];
        c.app = app.add_subcommand(name, help);
        c.options = std::make_unique<OptionSet>(*c.app);
        add_common(c);
        return c;
    };

    {
        auto& c = define("ingest", "Validate daily and/or event CSVs and write canonical copies with a summary");
        add_daily(*c.options, ingest.daily);
        add_events(*c.options, ingest.events);
        c.options->add("max-gap-days", ingest.max_gap_days, "Reject gaps longer than this (0: report only)");
        c.body = [&](Manifest& m) { return cmd_ingest(c.common, ingest, m, out); };
    }
    {
        auto& c = define("synth", "Generate a synthetic daily series");
        auto& o = *c.options;
        o.add("days", synth.days, "Number of days");
        o.add("weekly-amplitude", synth.weekly_amplitude, "Day-of-week effect size");
        o.add("seasonal-amplitude", synth.seasonal_amplitude, "Annual cycle amplitude");
        o.add("weather-effect", synth.weather_effect, "Target change per mm of precipitation");
        o.add("noise-sd", synth.noise_sd, "Gaussian noise standard deviation");
        o.add("base", synth.base, "Baseline level");
        o.add("start", synth.start, "First date");
        c.body = [&](Manifest& m) { return cmd_synth(c.common, synth, m, out); };
    }
    {
        auto& c = define("fit-hawkes", "Maximum likelihood fit of an exponential Hawkes process");
        auto& o = *c.options;
        add_events(o, fit.events);
        o.add("restarts", fit.restarts, "Optimizer restarts");
        o.add("max-iterations", fit.max_iterations, "BFGS iterations per restart");
        o.add("tolerance", fit.tolerance, "Gradient norm tolerance");
        o.add_flag("diagnose", fit.diagnose, "Also write goodness-of-fit diagnostics");
        o.add("grid", fit.grid, "Points in the cumulative calibration curve");
        c.body = [&](Manifest& m) { return cmd_fit_hawkes(c.common, fit, m, out); };
    }
    {
        auto& c = define("simulate", "Simulate events by Ogata thinning");
        auto& o = *c.options;
        add_params(o, sim.params);
        o.add("horizon", sim.horizon, "Simulated span in hours");
        o.add("origin", sim.origin, "Timestamp of hour 0 (default: the params file's origin or 2019-01-01)");
        o.add("event-cap", sim.event_cap, "Abort beyond this many events (0: default cap)");
        c.body = [&](Manifest& m) { return cmd_simulate(c.common, sim, m, out); };
    }
    {
        auto& c = define("diagnose", "Time-rescaling KS test, calibration and kernel curves");
        auto& o = *c.options;
        add_events(o, diag.events);
        add_params(o, diag.params);
        o.add("grid", diag.grid, "Points in the cumulative calibration curve");
        o.add("kernel-max-lag", diag.kernel_max_lag, "Kernel curve span in hours (0: five half-lives)");
        c.body = [&](Manifest& m) { return cmd_diagnose(c.common, diag, m, out); };
    }
    {
        auto& c = define("forecast", "Daily event-count and next-event forecasts");
        auto& o = *c.options;
        add_events(o, forecast.events);
        add_params(o, forecast.params);
        o.add("mode", forecast.mode, "compensator or monte_carlo");
        o.add("day-length", forecast.day_length, "Hours per forecast window");
        o.add("samples", forecast.samples, "Monte Carlo runs per day (monte_carlo mode)");
        o.add("next-event-samples", forecast.next_event_samples, "Monte Carlo runs per next-event forecast");
        o.add_flag("evaluate", forecast.evaluate, "Score rolling next-event forecasts");
        o.add("eval-fraction", forecast.eval_fraction, "Share of final events scored by --evaluate");
        c.body = [&](Manifest& m) { return cmd_forecast(c.common, forecast, m, out); };
    }
    {
        auto& c = define("benchmark", "Bootstrap comparison of regressors over feature blends");
        auto& o = *c.options;
        add_daily(o, bench.daily);
        o.add("cycles", bench.cycles, "Bootstrap cycles");
        o.add("train-fraction", bench.train_fraction, "Chronological training share");
        o.add("window", bench.window, "Lagged days per row");
        o.add("models", bench.models, "Models to run (default: all ten)")->delimiter(',');
        o.add("resample", bench.resample, "sorted_full or train_only");
        o.add("selection", bench.selection, "Representation choice: test or validation");
        o.add("scaler-scope", bench.scaler_scope, "Scaler statistics from train or full");
        o.add("validation-fraction", bench.validation_fraction, "Validation share of training rows");
        o.add_flag("quiet", bench.quiet, "No per-cycle progress");
        c.body = [&](Manifest& m) { return cmd_benchmark(c.common, bench, m, out, err); };
    }
    {
        auto& c = define("importance", "Permutation feature importance of one fitted model");
        auto& o = *c.options;
        add_daily(o, importance.daily);
        o.add("model", importance.model, "Model kind");
        o.add("blend", importance.blend, "Covariate groups, e.g. dow+weather, all, lag_only");
        o.add("representation", importance.representation, "raw, scaled, onehot or scaled_onehot");
        o.add("window", importance.window, "Lagged days per row");
        o.add("train-fraction", importance.train_fraction, "Chronological training share");
        o.add("repeats", importance.repeats, "Shuffles per feature");
        o.add_flag("save-model", importance.save_model, "Also write the fitted model as model.json");
        c.body = [&](Manifest& m) { return cmd_importance(c.common, importance, m, out); };
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitInput;
    }

    for (auto& [name, c] : commands) {
        if (!c.app->parsed()) continue;
        std::unique_ptr<Manifest> manifest;
        int code = kExitInternal;
        try {
            c.options->apply(load_config(c.config_path), name);
            manifest = std::make_unique<Manifest>(name, c.common.out_dir);
            manifest->set_seed(c.common.seed);
            auto effective = c.options->effective();
            if (!c.config_path.empty()) effective["config"] = c.config_path;
            manifest->set_config(std::move(effective));
            code = c.body(*manifest);
        } catch (const std::exception& e) {
            code = exit_code_for(e);
            err << "error: " << e.what() << '\n';
        }
        if (manifest) {
            try {
                manifest->write(code);
            } catch (const std::exception& e) {
                err << "error: could not write manifest: " << e.what() << '\n';
                if (code == kExitOk) code = kExitInternal;
            }
        }
        return code;
    }
    return kExitInternal;
}

}  // namespace transitcast::cli
