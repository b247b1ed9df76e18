#include "transitcast/serialize.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <limits>

namespace transitcast {

namespace {

// JSON has no infinities; nlohmann writes them as null.
double number_or(const nlohmann::json& j, const char* key, double fallback) {
    const auto& v = j.at(key);
    return v.is_null() ? fallback : v.get<double>();
}

}  // namespace

std::string format_number(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    std::array<char, 64> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    return {buf.data(), res.ptr};
}

void to_json(nlohmann::json& j, const HawkesParams& p) {
    j = nlohmann::json{{"mu", p.mu}, {"alpha", p.alpha}, {"beta", p.beta}};
}

void from_json(const nlohmann::json& j, HawkesParams& p) {
    p = HawkesParams::make(j.at("mu").get<double>(), j.at("alpha").get<double>(), j.at("beta").get<double>());
}

void to_json(nlohmann::json& j, const FitResult& r) {
    j = nlohmann::json{{"params", r.params},
                       {"branching_ratio", r.params.branching_ratio()},
                       {"half_life_hours", r.params.half_life()},
                       {"log_likelihood", r.log_likelihood},
                       {"n_events", r.n_events},
                       {"converged", r.converged},
                       {"n_iterations", r.n_iterations},
                       {"n_restarts_used", r.n_restarts_used},
                       {"n_restarts_converged", r.n_restarts_converged},
                       {"best_restart", r.best_restart},
                       {"gradient_norm", r.gradient_norm}};
}

void from_json(const nlohmann::json& j, FitResult& r) {
    r.params = j.at("params").get<HawkesParams>();
    r.log_likelihood = number_or(j, "log_likelihood", -std::numeric_limits<double>::infinity());
    r.n_events = j.at("n_events").get<std::size_t>();
    r.converged = j.at("converged").get<bool>();
    r.n_iterations = j.at("n_iterations").get<int>();
    r.n_restarts_used = j.at("n_restarts_used").get<int>();
    r.n_restarts_converged = j.at("n_restarts_converged").get<int>();
    r.best_restart = j.at("best_restart").get<int>();
    r.gradient_norm = number_or(j, "gradient_norm", std::numeric_limits<double>::infinity());
}

void to_json(nlohmann::json& j, const NextEventForecast& f) {
    nlohmann::json q = nlohmann::json::array();
    for (const auto& [level, value] : f.quantiles) q.push_back({{"level", level}, {"value", value}});
    j = nlohmann::json{{"n_samples", f.samples.size()}, {"mean", f.mean}, {"median", f.median}, {"quantiles", q}};
}

void to_json(nlohmann::json& j, const DailyForecast& f) {
    j = nlohmann::json{{"day_index", f.day_index}, {"expected_count", f.expected_count}, {"method", to_string(f.method)}};
}

void to_json(nlohmann::json& j, const KsResult& r) {
    j = nlohmann::json{{"d_statistic", r.d_statistic}, {"p_value", r.p_value}, {"n", r.n}};
}

void to_json(nlohmann::json& j, const GammaFit& g) {
    j = nlohmann::json{{"shape", g.shape}, {"scale", g.scale}, {"location", g.location}, {"log_likelihood", g.log_likelihood}};
}

void from_json(const nlohmann::json& j, GammaFit& g) {
    g.shape = j.at("shape").get<double>();
    g.scale = j.at("scale").get<double>();
    g.location = j.at("location").get<double>();
    g.log_likelihood = j.at("log_likelihood").get<double>();
}

}  // namespace transitcast
