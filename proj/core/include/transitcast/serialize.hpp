#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "transitcast/diagnostics.hpp"
#include "transitcast/hawkes.hpp"
#include "transitcast/simulate.hpp"

namespace transitcast {

// Shortest decimal string that parses back to exactly `value`.
// Non-finite values print as "nan", "inf", "-inf".
std::string format_number(double value);

void to_json(nlohmann::json& j, const HawkesParams& p);
void from_json(const nlohmann::json& j, HawkesParams& p);

// Includes the derived branching_ratio and half_life for readers; they are
// ignored when reading back.
void to_json(nlohmann::json& j, const FitResult& r);
void from_json(const nlohmann::json& j, FitResult& r);

void to_json(nlohmann::json& j, const NextEventForecast& f);
void to_json(nlohmann::json& j, const DailyForecast& f);
void to_json(nlohmann::json& j, const KsResult& r);
void to_json(nlohmann::json& j, const GammaFit& g);
void from_json(const nlohmann::json& j, GammaFit& g);

}  // namespace transitcast
