#pragma once

#include <nlohmann/json.hpp>

#include "velomule/analytics.hpp"
#include "velomule/sim.hpp"
#include "velomule/store.hpp"

// JSON forms of the domain types. Field names follow the struct members;
// absent optional values are null; timestamps use the canonical text form.
namespace velomule {

void to_json(nlohmann::json& j, const Date& d);
void to_json(nlohmann::json& j, const Timestamp& t);
void to_json(nlohmann::json& j, const TimeWindow& w);
void to_json(nlohmann::json& j, const StationRecord& s);
void to_json(nlohmann::json& j, const BuildSummary& s);
void to_json(nlohmann::json& j, const FactorWeights& w);
void to_json(nlohmann::json& j, const AvailabilityForecast& f);
void to_json(nlohmann::json& j, const BusynessReport& b);
void to_json(nlohmann::json& j, const HourlyBusyness& h);
void to_json(nlohmann::json& j, const TripTimeStats& t);
void to_json(nlohmann::json& j, const RouteBusyness& r);
void to_json(nlohmann::json& j, const LoadFactorReading& r);
void to_json(nlohmann::json& j, const WaitPoint& p);
void to_json(nlohmann::json& j, const WaitProbabilitySeries& s);
void to_json(nlohmann::json& j, const WaitRecommendation& r);

}  // namespace velomule
