#include "velomule/serialize.hpp"

namespace velomule {

using nlohmann::json;

namespace {

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

void to_json(json& j, const Date& d) { j = d.to_string(); }
void to_json(json& j, const Timestamp& t) { j = t.to_string(); }

void to_json(json& j, const TimeWindow& w) {
  j = json{{"from", w.from == INT64_MIN ? json(nullptr) : json(Timestamp::from_seconds(w.from))},
           {"to", w.to == INT64_MAX ? json(nullptr) : json(Timestamp::from_seconds(w.to))}};
}

void to_json(json& j, const StationRecord& s) {
  j = json{{"station_id", s.station_id}, {"name", s.name},
           {"latitude", s.latitude},     {"longitude", s.longitude},
           {"dock_count", s.dock_count}, {"landmark", s.landmark},
           {"installation", s.installation}};
}

void to_json(json& j, const BuildSummary& s) {
  j = json{{"stations", s.stations},
           {"status_records", s.status_records},
           {"trip_records", s.trip_records},
           {"duplicate_stations", s.duplicate_stations},
           {"duplicate_trips", s.duplicate_trips},
           {"dangling_status", s.dangling_status},
           {"dangling_trips", s.dangling_trips},
           {"dangling_count", s.dangling_count()},
           {"duration_mismatches", s.duration_mismatches}};
}

void to_json(json& j, const FactorWeights& w) {
  j = json{{"day_of_week", w.day_of_week},
           {"current_week", w.current_week},
           {"day_of_month", w.day_of_month}};
}

void to_json(json& j, const AvailabilityForecast& f) {
  j = json{{"station_id", f.station_id},
           {"target_date", f.target_date},
           {"dow_mean", opt(f.dow_mean)},
           {"current_week_mean", opt(f.current_week_mean)},
           {"dom_mean", opt(f.dom_mean)},
           {"weights", f.weights},
           {"n_expected", f.n_expected},
           {"samples_used",
            {{"day_of_week", f.samples_used.day_of_week},
             {"current_week", f.samples_used.current_week},
             {"day_of_month", f.samples_used.day_of_month}}}};
}

void to_json(json& j, const BusynessReport& b) {
  j = json{{"station_id", b.station_id}, {"window", b.window},     {"incoming", b.incoming},
           {"outgoing", b.outgoing},     {"busyness", b.busyness}};
}

void to_json(json& j, const HourlyBusyness& h) {
  j = json{{"station_id", h.station_id}, {"hour", h.hour},
           {"window", h.window},         {"departures", h.departures},
           {"arrivals", h.arrivals},     {"busyness", h.busyness}};
}

void to_json(json& j, const TripTimeStats& t) {
  j = json{{"station_x", t.station_x},       {"station_y", t.station_y},
           {"n_xy", t.n_xy},                 {"n_yx", t.n_yx},
           {"mean_seconds", t.mean_seconds}, {"min_seconds", t.min_seconds},
           {"max_seconds", t.max_seconds},   {"loop_route", t.loop_route}};
}

void to_json(json& j, const RouteBusyness& r) {
  j = json{{"station_x", r.station_x}, {"station_y", r.station_y}, {"window", r.window},
           {"x_to_y", r.x_to_y},       {"y_to_x", r.y_to_x},       {"trips", r.trips}};
}

void to_json(json& j, const LoadFactorReading& r) {
  j = json{{"station_id", r.station_id},
           {"at", r.at},
           {"observed_at", r.observed_at},
           {"bikes_available", r.bikes_available},
           {"empty_docks", r.empty_docks},
           {"load_factor", r.load_factor}};
}

void to_json(json& j, const WaitPoint& p) {
  j = json{{"minute_offset", p.minute_offset},
           {"at", p.at},
           {"v1", opt(p.v1)},
           {"v2", opt(p.v2)},
           {"v3", opt(p.v3)},
           {"raw", p.raw},
           {"probability", p.probability},
           {"factors_used", p.factors_used}};
}

void to_json(json& j, const WaitProbabilitySeries& s) {
  j = json{{"station_id", s.station_id},
           {"arrival_at", s.arrival_at},
           {"max_bikes", s.max_bikes},
           {"weights", s.weights},
           {"points", s.points}};
}

void to_json(json& j, const WaitRecommendation& r) {
  j = json{{"wait", r.wait},
           {"best_minute", r.best_minute},
           {"best_probability", r.best_probability}};
}

}  // namespace velomule
