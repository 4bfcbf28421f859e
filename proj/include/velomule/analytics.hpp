#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "velomule/store.hpp"
#include "velomule/timestamp.hpp"

namespace velomule {

/// Weights of the three history factors: same weekday (DoW), current week
/// (CW) and same day-of-month (DoM). Non-negative, summing to 1.
struct FactorWeights {
  double day_of_week = 0.25;
  double current_week = 0.5;
  double day_of_month = 0.25;

  /// Throws ConfigError(field) when a weight is negative or the sum is off by more than 1e-9.
  void validate(std::string_view field = "weights") const;
  /// "a,b,c"; throws ConfigError(field).
  static FactorWeights parse(std::string_view text, std::string_view field = "weights");

  bool operator==(const FactorWeights&) const = default;
};

/// How far back the factor windows reach. Partial history shrinks a window.
struct Lookback {
  int weeks = 6;   // same-weekday dates
  int months = 6;  // same day-of-month dates
  int match_tolerance_minutes = 5;  // wait-series sample matching
};

struct FactorSamples {
  std::size_t day_of_week = 0;
  std::size_t current_week = 0;
  std::size_t day_of_month = 0;
};

struct AvailabilityForecast {
  int station_id = 0;
  Date target_date;
  std::optional<double> dow_mean;
  std::optional<double> current_week_mean;
  std::optional<double> dom_mean;
  FactorWeights weights;
  double n_expected = 0.0;
  FactorSamples samples_used;  // contributing days per factor
};

struct BusynessReport {
  int station_id = 0;
  TimeWindow window;
  std::int64_t incoming = 0;  // trips ending here
  std::int64_t outgoing = 0;  // trips starting here
  std::int64_t busyness = 0;

  bool operator==(const BusynessReport&) const = default;
};

struct HourlyBusyness {
  int station_id = 0;
  int hour = 0;
  TimeWindow window;
  std::int64_t departures = 0;
  std::int64_t arrivals = 0;
  std::int64_t busyness = 0;
};

struct TripTimeStats {
  int station_x = 0;
  int station_y = 0;
  std::size_t n_xy = 0;
  std::size_t n_yx = 0;
  double mean_seconds = 0.0;
  std::int64_t min_seconds = 0;
  std::int64_t max_seconds = 0;
  bool loop_route = false;  // x == y; such trips are counted once, in n_xy
};

struct RouteBusyness {
  int station_x = 0;
  int station_y = 0;
  TimeWindow window;
  std::int64_t x_to_y = 0;
  std::int64_t y_to_x = 0;
  std::int64_t trips = 0;  // undirected total
};

struct LoadFactorReading {
  int station_id = 0;
  Timestamp at;           // query instant
  Timestamp observed_at;  // sample carried forward
  int bikes_available = 0;
  int empty_docks = 0;
  int load_factor = 0;
};

struct WaitPoint {
  int minute_offset = 0;
  Timestamp at;
  std::optional<double> v1;  // same weekday
  std::optional<double> v2;  // current week
  std::optional<double> v3;  // same day-of-month
  double raw = 0.0;          // before clamping
  double probability = 0.0;  // clamped to [0, 1]; 0 when no factor matched
  int factors_used = 0;
};

struct WaitProbabilitySeries {
  int station_id = 0;
  Timestamp arrival_at;
  int max_bikes = 0;  // the station's dock count
  FactorWeights weights;
  std::vector<WaitPoint> points;  // horizon + 1 entries
};

struct WaitRecommendation {
  bool wait = false;
  int best_minute = 0;
  double best_probability = 0.0;
};

/// Expected bikes at a station on `target_date` from the weighted mean of
/// daily-mean availability on the same weekday, earlier days of the same
/// (Monday-based) week, and the same day-of-month. Factors without data are
/// dropped and the remaining weights renormalized.
AvailabilityForecast forecast_available_bikes(const HistoryStore& store, int station_id,
                                              const Date& target_date,
                                              const FactorWeights& weights = {},
                                              const Lookback& lookback = {});

/// Incoming counts trips whose end_at lies in the window, outgoing counts
/// trips whose start_at does. A loop trip counts once in each.
BusynessReport station_busyness(const HistoryStore& store, int station_id,
                                const TimeWindow& window = TimeWindow::all());

/// Every station, busiest first; ties go to the smaller station_id.
std::vector<BusynessReport> rank_busiest(const HistoryStore& store, const TimeWindow& window,
                                         std::size_t top_k);

/// Departures and arrivals whose timestamp falls in [hour, hour + 1) on any
/// day inside the window.
HourlyBusyness hourly_busyness(const HistoryStore& store, int station_id, int hour_of_day,
                               const TimeWindow& window = TimeWindow::all());

/// Pooled mean duration over both directions; trips selected by start_at.
TripTimeStats average_trip_time(const HistoryStore& store, int station_x, int station_y,
                                const TimeWindow& window = TimeWindow::all());

/// Undirected trip count between two stations; trips selected by start_at.
RouteBusyness route_busyness(const HistoryStore& store, int station_x, int station_y,
                             const TimeWindow& window = TimeWindow::all());

std::int64_t directed_trip_count(const HistoryStore& store, int from, int to,
                                 const TimeWindow& window = TimeWindow::all());
std::int64_t outbound_trip_count(const HistoryStore& store, int station_id,
                                 const TimeWindow& window = TimeWindow::all());

/// Latest sample at or before `at`.
LoadFactorReading load_factor(const HistoryStore& store, int station_id, const Timestamp& at);

/// Probability that a bike is available at each minute from arrival to
/// arrival + horizon. Each factor is the mean availability at that clock time
/// over its reference dates, using the latest sample no older than the match
/// tolerance (or failing that the earliest sample within the tolerance after).
WaitProbabilitySeries wait_probability_series(const HistoryStore& store, int station_id,
                                              const Timestamp& arrival_at,
                                              const FactorWeights& weights = {},
                                              int horizon_minutes = 30,
                                              const Lookback& lookback = {});

/// Wait when the best probability reaches the threshold; best_minute is the
/// earliest minute attaining the maximum.
WaitRecommendation recommend_wait(const WaitProbabilitySeries& series, double threshold);

/// Combines factor values that are present; renormalizes the weights over them.
/// Returns nullopt when no factor with positive weight is present.
std::optional<double> weighted_factor_mean(const FactorWeights& w, std::optional<double> dow,
                                           std::optional<double> cw, std::optional<double> dom);

/// Reference dates of the three factors, all strictly before `target`.
std::vector<Date> same_weekday_dates(const Date& target, int weeks);
std::vector<Date> current_week_dates(const Date& target);
std::vector<Date> same_day_of_month_dates(const Date& target, int months);

}  // namespace velomule
