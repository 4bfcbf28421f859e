#include "velomule/analytics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <string>

#include "velomule/error.hpp"

namespace velomule {

namespace {

constexpr std::int64_t kDay = 86400;

// Positions in `idx` whose trip time (per `key`) falls inside the window.
// `idx` must be ascending by that same key.
template <class Key>
std::span<const std::uint32_t> slice(std::span<const std::uint32_t> idx,
                                     std::span<const TripRecord> trips, const TimeWindow& w,
                                     Key key) {
  auto proj = [&](std::uint32_t i) { return key(trips[i]); };
  auto lo = std::ranges::lower_bound(idx, w.from, {}, proj);
  auto hi = std::ranges::lower_bound(idx, w.to, {}, proj);
  if (hi < lo) hi = lo;
  return {lo, hi};
}

std::int64_t start_key(const TripRecord& t) { return t.start_at.seconds(); }
std::int64_t end_key(const TripRecord& t) { return t.end_at.seconds(); }

// Mean of every sample in [from, to).
std::optional<double> mean_between(const StatusSeries& s, std::int64_t from, std::int64_t to) {
  auto lo = std::lower_bound(s.at.begin(), s.at.end(), from);
  auto hi = std::lower_bound(s.at.begin(), s.at.end(), to);
  if (lo == hi) return std::nullopt;
  double sum = 0.0;
  for (auto i = lo - s.at.begin(); i < hi - s.at.begin(); ++i) sum += s.bikes[i];
  return sum / static_cast<double>(hi - lo);
}

struct FactorMean {
  std::optional<double> value;
  std::size_t days = 0;
};

FactorMean daily_mean_over(const StatusSeries& s, const std::vector<Date>& dates) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const Date& d : dates) {
    std::int64_t start = d.serial() * kDay;
    if (auto m = mean_between(s, start, start + kDay)) {
      sum += *m;
      ++n;
    }
  }
  if (n == 0) return {};
  return {sum / static_cast<double>(n), n};
}

// Latest sample in [instant - tol, instant], else earliest in (instant, instant + tol].
std::optional<int> matched_sample(const StatusSeries& s, std::int64_t instant, std::int64_t tol) {
  auto after = std::upper_bound(s.at.begin(), s.at.end(), instant);
  if (after != s.at.begin()) {
    auto prev = after - 1;
    if (*prev >= instant - tol) return s.bikes[prev - s.at.begin()];
  }
  if (after != s.at.end() && *after <= instant + tol) return s.bikes[after - s.at.begin()];
  return std::nullopt;
}

std::optional<double> mean_at_clock(const StatusSeries& s, const std::vector<Date>& dates,
                                    std::int64_t clock_offset, std::int64_t tol) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const Date& d : dates) {
    if (auto v = matched_sample(s, d.serial() * kDay + clock_offset, tol)) {
      sum += *v;
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

void require_station(const HistoryStore& store, int id) {
  if (!store.has_station(id)) throw UnknownStation(id);
}

}  // namespace

void FactorWeights::validate(std::string_view field) const {
  for (double w : {day_of_week, current_week, day_of_month})
    if (!(w >= 0.0) || !std::isfinite(w))
      throw ConfigError(std::string(field), "weights must be finite and non-negative");
  double sum = day_of_week + current_week + day_of_month;
  if (std::abs(sum - 1.0) > 1e-9)
    throw ConfigError(std::string(field), "weights must sum to 1 (got " + std::to_string(sum) + ")");
}

FactorWeights FactorWeights::parse(std::string_view text, std::string_view field) {
  double v[3];
  std::size_t pos = 0;
  for (int i = 0; i < 3; ++i) {
    std::size_t end = text.find(',', pos);
    if ((i < 2) != (end != std::string_view::npos))
      throw ConfigError(std::string(field), "expected three comma-separated numbers");
    std::string_view part = text.substr(pos, end == std::string_view::npos ? end : end - pos);
    while (!part.empty() && part.front() == ' ') part.remove_prefix(1);
    while (!part.empty() && part.back() == ' ') part.remove_suffix(1);
    auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), v[i]);
    if (ec != std::errc{} || ptr != part.data() + part.size() || part.empty())
      throw ConfigError(std::string(field), "not a number: '" + std::string(part) + "'");
    pos = end + 1;
  }
  FactorWeights w{v[0], v[1], v[2]};
  w.validate(field);
  return w;
}

std::optional<double> weighted_factor_mean(const FactorWeights& w, std::optional<double> dow,
                                           std::optional<double> cw, std::optional<double> dom) {
  double num = 0.0;
  double den = 0.0;
  auto add = [&](double weight, std::optional<double> v) {
    if (v && weight > 0.0) {
      num += weight * *v;
      den += weight;
    }
  };
  add(w.day_of_week, dow);
  add(w.current_week, cw);
  add(w.day_of_month, dom);
  if (den <= 0.0) return std::nullopt;
  return num / den;
}

std::vector<Date> same_weekday_dates(const Date& target, int weeks) {
  std::vector<Date> out;
  for (int k = 1; k <= weeks; ++k) out.push_back(target.add_days(-7 * k));
  return out;
}

std::vector<Date> current_week_dates(const Date& target) {
  std::vector<Date> out;
  for (Date d = target.week_start(); d < target; d = d.add_days(1)) out.push_back(d);
  return out;
}

std::vector<Date> same_day_of_month_dates(const Date& target, int months) {
  std::vector<Date> out;
  for (int k = 1; k <= months; ++k)
    if (auto d = target.add_months(-k)) out.push_back(*d);
  return out;
}

AvailabilityForecast forecast_available_bikes(const HistoryStore& store, int station_id,
                                              const Date& target_date,
                                              const FactorWeights& weights,
                                              const Lookback& lookback) {
  require_station(store, station_id);
  weights.validate();
  const StatusSeries& s = store.status(station_id);

  FactorMean dow = daily_mean_over(s, same_weekday_dates(target_date, lookback.weeks));
  FactorMean cw = daily_mean_over(s, current_week_dates(target_date));
  FactorMean dom = daily_mean_over(s, same_day_of_month_dates(target_date, lookback.months));

  auto n = weighted_factor_mean(weights, dow.value, cw.value, dom.value);
  if (!n)
    throw NoHistory("no history for station " + std::to_string(station_id) + " before " +
                    target_date.to_string());

  AvailabilityForecast f;
  f.station_id = station_id;
  f.target_date = target_date;
  f.dow_mean = dow.value;
  f.current_week_mean = cw.value;
  f.dom_mean = dom.value;
  f.weights = weights;
  f.n_expected = *n;
  f.samples_used = {dow.days, cw.days, dom.days};
  return f;
}

BusynessReport station_busyness(const HistoryStore& store, int station_id,
                                const TimeWindow& window) {
  require_station(store, station_id);
  BusynessReport r;
  r.station_id = station_id;
  r.window = window;
  r.incoming = static_cast<std::int64_t>(
      slice(store.trips_ending_at(station_id), store.trips(), window, end_key).size());
  r.outgoing = static_cast<std::int64_t>(
      slice(store.trips_starting_at(station_id), store.trips(), window, start_key).size());
  r.busyness = r.incoming + r.outgoing;
  return r;
}

std::vector<BusynessReport> rank_busiest(const HistoryStore& store, const TimeWindow& window,
                                         std::size_t top_k) {
  if (top_k < 1) throw InvalidArgument("top_k must be at least 1");
  std::vector<BusynessReport> all;
  all.reserve(store.stations().size());
  for (const auto& st : store.stations())
    all.push_back(station_busyness(store, st.station_id, window));
  std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
    if (a.busyness != b.busyness) return a.busyness > b.busyness;
    return a.station_id < b.station_id;
  });
  if (all.size() > top_k) all.resize(top_k);
  return all;
}

HourlyBusyness hourly_busyness(const HistoryStore& store, int station_id, int hour_of_day,
                               const TimeWindow& window) {
  require_station(store, station_id);
  if (hour_of_day < 0 || hour_of_day > 23)
    throw InvalidArgument("hour_of_day must be in [0, 23], got " + std::to_string(hour_of_day));
  auto trips = store.trips();
  HourlyBusyness h;
  h.station_id = station_id;
  h.hour = hour_of_day;
  h.window = window;
  for (auto i : slice(store.trips_starting_at(station_id), trips, window, start_key))
    if (trips[i].start_at.hour == hour_of_day) ++h.departures;
  for (auto i : slice(store.trips_ending_at(station_id), trips, window, end_key))
    if (trips[i].end_at.hour == hour_of_day) ++h.arrivals;
  h.busyness = h.departures + h.arrivals;
  return h;
}

TripTimeStats average_trip_time(const HistoryStore& store, int station_x, int station_y,
                                const TimeWindow& window) {
  require_station(store, station_x);
  require_station(store, station_y);
  auto trips = store.trips();
  TripTimeStats st;
  st.station_x = station_x;
  st.station_y = station_y;
  st.loop_route = station_x == station_y;
  st.min_seconds = std::numeric_limits<std::int64_t>::max();
  st.max_seconds = std::numeric_limits<std::int64_t>::min();
  std::int64_t sum = 0;

  auto take = [&](std::span<const std::uint32_t> idx, std::size_t& count) {
    for (auto i : slice(idx, trips, window, start_key)) {
      std::int64_t d = trips[i].duration;
      sum += d;
      st.min_seconds = std::min(st.min_seconds, d);
      st.max_seconds = std::max(st.max_seconds, d);
      ++count;
    }
  };
  take(store.trips_between(station_x, station_y), st.n_xy);
  if (!st.loop_route) take(store.trips_between(station_y, station_x), st.n_yx);

  std::size_t n = st.n_xy + st.n_yx;
  if (n == 0)
    throw NoData("no trips between stations " + std::to_string(station_x) + " and " +
                 std::to_string(station_y));
  st.mean_seconds = static_cast<double>(sum) / static_cast<double>(n);
  return st;
}

std::int64_t directed_trip_count(const HistoryStore& store, int from, int to,
                                 const TimeWindow& window) {
  require_station(store, from);
  require_station(store, to);
  return static_cast<std::int64_t>(
      slice(store.trips_between(from, to), store.trips(), window, start_key).size());
}

std::int64_t outbound_trip_count(const HistoryStore& store, int station_id,
                                 const TimeWindow& window) {
  require_station(store, station_id);
  return static_cast<std::int64_t>(
      slice(store.trips_starting_at(station_id), store.trips(), window, start_key).size());
}

RouteBusyness route_busyness(const HistoryStore& store, int station_x, int station_y,
                             const TimeWindow& window) {
  RouteBusyness r;
  r.station_x = station_x;
  r.station_y = station_y;
  r.window = window;
  r.x_to_y = directed_trip_count(store, station_x, station_y, window);
  r.y_to_x = station_x == station_y ? 0 : directed_trip_count(store, station_y, station_x, window);
  r.trips = r.x_to_y + r.y_to_x;
  return r;
}

LoadFactorReading load_factor(const HistoryStore& store, int station_id, const Timestamp& at) {
  require_station(store, station_id);
  const StatusSeries& s = store.status(station_id);
  auto it = std::upper_bound(s.at.begin(), s.at.end(), at.seconds());
  if (it == s.at.begin())
    throw NoData("no status for station " + std::to_string(station_id) + " at or before " +
                 at.to_string());
  auto i = (it - s.at.begin()) - 1;
  LoadFactorReading r;
  r.station_id = station_id;
  r.at = at;
  r.observed_at = Timestamp::from_seconds(s.at[i]);
  r.bikes_available = s.bikes[i];
  r.empty_docks = s.docks[i];
  r.load_factor = r.bikes_available + r.empty_docks;
  return r;
}

WaitProbabilitySeries wait_probability_series(const HistoryStore& store, int station_id,
                                              const Timestamp& arrival_at,
                                              const FactorWeights& weights, int horizon_minutes,
                                              const Lookback& lookback) {
  const StationRecord& station = store.station(station_id);
  weights.validate();
  if (horizon_minutes < 0) throw InvalidArgument("horizon_minutes must be non-negative");

  const StatusSeries& s = store.status(station_id);
  const Date day = arrival_at.date;
  const auto dow_dates = same_weekday_dates(day, lookback.weeks);
  const auto cw_dates = current_week_dates(day);
  const auto dom_dates = same_day_of_month_dates(day, lookback.months);
  const std::int64_t tol = std::int64_t{lookback.match_tolerance_minutes} * 60;
  const double max_bikes = station.dock_count;

  WaitProbabilitySeries series;
  series.station_id = station_id;
  series.arrival_at = arrival_at;
  series.max_bikes = station.dock_count;
  series.weights = weights;
  bool any = false;
  for (int m = 0; m <= horizon_minutes; ++m) {
    const std::int64_t clock = arrival_at.second_of_day() + std::int64_t{m} * 60;
    WaitPoint p;
    p.minute_offset = m;
    p.at = arrival_at.plus_seconds(std::int64_t{m} * 60);
    p.v1 = mean_at_clock(s, dow_dates, clock, tol);
    p.v2 = mean_at_clock(s, cw_dates, clock, tol);
    p.v3 = mean_at_clock(s, dom_dates, clock, tol);
    p.factors_used = int{p.v1.has_value()} + int{p.v2.has_value()} + int{p.v3.has_value()};
    if (auto mean = weighted_factor_mean(weights, p.v1, p.v2, p.v3)) {
      any = true;
      p.raw = *mean / max_bikes;
      p.probability = std::clamp(p.raw, 0.0, 1.0);
    }
    series.points.push_back(p);
  }
  if (!any)
    throw NoHistory("no history for station " + std::to_string(station_id) + " around " +
                    arrival_at.to_string());
  return series;
}

WaitRecommendation recommend_wait(const WaitProbabilitySeries& series, double threshold) {
  if (series.points.empty()) throw InvalidArgument("empty wait series");
  if (!(threshold >= 0.0 && threshold <= 1.0))
    throw InvalidArgument("threshold must be in [0, 1]");
  WaitRecommendation r;
  r.best_minute = series.points.front().minute_offset;
  r.best_probability = series.points.front().probability;
  for (const auto& p : series.points) {
    if (p.probability > r.best_probability) {
      r.best_probability = p.probability;
      r.best_minute = p.minute_offset;
    }
  }
  r.wait = r.best_probability >= threshold;
  return r;
}

}  // namespace velomule
