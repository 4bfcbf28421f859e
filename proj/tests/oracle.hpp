#pragma once

// Naive full-scan re-implementations of the analytics, written against the
// raw record vectors and sharing no code path with the indexed store. Date
// membership is decided by predicates over every candidate date rather than
// by enumerating reference dates.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "synth.hpp"
#include "velomule/analytics.hpp"  // FactorWeights only

namespace oracle {

using namespace velomule;

inline std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  return (a % b != 0 && (a < 0) != (b < 0)) ? q - 1 : q;
}

// Monday = 0; 1970-01-01 was a Thursday.
inline int weekday0(std::int64_t serial) {
  return static_cast<int>(((serial + 3) % 7 + 7) % 7);
}

inline std::int64_t iso_week_number(std::int64_t serial) { return floor_div(serial + 3, 7); }

inline bool is_same_weekday_ref(std::int64_t target, std::int64_t d, int weeks) {
  std::int64_t diff = target - d;
  return diff > 0 && diff % 7 == 0 && diff / 7 <= weeks;
}

inline bool is_current_week_ref(std::int64_t target, std::int64_t d) {
  return d < target && iso_week_number(d) == iso_week_number(target);
}

inline bool is_day_of_month_ref(const Date& target, const Date& d, int months) {
  int diff = (target.year * 12 + target.month) - (d.year * 12 + d.month);
  return d.day == target.day && diff >= 1 && diff <= months;
}

struct Factors {
  std::optional<double> dow, cw, dom;
};

inline std::optional<double> combine(double w1, double w2, double w3, const Factors& f) {
  double num = 0, den = 0;
  if (f.dow && w1 > 0) { num += w1 * *f.dow; den += w1; }
  if (f.cw && w2 > 0) { num += w2 * *f.cw; den += w2; }
  if (f.dom && w3 > 0) { num += w3 * *f.dom; den += w3; }
  if (den <= 0) return std::nullopt;
  return num / den;
}

inline std::optional<double> mean(const std::vector<double>& v) {
  if (v.empty()) return std::nullopt;
  double s = 0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

struct ForecastResult {
  Factors factors;
  std::optional<double> n;
};

inline ForecastResult forecast(const synth::Data& d, int station, const Date& target,
                               const FactorWeights& w, int weeks = 6, int months = 6) {
  // daily means keyed by date serial
  std::map<std::int64_t, std::pair<double, int>> daily;
  for (const auto& s : d.status) {
    if (s.station_id != station) continue;
    auto& acc = daily[s.at.date.serial()];
    acc.first += s.bikes_available;
    acc.second += 1;
  }
  std::vector<double> dow, cw, dom;
  const std::int64_t t = target.serial();
  for (const auto& [serial, acc] : daily) {
    double m = acc.first / acc.second;
    Date date = Date::from_serial(serial);
    if (is_same_weekday_ref(t, serial, weeks)) dow.push_back(m);
    if (is_current_week_ref(t, serial)) cw.push_back(m);
    if (is_day_of_month_ref(target, date, months)) dom.push_back(m);
  }
  ForecastResult r;
  r.factors = {mean(dow), mean(cw), mean(dom)};
  r.n = combine(w.day_of_week, w.current_week, w.day_of_month, r.factors);
  return r;
}

inline std::optional<int> lookup(const std::vector<StatusRecord>& rows, std::int64_t instant,
                                 std::int64_t tol) {
  const StatusRecord* before = nullptr;
  const StatusRecord* after = nullptr;
  for (const auto& r : rows) {
    std::int64_t at = r.at.seconds();
    if (at <= instant && at >= instant - tol && (!before || at >= before->at.seconds()))
      before = &r;
    if (at > instant && at <= instant + tol && (!after || at < after->at.seconds())) after = &r;
  }
  if (before) return before->bikes_available;
  if (after) return after->bikes_available;
  return std::nullopt;
}

struct WaitOracle {
  std::vector<Factors> factors;
  std::vector<double> probability;
  bool any = false;
};

inline WaitOracle wait(const synth::Data& d, int station, const Timestamp& arrival,
                       const FactorWeights& w, int horizon = 30, int weeks = 6, int months = 6,
                       int tol_minutes = 5) {
  std::vector<StatusRecord> rows;
  int docks = 0;
  for (const auto& s : d.status)
    if (s.station_id == station) rows.push_back(s);
  for (const auto& s : d.stations)
    if (s.station_id == station) docks = s.dock_count;

  const std::int64_t t = arrival.date.serial();
  std::vector<std::int64_t> dow_dates, cw_dates, dom_dates;
  for (std::int64_t s = t - 400; s < t; ++s) {
    if (is_same_weekday_ref(t, s, weeks)) dow_dates.push_back(s);
    if (is_current_week_ref(t, s)) cw_dates.push_back(s);
    if (is_day_of_month_ref(arrival.date, Date::from_serial(s), months)) dom_dates.push_back(s);
  }

  WaitOracle out;
  const std::int64_t clock0 = arrival.hour * 3600 + arrival.minute * 60 + arrival.second;
  for (int m = 0; m <= horizon; ++m) {
    auto factor = [&](const std::vector<std::int64_t>& dates) {
      std::vector<double> v;
      for (auto s : dates)
        if (auto b = lookup(rows, s * 86400 + clock0 + m * 60, tol_minutes * 60)) v.push_back(*b);
      return mean(v);
    };
    Factors f{factor(dow_dates), factor(cw_dates), factor(dom_dates)};
    auto combined = combine(w.day_of_week, w.current_week, w.day_of_month, f);
    double p = 0.0;
    if (combined) {
      out.any = true;
      p = std::min(1.0, std::max(0.0, *combined / docks));
    }
    out.factors.push_back(f);
    out.probability.push_back(p);
  }
  return out;
}

inline bool in_window(const Timestamp& t, const TimeWindow& w) {
  std::int64_t s = t.seconds();
  return s >= w.from && s < w.to;
}

struct Busy {
  std::int64_t incoming = 0, outgoing = 0;
};

inline Busy busyness(const synth::Data& d, int station, const TimeWindow& w) {
  Busy b;
  for (const auto& t : d.trips) {
    if (t.end_station_id == station && in_window(t.end_at, w)) ++b.incoming;
    if (t.start_station_id == station && in_window(t.start_at, w)) ++b.outgoing;
  }
  return b;
}

inline std::int64_t hourly(const synth::Data& d, int station, int hour, const TimeWindow& w) {
  std::int64_t n = 0;
  for (const auto& t : d.trips) {
    if (t.start_station_id == station && in_window(t.start_at, w) && t.start_at.hour == hour) ++n;
    if (t.end_station_id == station && in_window(t.end_at, w) && t.end_at.hour == hour) ++n;
  }
  return n;
}

// Stations ordered busiest first, ties by id.
inline std::vector<std::pair<int, std::int64_t>> ranking(const synth::Data& d,
                                                         const TimeWindow& w) {
  std::vector<std::pair<int, std::int64_t>> all;
  for (const auto& s : d.stations) {
    Busy b = busyness(d, s.station_id, w);
    all.emplace_back(s.station_id, b.incoming + b.outgoing);
  }
  // selection sort on purpose: different algorithm from the library
  for (std::size_t i = 0; i < all.size(); ++i) {
    std::size_t best = i;
    for (std::size_t j = i + 1; j < all.size(); ++j) {
      bool better = all[j].second > all[best].second ||
                    (all[j].second == all[best].second && all[j].first < all[best].first);
      if (better) best = j;
    }
    std::swap(all[i], all[best]);
  }
  return all;
}

struct TripTime {
  std::size_t n = 0;
  double mean = 0;
  std::int64_t min = 0, max = 0;
};

inline TripTime trip_time(const synth::Data& d, int x, int y, const TimeWindow& w) {
  TripTime r;
  std::int64_t sum = 0;
  for (const auto& t : d.trips) {
    bool match = (t.start_station_id == x && t.end_station_id == y) ||
                 (t.start_station_id == y && t.end_station_id == x);
    if (!match || !in_window(t.start_at, w)) continue;
    if (r.n == 0) r.min = r.max = t.duration;
    r.min = std::min(r.min, t.duration);
    r.max = std::max(r.max, t.duration);
    sum += t.duration;
    ++r.n;
  }
  if (r.n) r.mean = static_cast<double>(sum) / static_cast<double>(r.n);
  return r;
}

inline std::int64_t route(const synth::Data& d, int x, int y, const TimeWindow& w) {
  std::int64_t n = 0;
  for (const auto& t : d.trips) {
    bool match = (t.start_station_id == x && t.end_station_id == y) ||
                 (t.start_station_id == y && t.end_station_id == x);
    if (match && in_window(t.start_at, w)) ++n;
  }
  return n;
}

struct Load {
  bool found = false;
  int bikes = 0, docks = 0;
};

inline Load load(const synth::Data& d, int station, const Timestamp& at) {
  Load r;
  std::int64_t best = INT64_MIN;
  for (const auto& s : d.status) {
    if (s.station_id != station || s.at > at) continue;
    if (s.at.seconds() >= best) {
      best = s.at.seconds();
      r = {true, s.bikes_available, s.docks_available};
    }
  }
  return r;
}

}  // namespace oracle
