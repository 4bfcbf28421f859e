#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <unistd.h>

#include "synth.hpp"
#include "velomule/analytics.hpp"
#include "velomule/error.hpp"
#include "velomule/store.hpp"

namespace fx {

using namespace velomule;

inline StationRecord station(int id, int docks = 20) {
  StationRecord s;
  s.station_id = id;
  s.name = "S" + std::to_string(id);
  s.latitude = 37.3;
  s.longitude = -121.9;
  s.dock_count = docks;
  s.landmark = "X";
  s.installation = Date{2013, 8, 6};
  return s;
}

inline StatusRecord status(int id, int bikes, const char* at, int docks = -1) {
  return StatusRecord{id, bikes, docks < 0 ? 0 : docks, parse_timestamp(at)};
}

inline TripRecord trip(std::int64_t id, int from, const char* start, int to, std::int64_t secs) {
  TripRecord t;
  t.trip_id = id;
  t.start_station_id = from;
  t.end_station_id = to;
  t.start_at = parse_timestamp(start);
  t.duration = secs;
  t.end_at = Timestamp::from_seconds(t.start_at.seconds() + secs);
  return t;
}

inline HistoryStore store_of(const synth::Data& d) { return build_store(d.stations, d.status, d.trips); }

/// A (station, 15:45 arrival) whose wait series has history.
inline std::pair<int, Timestamp> wait_query(const synth::Data& d) {
  HistoryStore s = store_of(d);
  for (int day = 14; day < d.days; ++day)
    for (int id : s.station_ids()) {
      Timestamp at{d.first_day.add_days(day), 15, 45, 0};
      try {
        wait_probability_series(s, id, at);
        return {id, at};
      } catch (const Error&) {
      }
    }
  throw Error("no wait query with history");
}

/// Scratch directory removed on scope exit.
struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path = std::filesystem::temp_directory_path() /
           ("velomule-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
};

}  // namespace fx
