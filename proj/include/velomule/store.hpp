#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include "velomule/ingest.hpp"

namespace velomule {

/// Per-station availability samples, ascending by time, stored as columns.
struct StatusSeries {
  std::vector<std::int64_t> at;  // seconds on the naive clock
  std::vector<std::int32_t> bikes;
  std::vector<std::int32_t> docks;

  std::size_t size() const { return at.size(); }
  bool empty() const { return at.empty(); }
  bool operator==(const StatusSeries&) const = default;
};

struct BuildOptions {
  bool strict = false;  // dangling or duplicate rows throw IntegrityError
};

struct BuildSummary {
  std::size_t stations = 0;
  std::size_t status_records = 0;
  std::size_t trip_records = 0;
  std::size_t duplicate_stations = 0;
  std::size_t duplicate_trips = 0;
  std::size_t dangling_status = 0;
  std::size_t dangling_trips = 0;
  std::size_t duration_mismatches = 0;

  std::size_t dangling_count() const { return dangling_status + dangling_trips; }
  bool operator==(const BuildSummary&) const = default;
};

/// Immutable, indexed snapshot of every ingested record. All accessors are
/// const and the object is never modified after `build_store` returns, so any
/// number of threads may read it concurrently.
class HistoryStore {
public:
  using TripIndex = std::span<const std::uint32_t>;

  /// Ascending by station_id.
  const std::vector<StationRecord>& stations() const { return stations_; }
  std::vector<int> station_ids() const;
  bool has_station(int id) const { return station_pos_.count(id) != 0; }
  const StationRecord* find_station(int id) const;
  /// Throws UnknownStation.
  const StationRecord& station(int id) const;

  /// Empty series for stations without samples.
  const StatusSeries& status(int station_id) const;
  std::size_t status_count() const { return summary_.status_records; }

  /// Sorted by (start_at, trip_id).
  std::span<const TripRecord> trips() const { return trips_; }
  /// Positions into trips(), ascending by start_at.
  TripIndex trips_starting_at(int station_id) const;
  /// Positions into trips(), ascending by end_at.
  TripIndex trips_ending_at(int station_id) const;
  /// Directed from -> to, ascending by start_at.
  TripIndex trips_between(int from, int to) const;

  /// Earliest and latest status sample over all stations.
  std::optional<std::pair<Timestamp, Timestamp>> status_span() const;
  /// Earliest start_at and latest end_at over all trips.
  std::optional<std::pair<Timestamp, Timestamp>> trip_span() const;

  const BuildSummary& summary() const { return summary_; }

  /// Flattened status rows, ordered by (station_id, at).
  std::vector<StatusRecord> status_records() const;

  bool operator==(const HistoryStore& other) const;

private:
  friend HistoryStore build_store(std::vector<StationRecord>, std::vector<StatusRecord>,
                                  std::vector<TripRecord>, const BuildOptions&);
  friend std::optional<HistoryStore> load_store_cache(const std::filesystem::path&,
                                                      std::uint64_t);

  std::vector<StationRecord> stations_;
  std::unordered_map<int, std::size_t> station_pos_;
  std::unordered_map<int, StatusSeries> status_;
  std::vector<TripRecord> trips_;
  std::unordered_map<int, std::vector<std::uint32_t>> by_start_;
  std::unordered_map<int, std::vector<std::uint32_t>> by_end_;
  std::map<std::pair<int, int>, std::vector<std::uint32_t>> by_pair_;
  BuildSummary summary_;
};

HistoryStore build_store(std::vector<StationRecord> stations, std::vector<StatusRecord> status,
                         std::vector<TripRecord> trips, const BuildOptions& opts = {});

/// Binary snapshot of a built store. The file carries a format version, the
/// caller's fingerprint of the source files, and a CRC-32 of the payload; a
/// mismatch in any of them makes `load_store_cache` return nullopt.
void save_store_cache(const HistoryStore& store, const std::filesystem::path& path,
                      std::uint64_t fingerprint);
std::optional<HistoryStore> load_store_cache(const std::filesystem::path& path,
                                             std::uint64_t fingerprint);

}  // namespace velomule
