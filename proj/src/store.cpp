#include "velomule/store.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_set>

#include "velomule/error.hpp"

namespace velomule {

namespace {

const StatusSeries kEmptySeries;

template <class Map>
HistoryStore::TripIndex lookup(const Map& m, const typename Map::key_type& key) {
  auto it = m.find(key);
  if (it == m.end()) return {};
  return it->second;
}

}  // namespace

std::vector<int> HistoryStore::station_ids() const {
  std::vector<int> ids;
  ids.reserve(stations_.size());
  for (const auto& s : stations_) ids.push_back(s.station_id);
  return ids;
}

const StationRecord* HistoryStore::find_station(int id) const {
  auto it = station_pos_.find(id);
  return it == station_pos_.end() ? nullptr : &stations_[it->second];
}

const StationRecord& HistoryStore::station(int id) const {
  if (const auto* s = find_station(id)) return *s;
  throw UnknownStation(id);
}

const StatusSeries& HistoryStore::status(int station_id) const {
  auto it = status_.find(station_id);
  return it == status_.end() ? kEmptySeries : it->second;
}

HistoryStore::TripIndex HistoryStore::trips_starting_at(int station_id) const {
  return lookup(by_start_, station_id);
}

HistoryStore::TripIndex HistoryStore::trips_ending_at(int station_id) const {
  return lookup(by_end_, station_id);
}

HistoryStore::TripIndex HistoryStore::trips_between(int from, int to) const {
  return lookup(by_pair_, {from, to});
}

std::optional<std::pair<Timestamp, Timestamp>> HistoryStore::status_span() const {
  std::optional<std::pair<std::int64_t, std::int64_t>> span;
  for (const auto& [id, series] : status_) {
    if (series.empty()) continue;
    if (!span) span.emplace(series.at.front(), series.at.back());
    span->first = std::min(span->first, series.at.front());
    span->second = std::max(span->second, series.at.back());
  }
  if (!span) return std::nullopt;
  return std::pair{Timestamp::from_seconds(span->first), Timestamp::from_seconds(span->second)};
}

std::optional<std::pair<Timestamp, Timestamp>> HistoryStore::trip_span() const {
  if (trips_.empty()) return std::nullopt;
  Timestamp last = trips_.front().end_at;
  for (const auto& t : trips_) last = std::max(last, t.end_at);
  return std::pair{trips_.front().start_at, last};
}

std::vector<StatusRecord> HistoryStore::status_records() const {
  std::vector<StatusRecord> out;
  out.reserve(summary_.status_records);
  for (const auto& st : stations_) {
    const StatusSeries& s = status(st.station_id);
    for (std::size_t i = 0; i < s.size(); ++i)
      out.push_back({st.station_id, s.bikes[i], s.docks[i], Timestamp::from_seconds(s.at[i])});
  }
  return out;
}

bool HistoryStore::operator==(const HistoryStore& other) const {
  return stations_ == other.stations_ && status_ == other.status_ && trips_ == other.trips_ &&
         by_start_ == other.by_start_ && by_end_ == other.by_end_ &&
         by_pair_ == other.by_pair_ && summary_ == other.summary_;
}

HistoryStore build_store(std::vector<StationRecord> stations, std::vector<StatusRecord> status,
                         std::vector<TripRecord> trips, const BuildOptions& opts) {
  HistoryStore store;
  BuildSummary& sum = store.summary_;

  // Stations: first occurrence of an id wins.
  std::stable_sort(stations.begin(), stations.end(),
                   [](const auto& a, const auto& b) { return a.station_id < b.station_id; });
  for (auto& s : stations) {
    if (!store.stations_.empty() && store.stations_.back().station_id == s.station_id) {
      if (opts.strict)
        throw IntegrityError("duplicate station_id " + std::to_string(s.station_id));
      ++sum.duplicate_stations;
      continue;
    }
    store.station_pos_.emplace(s.station_id, store.stations_.size());
    store.stations_.push_back(std::move(s));
  }

  // Status: drop dangling rows, then sort per station by time keeping input
  // order among equal timestamps.
  std::vector<StatusRecord> kept;
  kept.reserve(status.size());
  for (auto& r : status) {
    if (!store.has_station(r.station_id)) {
      if (opts.strict)
        throw IntegrityError("status row references unknown station " +
                             std::to_string(r.station_id));
      ++sum.dangling_status;
      continue;
    }
    kept.push_back(r);
  }
  status.clear();
  status.shrink_to_fit();
  std::stable_sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    if (a.station_id != b.station_id) return a.station_id < b.station_id;
    return a.at < b.at;
  });
  for (const auto& r : kept) {
    StatusSeries& s = store.status_[r.station_id];
    s.at.push_back(r.at.seconds());
    s.bikes.push_back(r.bikes_available);
    s.docks.push_back(r.docks_available);
  }
  sum.status_records = kept.size();

  // Trips: unique ids, endpoints must resolve.
  std::unordered_set<std::int64_t> seen_ids;
  seen_ids.reserve(trips.size());
  for (auto& t : trips) {
    bool dangling = !store.has_station(t.start_station_id) || !store.has_station(t.end_station_id);
    if (dangling) {
      if (opts.strict)
        throw IntegrityError("trip " + std::to_string(t.trip_id) + " references unknown station");
      ++sum.dangling_trips;
      continue;
    }
    if (!seen_ids.insert(t.trip_id).second) {
      if (opts.strict) throw IntegrityError("duplicate trip_id " + std::to_string(t.trip_id));
      ++sum.duplicate_trips;
      continue;
    }
    if (t.duration_mismatch()) ++sum.duration_mismatches;
    store.trips_.push_back(std::move(t));
  }
  std::sort(store.trips_.begin(), store.trips_.end(), [](const auto& a, const auto& b) {
    if (a.start_at != b.start_at) return a.start_at < b.start_at;
    return a.trip_id < b.trip_id;
  });

  for (std::uint32_t i = 0; i < store.trips_.size(); ++i) {
    const TripRecord& t = store.trips_[i];
    store.by_start_[t.start_station_id].push_back(i);
    store.by_end_[t.end_station_id].push_back(i);
    store.by_pair_[{t.start_station_id, t.end_station_id}].push_back(i);
  }
  for (auto& [id, idx] : store.by_end_) {
    std::stable_sort(idx.begin(), idx.end(), [&](std::uint32_t a, std::uint32_t b) {
      return store.trips_[a].end_at < store.trips_[b].end_at;
    });
  }

  sum.stations = store.stations_.size();
  sum.trip_records = store.trips_.size();
  return store;
}

}  // namespace velomule
