#include <doctest.h>

#include <fstream>
#include <numeric>

#include "fixtures.hpp"
#include "velomule/error.hpp"

using namespace velomule;

TEST_CASE("empty inputs build an empty store") {
  HistoryStore s = build_store({}, {}, {});
  CHECK(s.stations().empty());
  CHECK(s.trips().empty());
  CHECK(s.status_count() == 0);
  CHECK_FALSE(s.status_span());
  CHECK(s.summary().dangling_count() == 0);
}

TEST_CASE("dangling trip is counted, or rejected when strict") {
  std::vector<StationRecord> st{fx::station(1), fx::station(2)};
  std::vector<TripRecord> trips{fx::trip(1, 1, "2016-01-01 08:00:00", 2, 600),
                                fx::trip(2, 1, "2016-01-01 09:00:00", 999, 600)};
  HistoryStore s = build_store(st, {}, trips);
  CHECK(s.summary().dangling_count() == 1);
  CHECK(s.trips().size() == 1);
  CHECK_THROWS_AS(build_store(st, {}, trips, BuildOptions{true}), IntegrityError);
}

TEST_CASE("duplicates: first station wins, duplicate trip ids dropped") {
  auto a = fx::station(1, 10);
  auto b = fx::station(1, 30);
  std::vector<TripRecord> trips{fx::trip(5, 1, "2016-01-01 08:00:00", 1, 60),
                                fx::trip(5, 1, "2016-01-02 08:00:00", 1, 60)};
  HistoryStore s = build_store({a, b}, {}, trips);
  CHECK(s.station(1).dock_count == 10);
  CHECK(s.summary().duplicate_stations == 1);
  CHECK(s.summary().duplicate_trips == 1);
  CHECK(s.trips().size() == 1);
  CHECK_THROWS_AS(s.station(2), UnknownStation);
}

TEST_CASE("20-trip log: start indexes partition the trips") {
  synth::Spec spec;
  spec.trips = 20;
  spec.status_rows = 50;
  auto d = synth::generate(spec);
  HistoryStore s = fx::store_of(d);
  std::size_t total = 0;
  for (int id : s.station_ids()) {
    auto idx = s.trips_starting_at(id);
    total += idx.size();
    for (auto i : idx) CHECK(s.trips()[i].start_station_id == id);
  }
  CHECK(total == 20);
}

TEST_CASE("indexes are complete and sorted") {
  auto d = synth::generate({});
  HistoryStore s = fx::store_of(d);
  const auto trips = s.trips();
  for (std::size_t i = 1; i < trips.size(); ++i) CHECK_FALSE(trips[i].start_at < trips[i - 1].start_at);

  std::size_t ends = 0, pairs = 0;
  for (int id : s.station_ids()) {
    auto e = s.trips_ending_at(id);
    ends += e.size();
    for (std::size_t k = 0; k < e.size(); ++k) {
      CHECK(trips[e[k]].end_station_id == id);
      if (k) CHECK_FALSE(trips[e[k]].end_at < trips[e[k - 1]].end_at);
    }
    for (int to : s.station_ids()) {
      auto p = s.trips_between(id, to);
      pairs += p.size();
      for (auto i : p) CHECK((trips[i].start_station_id == id && trips[i].end_station_id == to));
    }
    const auto& series = s.status(id);
    for (std::size_t k = 1; k < series.size(); ++k) CHECK(series.at[k - 1] <= series.at[k]);
  }
  CHECK(ends == trips.size());
  CHECK(pairs == trips.size());
  CHECK(s.status_count() == d.status.size());
}

TEST_CASE("build is deterministic regardless of input order") {
  auto d = synth::generate({});
  HistoryStore a = fx::store_of(d);
  std::reverse(d.status.begin(), d.status.end());
  std::reverse(d.trips.begin(), d.trips.end());
  HistoryStore b = fx::store_of(d);
  CHECK(a == b);
}

TEST_CASE("cache round-trip and rejection") {
  fx::TempDir dir("cache");
  auto d = synth::generate({});
  HistoryStore s = fx::store_of(d);
  auto file = dir.path / "store.bin";
  save_store_cache(s, file, 42);

  auto back = load_store_cache(file, 42);
  REQUIRE(back);
  CHECK(*back == s);
  CHECK(back->summary() == s.summary());

  CHECK_FALSE(load_store_cache(file, 43));
  CHECK_FALSE(load_store_cache(dir.path / "missing.bin", 42));

  {
    std::fstream f(file, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(200);
    char c = 0;
    f.read(&c, 1);
    f.seekp(200);
    c = static_cast<char>(c ^ 0x5a);
    f.write(&c, 1);
  }
  CHECK_FALSE(load_store_cache(file, 42));
}
