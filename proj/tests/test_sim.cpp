#include <doctest.h>

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "velomule/error.hpp"
#include "velomule/sim.hpp"

using namespace velomule;
using namespace velomule::sim;

namespace {

SimConfig line_config(double length, double range, double speed) {
  SimConfig c;
  c.n_bikes = 1;
  c.stations = {{1, 0.0, 0.0}, {2, length, 0.0}};
  c.radio_range = range;
  c.bike_speed = speed;
  c.max_start_delay = 0;
  c.duration = 3600;
  return c;
}

World one_bike(const SimConfig& c) {
  BikeState b;
  b.source_station = 1;
  b.dest_station = 2;
  return make_world(c, {b});
}

std::string trace_text(const SimTrace& t) {
  std::ostringstream out;
  write_trace(out, t);
  return out.str();
}

}  // namespace

TEST_CASE("offload: equal split, remainder by ascending id") {
  std::vector<int> one{4};
  CHECK(offload(one, 100) == std::vector<std::pair<int, std::uint64_t>>{{4, 100}});
  std::vector<int> two{1, 2};
  CHECK(offload(two, 100) == std::vector<std::pair<int, std::uint64_t>>{{1, 50}, {2, 50}});
  std::vector<int> three{5, 2, 9};
  CHECK(offload(three, 100) ==
        std::vector<std::pair<int, std::uint64_t>>{{2, 34}, {5, 33}, {9, 33}});
  CHECK(offload(std::vector<int>{}, 100).empty());
  std::vector<int> big{3, 1, 2};
  CHECK(offload(big, 1) == std::vector<std::pair<int, std::uint64_t>>{{1, 1}, {2, 0}, {3, 0}});
}

TEST_CASE("config validation names the field") {
  SimConfig c;
  c.stations = {{1, 0, 0}};
  try {
    init_simulation(c);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.field() == "stations");
  }
  SimConfig z;
  z.n_bikes = 0;
  CHECK_THROWS_AS(init_simulation(z), ConfigError);
  SimConfig r;
  r.radio_range = 0;
  CHECK_THROWS_AS(init_simulation(r), ConfigError);
  SimConfig t;
  t.tick = -1;
  CHECK_THROWS_AS(init_simulation(t), ConfigError);
}

TEST_CASE("initial state is deterministic and well formed") {
  SimConfig c;
  c.n_bikes = 200;
  c.seed = 77;
  World a = init_simulation(c);
  World b = init_simulation(c);
  CHECK(a.bikes == b.bikes);
  for (const auto& bike : a.bikes) {
    CHECK(bike.source_station != bike.dest_station);
    CHECK(bike.start_time_ms >= 0);
    CHECK(bike.start_time_ms <= 300000);
    CHECK(bike.phase == BikePhase::Waiting);
  }
}

TEST_CASE("source stations are uniform") {
  // 5 degrees of freedom; P(chi2 > 15.086) = 0.01.
  int over = 0;
  const int seeds = 200;
  for (int seed = 1; seed <= seeds; ++seed) {
    SimConfig c;
    c.n_bikes = 1000;
    c.seed = static_cast<std::uint64_t>(seed);
    std::map<int, int> count;
    std::map<int, int> dest;
    for (const auto& b : init_simulation(c).bikes) {
      ++count[b.source_station];
      ++dest[b.dest_station];
    }
    double chi2 = 0;
    for (int id = 1; id <= 6; ++id) {
      CHECK(count[id] >= 100);
      CHECK(count[id] <= 233);
      CHECK(dest[id] >= 100);
      CHECK(dest[id] <= 233);
      double diff = count[id] - 1000.0 / 6;
      chi2 += diff * diff / (1000.0 / 6);
    }
    if (chi2 > 15.086) ++over;
  }
  CHECK(over <= 8);  // expected 2 of 200
}

TEST_CASE("Rng::below stays in range") {
  Rng rng(3);
  for (std::uint64_t n : {1ull, 2ull, 3ull, 7ull, 1000ull, (1ull << 63) + 5}) {
    for (int i = 0; i < 1000; ++i) CHECK(rng.below(n) < n);
  }
}

TEST_CASE("step: 100 m at 5 m/s arrives on tick 20") {
  auto w = one_bike(line_config(100, 1, 5));
  int ticks = 0;
  while (!w.all_arrived()) {
    step(w);
    ++ticks;
    if (ticks < 20) CHECK(w.bikes[0].phase == BikePhase::Riding);
  }
  CHECK(ticks == 20);
  CHECK(w.bikes[0].x == 100.0);
}

TEST_CASE("step: out of range with nothing to send emits no transfers") {
  auto c = line_config(1000, 10, 4);
  c.sense_rate = 0;
  auto w = one_bike(c);
  for (int i = 0; i < 3; ++i) step(w);
  CHECK(w.events.empty());
  CHECK(w.bikes[0].x == 12.0);
}

TEST_CASE("closed radio boundary") {
  auto w = one_bike(line_config(1000, 100, 100));
  step(w);
  CHECK(w.bikes[0].x == 100.0);
  REQUIRE(w.events.size() == 3);
  CHECK(w.events[1] == TraceEvent{EventKind::Send, 1000, 1, 1, 8});

  auto v = one_bike(line_config(1000, 99.999, 100));
  step(v);
  REQUIRE(v.events.size() == 1);
  CHECK(v.events[0].kind == EventKind::Generate);
  CHECK(v.bikes[0].buffer == 8);
}

TEST_CASE("hand-computed 1 km ride") {
  // 250 s at 4 m/s, 8 B/s. Station 1 hears ticks 1..25 (200 B). Station 2
  // first hears the bike at 900 m (t = 225), taking the 1600 B accumulated
  // since t = 26, then 8 B on each of the last 25 ticks.
  auto trace = run_world(one_bike(line_config(1000, 100, 4)));
  CHECK(trace.received_by_station.at(1) == 200);
  CHECK(trace.received_by_station.at(2) == 1800);
  CHECK(trace.sent_by_bike.at(1) == 2000);
  CHECK(trace.end_time_ms == 250000);
  const auto& bike = trace.final_bikes[0];
  CHECK(bike.total_generated == 2000);
  CHECK(bike.buffer == 0);
  CHECK(bike.phase == BikePhase::Arrived);

  int flush = 0;
  for (const auto& e : trace.events) {
    if (e.kind != EventKind::Send) continue;
    // nothing is sent while both stations are out of range
    CHECK((e.time_ms <= 25000 || e.time_ms >= 225000));
    if (e.time_ms == 225000) {
      CHECK(e.bytes == 1600);
      ++flush;
    }
  }
  CHECK(flush == 1);
}

TEST_CASE("everything generated is delivered by arrival") {
  auto c = line_config(1000, 50, 4);
  c.stations = {{1, 0, 0}, {2, 1000, 0}};
  BikeState b;
  b.source_station = 2;
  b.dest_station = 1;
  auto trace = run_world(make_world(c, {b}));
  std::uint64_t sent = 0;
  for (auto [_, v] : trace.sent_by_bike) sent += v;
  std::uint64_t got = 0;
  for (auto [_, v] : trace.received_by_station) got += v;
  CHECK(sent == got);
  CHECK(got == 2000);
}

TEST_CASE("zero sense rate means no transfers") {
  SimConfig c;
  c.n_bikes = 20;
  c.sense_rate = 0;
  auto t = run_simulation(c);
  CHECK(t.events.empty());
}

TEST_CASE("seeds reproduce and differ") {
  SimConfig c;
  c.n_bikes = 10;
  c.seed = 1;
  auto a1 = trace_text(run_simulation(c));
  auto a2 = trace_text(run_simulation(c));
  c.seed = 2;
  auto b = trace_text(run_simulation(c));
  CHECK(a1 == a2);
  CHECK(a1 != b);
}

TEST_CASE("partial last tick ends exactly at duration") {
  SimConfig c;
  c.n_bikes = 5;
  c.tick = 0.7;
  c.duration = 10;
  c.max_start_delay = 0;
  auto t = run_simulation(c);
  CHECK(t.end_time_ms == 10000);
  for (const auto& b : t.final_bikes) CHECK(b.total_generated == 80);
}

TEST_CASE("conservation and pairing over random configs") {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    SimConfig c;
    c.seed = seed;
    c.n_bikes = static_cast<int>(1 + seed % 17);
    c.radio_range = 50.0 + 25.0 * static_cast<double>(seed % 9);
    c.tick = seed % 3 == 0 ? 0.5 : 1.0;
    c.duration = 200.0 + 50.0 * static_cast<double>(seed % 7);
    auto t = run_simulation(c);
    std::uint64_t sent = 0, got = 0;
    for (auto [_, v] : t.sent_by_bike) sent += v;
    for (auto [_, v] : t.received_by_station) got += v;
    CHECK(sent == got);
    for (const auto& b : t.final_bikes) {
      CHECK(b.total_generated == b.total_sent + b.buffer);
      CHECK(t.sent_by_bike[b.bike_id] == b.total_sent);
    }
    for (std::size_t i = 1; i < t.events.size(); ++i) CHECK(t.events[i - 1].time_ms <= t.events[i].time_ms);
    CHECK_NOTHROW(summarize_trace(t.events));
  }
}

TEST_CASE("summarize_trace") {
  CHECK(summarize_trace({}) == TraceSummary{});
  std::vector<TraceEvent> ok{{EventKind::Send, 0, 1, 1, 100}, {EventKind::Receive, 0, 1, 1, 100}};
  auto s = summarize_trace(ok);
  CHECK(s.sent_by_bike == std::map<int, std::uint64_t>{{1, 100}});
  CHECK(s.received_by_station == std::map<int, std::uint64_t>{{1, 100}});

  std::vector<TraceEvent> orphan{{EventKind::Receive, 0, 1, 1, 100}};
  CHECK_THROWS_AS(summarize_trace(orphan), TraceError);
  std::vector<TraceEvent> unanswered{{EventKind::Send, 0, 1, 1, 100}};
  CHECK_THROWS_AS(summarize_trace(unanswered), TraceError);
  std::vector<TraceEvent> mismatch{{EventKind::Send, 0, 1, 1, 100}, {EventKind::Receive, 0, 1, 1, 99}};
  CHECK_THROWS_AS(summarize_trace(mismatch), TraceError);
}

TEST_CASE("3-bike trace totals match a line-by-line tally") {
  SimConfig c;
  c.n_bikes = 3;
  c.seed = 5;
  c.radio_range = 200;
  auto t = run_simulation(c);
  std::istringstream in(trace_text(t));
  std::map<int, std::uint64_t> bike, station;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string kind, time;
    int b = 0, s = 0;
    std::uint64_t bytes = 0;
    ls >> kind;
    if (kind == "s") {
      ls >> time >> b >> s >> bytes;
      bike[b] += bytes;
    } else if (kind == "r") {
      ls >> time >> b >> s >> bytes;
      station[s] += bytes;
    }
  }
  CHECK(!station.empty());
  CHECK(station == t.received_by_station);
  for (auto [id, v] : bike) CHECK(t.sent_by_bike.at(id) == v);
}

TEST_CASE("trace text round-trips") {
  SimConfig c;
  c.n_bikes = 4;
  c.tick = 0.25;
  auto t = run_simulation(c);
  std::istringstream in(trace_text(t));
  auto parsed = read_trace(in);
  CHECK(parsed.events == t.events);
  CHECK(parsed.summary.received_by_station == t.received_by_station);
  CHECK(parsed.summary.sent_by_bike == t.sent_by_bike);
  std::istringstream junk("g 1.0 1 8\n");
  CHECK_THROWS_AS(read_trace(junk), TraceError);
  CHECK(format_time_ms(1500) == "1.500");
}

TEST_CASE("golden trace: 6-station grid, 10 bikes, seed 42, 600 s") {
  SimConfig c;
  c.n_bikes = 10;
  c.seed = 42;
  c.duration = 600;
  std::ifstream f(VELOMULE_GOLDEN_DIR "/grid10_seed42.trace", std::ios::binary);
  REQUIRE(f);
  std::stringstream want;
  want << f.rdbuf();
  CHECK(trace_text(run_simulation(c)) == want.str());
}

TEST_CASE("projection keeps ids and relative geometry") {
  std::vector<StationRecord> recs(2);
  recs[0].station_id = 9;
  recs[0].latitude = 37.0;
  recs[0].longitude = -122.0;
  recs[1].station_id = 3;
  recs[1].latitude = 37.001;
  recs[1].longitude = -122.0;
  auto st = project_stations(recs);
  REQUIRE(st.size() == 2);
  CHECK(st[0].station_id == 3);
  CHECK(st[0].y - st[1].y == doctest::Approx(111.195).epsilon(1e-3));
  CHECK(grid_stations().size() == 6);
  CHECK(grid_stations()[5] == Station{6, 1000.0, 500.0});
}

TEST_CASE("every bike arrives when the run is long enough") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    SimConfig c;
    c.seed = seed;
    c.n_bikes = 25;
    c.tick = seed % 2 ? 1.0 : 0.3;
    // longest grid segment is the 1000 x 500 m diagonal
    c.duration = c.max_start_delay + std::hypot(1000.0, 500.0) / c.bike_speed + c.tick;
    auto t = run_simulation(c);
    for (const auto& b : t.final_bikes) CHECK(b.phase == BikePhase::Arrived);
  }
}

TEST_CASE("no byte is sent while every station is out of range") {
  SimConfig c;
  c.n_bikes = 30;
  c.seed = 8;
  auto w = init_simulation(c);
  while (w.now_ms < 600000 && !w.all_arrived()) {
    std::size_t before = w.events.size();
    step(w);
    for (std::size_t i = before; i < w.events.size(); ++i) {
      const auto& e = w.events[i];
      if (e.kind != EventKind::Send) continue;
      const auto& b = w.bikes[static_cast<std::size_t>(e.bike_id - 1)];
      const auto& st = c.stations[static_cast<std::size_t>(*e.station_id - 1)];
      CHECK(std::hypot(st.x - b.x, st.y - b.y) <= c.radio_range);
    }
  }
}
