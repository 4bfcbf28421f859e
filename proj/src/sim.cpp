#include "velomule/sim.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>
#include <tuple>

#include "velomule/error.hpp"

namespace velomule::sim {

namespace {

std::int64_t to_ms(double seconds) { return std::llround(seconds * 1000.0); }

const Station& station_by_id(const std::vector<Station>& stations, int id) {
  for (const auto& s : stations)
    if (s.station_id == id) return s;
  throw ConfigError("stations", "no station " + std::to_string(id));
}

double segment_length(const Station& a, const Station& b) { return std::hypot(b.x - a.x, b.y - a.y); }

void emit_transfers(World& w, BikeState& bike, std::int64_t time_ms) {
  std::vector<int> in_range;
  for (const auto& st : w.config.stations)
    if (std::hypot(st.x - bike.x, st.y - bike.y) <= w.config.radio_range)
      in_range.push_back(st.station_id);
  if (in_range.empty() || bike.buffer == 0) return;
  for (auto [station, bytes] : offload(in_range, bike.buffer)) {
    if (bytes == 0) continue;
    w.events.push_back({EventKind::Send, time_ms, bike.bike_id, station, bytes});
    w.events.push_back({EventKind::Receive, time_ms, bike.bike_id, station, bytes});
    bike.total_sent += bytes;
  }
  bike.buffer = 0;
}

}  // namespace

std::vector<Station> grid_stations(int cols, int rows, double spacing) {
  std::vector<Station> out;
  int id = 1;
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) out.push_back({id++, c * spacing, r * spacing});
  return out;
}

std::vector<Station> project_stations(std::span<const StationRecord> records) {
  constexpr double kEarthRadius = 6371000.0;
  constexpr double kRad = std::numbers::pi / 180.0;
  if (records.empty()) return {};
  double lat0 = 0.0, lon0 = 0.0;
  for (const auto& r : records) {
    lat0 += r.latitude;
    lon0 += r.longitude;
  }
  lat0 /= static_cast<double>(records.size());
  lon0 /= static_cast<double>(records.size());
  std::vector<Station> out;
  for (const auto& r : records)
    out.push_back({r.station_id, kEarthRadius * (r.longitude - lon0) * kRad * std::cos(lat0 * kRad),
                   kEarthRadius * (r.latitude - lat0) * kRad});
  std::sort(out.begin(), out.end(),
            [](const auto& a, const auto& b) { return a.station_id < b.station_id; });
  return out;
}

void SimConfig::validate() const {
  if (n_bikes < 1) throw ConfigError("n_bikes", "must be at least 1");
  if (stations.size() < 2) throw ConfigError("stations", "need at least 2 stations");
  for (std::size_t i = 0; i < stations.size(); ++i)
    for (std::size_t j = i + 1; j < stations.size(); ++j)
      if (stations[i].station_id == stations[j].station_id)
        throw ConfigError("stations", "duplicate station id " + std::to_string(stations[i].station_id));
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(name, "must be positive");
  };
  positive(radio_range, "radio_range");
  positive(bike_speed, "bike_speed");
  positive(tick, "tick");
  positive(duration, "duration");
  if (to_ms(tick) < 1) throw ConfigError("tick", "must be at least 1 ms");
  if (!(sense_rate >= 0.0) || !std::isfinite(sense_rate))
    throw ConfigError("sense_rate", "must be non-negative");
  if (!(max_start_delay >= 0.0) || !std::isfinite(max_start_delay))
    throw ConfigError("max_start_delay", "must be non-negative");
}

std::uint64_t Rng::below(std::uint64_t n) {
  // Reject the low values that would make `r % n` uneven.
  const std::uint64_t threshold = (0 - n) % n;
  while (true) {
    std::uint64_t r = engine_();
    if (r >= threshold) return r % n;
  }
}

bool World::all_arrived() const {
  return std::all_of(bikes.begin(), bikes.end(),
                     [](const BikeState& b) { return b.phase == BikePhase::Arrived; });
}

World init_simulation(const SimConfig& config) {
  config.validate();
  Rng rng(config.seed);
  const auto n_stations = static_cast<std::uint64_t>(config.stations.size());
  const auto max_delay_ms = static_cast<std::uint64_t>(to_ms(config.max_start_delay));

  std::vector<BikeState> bikes;
  bikes.reserve(static_cast<std::size_t>(config.n_bikes));
  for (int id = 1; id <= config.n_bikes; ++id) {
    std::size_t src = rng.below(n_stations);
    std::size_t dst = rng.below(n_stations - 1);
    if (dst >= src) ++dst;
    BikeState b;
    b.bike_id = id;
    b.source_station = config.stations[src].station_id;
    b.dest_station = config.stations[dst].station_id;
    b.start_time_ms = static_cast<std::int64_t>(rng.below(max_delay_ms + 1));
    bikes.push_back(b);
  }
  return make_world(config, std::move(bikes));
}

World make_world(const SimConfig& config, std::vector<BikeState> bikes) {
  config.validate();
  World w;
  w.config = config;
  for (std::size_t i = 0; i < bikes.size(); ++i) {
    BikeState& b = bikes[i];
    b.bike_id = static_cast<int>(i + 1);
    if (b.source_station == b.dest_station)
      throw ConfigError("bikes", "bike " + std::to_string(b.bike_id) + " has source == dest");
    const Station& src = station_by_id(config.stations, b.source_station);
    station_by_id(config.stations, b.dest_station);
    b.x = src.x;
    b.y = src.y;
  }
  w.bikes = std::move(bikes);
  return w;
}

void step(World& w) {
  const SimConfig& cfg = w.config;
  const std::int64_t end_ms = std::min(w.now_ms + to_ms(cfg.tick), to_ms(cfg.duration));

  for (BikeState& bike : w.bikes) {
    if (bike.phase == BikePhase::Arrived || end_ms <= bike.start_time_ms) continue;
    bike.phase = BikePhase::Riding;

    const Station& src = station_by_id(cfg.stations, bike.source_station);
    const Station& dst = station_by_id(cfg.stations, bike.dest_station);
    const double length = segment_length(src, dst);
    const double travel_s = length / cfg.bike_speed;
    const double elapsed_s = static_cast<double>(end_ms - bike.start_time_ms) / 1000.0;
    const bool arrives = elapsed_s >= travel_s;
    const double riding_s = arrives ? travel_s : elapsed_s;

    if (arrives) {
      bike.x = dst.x;
      bike.y = dst.y;
    } else {
      const double travelled = cfg.bike_speed * riding_s;
      bike.x = src.x + (dst.x - src.x) * travelled / length;
      bike.y = src.y + (dst.y - src.y) * travelled / length;
    }

    // Cumulative target keeps the fractional byte carried between ticks.
    const auto target = static_cast<std::uint64_t>(std::floor(cfg.sense_rate * riding_s));
    if (target > bike.total_generated) {
      std::uint64_t fresh = target - bike.total_generated;
      bike.total_generated = target;
      bike.buffer += fresh;
      w.events.push_back({EventKind::Generate, end_ms, bike.bike_id, std::nullopt, fresh});
    }

    emit_transfers(w, bike, end_ms);
    if (arrives) bike.phase = BikePhase::Arrived;
  }
  w.now_ms = end_ms;
}

std::vector<std::pair<int, std::uint64_t>> offload(std::span<const int> in_range_stations,
                                                   std::uint64_t bytes) {
  std::vector<int> ids(in_range_stations.begin(), in_range_stations.end());
  std::sort(ids.begin(), ids.end());
  std::vector<std::pair<int, std::uint64_t>> out;
  if (ids.empty()) return out;
  const std::uint64_t k = ids.size();
  const std::uint64_t share = bytes / k;
  const std::uint64_t extra = bytes % k;
  for (std::uint64_t i = 0; i < k; ++i) out.emplace_back(ids[i], share + (i < extra ? 1 : 0));
  return out;
}

SimTrace run_simulation(const SimConfig& config) { return run_world(init_simulation(config)); }

SimTrace run_world(World world) {
  const std::int64_t duration_ms = to_ms(world.config.duration);
  while (world.now_ms < duration_ms && !world.all_arrived()) step(world);

  SimTrace trace;
  TraceSummary sum = summarize_trace(world.events);
  trace.events = std::move(world.events);
  trace.sent_by_bike = std::move(sum.sent_by_bike);
  trace.received_by_station = std::move(sum.received_by_station);
  trace.final_bikes = std::move(world.bikes);
  trace.end_time_ms = world.now_ms;
  return trace;
}

TraceSummary summarize_trace(std::span<const TraceEvent> events) {
  using Key = std::tuple<std::int64_t, int, int, std::uint64_t>;
  std::vector<Key> pending;  // sends awaiting their receive
  TraceSummary sum;
  std::int64_t last_time = INT64_MIN;
  for (const auto& e : events) {
    if (e.time_ms < last_time) throw TraceError("events out of time order");
    last_time = e.time_ms;
    if (e.kind != EventKind::Generate && !e.station_id)
      throw TraceError("transfer event without station");
    switch (e.kind) {
      case EventKind::Generate:
        sum.sent_by_bike.try_emplace(e.bike_id, 0);
        break;
      case EventKind::Send:
        sum.sent_by_bike[e.bike_id] += e.bytes;
        pending.emplace_back(e.time_ms, e.bike_id, *e.station_id, e.bytes);
        break;
      case EventKind::Receive: {
        Key k{e.time_ms, e.bike_id, *e.station_id, e.bytes};
        auto it = std::find(pending.begin(), pending.end(), k);
        if (it == pending.end())
          throw TraceError("receive without matching send at " + format_time_ms(e.time_ms) +
                           " bike " + std::to_string(e.bike_id));
        pending.erase(it);
        sum.received_by_station[*e.station_id] += e.bytes;
        break;
      }
    }
  }
  if (!pending.empty())
    throw TraceError("send without matching receive at " + format_time_ms(std::get<0>(pending[0])) +
                     " bike " + std::to_string(std::get<1>(pending[0])));
  return sum;
}

std::string format_time_ms(std::int64_t ms) {
  char buf[32];
  const char* sign = ms < 0 ? "-" : "";
  std::int64_t a = ms < 0 ? -ms : ms;
  std::snprintf(buf, sizeof buf, "%s%lld.%03lld", sign, static_cast<long long>(a / 1000),
                static_cast<long long>(a % 1000));
  return buf;
}

void write_trace(std::ostream& out, const SimTrace& trace) {
  std::string line;
  for (const auto& e : trace.events) {
    line.clear();
    switch (e.kind) {
      case EventKind::Generate:
        line = "g " + format_time_ms(e.time_ms) + ' ' + std::to_string(e.bike_id) + ' ' +
               std::to_string(e.bytes);
        break;
      case EventKind::Send:
      case EventKind::Receive:
        line = std::string(e.kind == EventKind::Send ? "s " : "r ") + format_time_ms(e.time_ms) +
               ' ' + std::to_string(e.bike_id) + ' ' + std::to_string(*e.station_id) + ' ' +
               std::to_string(e.bytes);
        break;
    }
    out << line << '\n';
  }
  for (const auto& [bike, bytes] : trace.sent_by_bike)
    out << "# bike " << bike << " sent " << bytes << '\n';
  for (const auto& [station, bytes] : trace.received_by_station)
    out << "# station " << station << " received " << bytes << '\n';
}

namespace {

template <class T>
T field(std::string_view s, std::size_t line) {
  T v{};
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size() || s.empty())
    throw TraceError("line " + std::to_string(line) + ": bad number '" + std::string(s) + "'");
  return v;
}

std::int64_t parse_time(std::string_view s, std::size_t line) {
  auto dot = s.find('.');
  if (dot == std::string_view::npos || s.size() - dot != 4)
    throw TraceError("line " + std::to_string(line) + ": time needs exactly 3 decimals");
  return field<std::int64_t>(s.substr(0, dot), line) * 1000 +
         field<std::int64_t>(s.substr(dot + 1), line);
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && s[i] == ' ') ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

}  // namespace

ParsedTrace read_trace(std::istream& in) {
  ParsedTrace t;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    auto tok = split_ws(raw);
    if (tok.empty()) continue;
    auto bad = [&] { return TraceError("line " + std::to_string(line) + ": malformed '" + raw + "'"); };
    if (tok[0] == "#") {
      if (tok.size() == 5 && tok[1] == "bike" && tok[3] == "sent")
        t.summary.sent_by_bike[field<int>(tok[2], line)] = field<std::uint64_t>(tok[4], line);
      else if (tok.size() == 5 && tok[1] == "station" && tok[3] == "received")
        t.summary.received_by_station[field<int>(tok[2], line)] =
            field<std::uint64_t>(tok[4], line);
      else
        throw bad();
      continue;
    }
    TraceEvent e;
    if (tok[0] == "g" && tok.size() == 4) {
      e.kind = EventKind::Generate;
      e.bytes = field<std::uint64_t>(tok[3], line);
    } else if ((tok[0] == "s" || tok[0] == "r") && tok.size() == 5) {
      e.kind = tok[0] == "s" ? EventKind::Send : EventKind::Receive;
      e.station_id = field<int>(tok[3], line);
      e.bytes = field<std::uint64_t>(tok[4], line);
    } else {
      throw bad();
    }
    e.time_ms = parse_time(tok[1], line);
    e.bike_id = field<int>(tok[2], line);
    t.events.push_back(e);
  }
  return t;
}

}  // namespace velomule::sim
