#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "velomule/ingest.hpp"

namespace velomule::sim {

struct Station {
  int station_id = 0;
  double x = 0.0;  // meters
  double y = 0.0;

  bool operator==(const Station&) const = default;
};

/// cols x rows stations `spacing` meters apart, ids 1.. in row-major order.
std::vector<Station> grid_stations(int cols = 3, int rows = 2, double spacing = 500.0);

/// Equirectangular projection of lat/long about the stations' centroid.
std::vector<Station> project_stations(std::span<const StationRecord> records);

/// Times are seconds but are held internally as whole milliseconds, so
/// tick, duration and max_start_delay are rounded to the millisecond.
struct SimConfig {
  int n_bikes = 10;
  std::vector<Station> stations = grid_stations();
  double radio_range = 100.0;  // meters, closed ball
  double bike_speed = 4.0;     // meters/second
  double sense_rate = 8.0;     // bytes/second while riding
  double tick = 1.0;
  double max_start_delay = 300.0;
  double duration = 600.0;
  std::uint64_t seed = 1;

  /// Throws ConfigError naming the first bad field.
  void validate() const;
};

enum class BikePhase { Waiting, Riding, Arrived };

struct BikeState {
  int bike_id = 0;
  int source_station = 0;
  int dest_station = 0;
  std::int64_t start_time_ms = 0;
  double x = 0.0;
  double y = 0.0;
  std::uint64_t buffer = 0;
  std::uint64_t total_generated = 0;
  std::uint64_t total_sent = 0;
  BikePhase phase = BikePhase::Waiting;

  double start_time() const { return static_cast<double>(start_time_ms) / 1000.0; }
  bool operator==(const BikeState&) const = default;
};

enum class EventKind { Generate, Send, Receive };

struct TraceEvent {
  EventKind kind = EventKind::Generate;
  std::int64_t time_ms = 0;
  int bike_id = 0;
  std::optional<int> station_id;  // absent for Generate
  std::uint64_t bytes = 0;

  bool operator==(const TraceEvent&) const = default;
};

struct TraceSummary {
  std::map<int, std::uint64_t> sent_by_bike;
  std::map<int, std::uint64_t> received_by_station;

  bool operator==(const TraceSummary&) const = default;
};

struct SimTrace {
  std::vector<TraceEvent> events;  // time-ordered
  std::map<int, std::uint64_t> sent_by_bike;
  std::map<int, std::uint64_t> received_by_station;
  std::vector<BikeState> final_bikes;
  std::int64_t end_time_ms = 0;
};

/// Deterministic 64-bit source: std::mt19937_64 (fully specified by the
/// standard) with an unbiased bounded draw of our own, since the standard
/// distributions differ between library implementations.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n);

private:
  std::mt19937_64 engine_;
};

struct World {
  SimConfig config;
  std::int64_t now_ms = 0;
  std::vector<BikeState> bikes;  // index == bike_id - 1
  std::vector<TraceEvent> events;

  bool all_arrived() const;
};

/// Draws, per bike in id order: source, destination among the other
/// stations, start time in [0, max_start_delay] ms. Throws ConfigError.
World init_simulation(const SimConfig& config);

/// World with caller-chosen bikes; for fixtures.
World make_world(const SimConfig& config, std::vector<BikeState> bikes);

/// Advances one tick (the last tick is shortened to end exactly at duration).
/// Riding bikes move along the straight segment, sense, then drain their
/// buffer into every station within radio range.
void step(World& world);

/// Equal split of `bytes` across the stations: floor(bytes / k) each, the
/// remainder one byte apiece in ascending station_id. Result is ascending by
/// station_id and includes zero allocations; empty when no station is given.
std::vector<std::pair<int, std::uint64_t>> offload(std::span<const int> in_range_stations,
                                                   std::uint64_t bytes);

SimTrace run_simulation(const SimConfig& config);
/// Continues from an existing world until duration or every bike arrived.
SimTrace run_world(World world);

/// Fold of the event stream. Throws TraceError for a receive without a
/// matching send, a send never received, or events out of time order.
TraceSummary summarize_trace(std::span<const TraceEvent> events);

/// Line format: `g <time> <bike> <bytes>`, `s|r <time> <bike> <station> <bytes>`,
/// time in seconds with three decimals, then `# bike <id> sent <bytes>` and
/// `# station <id> received <bytes>` in ascending id order.
void write_trace(std::ostream& out, const SimTrace& trace);

struct ParsedTrace {
  std::vector<TraceEvent> events;
  TraceSummary summary;  // from the `#` block
};

/// Inverse of write_trace. Throws TraceError on malformed lines.
ParsedTrace read_trace(std::istream& in);

std::string format_time_ms(std::int64_t ms);

}  // namespace velomule::sim
