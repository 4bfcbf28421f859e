#include "velomule/dataset.hpp"

#include <fstream>
#include <future>
#include <string>

#include "velomule/error.hpp"
#include "velomule/serialize.hpp"

namespace velomule {

namespace fs = std::filesystem;

namespace {

template <class Record>
ParseResult<Record> parse_path(const fs::path& path, const ParseOptions& opts,
                               ParseResult<Record> (*parse)(std::istream&, const ParseOptions&)) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return parse(in, opts);
}

template <class Record>
FileCounts counts_of(const ParseResult<Record>& r) {
  return {r.data_lines, r.records.size(), r.rows_skipped, r.errors};
}

nlohmann::json counts_json(const FileCounts& c) {
  nlohmann::json errors = nlohmann::json::array();
  for (const auto& e : c.errors) errors.push_back({{"line", e.line}, {"reason", e.reason}});
  return {{"data_lines", c.data_lines},
          {"parsed", c.parsed},
          {"skipped", c.skipped},
          {"errors", std::move(errors)}};
}

void mix(std::uint64_t& h, std::string_view s) {
  // FNV-1a; only needs to be stable for a given build.
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  h ^= 0xff;
  h *= 0x100000001b3ULL;
}

}  // namespace

DataPaths find_data_files(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error("not a directory: " + dir.string());
  std::optional<fs::path> found[3];
  const char* kinds[3] = {"station", "status", "trip"};
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".csv") continue;
    std::string name = entry.path().filename().string();
    for (int k = 0; k < 3; ++k) {
      if (name.find(kinds[k]) == std::string::npos) continue;
      if (found[k]) throw Error(std::string("more than one ") + kinds[k] + " file in " + dir.string());
      found[k] = entry.path();
    }
  }
  for (int k = 0; k < 3; ++k)
    if (!found[k]) throw Error(std::string("no ") + kinds[k] + " CSV in " + dir.string());
  return {*found[0], *found[1], *found[2]};
}

std::uint64_t dataset_fingerprint(const DataPaths& paths, const LoadOptions& opts) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const fs::path* p : {&paths.stations, &paths.status, &paths.trips}) {
    std::error_code ec;
    mix(h, fs::absolute(*p, ec).string());
    mix(h, std::to_string(fs::file_size(*p, ec)));
    mix(h, std::to_string(fs::last_write_time(*p, ec).time_since_epoch().count()));
  }
  for (const HeaderMap* m : {&opts.schema.station, &opts.schema.status, &opts.schema.trip}) {
    for (const auto& [k, v] : *m) {
      mix(h, k);
      mix(h, v);
    }
    mix(h, "|");
  }
  mix(h, opts.strict ? "strict" : "lenient");
  return h;
}

LoadedData load_dataset(const DataPaths& paths, const LoadOptions& opts) {
  std::uint64_t fingerprint = 0;
  if (opts.cache) {
    fingerprint = dataset_fingerprint(paths, opts);
    if (auto cached = load_store_cache(*opts.cache, fingerprint)) {
      LoadedData out{std::move(*cached), {}};
      out.summary.build = out.store.summary();
      out.summary.stations.parsed = out.summary.build.stations;
      out.summary.status.parsed = out.summary.build.status_records;
      out.summary.trips.parsed = out.summary.build.trip_records;
      out.summary.from_cache = true;
      return out;
    }
  }

  auto options = [&](const HeaderMap& m) {
    ParseOptions p;
    p.remap = m;
    p.strict = opts.strict;
    return p;
  };
  const ParseOptions station_opts = options(opts.schema.station);
  const ParseOptions status_opts = options(opts.schema.status);
  const ParseOptions trip_opts = options(opts.schema.trip);

  auto stations = std::async(std::launch::async, [&] {
    return parse_path<StationRecord>(paths.stations, station_opts, &parse_station_csv);
  });
  auto status = std::async(std::launch::async, [&] {
    return parse_path<StatusRecord>(paths.status, status_opts, &parse_status_csv);
  });
  auto trips = std::async(std::launch::async, [&] {
    return parse_path<TripRecord>(paths.trips, trip_opts, &parse_trip_csv);
  });
  auto st = stations.get();
  auto su = status.get();
  auto tr = trips.get();

  IngestSummary summary;
  summary.stations = counts_of(st);
  summary.status = counts_of(su);
  summary.trips = counts_of(tr);

  BuildOptions build;
  build.strict = opts.strict;
  LoadedData out{build_store(std::move(st.records), std::move(su.records), std::move(tr.records),
                             build),
                 std::move(summary)};
  out.summary.build = out.store.summary();
  if (opts.cache) save_store_cache(out.store, *opts.cache, fingerprint);
  return out;
}

nlohmann::json summary_json(const IngestSummary& s) {
  return {{"stations", counts_json(s.stations)},
          {"status", counts_json(s.status)},
          {"trips", counts_json(s.trips)},
          {"dangling", s.build.dangling_count()},
          {"from_cache", s.from_cache},
          {"build", s.build}};
}

}  // namespace velomule
