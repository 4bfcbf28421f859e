#include "velomule/cli.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "velomule/dataset.hpp"
#include "velomule/error.hpp"
#include "velomule/report.hpp"
#include "velomule/serialize.hpp"
#include "velomule/service.hpp"
#include "velomule/sim.hpp"

namespace velomule {

using nlohmann::json;

namespace {

struct UsageError {
  std::string message;
};

struct DataFlags {
  std::string data_dir;
  std::string stations;
  std::string status;
  std::string trips;
  std::string schema;
  std::string cache;
  std::string config;
  bool strict = false;
};

void add_data_flags(CLI::App* app, DataFlags& f) {
  app->add_option("--data-dir", f.data_dir, "Directory holding the station/status/trip CSVs");
  app->add_option("--stations", f.stations, "Station CSV");
  app->add_option("--status", f.status, "Status CSV");
  app->add_option("--trips", f.trips, "Trip CSV");
  app->add_option("--schema", f.schema, "Header preset (default, babs) or remap JSON file");
  app->add_option("--cache", f.cache, "Binary store cache file");
  app->add_flag("--strict", f.strict, "Fail on the first bad or dangling row");
  app->add_option("--config", f.config, "JSON config file");
}

void require(const CLI::Option* opt) {
  if (opt->count() == 0) throw UsageError{"missing " + opt->get_name()};
}

Timestamp flag_timestamp(const std::string& text, const char* flag) {
  try {
    return service::parse_query_timestamp(text);
  } catch (const ParseError& e) {
    throw UsageError{std::string("bad ") + flag + ": " + e.what()};
  }
}

Date flag_date(const std::string& text, const char* flag) {
  try {
    return parse_date(text);
  } catch (const ParseError& e) {
    throw UsageError{std::string("bad ") + flag + ": " + e.what()};
  }
}

TimeWindow flag_window(const std::string& text) {
  try {
    return parse_window(text);
  } catch (const ParseError& e) {
    throw UsageError{std::string("bad --window: ") + e.what()};
  }
}

RuntimeConfig load_config(const DataFlags& f, const EnvLookup& env,
                          std::map<std::string, std::string> flags) {
  if (f.strict) flags["strict"] = "true";
  if (!f.schema.empty()) flags["schema"] = f.schema;
  std::optional<std::filesystem::path> file;
  if (!f.config.empty()) file = f.config;
  return config_load(file, env, flags);
}

SchemaConfig schema_from(const std::string& spec) {
  if (spec.size() > 5 && spec.ends_with(".json")) {
    std::ifstream in(spec);
    if (!in) throw ConfigError("schema", "cannot read " + spec);
    std::stringstream buf;
    buf << in.rdbuf();
    return SchemaConfig::from_json(buf.str());
  }
  return SchemaConfig::preset(spec);
}

LoadedData load_data(const DataFlags& f, const RuntimeConfig& cfg) {
  DataPaths paths;
  const std::string& dir = f.data_dir.empty() ? cfg.data_dir : f.data_dir;
  if (!dir.empty()) paths = find_data_files(dir);
  if (!f.stations.empty()) paths.stations = f.stations;
  if (!f.status.empty()) paths.status = f.status;
  if (!f.trips.empty()) paths.trips = f.trips;
  if (paths.stations.empty()) throw UsageError{"missing --stations (or --data-dir)"};
  if (paths.status.empty()) throw UsageError{"missing --status (or --data-dir)"};
  if (paths.trips.empty()) throw UsageError{"missing --trips (or --data-dir)"};
  LoadOptions opts;
  opts.schema = schema_from(cfg.schema);
  opts.strict = cfg.strict;
  if (!f.cache.empty()) opts.cache = f.cache;
  return load_dataset(paths, opts);
}

std::string number_text(double v) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

// "key value" lines, nested keys joined with '.'.
void print_flat(std::ostream& out, const json& j, const std::string& prefix = "") {
  if (j.is_object()) {
    for (const auto& [k, v] : j.items()) print_flat(out, v, prefix.empty() ? k : prefix + "." + k);
  } else if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i)
      print_flat(out, j[i], prefix + "." + std::to_string(i));
  } else if (j.is_number_float()) {
    out << prefix << ' ' << number_text(j.get<double>()) << '\n';
  } else if (j.is_string()) {
    out << prefix << ' ' << j.get<std::string>() << '\n';
  } else {
    out << prefix << ' ' << j.dump() << '\n';
  }
}

struct AnalyzeFlags {
  std::string format = "text";
  int station = 0;
  std::string date;
  std::string at;
  std::string window;
  std::string weights;
  int hour = 0;
  int from = 0;
  int to = 0;
  int top = 10;
  double threshold = 0.5;
  int horizon = 30;
  bool recommend = false;
};

void emit(std::ostream& out, const std::string& format, const json& j) {
  if (format == "json")
    out << j.dump(2) << '\n';
  else
    print_flat(out, j);
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err,
             const EnvLookup& env) {
  CLI::App app{"Bike-share analytics and opportunistic data-offload simulator", "velomule"};
  app.require_subcommand(1);

  // ingest
  DataFlags ingest_data;
  std::string summary_out;
  auto* ingest = app.add_subcommand("ingest", "Parse and index the CSVs, print the build summary");
  add_data_flags(ingest, ingest_data);
  ingest->add_option("--summary-out", summary_out, "Also write the summary JSON here");

  // analyze
  DataFlags analyze_data;
  AnalyzeFlags af;
  auto* analyze = app.add_subcommand("analyze", "Run one analytics query");
  analyze->require_subcommand(1);
  add_data_flags(analyze, analyze_data);
  analyze->add_option("--format", af.format, "text or json")
      ->check(CLI::IsMember({"text", "json"}));

  auto* a_forecast = analyze->add_subcommand("forecast", "Expected available bikes on a date");
  auto* a_busy = analyze->add_subcommand("busyness", "Incoming + outgoing trips");
  auto* a_rank = analyze->add_subcommand("rank", "Busiest stations");
  auto* a_hourly = analyze->add_subcommand("hourly", "Busyness inside one hour of the day");
  auto* a_time = analyze->add_subcommand("trip-time", "Pooled mean trip time between stations");
  auto* a_route = analyze->add_subcommand("route", "Trips between two stations");
  auto* a_load = analyze->add_subcommand("load", "Available bikes + empty docks");
  auto* a_wait = analyze->add_subcommand("wait", "Per-minute bike availability probability");
  // data and format flags may follow the operation name
  for (auto* sub : {a_forecast, a_busy, a_rank, a_hourly, a_time, a_route, a_load, a_wait})
    sub->fallthrough();

  std::map<CLI::App*, CLI::Option*> station_opt;
  for (auto* sub : {a_forecast, a_busy, a_hourly, a_load, a_wait})
    station_opt[sub] = sub->add_option("--station", af.station, "Station id");
  for (auto* sub : {a_busy, a_rank, a_hourly, a_time, a_route})
    sub->add_option("--window", af.window, "FROM,TO timestamps (half-open); default all");
  auto* date_opt = a_forecast->add_option("--date", af.date, "Target date YYYY-MM-DD");
  auto* fw_opt = a_forecast->add_option("--weights", af.weights, "DoW,CW,DoM weights");
  auto* hour_opt = a_hourly->add_option("--hour", af.hour, "Hour of day 0-23");
  a_rank->add_option("--top", af.top, "How many stations")->check(CLI::PositiveNumber);
  std::map<CLI::App*, std::pair<CLI::Option*, CLI::Option*>> pair_opt;
  for (auto* sub : {a_time, a_route})
    pair_opt[sub] = {sub->add_option("--from", af.from, "Station X"),
                     sub->add_option("--to", af.to, "Station Y")};
  std::map<CLI::App*, CLI::Option*> at_opt;
  for (auto* sub : {a_load, a_wait})
    at_opt[sub] = sub->add_option("--at", af.at, "Timestamp YYYY-MM-DD HH:MM:SS");
  auto* ww_opt = a_wait->add_option("--weights", af.weights, "w1,w2,w3 weights");
  auto* thr_opt = a_wait->add_option("--threshold", af.threshold, "Wait threshold in [0,1]");
  auto* hor_opt = a_wait->add_option("--horizon", af.horizon, "Minutes ahead");
  a_wait->add_flag("--recommend", af.recommend, "Append the wait recommendation line");

  // simulate
  DataFlags sim_data;
  int bikes = 0;
  std::uint64_t seed = 1;
  double duration = 600.0;
  std::string sim_out = "-";
  bool stations_from_data = false;
  std::map<std::string, double> sim_values;
  auto* simulate = app.add_subcommand("simulate", "Run the bike data-offload simulator");
  auto* bikes_opt = simulate->add_option("--bikes", bikes, "Number of bikes");
  simulate->add_option("--seed", seed, "Random seed");
  simulate->add_option("--duration", duration, "Simulated seconds");
  simulate->add_option("--out", sim_out, "Trace file ('-' for stdout)");
  std::map<std::string, CLI::Option*> sim_opts;
  for (const char* key : {"radio_range", "bike_speed", "sense_rate", "tick", "max_start_delay",
                          "grid_spacing"}) {
    std::string flag = std::string("--") + key;
    for (auto& c : flag)
      if (c == '_') c = '-';
    sim_opts[key] = simulate->add_option(flag, sim_values[key]);
  }
  simulate->add_flag("--stations-from-data", stations_from_data,
                     "Place stations from the station CSV instead of the 3x2 grid");
  add_data_flags(simulate, sim_data);

  // report
  DataFlags report_data;
  std::string report_dir, r_date, r_at, r_arrival, r_window, r_trace;
  int r_hour = 8, r_station = 0, r_bikes = 10;
  std::uint64_t r_seed = 42;
  auto* report_cmd = app.add_subcommand("report", "Write fig4..fig9 tables and sim_summary.csv");
  add_data_flags(report_cmd, report_data);
  auto* out_opt = report_cmd->add_option("--out", report_dir, "Output directory");
  report_cmd->add_option("--date", r_date, "Forecast date (default: day after last sample)");
  report_cmd->add_option("--hour", r_hour, "Hour for the busyness figures")
      ->check(CLI::Range(0, 23));
  report_cmd->add_option("--window", r_window, "FROM,TO window for trip figures");
  report_cmd->add_option("--at", r_at, "Load factor instant (default: last sample)");
  auto* r_station_opt = report_cmd->add_option("--station", r_station, "Wait-series station");
  report_cmd->add_option("--arrival", r_arrival, "Wait-series arrival (default: last sample)");
  report_cmd->add_option("--trace", r_trace, "Summarize this trace instead of simulating");
  report_cmd->add_option("--bikes", r_bikes, "Bikes for the summary simulation");
  report_cmd->add_option("--seed", r_seed, "Seed for the summary simulation");

  // serve
  DataFlags serve_data;
  std::string addr;
  auto* serve_cmd = app.add_subcommand("serve", "Start the read-only JSON query service");
  add_data_flags(serve_cmd, serve_data);
  auto* addr_opt = serve_cmd->add_option("--addr", addr, "HOST:PORT");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\nusage: velomule <ingest|analyze|simulate|report|serve> "
        << "[options]; see --help\n";
    return 1;
  }

  try {
    if (ingest->parsed()) {
      RuntimeConfig cfg = load_config(ingest_data, env, {});
      LoadedData data = load_data(ingest_data, cfg);
      json s = summary_json(data.summary);
      out << s.dump(2) << '\n';
      if (!summary_out.empty()) {
        std::ofstream f(summary_out, std::ios::binary | std::ios::trunc);
        f << s.dump(2) << '\n';
        if (!f) throw Error("cannot write " + summary_out);
      }
      return 0;
    }

    if (analyze->parsed()) {
      std::map<std::string, std::string> flags;
      if (fw_opt->count()) flags["forecast_weights"] = af.weights;
      if (ww_opt->count()) flags["wait_weights"] = af.weights;
      if (thr_opt->count()) flags["wait_threshold"] = number_text(af.threshold);
      if (hor_opt->count()) flags["horizon_minutes"] = std::to_string(af.horizon);

      // Check flags before touching any file so usage errors stay cheap.
      CLI::App* sub = analyze->get_subcommands().front();
      if (station_opt.count(sub)) require(station_opt[sub]);
      if (pair_opt.count(sub)) {
        require(pair_opt[sub].first);
        require(pair_opt[sub].second);
      }
      if (at_opt.count(sub)) require(at_opt[sub]);
      if (sub == a_forecast) require(date_opt);
      if (sub == a_hourly) require(hour_opt);
      const TimeWindow window = flag_window(af.window);
      std::optional<Timestamp> at;
      if (at_opt.count(sub)) at = flag_timestamp(af.at, "--at");
      std::optional<Date> date;
      if (sub == a_forecast) date = flag_date(af.date, "--date");
      if (sub == a_hourly && (af.hour < 0 || af.hour > 23))
        throw UsageError{"--hour must be in [0, 23]"};

      RuntimeConfig cfg = load_config(analyze_data, env, flags);
      LoadedData data = load_data(analyze_data, cfg);
      service::QueryService q(data.store, cfg);

      if (sub == a_wait) {
        json j = q.wait(af.station, *at);
        if (af.format == "json") {
          out << j.dump(2) << '\n';
        } else {
          for (const auto& p : j.at("points"))
            out << p.at("minute_offset").get<int>() << ' '
                << number_text(p.at("probability").get<double>()) << '\n';
          if (af.recommend) {
            const json& r = j.at("recommendation");
            out << "recommendation wait=" << (r.at("wait").get<bool>() ? "true" : "false")
                << " best_minute=" << r.at("best_minute").get<int>()
                << " best_probability=" << number_text(r.at("best_probability").get<double>())
                << '\n';
          }
        }
        return 0;
      }
      json j;
      if (sub == a_forecast) j = q.forecast(af.station, *date);
      if (sub == a_busy) j = q.busyness(af.station, window);
      if (sub == a_rank) j = q.rank(window, static_cast<std::size_t>(af.top));
      if (sub == a_hourly) j = q.hourly(af.station, af.hour, window);
      if (sub == a_time) j = q.trip_time(af.from, af.to, window);
      if (sub == a_route) j = q.route(af.from, af.to, window);
      if (sub == a_load) j = q.load(af.station, *at);
      emit(out, af.format, j);
      return 0;
    }

    if (simulate->parsed()) {
      require(bikes_opt);
      std::map<std::string, std::string> flags;
      for (const auto& [key, opt] : sim_opts)
        if (opt->count()) flags[key] = number_text(sim_values[key]);
      RuntimeConfig cfg = load_config(sim_data, env, flags);

      sim::SimConfig sc;
      sc.n_bikes = bikes;
      sc.seed = seed;
      sc.duration = duration;
      sc.radio_range = cfg.radio_range;
      sc.bike_speed = cfg.bike_speed;
      sc.sense_rate = cfg.sense_rate;
      sc.tick = cfg.tick;
      sc.max_start_delay = cfg.max_start_delay;
      sc.stations = sim::grid_stations(3, 2, cfg.grid_spacing);
      if (stations_from_data) {
        LoadedData data = load_data(sim_data, cfg);
        sc.stations = sim::project_stations(data.store.stations());
      }
      sim::SimTrace trace = sim::run_simulation(sc);
      if (sim_out == "-") {
        sim::write_trace(out, trace);
      } else {
        std::ofstream f(sim_out, std::ios::binary | std::ios::trunc);
        sim::write_trace(f, trace);
        if (!f) throw Error("cannot write " + sim_out);
        std::uint64_t delivered = 0;
        for (const auto& [id, b] : trace.received_by_station) delivered += b;
        out << "bikes " << sc.n_bikes << " events " << trace.events.size() << " delivered "
            << delivered << " end " << sim::format_time_ms(trace.end_time_ms) << '\n';
      }
      return 0;
    }

    if (report_cmd->parsed()) {
      require(out_opt);
      std::optional<Date> date;
      if (!r_date.empty()) date = flag_date(r_date, "--date");
      std::optional<Timestamp> at, arrival;
      if (!r_at.empty()) at = flag_timestamp(r_at, "--at");
      if (!r_arrival.empty()) arrival = flag_timestamp(r_arrival, "--arrival");
      TimeWindow window = flag_window(r_window);

      RuntimeConfig cfg = load_config(report_data, env, {});
      LoadedData data = load_data(report_data, cfg);
      report::FigureParams p = report::default_figure_params(data.store);
      if (date) p.forecast_date = *date;
      if (at) p.load_at = *at;
      if (arrival) p.wait_arrival = *arrival;
      if (r_station_opt->count()) p.wait_station = r_station;
      p.hour = r_hour;
      p.window = window;
      p.forecast_weights = cfg.forecast_weights;
      p.wait_weights = cfg.wait_weights;
      p.horizon_minutes = cfg.horizon_minutes;
      p.lookback = cfg.lookback;
      auto tables = report::all_figures(data.store, p);
      report::write_tables(report_dir, tables);

      sim::TraceSummary summary;
      if (!r_trace.empty()) {
        std::ifstream in(r_trace);
        if (!in) throw Error("cannot open " + r_trace);
        auto parsed = sim::read_trace(in);
        summary = sim::summarize_trace(parsed.events);
      } else {
        sim::SimConfig sc;
        sc.n_bikes = r_bikes;
        sc.seed = r_seed;
        sc.radio_range = cfg.radio_range;
        sc.bike_speed = cfg.bike_speed;
        sc.sense_rate = cfg.sense_rate;
        sc.tick = cfg.tick;
        sc.max_start_delay = cfg.max_start_delay;
        sc.stations = sim::grid_stations(3, 2, cfg.grid_spacing);
        auto trace = sim::run_simulation(sc);
        summary = {trace.sent_by_bike, trace.received_by_station};
      }
      std::ofstream f(std::filesystem::path(report_dir) / "sim_summary.csv",
                      std::ios::binary | std::ios::trunc);
      f << report::to_csv(report::sim_summary(summary));
      if (!f) throw Error("cannot write sim_summary.csv");
      out << "wrote " << tables.size() << " figure tables and sim_summary.csv to " << report_dir
          << '\n';
      return 0;
    }

    if (serve_cmd->parsed()) {
      std::map<std::string, std::string> flags;
      if (addr_opt->count()) flags["addr"] = addr;
      RuntimeConfig cfg = load_config(serve_data, env, flags);
      LoadedData data = load_data(serve_data, cfg);
      service::QueryService q(data.store, cfg);
      return service::serve(q, cfg.addr, err);
    }
  } catch (const UsageError& e) {
    err << "error: " << e.message << "\nusage: see velomule " << "--help\n";
    return 1;
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}

}  // namespace velomule
