#include "velomule/report.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include "velomule/error.hpp"

namespace velomule::report {

using nlohmann::json;

namespace {

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

template <class Fn>
Row guarded_row(std::string label, Fn fn) {
  try {
    double v = fn();
    return {std::move(label), v, {}};
  } catch (const Error& e) {
    return {std::move(label), std::nullopt, e.what()};
  }
}

ReportTable per_station(const HistoryStore& store, std::string title, std::string x_label,
                        std::string y_label, Provenance prov,
                        const std::function<double(int)>& value) {
  ReportTable t{std::move(title), std::move(x_label), std::move(y_label), {}, std::move(prov)};
  for (const auto& st : store.stations())
    t.rows.push_back(
        guarded_row(std::to_string(st.station_id), [&] { return value(st.station_id); }));
  return t;
}

std::string weights_text(const FactorWeights& w) {
  return format_value(w.day_of_week) + "," + format_value(w.current_week) + "," +
         format_value(w.day_of_month);
}

}  // namespace

std::string format_value(double v) {
  if (std::isfinite(v) && v == std::trunc(v) && std::abs(v) < 9.007199254740992e15) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%lld", static_cast<long long>(v));
    return buf;
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string to_csv(const ReportTable& t) {
  std::string out = "label,value\n";
  for (const auto& r : t.rows) {
    out += csv_escape(r.label);
    out += ',';
    if (r.value) out += format_value(*r.value);
    out += '\n';
  }
  return out;
}

std::vector<Row> rows_from_csv(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  if (!std::getline(in, line) || line != "label,value") throw Error("not a report CSV");
  std::vector<Row> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    Row r;
    std::size_t i = 0;
    if (line[0] == '"') {
      for (i = 1; i < line.size(); ++i) {
        if (line[i] == '"') {
          if (i + 1 < line.size() && line[i + 1] == '"') {
            r.label.push_back('"');
            ++i;
          } else {
            ++i;
            break;
          }
        } else {
          r.label.push_back(line[i]);
        }
      }
    } else {
      i = line.find(',');
      if (i == std::string::npos) throw Error("report CSV row without value column");
      r.label = line.substr(0, i);
    }
    if (i >= line.size() || line[i] != ',') throw Error("report CSV row without value column");
    std::string_view v(line);
    v.remove_prefix(i + 1);
    if (!v.empty()) {
      double d = 0.0;
      auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), d);
      if (ec != std::errc{} || p != v.data() + v.size()) throw Error("bad report value");
      r.value = d;
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

json to_json(const ReportTable& t) {
  json rows = json::array();
  for (const auto& r : t.rows) {
    json row{{"label", r.label}, {"value", r.value ? json(*r.value) : json(nullptr)}};
    if (!r.note.empty()) row["note"] = r.note;
    rows.push_back(std::move(row));
  }
  return json{{"title", t.title},
              {"x_label", t.x_label},
              {"y_label", t.y_label},
              {"rows", std::move(rows)},
              {"provenance",
               {{"operation", t.provenance.operation},
                {"parameters", t.provenance.parameters}}}};
}

ReportTable from_json(const json& j) {
  ReportTable t;
  t.title = j.at("title").get<std::string>();
  t.x_label = j.at("x_label").get<std::string>();
  t.y_label = j.at("y_label").get<std::string>();
  for (const auto& r : j.at("rows")) {
    Row row;
    row.label = r.at("label").get<std::string>();
    if (!r.at("value").is_null()) row.value = r.at("value").get<double>();
    if (r.contains("note")) row.note = r.at("note").get<std::string>();
    t.rows.push_back(std::move(row));
  }
  t.provenance.operation = j.at("provenance").at("operation").get<std::string>();
  t.provenance.parameters =
      j.at("provenance").at("parameters").get<std::map<std::string, std::string>>();
  return t;
}

std::int64_t window_day_count(const HistoryStore& store, const TimeWindow& window) {
  std::int64_t days = 0;
  if (window.bounded()) {
    days = (window.to - window.from + 86399) / 86400;
  } else if (auto span = store.trip_span()) {
    days = span->second.date.serial() - span->first.date.serial() + 1;
  }
  return std::max<std::int64_t>(days, 1);
}

ReportTable fig_forecast(const HistoryStore& store, const Date& date, const FactorWeights& weights,
                         const Lookback& lookback) {
  return per_station(store, "Number of bikes that should be available at the station",
                     "station", "expected bikes",
                     {"forecast_available_bikes",
                      {{"date", date.to_string()}, {"weights", weights_text(weights)}}},
                     [&](int id) {
                       return forecast_available_bikes(store, id, date, weights, lookback)
                           .n_expected;
                     });
}

ReportTable fig_busy_by_hour(const HistoryStore& store, int hour, const TimeWindow& window) {
  return per_station(store, "Number of stations that are busy at a particular time", "station",
                     "trips in hour",
                     {"hourly_busyness",
                      {{"hour", std::to_string(hour)}, {"window", to_string(window)}}},
                     [&](int id) {
                       return static_cast<double>(hourly_busyness(store, id, hour, window).busyness);
                     });
}

ReportTable fig_busy_density(const HistoryStore& store, int hour, const TimeWindow& window) {
  const auto days = window_day_count(store, window);
  return per_station(store, "Density of busyness of stations at a particular time", "station",
                     "trips in hour per day",
                     {"hourly_busyness",
                      {{"hour", std::to_string(hour)},
                       {"window", to_string(window)},
                       {"days", std::to_string(days)}}},
                     [&](int id) {
                       return static_cast<double>(hourly_busyness(store, id, hour, window).busyness) /
                              static_cast<double>(days);
                     });
}

ReportTable fig_trips_per_station(const HistoryStore& store, const TimeWindow& window) {
  return per_station(store, "Number of bike trips from each station", "station", "trips",
                     {"outbound_trip_count", {{"window", to_string(window)}}}, [&](int id) {
                       return static_cast<double>(outbound_trip_count(store, id, window));
                     });
}

ReportTable fig_load_factor(const HistoryStore& store, const Timestamp& at) {
  return per_station(store, "Load factor of a particular station", "station", "load factor",
                     {"load_factor", {{"at", at.to_string()}}}, [&](int id) {
                       return static_cast<double>(load_factor(store, id, at).load_factor);
                     });
}

ReportTable fig_wait_series(const HistoryStore& store, int station_id, const Timestamp& arrival,
                            const FactorWeights& weights, int horizon_minutes,
                            const Lookback& lookback) {
  ReportTable t{"Probabilities of availability of a bike for each of next " +
                    std::to_string(horizon_minutes) + " minutes",
                "minute",
                "probability",
                {},
                {"wait_probability_series",
                 {{"station", std::to_string(station_id)},
                  {"arrival", arrival.to_string()},
                  {"weights", weights_text(weights)},
                  {"horizon_minutes", std::to_string(horizon_minutes)}}}};
  try {
    auto series =
        wait_probability_series(store, station_id, arrival, weights, horizon_minutes, lookback);
    for (const auto& p : series.points)
      t.rows.push_back({std::to_string(p.minute_offset), p.probability, {}});
  } catch (const Error& e) {
    for (int m = 0; m <= std::max(horizon_minutes, 0); ++m)
      t.rows.push_back({std::to_string(m), std::nullopt, e.what()});
  }
  return t;
}

ReportTable sim_summary(const sim::TraceSummary& summary) {
  ReportTable t{"Data sent by each bike and received by each station", "node", "bytes", {},
                {"summarize_trace", {}}};
  for (const auto& [bike, bytes] : summary.sent_by_bike)
    t.rows.push_back({"bike " + std::to_string(bike), static_cast<double>(bytes), {}});
  for (const auto& [station, bytes] : summary.received_by_station)
    t.rows.push_back({"station " + std::to_string(station), static_cast<double>(bytes), {}});
  return t;
}

FigureParams default_figure_params(const HistoryStore& store) {
  FigureParams p;
  if (auto span = store.status_span()) {
    p.load_at = span->second;
    p.wait_arrival = span->second;
    p.forecast_date = span->second.date.add_days(1);
  } else if (auto trips = store.trip_span()) {
    p.load_at = trips->second;
    p.wait_arrival = trips->second;
    p.forecast_date = trips->second.date.add_days(1);
  }
  if (!store.stations().empty()) p.wait_station = store.stations().front().station_id;
  return p;
}

std::vector<std::pair<std::string, ReportTable>> all_figures(const HistoryStore& store,
                                                             const FigureParams& p) {
  return {
      {"fig4", fig_forecast(store, p.forecast_date, p.forecast_weights, p.lookback)},
      {"fig5", fig_busy_by_hour(store, p.hour, p.window)},
      {"fig6", fig_trips_per_station(store, p.window)},
      {"fig7", fig_busy_density(store, p.hour, p.window)},
      {"fig8", fig_load_factor(store, p.load_at)},
      {"fig9", fig_wait_series(store, p.wait_station, p.wait_arrival, p.wait_weights,
                               p.horizon_minutes, p.lookback)},
  };
}

void write_tables(const std::filesystem::path& dir,
                  const std::vector<std::pair<std::string, ReportTable>>& tables) {
  std::filesystem::create_directories(dir);
  for (const auto& [name, table] : tables) {
    std::ofstream csv(dir / (name + ".csv"), std::ios::binary | std::ios::trunc);
    csv << to_csv(table);
    std::ofstream js(dir / (name + ".json"), std::ios::binary | std::ios::trunc);
    js << to_json(table).dump(2) << '\n';
    if (!csv || !js) throw Error("cannot write report tables to " + dir.string());
  }
}

}  // namespace velomule::report
