#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <memory>
#include <sstream>

#include "velomule/analytics.hpp"
#include "velomule/dataset.hpp"
#include "velomule/error.hpp"
#include "velomule/serialize.hpp"
#include "velomule/sim.hpp"

namespace py = pybind11;
using namespace velomule;

namespace {

// Results cross the boundary as plain dicts, built from the same JSON the
// CLI and HTTP service emit.
py::object to_py(const nlohmann::json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

FactorWeights weights_from(const std::optional<std::tuple<double, double, double>>& w) {
  if (!w) return {};
  FactorWeights f{std::get<0>(*w), std::get<1>(*w), std::get<2>(*w)};
  f.validate();
  return f;
}

TimeWindow window_from(const std::optional<std::string>& text) {
  return text ? parse_window(*text) : TimeWindow::all();
}

struct Store {
  std::shared_ptr<const HistoryStore> store;
  IngestSummary summary;
};

Store load(const std::filesystem::path& dir, const std::string& schema, bool strict) {
  LoadOptions opts;
  opts.schema = SchemaConfig::preset(schema);
  opts.strict = strict;
  LoadedData d = [&] {
    py::gil_scoped_release nogil;
    return load_dataset(find_data_files(dir), opts);
  }();
  return {std::make_shared<const HistoryStore>(std::move(d.store)), std::move(d.summary)};
}

}  // namespace

PYBIND11_MODULE(_velomule, m) {
  m.doc() = "Bike-share history analytics and data-offload simulator";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ParseError>(m, "ParseError", base.ptr());
  py::register_exception<UnknownStation>(m, "UnknownStation", base.ptr());
  py::register_exception<NoHistory>(m, "NoHistory", base.ptr());
  py::register_exception<NoData>(m, "NoData", base.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<TraceError>(m, "TraceError", base.ptr());

  m.def("parse_timestamp", [](const std::string& s) { return to_py(parse_timestamp(s)); },
        "Canonical 'YYYY-MM-DD HH:MM:SS' to its canonical string; raises ParseError.");
  m.def("weekday", [](const std::string& s) {
    return std::string(weekday_name(parse_timestamp_lenient(s).weekday()));
  });

  py::class_<Store>(m, "Store")
      .def_property_readonly("station_ids", [](const Store& s) { return s.store->station_ids(); })
      .def_property_readonly("trip_count", [](const Store& s) { return s.store->trips().size(); })
      .def_property_readonly("status_count", [](const Store& s) { return s.store->status_count(); })
      .def_property_readonly("summary", [](const Store& s) { return to_py(summary_json(s.summary)); })
      .def("stations", [](const Store& s) { return to_py(s.store->stations()); })
      .def(
          "forecast",
          [](const Store& s, int station, const std::string& date,
             std::optional<std::tuple<double, double, double>> weights) {
            return to_py(forecast_available_bikes(*s.store, station, parse_date_lenient(date),
                                                  weights_from(weights)));
          },
          py::arg("station"), py::arg("date"), py::arg("weights") = py::none())
      .def(
          "wait",
          [](const Store& s, int station, const std::string& at,
             std::optional<std::tuple<double, double, double>> weights, int horizon) {
            return to_py(wait_probability_series(*s.store, station, parse_timestamp_lenient(at),
                                                 weights_from(weights), horizon));
          },
          py::arg("station"), py::arg("at"), py::arg("weights") = py::none(),
          py::arg("horizon") = 30)
      .def(
          "busyness",
          [](const Store& s, int station, std::optional<std::string> window) {
            return to_py(station_busyness(*s.store, station, window_from(window)));
          },
          py::arg("station"), py::arg("window") = py::none())
      .def(
          "hourly",
          [](const Store& s, int station, int hour, std::optional<std::string> window) {
            return to_py(hourly_busyness(*s.store, station, hour, window_from(window)));
          },
          py::arg("station"), py::arg("hour"), py::arg("window") = py::none())
      .def(
          "rank",
          [](const Store& s, std::size_t top, std::optional<std::string> window) {
            return to_py(rank_busiest(*s.store, window_from(window), top));
          },
          py::arg("top") = 10, py::arg("window") = py::none())
      .def(
          "trip_time",
          [](const Store& s, int x, int y, std::optional<std::string> window) {
            return to_py(average_trip_time(*s.store, x, y, window_from(window)));
          },
          py::arg("x"), py::arg("y"), py::arg("window") = py::none())
      .def(
          "route",
          [](const Store& s, int x, int y, std::optional<std::string> window) {
            return to_py(route_busyness(*s.store, x, y, window_from(window)));
          },
          py::arg("x"), py::arg("y"), py::arg("window") = py::none())
      .def("load_factor", [](const Store& s, int station, const std::string& at) {
        return to_py(load_factor(*s.store, station, parse_timestamp_lenient(at)));
      });

  m.def("load", &load, py::arg("data_dir"), py::arg("schema") = "default",
        py::arg("strict") = false, "Parse and index the three CSVs found in data_dir.");

  m.def("offload", [](std::vector<int> stations, std::uint64_t bytes) {
    return sim::offload(stations, bytes);
  });

  m.def(
      "simulate",
      [](int bikes, std::uint64_t seed, double duration, double radio_range, double bike_speed,
         double sense_rate, double tick, double max_start_delay, double grid_spacing) {
        sim::SimConfig c;
        c.n_bikes = bikes;
        c.seed = seed;
        c.duration = duration;
        c.radio_range = radio_range;
        c.bike_speed = bike_speed;
        c.sense_rate = sense_rate;
        c.tick = tick;
        c.max_start_delay = max_start_delay;
        c.stations = sim::grid_stations(3, 2, grid_spacing);
        sim::SimTrace t;
        {
          py::gil_scoped_release nogil;
          t = sim::run_simulation(c);
        }
        std::ostringstream text;
        sim::write_trace(text, t);
        py::dict out;
        out["sent_by_bike"] = t.sent_by_bike;
        out["received_by_station"] = t.received_by_station;
        out["events"] = t.events.size();
        out["end_time"] = static_cast<double>(t.end_time_ms) / 1000.0;
        out["trace"] = text.str();
        return out;
      },
      py::arg("bikes"), py::arg("seed") = 1, py::arg("duration") = 600.0,
      py::arg("radio_range") = 100.0, py::arg("bike_speed") = 4.0, py::arg("sense_rate") = 8.0,
      py::arg("tick") = 1.0, py::arg("max_start_delay") = 300.0, py::arg("grid_spacing") = 500.0);
}
