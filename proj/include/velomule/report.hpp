#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "velomule/analytics.hpp"
#include "velomule/sim.hpp"

namespace velomule::report {

struct Row {
  std::string label;
  std::optional<double> value;  // null when the analytics call failed
  std::string note;             // error text for null rows

  bool operator==(const Row&) const = default;
};

struct Provenance {
  std::string operation;
  std::map<std::string, std::string> parameters;

  bool operator==(const Provenance&) const = default;
};

/// Labeled numeric series behind one figure.
struct ReportTable {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Row> rows;
  Provenance provenance;

  bool operator==(const ReportTable&) const = default;
};

/// Integers print without decimals; other values with up to 6 significant digits.
std::string format_value(double v);

/// `label,value` header, LF endings, empty value for null rows.
std::string to_csv(const ReportTable& t);
/// Rows only; title, axis labels and provenance are not part of the CSV form.
std::vector<Row> rows_from_csv(const std::string& csv);

nlohmann::json to_json(const ReportTable& t);
ReportTable from_json(const nlohmann::json& j);

// One row per station in ascending id, or per minute for the wait series.
// Per-row analytics failures become null rows with the error as note.

ReportTable fig_forecast(const HistoryStore& store, const Date& date,
                         const FactorWeights& weights = {}, const Lookback& lookback = {});
/// Departures plus arrivals in [hour, hour + 1) summed over the window.
ReportTable fig_busy_by_hour(const HistoryStore& store, int hour,
                             const TimeWindow& window = TimeWindow::all());
/// Same counts divided by the number of days the window spans.
ReportTable fig_busy_density(const HistoryStore& store, int hour,
                             const TimeWindow& window = TimeWindow::all());
ReportTable fig_trips_per_station(const HistoryStore& store,
                                  const TimeWindow& window = TimeWindow::all());
ReportTable fig_load_factor(const HistoryStore& store, const Timestamp& at);
ReportTable fig_wait_series(const HistoryStore& store, int station_id, const Timestamp& arrival,
                            const FactorWeights& weights = {}, int horizon_minutes = 30,
                            const Lookback& lookback = {});

/// Bytes sent per bike and received per station.
ReportTable sim_summary(const sim::TraceSummary& summary);

/// Days covered by the window; for an unbounded window, the calendar days
/// from the first trip start to the last trip end. At least 1.
std::int64_t window_day_count(const HistoryStore& store, const TimeWindow& window);

struct FigureParams {
  Date forecast_date;
  int hour = 8;
  TimeWindow window;
  Timestamp load_at;
  int wait_station = 0;
  Timestamp wait_arrival;
  FactorWeights forecast_weights;
  FactorWeights wait_weights;
  int horizon_minutes = 30;
  Lookback lookback;
};

/// Forecast for the day after the last status sample, load factor and wait
/// series at the last sample, wait series for the lowest station id.
FigureParams default_figure_params(const HistoryStore& store);

/// fig4 ... fig9, in that order.
std::vector<std::pair<std::string, ReportTable>> all_figures(const HistoryStore& store,
                                                             const FigureParams& params);

/// Writes `<name>.csv` and `<name>.json` for each table.
void write_tables(const std::filesystem::path& dir,
                  const std::vector<std::pair<std::string, ReportTable>>& tables);

}  // namespace velomule::report
