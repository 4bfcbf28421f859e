#include "velomule/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <istream>
#include <optional>
#include <span>

#include <nlohmann/json.hpp>

#include "csv.hpp"
#include "velomule/error.hpp"

namespace velomule {

namespace {

struct ColumnSpec {
  std::string_view field;
  std::vector<std::string_view> aliases;
  bool required;
};

// Raised inside row conversion; becomes a RowIssue.
struct RowFailure {
  std::string reason;
};

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

template <class Int>
Int to_int(std::string_view text, std::string_view field) {
  text = trim(text);
  Int v{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty())
    throw RowFailure{"unparsable " + std::string(field) + " '" + std::string(text) + "'"};
  return v;
}

double to_double(std::string_view text, std::string_view field) {
  text = trim(text);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty())
    throw RowFailure{"unparsable " + std::string(field) + " '" + std::string(text) + "'"};
  return v;
}

Timestamp to_timestamp(std::string_view text, std::string_view field) {
  try {
    return parse_timestamp_lenient(trim(text));
  } catch (const ParseError& e) {
    throw RowFailure{"bad " + std::string(field) + ": " + e.reason()};
  }
}

Date to_date(std::string_view text, std::string_view field) {
  text = trim(text);
  try {
    return parse_date_lenient(text);
  } catch (const ParseError&) {
    // Some exports write the installation date with a time part.
    try {
      return parse_timestamp_lenient(text).date;
    } catch (const ParseError& e) {
      throw RowFailure{"bad " + std::string(field) + ": " + e.reason()};
    }
  }
}

// Column index per spec entry, or -1 for an absent optional column.
std::vector<int> resolve_columns(const std::vector<std::string>& header,
                                 std::span<const ColumnSpec> specs, const HeaderMap& remap) {
  std::vector<std::string> normalized;
  normalized.reserve(header.size());
  for (const auto& h : header) normalized.push_back(normalize_header(h));

  auto find = [&](std::string_view name) -> int {
    std::string key = normalize_header(name);
    auto it = std::find(normalized.begin(), normalized.end(), key);
    return it == normalized.end() ? -1 : static_cast<int>(it - normalized.begin());
  };

  std::vector<int> idx;
  for (const auto& spec : specs) {
    int col = -1;
    if (auto it = remap.find(std::string(spec.field)); it != remap.end()) {
      col = find(it->second);
    } else {
      for (auto alias : spec.aliases)
        if ((col = find(alias)) >= 0) break;
    }
    if (col < 0 && spec.required) throw SchemaError(std::string(spec.field));
    idx.push_back(col);
  }
  return idx;
}

class Row {
public:
  Row(const std::vector<std::string>& fields, const std::vector<int>& cols,
      std::span<const ColumnSpec> specs)
      : fields_(fields), cols_(cols), specs_(specs) {}

  // Empty view for absent optional columns.
  std::string_view get(std::size_t spec_index) const {
    int col = cols_[spec_index];
    if (col < 0) return {};
    if (static_cast<std::size_t>(col) >= fields_.size())
      throw RowFailure{"missing field " + std::string(specs_[spec_index].field)};
    return fields_[col];
  }
  bool has(std::size_t spec_index) const { return cols_[spec_index] >= 0; }
  std::string_view name(std::size_t spec_index) const { return specs_[spec_index].field; }

private:
  const std::vector<std::string>& fields_;
  const std::vector<int>& cols_;
  std::span<const ColumnSpec> specs_;
};

template <class Record, class Convert>
ParseResult<Record> parse_file(std::istream& in, const ParseOptions& opts,
                               std::span<const ColumnSpec> specs, Convert convert) {
  detail::CsvReader reader(in);
  std::vector<std::string> fields;
  std::size_t line = 0;
  if (!reader.next(fields, line)) throw SchemaError(std::string(specs.front().field));
  if (!fields.empty() && fields[0].rfind("\xEF\xBB\xBF", 0) == 0) fields[0].erase(0, 3);
  const std::vector<int> cols = resolve_columns(fields, specs, opts.remap);

  ParseResult<Record> result;
  while (reader.next(fields, line)) {
    ++result.data_lines;
    try {
      result.records.push_back(convert(Row(fields, cols, specs)));
    } catch (const RowFailure& f) {
      if (opts.strict) throw RowError(line, f.reason);
      ++result.rows_skipped;
      if (result.errors.size() < opts.max_kept_errors) result.errors.push_back({line, f.reason});
    }
  }
  return result;
}

const std::vector<ColumnSpec>& station_columns() {
  static const std::vector<ColumnSpec> specs{
      {"station_id", {"station_id", "id"}, true},
      {"name", {"name"}, true},
      {"latitude", {"latitude", "lat"}, true},
      {"longitude", {"longitude", "long", "lon", "lng"}, true},
      {"dock_count", {"dock_count", "dockcount", "docks"}, true},
      {"landmark", {"landmark"}, true},
      {"installation", {"installation", "installation_date"}, true},
  };
  return specs;
}

const std::vector<ColumnSpec>& status_columns() {
  static const std::vector<ColumnSpec> specs{
      {"station_id", {"station_id"}, true},
      {"bikes_available", {"bikes_available"}, true},
      {"docks_available", {"docks_available", "dock_available"}, true},
      {"time", {"time", "at", "timestamp"}, true},
  };
  return specs;
}

const std::vector<ColumnSpec>& trip_columns() {
  static const std::vector<ColumnSpec> specs{
      {"trip_id", {"trip_id", "id"}, true},
      {"duration", {"duration"}, true},
      {"start_date", {"start_date", "start_at", "start_time"}, true},
      {"start_station_id", {"start_station_id", "start_station"}, true},
      {"start_terminal", {"start_terminal"}, false},
      {"end_date", {"end_date", "end_at", "end_time"}, true},
      {"end_station_id", {"end_station_id", "end_station"}, true},
      {"end_terminal", {"end_terminal"}, false},
      {"bike_no", {"bike_no", "bike", "bike_number"}, false},
      {"zip_code", {"zip_code", "zip"}, false},
      {"subscription_type", {"subscription_type", "subscriber_type"}, false},
  };
  return specs;
}

HeaderMap header_map_from_json(const nlohmann::json& j, const std::string& section) {
  HeaderMap m;
  if (!j.contains(section)) return m;
  const auto& obj = j.at(section);
  if (!obj.is_object()) throw ConfigError(section, "expected an object");
  for (const auto& [k, v] : obj.items()) {
    if (!v.is_string()) throw ConfigError(section + "." + k, "expected a header name string");
    m[k] = v.get<std::string>();
  }
  return m;
}

}  // namespace

std::string normalize_header(std::string_view name) {
  std::string out;
  bool pending_sep = false;
  for (unsigned char c : name) {
    if (std::isalnum(c)) {
      if (pending_sep && !out.empty()) out.push_back('_');
      pending_sep = false;
      out.push_back(static_cast<char>(std::tolower(c)));
    } else {
      pending_sep = true;
    }
  }
  return out;
}

SchemaConfig SchemaConfig::preset(std::string_view name) {
  SchemaConfig cfg;
  if (name == "default" || name.empty()) return cfg;
  if (name == "babs") {
    cfg.trip = {{"start_station_id", "Start Terminal"},
                {"start_terminal", "Start Station"},
                {"end_station_id", "End Terminal"},
                {"end_terminal", "End Station"}};
    return cfg;
  }
  throw ConfigError("schema", "unknown preset '" + std::string(name) + "'");
}

SchemaConfig SchemaConfig::from_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("schema", e.what());
  }
  if (!j.is_object()) throw ConfigError("schema", "expected an object");
  SchemaConfig cfg;
  cfg.station = header_map_from_json(j, "station");
  cfg.status = header_map_from_json(j, "status");
  cfg.trip = header_map_from_json(j, "trip");
  return cfg;
}

ParseResult<StationRecord> parse_station_csv(std::istream& in, const ParseOptions& opts) {
  return parse_file<StationRecord>(in, opts, station_columns(), [](const Row& row) {
    StationRecord s;
    s.station_id = to_int<int>(row.get(0), row.name(0));
    s.name = std::string(trim(row.get(1)));
    s.latitude = to_double(row.get(2), row.name(2));
    s.longitude = to_double(row.get(3), row.name(3));
    s.dock_count = to_int<int>(row.get(4), row.name(4));
    s.landmark = std::string(trim(row.get(5)));
    s.installation = to_date(row.get(6), row.name(6));
    if (s.dock_count <= 0) throw RowFailure{"dock_count must be positive"};
    if (!(s.latitude >= -90.0 && s.latitude <= 90.0)) throw RowFailure{"latitude out of range"};
    if (!(s.longitude >= -180.0 && s.longitude <= 180.0))
      throw RowFailure{"longitude out of range"};
    return s;
  });
}

ParseResult<StatusRecord> parse_status_csv(std::istream& in, const ParseOptions& opts) {
  return parse_file<StatusRecord>(in, opts, status_columns(), [](const Row& row) {
    StatusRecord s;
    s.station_id = to_int<int>(row.get(0), row.name(0));
    s.bikes_available = to_int<int>(row.get(1), row.name(1));
    s.docks_available = to_int<int>(row.get(2), row.name(2));
    s.at = to_timestamp(row.get(3), row.name(3));
    if (s.bikes_available < 0) throw RowFailure{"bikes_available is negative"};
    if (s.docks_available < 0) throw RowFailure{"docks_available is negative"};
    return s;
  });
}

ParseResult<TripRecord> parse_trip_csv(std::istream& in, const ParseOptions& opts) {
  return parse_file<TripRecord>(in, opts, trip_columns(), [](const Row& row) {
    TripRecord t;
    t.trip_id = to_int<std::int64_t>(row.get(0), row.name(0));
    t.duration = to_int<std::int64_t>(row.get(1), row.name(1));
    t.start_at = to_timestamp(row.get(2), row.name(2));
    t.start_station_id = to_int<int>(row.get(3), row.name(3));
    t.start_terminal = std::string(trim(row.get(4)));
    t.end_at = to_timestamp(row.get(5), row.name(5));
    t.end_station_id = to_int<int>(row.get(6), row.name(6));
    t.end_terminal = std::string(trim(row.get(7)));
    if (row.has(8) && !trim(row.get(8)).empty())
      t.bike_no = to_int<std::int64_t>(row.get(8), row.name(8));
    t.zip_code = std::string(trim(row.get(9)));
    t.subscription_type = std::string(trim(row.get(10)));
    if (t.duration <= 0) throw RowFailure{"duration must be positive"};
    if (t.end_at < t.start_at) throw RowFailure{"end_at precedes start_at"};
    return t;
  });
}

}  // namespace velomule
