#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "velomule/timestamp.hpp"

namespace velomule {

struct StationRecord {
  int station_id = 0;
  std::string name;
  double latitude = 0.0;
  double longitude = 0.0;
  int dock_count = 0;
  std::string landmark;
  Date installation;

  bool operator==(const StationRecord&) const = default;
};

/// One availability sample. `docks_available` counts empty docks.
struct StatusRecord {
  int station_id = 0;
  int bikes_available = 0;
  int docks_available = 0;
  Timestamp at;

  bool operator==(const StatusRecord&) const = default;
};

struct TripRecord {
  std::int64_t trip_id = 0;
  std::int64_t duration = 0;  // seconds
  Timestamp start_at;
  Timestamp end_at;
  int start_station_id = 0;
  int end_station_id = 0;
  std::string start_terminal;
  std::string end_terminal;
  std::int64_t bike_no = 0;
  std::string zip_code;
  std::string subscription_type;

  bool operator==(const TripRecord&) const = default;

  /// Both the duration column and the timestamps are kept; rows where they
  /// disagree by more than a minute are flagged, never corrected.
  bool duration_mismatch() const {
    std::int64_t elapsed = end_at.seconds() - start_at.seconds();
    std::int64_t diff = elapsed > duration ? elapsed - duration : duration - elapsed;
    return diff > 60;
  }
};

/// Canonical field name -> header text for one file kind. Header matching is
/// case-insensitive and ignores punctuation, so "Trip ID" matches "trip_id".
using HeaderMap = std::map<std::string, std::string>;

struct SchemaConfig {
  HeaderMap station;
  HeaderMap status;
  HeaderMap trip;

  /// "default" (no remapping) or "babs" (the Bay Area export, where the
  /// numeric station id lives in the "Terminal" columns).
  static SchemaConfig preset(std::string_view name);
  /// {"station": {...}, "status": {...}, "trip": {...}}; throws ConfigError.
  static SchemaConfig from_json(std::string_view text);
};

struct ParseOptions {
  HeaderMap remap;
  bool strict = false;  // first bad row throws RowError instead of being skipped
  std::size_t max_kept_errors = 1000;
};

struct RowIssue {
  std::size_t line = 0;  // 1-based physical line number, header is line 1
  std::string reason;
};

template <class Record>
struct ParseResult {
  std::vector<Record> records;
  std::size_t data_lines = 0;
  std::size_t rows_skipped = 0;
  std::vector<RowIssue> errors;  // first `max_kept_errors` of them
};

ParseResult<StationRecord> parse_station_csv(std::istream& in, const ParseOptions& opts = {});
ParseResult<StatusRecord> parse_status_csv(std::istream& in, const ParseOptions& opts = {});
ParseResult<TripRecord> parse_trip_csv(std::istream& in, const ParseOptions& opts = {});

/// Lower-case and collapse every non-alphanumeric run to '_'.
std::string normalize_header(std::string_view name);

}  // namespace velomule
