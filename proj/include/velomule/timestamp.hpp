#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace velomule {

enum class Weekday { Monday = 1, Tuesday, Wednesday, Thursday, Friday, Saturday, Sunday };

std::string_view weekday_name(Weekday d);

/// Proleptic Gregorian calendar date, years 0000-9999.
struct Date {
  int year = 2000;
  int month = 1;
  int day = 1;

  auto operator<=>(const Date&) const = default;

  /// Days since 1970-01-01.
  std::int64_t serial() const;
  static Date from_serial(std::int64_t days);

  Weekday weekday() const;
  Date add_days(std::int64_t n) const { return from_serial(serial() + n); }
  /// Same day-of-month `n` months away, or nullopt when that month is too short.
  std::optional<Date> add_months(int n) const;
  /// Monday of the ISO week containing this date.
  Date week_start() const;

  std::string to_string() const;
  bool valid() const;
};

/// Naive local civil time; there is no zone anywhere in the library.
struct Timestamp {
  Date date;
  int hour = 0;
  int minute = 0;
  int second = 0;

  auto operator<=>(const Timestamp&) const = default;

  /// Seconds since 1970-01-01 00:00:00 on the same naive clock.
  std::int64_t seconds() const { return date.serial() * 86400 + second_of_day(); }
  static Timestamp from_seconds(std::int64_t s);

  static Timestamp start_of(const Date& d) { return Timestamp{d, 0, 0, 0}; }

  int second_of_day() const { return hour * 3600 + minute * 60 + second; }
  int minute_of_day() const { return hour * 60 + minute; }
  Weekday weekday() const { return date.weekday(); }

  Timestamp plus_seconds(std::int64_t s) const { return from_seconds(seconds() + s); }

  /// Canonical "YYYY-MM-DD HH:MM:SS".
  std::string to_string() const;
};

/// Strict canonical form "YYYY-MM-DD HH:MM:SS". Throws ParseError.
Timestamp parse_timestamp(std::string_view text);

/// Strict "YYYY-MM-DD". Throws ParseError.
Date parse_date(std::string_view text);

/// Accepts the canonical form plus the variants seen in real exports:
/// 'T' in place of the space, "YYYY/MM/DD HH:MM:SS", and "M/D/YYYY H:MM[:SS]".
/// Throws ParseError.
Timestamp parse_timestamp_lenient(std::string_view text);

/// Accepts "YYYY-MM-DD", "YYYY/MM/DD" or "M/D/YYYY". Throws ParseError.
Date parse_date_lenient(std::string_view text);

/// Half-open interval [from, to) on the naive clock.
struct TimeWindow {
  std::int64_t from = INT64_MIN;
  std::int64_t to = INT64_MAX;

  static TimeWindow all() { return {}; }
  static TimeWindow between(const Timestamp& a, const Timestamp& b) {
    return {a.seconds(), b.seconds()};
  }

  bool contains(std::int64_t s) const { return s >= from && s < to; }
  bool contains(const Timestamp& t) const { return contains(t.seconds()); }
  bool bounded() const { return from != INT64_MIN && to != INT64_MAX; }

  auto operator<=>(const TimeWindow&) const = default;
};

/// "FROM,TO" with two lenient timestamps, or "all".
TimeWindow parse_window(std::string_view text);
std::string to_string(const TimeWindow& w);

}  // namespace velomule
