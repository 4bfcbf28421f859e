#include "velomule/timestamp.hpp"

#include <algorithm>

#include <array>
#include <chrono>
#include <cstdio>

#include "velomule/error.hpp"

namespace velomule {

namespace chr = std::chrono;

namespace {

int days_in_month(int year, int month) {
  return static_cast<int>(static_cast<unsigned>(
      chr::year_month_day_last{chr::year{year}, chr::month_day_last{chr::month(month)}}.day()));
}

// Cursor over the input; every failure reports the byte it stopped at.
class Scanner {
public:
  explicit Scanner(std::string_view s) : s_(s) {}

  std::size_t pos() const { return pos_; }
  bool done() const { return pos_ == s_.size(); }
  bool peek_is(char c) const { return pos_ < s_.size() && s_[pos_] == c; }

  int fixed_digits(int n, const char* what) {
    int v = 0;
    for (int i = 0; i < n; ++i) {
      if (pos_ >= s_.size() || s_[pos_] < '0' || s_[pos_] > '9')
        throw ParseError(pos_, std::string("expected ") + std::to_string(n) + "-digit " + what);
      v = v * 10 + (s_[pos_++] - '0');
    }
    return v;
  }

  // One or more digits, at most `max` of them.
  int loose_digits(int max, const char* what) {
    std::size_t start = pos_;
    int v = 0;
    while (pos_ < s_.size() && pos_ - start < static_cast<std::size_t>(max) && s_[pos_] >= '0' &&
           s_[pos_] <= '9')
      v = v * 10 + (s_[pos_++] - '0');
    if (pos_ == start) throw ParseError(pos_, std::string("expected ") + what);
    return v;
  }

  void expect(char c) {
    if (!peek_is(c)) throw ParseError(pos_, std::string("expected '") + c + "'");
    ++pos_;
  }

  void expect_end() {
    if (!done()) throw ParseError(pos_, "trailing characters");
  }

private:
  std::string_view s_;
  std::size_t pos_ = 0;
};

struct Field {
  int value;
  std::size_t offset;
};

Date checked_date(Field y, Field m, Field d) {
  if (m.value < 1 || m.value > 12) throw ParseError(m.offset, "month out of range");
  if (d.value < 1 || d.value > days_in_month(y.value, m.value))
    throw ParseError(d.offset, "day out of range");
  return Date{y.value, m.value, d.value};
}

void check_time(Field h, Field mi, Field s) {
  if (h.value > 23) throw ParseError(h.offset, "hour out of range");
  if (mi.value > 59) throw ParseError(mi.offset, "minute out of range");
  if (s.value > 59) throw ParseError(s.offset, "second out of range");
}

Date scan_iso_date(Scanner& sc, char sep) {
  Field y{0, sc.pos()};
  y.value = sc.fixed_digits(4, "year");
  sc.expect(sep);
  Field m{0, sc.pos()};
  m.value = sc.fixed_digits(2, "month");
  sc.expect(sep);
  Field d{0, sc.pos()};
  d.value = sc.fixed_digits(2, "day");
  return checked_date(y, m, d);
}

// M/D/YYYY as written by US-style exports.
Date scan_us_date(Scanner& sc) {
  Field m{0, sc.pos()};
  m.value = sc.loose_digits(2, "month");
  sc.expect('/');
  Field d{0, sc.pos()};
  d.value = sc.loose_digits(2, "day");
  sc.expect('/');
  Field y{0, sc.pos()};
  y.value = sc.fixed_digits(4, "year");
  return checked_date(y, m, d);
}

Date scan_any_date(Scanner& sc, std::string_view text) {
  const bool year_first = text.size() >= 5 && std::all_of(text.begin(), text.begin() + 4, [](char c) {
    return c >= '0' && c <= '9';
  });
  if (year_first && (text[4] == '-' || text[4] == '/')) return scan_iso_date(sc, text[4]);
  return scan_us_date(sc);
}

}  // namespace

std::string_view weekday_name(Weekday d) {
  static constexpr std::array<std::string_view, 7> names{
      "Monday", "Tuesday", "Wednesday", "Thursday", "Friday", "Saturday", "Sunday"};
  return names[static_cast<int>(d) - 1];
}

std::int64_t Date::serial() const {
  chr::year_month_day ymd{chr::year{year}, chr::month(static_cast<unsigned>(month)),
                          chr::day(static_cast<unsigned>(day))};
  return chr::sys_days{ymd}.time_since_epoch().count();
}

Date Date::from_serial(std::int64_t days) {
  chr::year_month_day ymd{chr::sys_days{chr::days{days}}};
  return Date{static_cast<int>(ymd.year()), static_cast<int>(static_cast<unsigned>(ymd.month())),
              static_cast<int>(static_cast<unsigned>(ymd.day()))};
}

Weekday Date::weekday() const {
  chr::weekday wd{chr::sys_days{chr::days{serial()}}};
  return static_cast<Weekday>(wd.iso_encoding());
}

std::optional<Date> Date::add_months(int n) const {
  int index = year * 12 + (month - 1) + n;
  Date d{index / 12, index % 12 + 1, day};
  if (index < 0 || !d.valid()) return std::nullopt;
  return d;
}

Date Date::week_start() const { return add_days(-(static_cast<int>(weekday()) - 1)); }

bool Date::valid() const {
  return year >= 0 && year <= 9999 && month >= 1 && month <= 12 && day >= 1 &&
         day <= days_in_month(year, month);
}

std::string Date::to_string() const {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", year, month, day);
  return buf;
}

Timestamp Timestamp::from_seconds(std::int64_t s) {
  std::int64_t days = s / 86400;
  std::int64_t rem = s % 86400;
  if (rem < 0) {
    rem += 86400;
    --days;
  }
  return Timestamp{Date::from_serial(days), static_cast<int>(rem / 3600),
                   static_cast<int>(rem % 3600 / 60), static_cast<int>(rem % 60)};
}

std::string Timestamp::to_string() const {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02d %02d:%02d:%02d", date.year, date.month, date.day,
                hour, minute, second);
  return buf;
}

Timestamp parse_timestamp(std::string_view text) {
  Scanner sc(text);
  Date d = scan_iso_date(sc, '-');
  sc.expect(' ');
  Field h{0, sc.pos()};
  h.value = sc.fixed_digits(2, "hour");
  sc.expect(':');
  Field mi{0, sc.pos()};
  mi.value = sc.fixed_digits(2, "minute");
  sc.expect(':');
  Field s{0, sc.pos()};
  s.value = sc.fixed_digits(2, "second");
  sc.expect_end();
  check_time(h, mi, s);
  return Timestamp{d, h.value, mi.value, s.value};
}

Date parse_date(std::string_view text) {
  Scanner sc(text);
  Date d = scan_iso_date(sc, '-');
  sc.expect_end();
  return d;
}

Timestamp parse_timestamp_lenient(std::string_view text) {
  Scanner sc(text);
  Date d = scan_any_date(sc, text);
  if (sc.peek_is('T'))
    sc.expect('T');
  else
    sc.expect(' ');
  Field h{0, sc.pos()};
  h.value = sc.loose_digits(2, "hour");
  sc.expect(':');
  Field mi{0, sc.pos()};
  mi.value = sc.fixed_digits(2, "minute");
  Field s{0, sc.pos()};
  if (sc.peek_is(':')) {
    sc.expect(':');
    s.offset = sc.pos();
    s.value = sc.fixed_digits(2, "second");
  }
  sc.expect_end();
  check_time(h, mi, s);
  return Timestamp{d, h.value, mi.value, s.value};
}

Date parse_date_lenient(std::string_view text) {
  Scanner sc(text);
  Date d = scan_any_date(sc, text);
  sc.expect_end();
  return d;
}

TimeWindow parse_window(std::string_view text) {
  if (text.empty() || text == "all") return TimeWindow::all();
  auto comma = text.find(',');
  if (comma == std::string_view::npos) throw ParseError(0, "window must be FROM,TO");
  Timestamp from = parse_timestamp_lenient(text.substr(0, comma));
  Timestamp to;
  try {
    to = parse_timestamp_lenient(text.substr(comma + 1));
  } catch (const ParseError& e) {
    throw ParseError(comma + 1 + e.offset(), e.reason());
  }
  if (to < from) throw ParseError(comma + 1, "window end precedes start");
  return TimeWindow::between(from, to);
}

std::string to_string(const TimeWindow& w) {
  if (!w.bounded()) return "all";
  return Timestamp::from_seconds(w.from).to_string() + "," +
         Timestamp::from_seconds(w.to).to_string();
}

}  // namespace velomule
