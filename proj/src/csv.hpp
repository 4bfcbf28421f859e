#pragma once

#include <istream>
#include <string>
#include <vector>

namespace velomule::detail {

/// Comma-separated reader with RFC 4180 quoting; quoted fields may span lines.
class CsvReader {
public:
  explicit CsvReader(std::istream& in) : in_(in) {}

  /// Reads the next non-empty record. `line` receives the physical line the
  /// record starts on. Returns false at end of input.
  bool next(std::vector<std::string>& fields, std::size_t& line) {
    fields.clear();
    std::string raw;
    while (true) {
      if (!std::getline(in_, raw)) return false;
      ++line_;
      strip_cr(raw);
      if (!raw.empty()) break;
    }
    line = line_;

    std::string field;
    bool quoted = false;
    std::size_t i = 0;
    while (true) {
      if (i == raw.size()) {
        if (quoted) {
          // Embedded newline inside a quoted field.
          std::string more;
          if (!std::getline(in_, more)) break;
          ++line_;
          strip_cr(more);
          field.push_back('\n');
          raw = std::move(more);
          i = 0;
          continue;
        }
        break;
      }
      char c = raw[i++];
      if (quoted) {
        if (c == '"') {
          if (i < raw.size() && raw[i] == '"') {
            field.push_back('"');
            ++i;
          } else {
            quoted = false;
          }
        } else {
          field.push_back(c);
        }
      } else if (c == '"') {
        quoted = true;
      } else if (c == ',') {
        fields.push_back(std::move(field));
        field.clear();
      } else {
        field.push_back(c);
      }
    }
    fields.push_back(std::move(field));
    return true;
  }

private:
  static void strip_cr(std::string& s) {
    if (!s.empty() && s.back() == '\r') s.pop_back();
  }

  std::istream& in_;
  std::size_t line_ = 0;
};

}  // namespace velomule::detail
