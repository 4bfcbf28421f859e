#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace velomule {

/// Root of every error the library throws.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Malformed timestamp or date text. `offset` is the byte where parsing stopped.
class ParseError : public Error {
public:
  ParseError(std::size_t offset, std::string reason)
      : Error("parse error at byte " + std::to_string(offset) + ": " + reason),
        offset_(offset), reason_(std::move(reason)) {}

  std::size_t offset() const noexcept { return offset_; }
  const std::string& reason() const noexcept { return reason_; }

private:
  std::size_t offset_;
  std::string reason_;
};

/// A CSV header lacks a required column.
class SchemaError : public Error {
public:
  explicit SchemaError(std::string column)
      : Error("missing column: " + column), column_(std::move(column)) {}

  const std::string& column() const noexcept { return column_; }

private:
  std::string column_;
};

/// A data row could not be turned into a record. Thrown only in strict mode;
/// otherwise collected in the parse result.
class RowError : public Error {
public:
  RowError(std::size_t line, std::string reason)
      : Error("line " + std::to_string(line) + ": " + reason), line_(line),
        reason_(std::move(reason)) {}

  std::size_t line() const noexcept { return line_; }
  const std::string& reason() const noexcept { return reason_; }

private:
  std::size_t line_;
  std::string reason_;
};

/// Referential or uniqueness violation during store build (strict mode).
class IntegrityError : public Error {
public:
  using Error::Error;
};

class UnknownStation : public Error {
public:
  explicit UnknownStation(int station_id)
      : Error("unknown station " + std::to_string(station_id)), station_id_(station_id) {}

  int station_id() const noexcept { return station_id_; }

private:
  int station_id_;
};

/// No history at all for a predictive model.
class NoHistory : public Error {
public:
  using Error::Error;
};

/// A descriptive query matched no records.
class NoData : public Error {
public:
  using Error::Error;
};

/// Invalid configuration; `field` names the offending key.
class ConfigError : public Error {
public:
  ConfigError(std::string field, const std::string& reason)
      : Error("invalid " + field + ": " + reason), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

private:
  std::string field_;
};

/// A caller broke an operation's precondition (hour outside 0-23, top_k of 0...).
class InvalidArgument : public Error {
public:
  using Error::Error;
};

/// Malformed simulator trace (unpaired send/receive, bad line).
class TraceError : public Error {
public:
  using Error::Error;
};

}  // namespace velomule
