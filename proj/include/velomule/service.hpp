#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <ostream>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "velomule/config.hpp"
#include "velomule/store.hpp"

namespace velomule::service {

/// Canonical timestamp, also accepting 'T' in place of the space.
Timestamp parse_query_timestamp(std::string_view text);

struct Response {
  int status = 200;
  nlohmann::json body;
};

/// Read-only queries over one store. The same producers back both the HTTP
/// endpoints and `velomule analyze --format json`.
class QueryService {
public:
  QueryService(const HistoryStore& store, RuntimeConfig config)
      : store_(store), config_(std::move(config)) {}

  nlohmann::json stations() const;
  nlohmann::json forecast(int station, const Date& date) const;
  /// Series plus a "recommendation" at the configured threshold.
  nlohmann::json wait(int station, const Timestamp& arrival) const;
  nlohmann::json load(int station, const Timestamp& at) const;
  /// Route busyness plus "trip_time" (null when no trips).
  nlohmann::json route(int a, int b, const TimeWindow& window) const;
  nlohmann::json trip_time(int a, int b, const TimeWindow& window) const;
  nlohmann::json busyness(int station, const TimeWindow& window) const;
  nlohmann::json hourly(int station, int hour, const TimeWindow& window) const;
  nlohmann::json rank(const TimeWindow& window, std::size_t top_k) const;

  /// GET dispatch. Malformed input -> 400, unknown station or path -> 404,
  /// no data for the query -> 422. Error bodies are {"error": "..."}.
  Response handle(std::string_view path, const std::map<std::string, std::string>& query) const;

  const RuntimeConfig& config() const { return config_; }

private:
  const HistoryStore& store_;
  RuntimeConfig config_;
};

/// HTTP front end over a QueryService; requests are served concurrently.
class HttpServer {
public:
  explicit HttpServer(const QueryService& service);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Port 0 picks a free port. Returns the bound port or -1.
  int bind(const std::string& host, int port);
  /// Blocks until stop().
  bool listen();
  void stop();

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Binds `addr` (HOST:PORT) and serves until the process is stopped.
/// Returns 2 when the address cannot be bound.
int serve(const QueryService& service, const std::string& addr, std::ostream& log);

}  // namespace velomule::service
