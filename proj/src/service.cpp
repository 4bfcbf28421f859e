#include "velomule/service.hpp"

#include <charconv>
#include <regex>

#include <httplib.h>

#include "velomule/analytics.hpp"
#include "velomule/error.hpp"
#include "velomule/serialize.hpp"

namespace velomule::service {

using nlohmann::json;

namespace {

struct BadRequest {
  std::string message;
};

int to_int(std::string_view text, const char* what) {
  int v = 0;
  auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || p != text.data() + text.size() || text.empty())
    throw BadRequest{std::string("bad ") + what + ": '" + std::string(text) + "'"};
  return v;
}

const std::string& required(const std::map<std::string, std::string>& q, const char* key) {
  auto it = q.find(key);
  if (it == q.end() || it->second.empty()) throw BadRequest{std::string("missing ") + key};
  return it->second;
}

TimeWindow optional_window(const std::map<std::string, std::string>& q) {
  auto it = q.find("window");
  return it == q.end() ? TimeWindow::all() : parse_window(it->second);
}

Response error(int status, const std::string& message) {
  return {status, json{{"error", message}}};
}

}  // namespace

Timestamp parse_query_timestamp(std::string_view text) {
  std::string s(text);
  if (s.size() > 10 && s[10] == 'T') s[10] = ' ';
  return parse_timestamp(s);
}

json QueryService::stations() const { return json(store_.stations()); }

json QueryService::forecast(int station, const Date& date) const {
  return forecast_available_bikes(store_, station, date, config_.forecast_weights,
                                  config_.lookback);
}

json QueryService::wait(int station, const Timestamp& arrival) const {
  auto series = wait_probability_series(store_, station, arrival, config_.wait_weights,
                                        config_.horizon_minutes, config_.lookback);
  json j = series;
  j["threshold"] = config_.wait_threshold;
  j["recommendation"] = recommend_wait(series, config_.wait_threshold);
  return j;
}

json QueryService::load(int station, const Timestamp& at) const {
  return load_factor(store_, station, at);
}

json QueryService::route(int a, int b, const TimeWindow& window) const {
  json j = route_busyness(store_, a, b, window);
  try {
    j["trip_time"] = average_trip_time(store_, a, b, window);
  } catch (const NoData&) {
    j["trip_time"] = nullptr;
  }
  return j;
}

json QueryService::trip_time(int a, int b, const TimeWindow& window) const {
  return average_trip_time(store_, a, b, window);
}

json QueryService::busyness(int station, const TimeWindow& window) const {
  return station_busyness(store_, station, window);
}

json QueryService::hourly(int station, int hour, const TimeWindow& window) const {
  return hourly_busyness(store_, station, hour, window);
}

json QueryService::rank(const TimeWindow& window, std::size_t top_k) const {
  return rank_busiest(store_, window, top_k);
}

Response QueryService::handle(std::string_view path,
                              const std::map<std::string, std::string>& q) const {
  static const std::regex station_re(R"(^/stations/([^/]+)/(forecast|wait|load|busyness|hourly)$)");
  static const std::regex route_re(R"(^/routes/([^/]+)/([^/]+)(/time)?$)");
  const std::string p(path);
  std::smatch m;
  try {
    if (p == "/stations") return {200, stations()};
    if (p == "/summary") return {200, json(store_.summary())};
    if (p == "/rank") {
      int top = q.count("top") ? to_int(q.at("top"), "top") : 10;
      if (top < 1) throw BadRequest{"top must be at least 1"};
      return {200, rank(optional_window(q), static_cast<std::size_t>(top))};
    }
    if (std::regex_match(p, m, station_re)) {
      int id = to_int(m[1].str(), "station id");
      const std::string op = m[2].str();
      if (op == "forecast") return {200, forecast(id, parse_date(required(q, "date")))};
      if (op == "wait") return {200, wait(id, parse_query_timestamp(required(q, "at")))};
      if (op == "load") return {200, load(id, parse_query_timestamp(required(q, "at")))};
      if (op == "busyness") return {200, busyness(id, optional_window(q))};
      int hour = to_int(required(q, "hour"), "hour");
      return {200, hourly(id, hour, optional_window(q))};
    }
    if (std::regex_match(p, m, route_re)) {
      int a = to_int(m[1].str(), "station id");
      int b = to_int(m[2].str(), "station id");
      if (m[3].matched) return {200, trip_time(a, b, optional_window(q))};
      return {200, route(a, b, optional_window(q))};
    }
    return error(404, "no such endpoint: " + p);
  } catch (const BadRequest& e) {
    return error(400, e.message);
  } catch (const ParseError& e) {
    return error(400, e.what());
  } catch (const InvalidArgument& e) {
    return error(400, e.what());
  } catch (const UnknownStation& e) {
    return error(404, e.what());
  } catch (const NoData& e) {
    return error(422, e.what());
  } catch (const NoHistory& e) {
    return error(422, e.what());
  } catch (const Error& e) {
    return error(500, e.what());
  }
}

struct HttpServer::Impl {
  httplib::Server server;
};

HttpServer::HttpServer(const QueryService& service) : impl_(std::make_unique<Impl>()) {
  // SO_REUSEADDR only: the library default also sets SO_REUSEPORT, which
  // would let a second server share a port that is already being served.
  impl_->server.set_socket_options([](socket_t sock) {
    int yes = 1;
    ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const char*>(&yes), sizeof yes);
  });
  impl_->server.Get(R"(/.*)", [&service](const httplib::Request& req, httplib::Response& res) {
    std::map<std::string, std::string> q;
    for (const auto& [k, v] : req.params) q.emplace(k, v);
    Response r = service.handle(req.path, q);
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json");
  });
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) return impl_->server.bind_to_any_port(host);
  return impl_->server.bind_to_port(host, port) ? port : -1;
}

bool HttpServer::listen() { return impl_->server.listen_after_bind(); }

void HttpServer::stop() {
  if (impl_) impl_->server.stop();
}

int serve(const QueryService& service, const std::string& addr, std::ostream& log) {
  auto colon = addr.rfind(':');
  if (colon == std::string::npos) {
    log << "error: --addr must be HOST:PORT\n";
    return 1;
  }
  std::string host = addr.substr(0, colon);
  int port = 0;
  std::string_view port_text(addr);
  port_text.remove_prefix(colon + 1);
  auto [ptr, ec] = std::from_chars(port_text.data(), port_text.data() + port_text.size(), port);
  if (ec != std::errc{} || ptr != port_text.data() + port_text.size() || port < 0 || port > 65535) {
    log << "error: bad port in --addr '" << addr << "'\n";
    return 1;
  }
  HttpServer server(service);
  int bound = server.bind(host, port);
  if (bound < 0) {
    log << "error: cannot bind " << addr << "\n";
    return 2;
  }
  log << "listening on " << host << ":" << bound << std::endl;
  return server.listen() ? 0 : 2;
}

}  // namespace velomule::service
