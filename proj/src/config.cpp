#include "velomule/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "velomule/error.hpp"

namespace velomule {

namespace {

double number(const std::string& key, const std::string& text) {
  double v = 0.0;
  auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || p != text.data() + text.size() || text.empty())
    throw ConfigError(key, "not a number: '" + text + "'");
  return v;
}

int integer(const std::string& key, const std::string& text) {
  int v = 0;
  auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || p != text.data() + text.size() || text.empty())
    throw ConfigError(key, "not an integer: '" + text + "'");
  return v;
}

double positive(const std::string& key, const std::string& text) {
  double v = number(key, text);
  if (!(v > 0.0)) throw ConfigError(key, "must be positive");
  return v;
}

std::string json_to_text(const std::string& key, const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number()) return v.dump();
  if (v.is_array()) {
    std::string out;
    for (const auto& item : v) {
      if (!item.is_number()) throw ConfigError(key, "array items must be numbers");
      if (!out.empty()) out += ',';
      out += item.dump();
    }
    return out;
  }
  throw ConfigError(key, "unsupported value type");
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys{
      "forecast_weights", "wait_weights", "wait_threshold", "horizon_minutes",
      "lookback_weeks",   "lookback_months", "match_tolerance_minutes", "radio_range",
      "bike_speed",       "sense_rate",   "tick",           "max_start_delay",
      "grid_spacing",     "data_dir",     "schema",         "strict",
      "addr"};
  return keys;
}

EnvLookup process_env() {
  return [](const std::string& name) -> std::optional<std::string> {
    if (const char* v = std::getenv(name.c_str())) return std::string(v);
    return std::nullopt;
  };
}

void apply_config_value(RuntimeConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "forecast_weights") {
    cfg.forecast_weights = FactorWeights::parse(value, key);
  } else if (key == "wait_weights") {
    cfg.wait_weights = FactorWeights::parse(value, key);
  } else if (key == "wait_threshold") {
    double t = number(key, value);
    if (!(t >= 0.0 && t <= 1.0)) throw ConfigError(key, "must be in [0, 1]");
    cfg.wait_threshold = t;
  } else if (key == "horizon_minutes") {
    cfg.horizon_minutes = integer(key, value);
    if (cfg.horizon_minutes < 0) throw ConfigError(key, "must be non-negative");
  } else if (key == "lookback_weeks") {
    cfg.lookback.weeks = integer(key, value);
    if (cfg.lookback.weeks < 0) throw ConfigError(key, "must be non-negative");
  } else if (key == "lookback_months") {
    cfg.lookback.months = integer(key, value);
    if (cfg.lookback.months < 0) throw ConfigError(key, "must be non-negative");
  } else if (key == "match_tolerance_minutes") {
    cfg.lookback.match_tolerance_minutes = integer(key, value);
    if (cfg.lookback.match_tolerance_minutes < 0) throw ConfigError(key, "must be non-negative");
  } else if (key == "radio_range") {
    cfg.radio_range = positive(key, value);
  } else if (key == "bike_speed") {
    cfg.bike_speed = positive(key, value);
  } else if (key == "sense_rate") {
    cfg.sense_rate = number(key, value);
    if (!(cfg.sense_rate >= 0.0)) throw ConfigError(key, "must be non-negative");
  } else if (key == "tick") {
    cfg.tick = positive(key, value);
  } else if (key == "max_start_delay") {
    cfg.max_start_delay = number(key, value);
    if (!(cfg.max_start_delay >= 0.0)) throw ConfigError(key, "must be non-negative");
  } else if (key == "grid_spacing") {
    cfg.grid_spacing = positive(key, value);
  } else if (key == "data_dir") {
    cfg.data_dir = value;
  } else if (key == "schema") {
    if (value.empty()) throw ConfigError(key, "must not be empty");
    cfg.schema = value;
  } else if (key == "strict") {
    if (value == "true" || value == "1")
      cfg.strict = true;
    else if (value == "false" || value == "0")
      cfg.strict = false;
    else
      throw ConfigError(key, "expected true or false");
  } else if (key == "addr") {
    if (value.find(':') == std::string::npos) throw ConfigError(key, "expected HOST:PORT");
    cfg.addr = value;
  } else {
    throw ConfigError(key, "unknown key");
  }
}

RuntimeConfig config_load(const std::optional<std::filesystem::path>& file, const EnvLookup& env,
                          const std::map<std::string, std::string>& flags) {
  RuntimeConfig cfg;

  if (file) {
    std::ifstream in(*file);
    if (!in) throw ConfigError("config", "cannot read " + file->string());
    std::stringstream buf;
    buf << in.rdbuf();
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(buf.str());
    } catch (const nlohmann::json::parse_error& e) {
      throw ConfigError("config", e.what());
    }
    if (!j.is_object()) throw ConfigError("config", "expected a JSON object");
    for (const auto& [key, value] : j.items()) apply_config_value(cfg, key, json_to_text(key, value));
  }

  if (env) {
    for (const auto& key : config_keys()) {
      std::string name = "VELOMULE_" + key;
      std::transform(name.begin(), name.end(), name.begin(),
                     [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
      if (auto v = env(name)) apply_config_value(cfg, key, *v);
    }
  }

  for (const auto& [key, value] : flags) apply_config_value(cfg, key, value);
  return cfg;
}

}  // namespace velomule
