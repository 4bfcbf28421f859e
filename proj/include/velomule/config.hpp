#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "velomule/analytics.hpp"

namespace velomule {

/// Every tunable, merged with precedence flags > environment > file > defaults.
struct RuntimeConfig {
  FactorWeights forecast_weights;
  FactorWeights wait_weights;
  double wait_threshold = 0.5;
  int horizon_minutes = 30;
  Lookback lookback;

  // Simulator defaults; invented values, not measurements.
  double radio_range = 100.0;
  double bike_speed = 4.0;
  double sense_rate = 8.0;
  double tick = 1.0;
  double max_start_delay = 300.0;
  double grid_spacing = 500.0;

  std::string data_dir;  // used when no file flags are given
  std::string schema = "default";
  bool strict = false;
  std::string addr = "127.0.0.1:8080";
};

/// Recognised keys, in documentation order. The environment spelling is
/// VELOMULE_ followed by the upper-cased key.
const std::vector<std::string>& config_keys();

using EnvLookup = std::function<std::optional<std::string>(const std::string& name)>;

/// Reads the process environment.
EnvLookup process_env();

/// Sets one key from its text form. Throws ConfigError(key).
void apply_config_value(RuntimeConfig& cfg, const std::string& key, const std::string& value);

/// `file` is a JSON object of key -> value (numbers, strings, booleans, or a
/// three-element array for weights). `flags` are already-parsed command-line
/// overrides keyed like the file. Throws ConfigError naming the key.
RuntimeConfig config_load(const std::optional<std::filesystem::path>& file, const EnvLookup& env,
                          const std::map<std::string, std::string>& flags = {});

}  // namespace velomule
