#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "alertscreen/controller.hpp"

namespace alertscreen::config {

/// Everything a `run` needs. Text form is flat `section.key=value` lines:
///
///     data.path=alerts.csv
///     adwin.delta=0.002
///     run.seeds=40,41,42
///
/// Omitted keys keep their defaults.
struct RunConfig {
  std::string data_path;
  std::string manifest_path;
  std::size_t train_positives = 100;
  std::vector<controller::StrategyKind> strategies = {controller::StrategyKind::kAdwinHybrid};
  std::vector<std::int64_t> seeds = {42};
  std::string out_dir;
  std::string replay_schedule_path;  // matched-replay input
  controller::StreamConfig stream;

  /// Parses text, layering it over the defaults. Throws ConfigError.
  static RunConfig parse(const std::string& text);
  static RunConfig load(const std::string& path);

  /// Sets one key; throws ConfigError for unknown keys or bad values.
  void set(const std::string& key, const std::string& value);

  /// Range checks across keys; throws ConfigError.
  void validate() const;

  /// Every key, fixed order, values in round-trip notation.
  std::string serialize() const;
  std::vector<std::pair<std::string, std::string>> entries() const;

  bool operator==(const RunConfig& other) const { return serialize() == other.serialize(); }
};

/// Every accepted key, in serialization order.
std::vector<std::string> known_keys();

}  // namespace alertscreen::config
