#include "alertscreen/config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "alertscreen/errors.hpp"
#include "alertscreen/text.hpp"

namespace alertscreen::config {
namespace {

struct Key {
  const char* name;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&)> set;
};

double to_double(const std::string& key, const std::string& v) {
  try {
    return text::parse_double(v, key);
  } catch (const DataError&) {
    throw ConfigError(key + ": expected a number, got '" + v + "'");
  }
}

std::size_t to_count(const std::string& key, const std::string& v) {
  const double d = to_double(key, v);
  if (d < 0 || d != std::floor(d)) throw ConfigError(key + ": expected a non-negative integer, got '" + v + "'");
  return static_cast<std::size_t>(d);
}

std::int64_t to_int(const std::string& key, const std::string& v) {
  const double d = to_double(key, v);
  if (d != std::floor(d)) throw ConfigError(key + ": expected an integer, got '" + v + "'");
  return static_cast<std::int64_t>(d);
}

bool to_bool(const std::string& key, const std::string& v) {
  const std::string s = text::to_lower(v);
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

std::string fmt(double v) { return text::format_double(v); }
std::string fmt(std::size_t v) { return std::to_string(v); }
std::string fmt(bool v) { return v ? "true" : "false"; }

#define COUNT_KEY(NAME, FIELD)                                     \
  Key {                                                            \
    NAME, [](const RunConfig& c) { return fmt(c.FIELD); },         \
        [](RunConfig& c, const std::string& v) { c.FIELD = to_count(NAME, v); } \
  }
#define REAL_KEY(NAME, FIELD)                                      \
  Key {                                                            \
    NAME, [](const RunConfig& c) { return fmt(c.FIELD); },         \
        [](RunConfig& c, const std::string& v) { c.FIELD = to_double(NAME, v); } \
  }

const std::vector<Key>& table() {
  static const std::vector<Key> keys = {
      {"data.path", [](const RunConfig& c) { return c.data_path; },
       [](RunConfig& c, const std::string& v) { c.data_path = v; }},
      {"data.manifest", [](const RunConfig& c) { return c.manifest_path; },
       [](RunConfig& c, const std::string& v) { c.manifest_path = v; }},
      COUNT_KEY("split.train_positives", train_positives),
      {"strategy.kind",
       [](const RunConfig& c) {
         std::vector<std::string> names;
         for (auto k : c.strategies) names.push_back(controller::to_string(k));
         return text::join(names, ",");
       },
       [](RunConfig& c, const std::string& v) {
         c.strategies.clear();
         for (const auto& s : text::split_list(v)) c.strategies.push_back(controller::strategy_from_string(s));
         if (c.strategies.empty()) throw ConfigError("strategy.kind: empty list");
       }},
      {"run.seeds",
       [](const RunConfig& c) {
         std::vector<std::string> parts;
         for (auto s : c.seeds) parts.push_back(std::to_string(s));
         return text::join(parts, ",");
       },
       [](RunConfig& c, const std::string& v) {
         c.seeds.clear();
         for (const auto& s : text::split_list(v)) c.seeds.push_back(to_int("run.seeds", s));
         if (c.seeds.empty()) throw ConfigError("run.seeds: empty list");
       }},
      {"run.out", [](const RunConfig& c) { return c.out_dir; },
       [](RunConfig& c, const std::string& v) { c.out_dir = v; }},
      {"objective.kind", [](const RunConfig& c) { return gbt::to_string(c.stream.objective.kind); },
       [](RunConfig& c, const std::string& v) { c.stream.objective.kind = gbt::objective_kind_from_string(v); }},
      REAL_KEY("objective.alpha", stream.objective.alpha),
      REAL_KEY("objective.gamma", stream.objective.gamma),
      REAL_KEY("objective.pos_weight", stream.objective.pos_weight),
      COUNT_KEY("gbt.initial_rounds", stream.train.initial_rounds),
      COUNT_KEY("gbt.rounds_per_update", stream.train.rounds_per_update),
      COUNT_KEY("gbt.max_trees", stream.train.max_trees),
      COUNT_KEY("gbt.max_depth", stream.train.max_depth),
      REAL_KEY("gbt.learning_rate", stream.train.learning_rate),
      COUNT_KEY("gbt.bins", stream.train.bins),
      REAL_KEY("gbt.min_child_weight", stream.train.min_child_weight),
      REAL_KEY("gbt.subsample", stream.train.subsample),
      REAL_KEY("gbt.colsample", stream.train.colsample),
      REAL_KEY("gbt.l2_reg", stream.train.l2_reg),
      {"threshold.policy", [](const RunConfig& c) { return threshold::to_string(c.stream.threshold.policy); },
       [](RunConfig& c, const std::string& v) { c.stream.threshold.policy = threshold::policy_from_string(v); }},
      REAL_KEY("threshold.tail_fraction", stream.threshold.tail_fraction),
      COUNT_KEY("threshold.grid_points", stream.threshold.grid_points),
      REAL_KEY("threshold.min_recall", stream.threshold.min_recall),
      REAL_KEY("adwin.delta", stream.adwin_delta),
      {"acquisition.policy", [](const RunConfig& c) { return acquisition::to_string(c.stream.acquisition.policy); },
       [](RunConfig& c, const std::string& v) {
         c.stream.acquisition.policy = acquisition::policy_from_string(v);
       }},
      REAL_KEY("acquisition.nominal_budget_fraction", stream.acquisition.nominal_budget_fraction),
      COUNT_KEY("stream.batch_size", stream.strategy.batch_size),
      COUNT_KEY("stream.buffer_capacity", stream.strategy.buffer_capacity),
      COUNT_KEY("stream.rolling_window", stream.strategy.rolling_window),
      COUNT_KEY("stream.cooldown_events", stream.strategy.cooldown_events),
      COUNT_KEY("stream.b_min", stream.strategy.b_min),
      COUNT_KEY("periodic.interval", stream.strategy.periodic_interval),
      COUNT_KEY("periodic.max_updates", stream.strategy.periodic_max_updates),
      {"replay.enabled", [](const RunConfig& c) { return fmt(c.stream.strategy.replay_enabled); },
       [](RunConfig& c, const std::string& v) { c.stream.strategy.replay_enabled = to_bool("replay.enabled", v); }},
      COUNT_KEY("replay.capacity", stream.strategy.replay_capacity),
      REAL_KEY("replay.ratio", stream.strategy.replay_ratio),
      {"replay.schedule", [](const RunConfig& c) { return c.replay_schedule_path; },
       [](RunConfig& c, const std::string& v) { c.replay_schedule_path = v; }},
      COUNT_KEY("metrics.burst_gap", stream.metrics.burst_gap),
      {"metrics.burst_delay_unit",
       [](const RunConfig& c) {
         return std::string(c.stream.metrics.delay_unit == metrics::DelayUnit::kPositives ? "positives" : "events");
       },
       [](RunConfig& c, const std::string& v) {
         if (v == "positives") {
           c.stream.metrics.delay_unit = metrics::DelayUnit::kPositives;
         } else if (v == "events") {
           c.stream.metrics.delay_unit = metrics::DelayUnit::kEvents;
         } else {
           throw ConfigError("metrics.burst_delay_unit: expected positives or events");
         }
       }},
  };
  return keys;
}

#undef COUNT_KEY
#undef REAL_KEY

}  // namespace

std::vector<std::string> known_keys() {
  std::vector<std::string> out;
  for (const auto& k : table()) out.push_back(k.name);
  return out;
}

void RunConfig::validate() const {
  const RunConfig& c = *this;
  const auto& s = c.stream;
  if (s.adwin_delta <= 0.0 || s.adwin_delta >= 1.0) throw ConfigError("adwin.delta must lie in (0, 1)");
  if (s.threshold.tail_fraction <= 0.0 || s.threshold.tail_fraction > 1.0) {
    throw ConfigError("threshold.tail_fraction must lie in (0, 1]");
  }
  if (s.threshold.grid_points < 2) throw ConfigError("threshold.grid_points must be >= 2");
  if (s.objective.alpha <= 0.0 || s.objective.alpha >= 1.0) throw ConfigError("objective.alpha must lie in (0, 1)");
  if (s.objective.gamma < 0.0) throw ConfigError("objective.gamma must be >= 0");
  if (s.train.subsample <= 0.0 || s.train.subsample > 1.0) throw ConfigError("gbt.subsample must lie in (0, 1]");
  if (s.train.colsample <= 0.0 || s.train.colsample > 1.0) throw ConfigError("gbt.colsample must lie in (0, 1]");
  if (s.train.initial_rounds > s.train.max_trees) throw ConfigError("gbt.initial_rounds exceeds gbt.max_trees");
  if (s.train.bins < 2 || s.train.bins > 65536) throw ConfigError("gbt.bins must lie in [2, 65536]");
  if (s.strategy.batch_size == 0) throw ConfigError("stream.batch_size must be > 0");
  if (s.strategy.buffer_capacity == 0) throw ConfigError("stream.buffer_capacity must be > 0");
  if (s.strategy.rolling_window == 0) throw ConfigError("stream.rolling_window must be > 0");
  if (s.strategy.b_min == 0) throw ConfigError("stream.b_min must be > 0");
  if (s.strategy.periodic_interval == 0) throw ConfigError("periodic.interval must be > 0");
  if (s.strategy.replay_ratio < 0.0 || s.strategy.replay_ratio > 1.0) throw ConfigError("replay.ratio must lie in [0, 1]");
  if (c.train_positives == 0) throw ConfigError("split.train_positives must be > 0");
}

void RunConfig::set(const std::string& key, const std::string& value) {
  for (const auto& k : table()) {
    if (key == k.name) {
      k.set(*this, text::trim(value));
      return;
    }
  }
  throw ConfigError("unknown config key '" + key + "'");
}

RunConfig RunConfig::parse(const std::string& content) {
  RunConfig c;
  std::istringstream in(content);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = text::trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(lineno) + ": expected key=value");
    c.set(text::trim(line.substr(0, eq)), line.substr(eq + 1));
  }
  c.validate();
  return c;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::vector<std::pair<std::string, std::string>> RunConfig::entries() const {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& k : table()) out.emplace_back(k.name, k.get(*this));
  return out;
}

std::string RunConfig::serialize() const {
  std::string out;
  for (const auto& [k, v] : entries()) out += k + "=" + v + "\n";
  return out;
}

}  // namespace alertscreen::config
