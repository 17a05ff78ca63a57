#include "alertscreen/app.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "alertscreen/controller.hpp"
#include "alertscreen/errors.hpp"
#include "alertscreen/ingest.hpp"
#include "alertscreen/text.hpp"

namespace fs = std::filesystem;

namespace alertscreen::app {
namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << content;
  out.close();
  if (!out) throw DataError("write failed for '" + path.string() + "'");
}

// Removes a directory it created unless released.
class DirGuard {
 public:
  explicit DirGuard(fs::path dir) : dir_(std::move(dir)) {}
  DirGuard(const DirGuard&) = delete;
  DirGuard& operator=(const DirGuard&) = delete;
  ~DirGuard() {
    if (!released_) {
      std::error_code ec;
      fs::remove_all(dir_, ec);
    }
  }
  void release() { released_ = true; }

 private:
  fs::path dir_;
  bool released_ = false;
};

std::vector<std::int64_t> seeds_under(const fs::path& strategy_dir) {
  std::vector<std::int64_t> seeds;
  for (const auto& entry : fs::directory_iterator(strategy_dir)) {
    if (!entry.is_directory() || !fs::exists(entry.path() / "endpoints.json")) continue;
    const std::string name = entry.path().filename().string();
    try {
      const double v = text::parse_double(name, "seed directory");
      seeds.push_back(static_cast<std::int64_t>(v));
    } catch (const DataError&) {
      continue;
    }
  }
  std::sort(seeds.begin(), seeds.end());
  return seeds;
}

fs::path write_summary(const fs::path& strategy_dir, const std::vector<std::int64_t>& seeds) {
  std::vector<metrics::Endpoints> per_seed;
  for (auto seed : seeds) {
    const fs::path file = strategy_dir / std::to_string(seed) / "endpoints.json";
    try {
      per_seed.push_back(metrics::endpoints_from_json(read_file(file)));
    } catch (const std::invalid_argument& e) {
      throw DataError(file.string() + ": " + e.what());
    }
  }
  const fs::path path = strategy_dir / "summary.json";
  write_file(path, metrics::summary_to_json(metrics::multiseed_summary(per_seed), seeds));
  return path;
}

}  // namespace

int guarded(const std::function<void()>& body, std::ostream& err) {
  try {
    body();
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "data error: " << e.what() << "\n";
    return kExitData;
  }
}

RunOutputs cmd_run(const config::RunConfig& cfg) {
  cfg.validate();
  if (cfg.data_path.empty()) throw ConfigError("data.path is required");
  if (cfg.manifest_path.empty()) throw ConfigError("data.manifest is required");
  if (cfg.out_dir.empty()) throw ConfigError("run.out is required");

  std::vector<std::size_t> schedule;
  for (auto kind : cfg.strategies) {
    if (kind != controller::StrategyKind::kMatchedReplay) continue;
    if (cfg.replay_schedule_path.empty()) throw ConfigError("matched-replay needs replay.schedule");
    schedule = controller::schedule_from_text(read_file(cfg.replay_schedule_path));
  }

  const ingest::Manifest manifest = ingest::Manifest::load(cfg.manifest_path);
  const ingest::Dataset dataset = ingest::load_csv(cfg.data_path, manifest);
  const controller::PreparedData data =
      controller::prepare(dataset, ingest::SplitSpec{cfg.train_positives});

  // The trained core depends only on the seed and the threshold policy.
  std::map<std::pair<std::int64_t, bool>, controller::Deployment> deployments;

  RunOutputs outputs;
  for (auto kind : cfg.strategies) {
    const fs::path strategy_dir = fs::path(cfg.out_dir) / controller::to_string(kind);
    for (auto seed : cfg.seeds) {
      config::RunConfig single = cfg;
      single.strategies = {kind};
      single.seeds = {seed};
      controller::StreamConfig sc = cfg.stream;
      sc.strategy.kind = kind;
      sc.strategy.seed = static_cast<std::uint64_t>(seed);
      if (kind == controller::StrategyKind::kMatchedReplay) sc.strategy.trigger_schedule = schedule;

      const bool constrained = kind == controller::StrategyKind::kThresholdOnly ||
                               sc.threshold.policy == threshold::Policy::kRecallConstrained;
      auto key = std::make_pair(seed, constrained);
      auto it = deployments.find(key);
      if (it == deployments.end()) it = deployments.emplace(key, controller::deploy(data.train, sc)).first;

      const fs::path dir = strategy_dir / std::to_string(seed);
      fs::remove_all(dir);
      fs::create_directories(dir);
      DirGuard guard(dir);
      const controller::RunResult result = controller::run_stream(it->second, data.stream, sc);
      write_file(dir / "config.txt", single.serialize());
      write_file(dir / "trace.csv", metrics::trace_to_csv(result.trace));
      write_file(dir / "endpoints.json",
                 metrics::endpoints_to_json(result.endpoints, {{"strategy", controller::to_string(kind)},
                                                               {"seed", std::to_string(seed)}}));
      write_file(dir / "triggers.txt", controller::schedule_to_text(result.alarm_positions));
      guard.release();
      outputs.run_dirs.push_back(dir.string());
    }
    outputs.summary_files.push_back(write_summary(strategy_dir, cfg.seeds).string());
  }
  return outputs;
}

std::vector<std::string> cmd_summarize(const std::string& out_dir) {
  if (!fs::is_directory(out_dir)) throw DataError("'" + out_dir + "' is not a directory");
  std::vector<fs::path> strategy_dirs;
  for (const auto& entry : fs::directory_iterator(out_dir)) {
    if (entry.is_directory()) strategy_dirs.push_back(entry.path());
  }
  std::sort(strategy_dirs.begin(), strategy_dirs.end());
  std::vector<std::string> written;
  for (const auto& dir : strategy_dirs) {
    const auto seeds = seeds_under(dir);
    if (seeds.empty()) continue;
    written.push_back(write_summary(dir, seeds).string());
  }
  if (written.empty()) throw DataError("no run directories with endpoints.json under '" + out_dir + "'");
  return written;
}

std::string format_projection(double recall, double fpr, double prior, std::int64_t daily_events) {
  metrics::Projection p;
  try {
    p = metrics::bayes_projection(recall, fpr, prior, daily_events);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  std::ostringstream out;
  char precision[32] = "undefined";
  if (p.precision) std::snprintf(precision, sizeof precision, "%.2f%%", *p.precision * 100.0);
  out << "events        " << daily_events << "\n"
      << "positives     " << p.positives << "\n"
      << "negatives     " << p.negatives << "\n"
      << "true_alerts   " << p.true_alerts << "\n"
      << "false_alerts  " << p.false_alerts << "\n"
      << "precision     " << precision << "\n";
  return out.str();
}

}  // namespace alertscreen::app
