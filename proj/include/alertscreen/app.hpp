#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "alertscreen/config.hpp"
#include "alertscreen/metrics.hpp"

namespace alertscreen::app {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitData = 2;

/// Runs `body`, printing any error to `err` and mapping it to an exit code:
/// ConfigError gives 1, anything else (bad data, I/O) gives 2.
int guarded(const std::function<void()>& body, std::ostream& err);

struct RunOutputs {
  std::vector<std::string> run_dirs;       // out/<strategy>/<seed>
  std::vector<std::string> summary_files;  // out/<strategy>/summary.json
};

/// Every (strategy, seed) pair in the config. Each run directory holds
/// config.txt, trace.csv, endpoints.json and triggers.txt; a directory whose
/// run fails is removed before the error propagates.
RunOutputs cmd_run(const config::RunConfig& cfg);

/// Recomputes out/<strategy>/summary.json from the per-seed endpoint files
/// under `out_dir`. Returns the summary paths written.
std::vector<std::string> cmd_summarize(const std::string& out_dir);

/// Aligned text table for one projection. Invalid inputs raise ConfigError.
std::string format_projection(double recall, double fpr, double prior, std::int64_t daily_events);

}  // namespace alertscreen::app
