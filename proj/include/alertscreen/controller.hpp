#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "alertscreen/acquisition.hpp"
#include "alertscreen/gbt.hpp"
#include "alertscreen/ingest.hpp"
#include "alertscreen/matrix.hpp"
#include "alertscreen/metrics.hpp"
#include "alertscreen/threshold.hpp"

namespace alertscreen::controller {

enum class StrategyKind { kFrozen, kPeriodic, kAdwinRandom, kAdwinHybrid, kThresholdOnly, kMatchedReplay };

std::string to_string(StrategyKind kind);
StrategyKind strategy_from_string(const std::string& name);

/// Streaming simulator settings. Defaults: batch 1,000; buffer 5,000; B_min 32;
/// cooldown 2,000; periodic interval 10,000; seed 42.
struct StrategyConfig {
  StrategyKind kind = StrategyKind::kAdwinHybrid;
  std::size_t batch_size = 1000;
  std::size_t buffer_capacity = 5000;
  std::size_t rolling_window = 10000;
  std::size_t cooldown_events = 2000;
  std::size_t b_min = 32;
  std::size_t periodic_interval = 10000;
  std::size_t periodic_max_updates = 0;  // 0 = unlimited
  std::uint64_t seed = 42;
  bool replay_enabled = false;
  std::size_t replay_capacity = 512;
  double replay_ratio = 0.5;
  // Stream positions of recorded alarms (matched-replay only).
  std::vector<std::size_t> trigger_schedule;
};

struct ThresholdConfig {
  threshold::Policy policy = threshold::Policy::kMaxF1;
  double tail_fraction = 0.20;
  std::size_t grid_points = 101;
  double min_recall = 0.95;
};

struct AcquisitionConfig {
  acquisition::Policy policy = acquisition::Policy::kHybrid;  // matched-replay policy
  double nominal_budget_fraction = 0.01;
};

struct MetricsConfig {
  std::size_t burst_gap = 10000;
  metrics::DelayUnit delay_unit = metrics::DelayUnit::kPositives;
};

struct StreamConfig {
  StrategyConfig strategy;
  gbt::Objective objective;
  gbt::TrainConfig train;
  ThresholdConfig threshold;
  double adwin_delta = 0.002;
  AcquisitionConfig acquisition;
  MetricsConfig metrics;
};

struct TrainData {
  Matrix features;
  std::vector<int> labels;
};

/// Stream labels plus a row producer, so features can be materialized one
/// batch at a time.
struct StreamData {
  std::vector<int> labels;
  std::function<Matrix(std::size_t begin, std::size_t end)> rows;

  std::size_t size() const { return labels.size(); }
  static StreamData from_matrix(Matrix features, std::vector<int> labels);
};

struct PreparedData {
  TrainData train;
  StreamData stream;
  ingest::Preprocessor preprocessor;
  std::size_t train_positives = 0;
  std::size_t stream_positives = 0;
};

/// Split, fit the preprocessor on the train prefix, encode both sides.
/// Stream rows are encoded lazily per batch.
PreparedData prepare(const ingest::Dataset& dataset, const ingest::SplitSpec& split);

/// The trained core and its fixed operating point.
struct Deployment {
  gbt::BoostedEnsemble ensemble;
  threshold::OperatingPoint operating_point;
  gbt::Objective objective;  // resolved (automatic pos_weight filled in)
};

/// Trains on the whole train split and selects theta on its final
/// tail_fraction (chronological). Threshold-only uses the
/// recall-constrained policy regardless of config.
Deployment deploy(const TrainData& train, const StreamConfig& config);

/// Answers label queries from ground truth, once per event.
class LabelOracle {
 public:
  explicit LabelOracle(const std::vector<int>& truth) : truth_(truth), asked_(truth.size(), false) {}

  /// nullopt when the event was already queried.
  std::optional<int> label(std::size_t position);
  bool asked(std::size_t position) const { return asked_.at(position); }
  std::size_t queries() const { return queries_; }

 private:
  const std::vector<int>& truth_;
  std::vector<bool> asked_;
  std::size_t queries_ = 0;
};

struct QueryRecord {
  std::size_t batch_end = 0;  // events processed when the batch was chosen
  std::vector<std::size_t> positions;
};

struct UpdateRecord {
  std::size_t batch_end = 0;
  std::size_t labels = 0;    // pending labels consumed
  std::size_t positives = 0;
  std::size_t trees_after = 0;
  bool cap_reached = false;
};

struct RunResult {
  std::vector<metrics::TraceRow> trace;
  metrics::Endpoints endpoints;
  // Raw trigger signals before cooldown gating: ADWIN alarms, the event just
  // before each periodic multiple, or the replayed schedule entries.
  std::vector<std::size_t> alarm_positions;
  std::vector<QueryRecord> queries;
  std::vector<UpdateRecord> updates;
  std::vector<double> scores;     // per stream event, from the ensemble live at the time
  std::vector<int> predictions;
  std::vector<std::size_t> pending_at_batch_entry;
  std::size_t pending_at_end = 0;
  std::size_t cap_reached_updates = 0;
  std::size_t ignored_schedule_entries = 0;
  gbt::BoostedEnsemble final_ensemble;
  double theta = 0.0;
};

/// The streaming loop. Per batch: score with the live ensemble, update
/// rolling metrics, append to the recent buffer, run the strategy's trigger
/// (ADWIN per score, periodic interval, or replayed schedule) gated on
/// cooldown = 0, query the oracle, accumulate pending labels, warm-start
/// once |pending| >= b_min and reset cooldown, then decrement cooldown by
/// the batch size. A new ensemble takes effect at the next batch.
RunResult run_stream(const Deployment& deployment, const StreamData& stream, const StreamConfig& config);

/// deploy() followed by run_stream().
RunResult run(const PreparedData& data, const StreamConfig& config);

/// Newline-delimited stream positions.
std::string schedule_to_text(const std::vector<std::size_t>& positions);
std::vector<std::size_t> schedule_from_text(const std::string& content);

}  // namespace alertscreen::controller
