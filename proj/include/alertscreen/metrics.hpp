#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace alertscreen::metrics {

struct WindowCounts {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;

  std::size_t total() const { return tp + fp + tn + fn; }
  bool operator==(const WindowCounts&) const = default;
};

/// Rates with explicit "undefined" instead of 0 when a denominator is empty.
struct RollingMetrics {
  std::optional<double> f1;
  std::optional<double> precision;
  std::optional<double> recall;
  std::optional<double> fpr;
};

RollingMetrics rates_from_counts(const WindowCounts& counts);

/// Trailing window of (label, prediction) pairs with running counters.
class RollingWindow {
 public:
  explicit RollingWindow(std::size_t capacity = 10000);

  void push(int label, int prediction);
  const WindowCounts& counts() const { return counts_; }
  std::size_t size() const { return size_; }
  std::size_t capacity() const { return capacity_; }
  RollingMetrics metrics() const { return rates_from_counts(counts_); }

  /// Counts recomputed from the stored pairs.
  WindowCounts recount() const;

 private:
  void add(std::uint8_t code, int sign);

  std::size_t capacity_;
  std::vector<std::uint8_t> ring_;  // label * 2 + prediction
  std::size_t head_ = 0;
  std::size_t size_ = 0;
  WindowCounts counts_;
};

/// One per processed batch.
struct TraceRow {
  std::size_t batch_end_index = 0;  // events processed so far
  RollingMetrics rolling;
  std::size_t cum_fp = 0;
  std::size_t cum_missed_pos = 0;
  std::size_t cum_queries = 0;
  std::size_t cum_updates = 0;
  bool trigger_fired = false;
  bool update_fired = false;
  WindowCounts window;
};

/// Column order is fixed; the four window_* counts follow the rate columns
/// so readers that only know the leading eleven columns still work.
std::string trace_csv_header();
std::string trace_csv_row(const TraceRow& row);
std::string trace_to_csv(std::span<const TraceRow> rows);
std::vector<TraceRow> trace_from_csv(const std::string& csv);

/// Mean rolling recall over rows whose window holds at least one positive.
std::optional<double> positive_window_recall(std::span<const TraceRow> trace);

enum class DelayUnit { kPositives, kEvents };

struct MissedPositiveStats {
  std::size_t count = 0;
  std::size_t max_streak = 0;
  std::optional<double> mean_burst_delay;
  std::size_t bursts = 0;
};

/// Bursts are maximal runs of positives separated by fewer than `burst_gap`
/// benign events. A burst's delay counts positives (or all events) from its
/// first positive up to its first detected positive; an undetected burst
/// contributes its full length in the same unit.
MissedPositiveStats missed_positive_stats(std::span<const int> labels, std::span<const int> predictions,
                                          std::size_t burst_gap = 10000, DelayUnit unit = DelayUnit::kPositives);

/// cum_fp / benign_count * 1e6; undefined without benign events.
std::optional<double> fp_burden(std::size_t cum_fp, std::size_t benign_count);

double realized_query_rate(std::size_t queries, std::size_t stream_events);

struct Projection {
  std::int64_t positives = 0;  // N+ = round(prior * daily_events)
  std::int64_t negatives = 0;
  std::int64_t true_alerts = 0;   // floor(recall * N+)
  std::int64_t false_alerts = 0;  // floor(fpr * N-)
  std::optional<double> precision;
};

/// Throws std::invalid_argument unless prior lies in (0, 1).
Projection bayes_projection(double recall, double fpr, double prior, std::int64_t daily_events);

struct Endpoints {
  std::size_t stream_events = 0;
  std::size_t benign_count = 0;
  std::size_t positive_count = 0;
  std::size_t cum_fp = 0;
  std::size_t cum_missed_pos = 0;
  std::optional<double> fp_per_million_benign;
  std::optional<double> positive_window_recall;
  std::size_t max_missed_streak = 0;
  std::optional<double> mean_burst_delay;
  double realized_query_rate = 0.0;
  std::size_t queries = 0;
  std::size_t updates = 0;
  std::size_t applied_pos = 0;
  std::size_t applied_neg = 0;
  std::size_t triggers = 0;
  std::size_t alarms = 0;
  std::size_t tree_count = 0;
  double theta = 0.0;

  /// Every field by name; undefined values are absent from the map.
  std::map<std::string, double> numeric_fields() const;
};

/// Flat JSON object, keys in a fixed order, undefined values as null.
std::string endpoints_to_json(const Endpoints& e, const std::map<std::string, std::string>& labels = {});

/// Inverse of endpoints_to_json; label keys are ignored. Throws
/// std::invalid_argument on malformed input.
Endpoints endpoints_from_json(const std::string& json_text);

struct SummaryStat {
  std::optional<double> median;
  std::optional<double> iqr;
  std::size_t count = 0;
};

/// Quantile with linear interpolation between order statistics.
double quantile(std::vector<double> values, double q);

/// Per-metric median and IQR (Q3 - Q1) across seeds. Metrics undefined for
/// some seeds are summarized over the seeds that define them.
std::map<std::string, SummaryStat> multiseed_summary(std::span<const Endpoints> per_seed);
std::string summary_to_json(const std::map<std::string, SummaryStat>& summary, std::span<const std::int64_t> seeds);

}  // namespace alertscreen::metrics
