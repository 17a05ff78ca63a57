#include "alertscreen/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "alertscreen/errors.hpp"
#include "alertscreen/text.hpp"
#include "json.hpp"

namespace alertscreen::metrics {
namespace {

using ordered_json = nlohmann::ordered_json;

std::string opt_field(const std::optional<double>& v) { return v ? text::format_double(*v) : std::string(); }

std::optional<double> parse_opt(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return text::parse_double(s, "trace");
}

std::size_t parse_count(const std::string& s) {
  return static_cast<std::size_t>(std::llround(text::parse_double(s, "trace")));
}

ordered_json opt_json(const std::optional<double>& v) { return v ? ordered_json(*v) : ordered_json(nullptr); }

}  // namespace

RollingMetrics rates_from_counts(const WindowCounts& c) {
  RollingMetrics m;
  const auto tp = static_cast<double>(c.tp);
  if (c.tp + c.fp > 0) m.precision = tp / static_cast<double>(c.tp + c.fp);
  if (c.tp + c.fn > 0) {
    m.recall = tp / static_cast<double>(c.tp + c.fn);
    m.f1 = 2.0 * tp / (2.0 * tp + static_cast<double>(c.fp) + static_cast<double>(c.fn));
  }
  if (c.fp + c.tn > 0) m.fpr = static_cast<double>(c.fp) / static_cast<double>(c.fp + c.tn);
  return m;
}

RollingWindow::RollingWindow(std::size_t capacity) : capacity_(capacity), ring_(capacity) {
  if (capacity == 0) throw std::invalid_argument("rolling window capacity must be positive");
}

void RollingWindow::add(std::uint8_t code, int sign) {
  auto bump = [sign](std::size_t& counter) { counter = sign > 0 ? counter + 1 : counter - 1; };
  switch (code) {
    case 3:
      bump(counts_.tp);
      break;
    case 2:
      bump(counts_.fn);
      break;
    case 1:
      bump(counts_.fp);
      break;
    default:
      bump(counts_.tn);
      break;
  }
}

void RollingWindow::push(int label, int prediction) {
  const auto code = static_cast<std::uint8_t>((label == 1 ? 2 : 0) + (prediction == 1 ? 1 : 0));
  if (size_ == capacity_) {
    add(ring_[head_], -1);
  } else {
    ++size_;
  }
  ring_[head_] = code;
  add(code, +1);
  head_ = (head_ + 1) % capacity_;
}

WindowCounts RollingWindow::recount() const {
  WindowCounts c;
  const std::size_t start = (head_ + capacity_ - size_) % capacity_;
  for (std::size_t i = 0; i < size_; ++i) {
    switch (ring_[(start + i) % capacity_]) {
      case 3:
        ++c.tp;
        break;
      case 2:
        ++c.fn;
        break;
      case 1:
        ++c.fp;
        break;
      default:
        ++c.tn;
        break;
    }
  }
  return c;
}

std::string trace_csv_header() {
  return "batch_end_index,rolling_f1,rolling_precision,rolling_recall,rolling_fpr,cum_fp,cum_missed_pos,"
         "cum_queries,cum_updates,trigger_fired,update_fired,window_tp,window_fp,window_tn,window_fn";
}

std::string trace_csv_row(const TraceRow& r) {
  std::ostringstream out;
  out << r.batch_end_index << ',' << opt_field(r.rolling.f1) << ',' << opt_field(r.rolling.precision) << ','
      << opt_field(r.rolling.recall) << ',' << opt_field(r.rolling.fpr) << ',' << r.cum_fp << ','
      << r.cum_missed_pos << ',' << r.cum_queries << ',' << r.cum_updates << ',' << (r.trigger_fired ? 1 : 0) << ','
      << (r.update_fired ? 1 : 0) << ',' << r.window.tp << ',' << r.window.fp << ',' << r.window.tn << ','
      << r.window.fn;
  return out.str();
}

std::string trace_to_csv(std::span<const TraceRow> rows) {
  std::string out = trace_csv_header() + "\n";
  for (const auto& r : rows) out += trace_csv_row(r) + "\n";
  return out;
}

std::vector<TraceRow> trace_from_csv(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  if (!std::getline(in, line) || line != trace_csv_header()) throw DataError("trace: unexpected header");
  std::vector<TraceRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = text::split_csv_line(line);
    if (f.size() != 15) throw DataError("trace: expected 15 fields");
    TraceRow r;
    r.batch_end_index = parse_count(f[0]);
    r.rolling.f1 = parse_opt(f[1]);
    r.rolling.precision = parse_opt(f[2]);
    r.rolling.recall = parse_opt(f[3]);
    r.rolling.fpr = parse_opt(f[4]);
    r.cum_fp = parse_count(f[5]);
    r.cum_missed_pos = parse_count(f[6]);
    r.cum_queries = parse_count(f[7]);
    r.cum_updates = parse_count(f[8]);
    r.trigger_fired = f[9] == "1";
    r.update_fired = f[10] == "1";
    r.window = {parse_count(f[11]), parse_count(f[12]), parse_count(f[13]), parse_count(f[14])};
    rows.push_back(r);
  }
  return rows;
}

std::optional<double> positive_window_recall(std::span<const TraceRow> trace) {
  double sum = 0.0;
  std::size_t windows = 0;
  for (const auto& row : trace) {
    if (row.window.tp + row.window.fn == 0) continue;
    sum += static_cast<double>(row.window.tp) / static_cast<double>(row.window.tp + row.window.fn);
    ++windows;
  }
  if (windows == 0) return std::nullopt;
  return sum / static_cast<double>(windows);
}

MissedPositiveStats missed_positive_stats(std::span<const int> labels, std::span<const int> predictions,
                                          std::size_t burst_gap, DelayUnit unit) {
  if (labels.size() != predictions.size()) throw std::invalid_argument("labels and predictions differ in length");
  MissedPositiveStats stats;
  std::size_t streak = 0;

  bool in_burst = false;
  bool detected = false;
  std::size_t benign_run = 0;
  std::size_t burst_start = 0;      // event index of the burst's first positive
  std::size_t last_positive = 0;    // event index of the burst's latest positive
  std::size_t positives_before = 0; // positives seen in the burst before detection
  double delay_sum = 0.0;

  auto close_burst = [&]() {
    if (!in_burst) return;
    if (!detected) {
      delay_sum += unit == DelayUnit::kPositives ? static_cast<double>(positives_before)
                                                 : static_cast<double>(last_positive - burst_start + 1);
    }
    ++stats.bursts;
    in_burst = false;
  };

  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 1) {
      ++benign_run;
      continue;
    }
    if (in_burst && benign_run >= burst_gap) close_burst();
    benign_run = 0;
    if (!in_burst) {
      in_burst = true;
      detected = false;
      burst_start = i;
      positives_before = 0;
    }
    last_positive = i;
    if (predictions[i] == 1) {
      streak = 0;
      if (!detected) {
        detected = true;
        delay_sum += unit == DelayUnit::kPositives ? static_cast<double>(positives_before)
                                                   : static_cast<double>(i - burst_start);
      }
    } else {
      ++stats.count;
      stats.max_streak = std::max(stats.max_streak, ++streak);
      if (!detected) ++positives_before;
    }
  }
  close_burst();
  if (stats.bursts > 0) stats.mean_burst_delay = delay_sum / static_cast<double>(stats.bursts);
  return stats;
}

std::optional<double> fp_burden(std::size_t cum_fp, std::size_t benign_count) {
  if (benign_count == 0) return std::nullopt;
  return static_cast<double>(cum_fp) / static_cast<double>(benign_count) * 1e6;
}

double realized_query_rate(std::size_t queries, std::size_t stream_events) {
  if (stream_events == 0) throw std::invalid_argument("realized_query_rate: empty stream");
  return static_cast<double>(queries) / static_cast<double>(stream_events);
}

Projection bayes_projection(double recall, double fpr, double prior, std::int64_t daily_events) {
  if (!(prior > 0.0 && prior < 1.0)) throw std::invalid_argument("prior must lie in (0, 1)");
  if (daily_events <= 0) throw std::invalid_argument("daily_events must be positive");
  if (recall < 0.0 || recall > 1.0 || fpr < 0.0 || fpr > 1.0) {
    throw std::invalid_argument("recall and fpr must lie in [0, 1]");
  }
  // Decimal inputs such as 0.7634 are not exact in binary; the guard keeps
  // floor(recall * N) from dropping a count when the product should be whole.
  constexpr double kFloorGuard = 1e-9;
  Projection p;
  p.positives = std::llround(prior * static_cast<double>(daily_events));
  p.negatives = daily_events - p.positives;
  p.true_alerts = static_cast<std::int64_t>(std::floor(recall * static_cast<double>(p.positives) + kFloorGuard));
  p.false_alerts = static_cast<std::int64_t>(std::floor(fpr * static_cast<double>(p.negatives) + kFloorGuard));
  if (p.true_alerts + p.false_alerts > 0) {
    p.precision = static_cast<double>(p.true_alerts) / static_cast<double>(p.true_alerts + p.false_alerts);
  }
  return p;
}

std::map<std::string, double> Endpoints::numeric_fields() const {
  std::map<std::string, double> m;
  auto put = [&](const char* key, std::size_t v) { m[key] = static_cast<double>(v); };
  put("stream_events", stream_events);
  put("benign_count", benign_count);
  put("positive_count", positive_count);
  put("cum_fp", cum_fp);
  put("cum_missed_pos", cum_missed_pos);
  if (fp_per_million_benign) m["fp_per_million_benign"] = *fp_per_million_benign;
  if (positive_window_recall) m["positive_window_recall"] = *positive_window_recall;
  put("max_missed_streak", max_missed_streak);
  if (mean_burst_delay) m["mean_burst_delay"] = *mean_burst_delay;
  m["realized_query_rate"] = realized_query_rate;
  put("queries", queries);
  put("updates", updates);
  put("applied_pos", applied_pos);
  put("applied_neg", applied_neg);
  put("triggers", triggers);
  put("alarms", alarms);
  put("tree_count", tree_count);
  m["theta"] = theta;
  return m;
}

std::string endpoints_to_json(const Endpoints& e, const std::map<std::string, std::string>& labels) {
  ordered_json j;
  for (const auto& [k, v] : labels) j[k] = v;
  j["stream_events"] = e.stream_events;
  j["benign_count"] = e.benign_count;
  j["positive_count"] = e.positive_count;
  j["theta"] = e.theta;
  j["cum_fp"] = e.cum_fp;
  j["cum_missed_pos"] = e.cum_missed_pos;
  j["fp_per_million_benign"] = opt_json(e.fp_per_million_benign);
  j["positive_window_recall"] = opt_json(e.positive_window_recall);
  j["max_missed_streak"] = e.max_missed_streak;
  j["mean_burst_delay"] = opt_json(e.mean_burst_delay);
  j["realized_query_rate"] = e.realized_query_rate;
  j["queries"] = e.queries;
  j["updates"] = e.updates;
  j["applied_pos"] = e.applied_pos;
  j["applied_neg"] = e.applied_neg;
  j["triggers"] = e.triggers;
  j["alarms"] = e.alarms;
  j["tree_count"] = e.tree_count;
  return j.dump(2) + "\n";
}

Endpoints endpoints_from_json(const std::string& json_text) {
  ordered_json j;
  try {
    j = ordered_json::parse(json_text);
  } catch (const ordered_json::exception& ex) {
    throw std::invalid_argument(std::string("endpoints: ") + ex.what());
  }
  if (!j.is_object()) throw std::invalid_argument("endpoints: expected a JSON object");
  auto count = [&](const char* key) -> std::size_t {
    if (!j.contains(key) || !j[key].is_number_unsigned()) {
      throw std::invalid_argument(std::string("endpoints: missing count '") + key + "'");
    }
    return j[key].get<std::size_t>();
  };
  auto real = [&](const char* key) -> double {
    if (!j.contains(key) || !j[key].is_number()) {
      throw std::invalid_argument(std::string("endpoints: missing number '") + key + "'");
    }
    return j[key].get<double>();
  };
  auto optional_real = [&](const char* key) -> std::optional<double> {
    if (!j.contains(key) || j[key].is_null()) return std::nullopt;
    return real(key);
  };
  Endpoints e;
  e.stream_events = count("stream_events");
  e.benign_count = count("benign_count");
  e.positive_count = count("positive_count");
  e.theta = real("theta");
  e.cum_fp = count("cum_fp");
  e.cum_missed_pos = count("cum_missed_pos");
  e.fp_per_million_benign = optional_real("fp_per_million_benign");
  e.positive_window_recall = optional_real("positive_window_recall");
  e.max_missed_streak = count("max_missed_streak");
  e.mean_burst_delay = optional_real("mean_burst_delay");
  e.realized_query_rate = real("realized_query_rate");
  e.queries = count("queries");
  e.updates = count("updates");
  e.applied_pos = count("applied_pos");
  e.applied_neg = count("applied_neg");
  e.triggers = count("triggers");
  e.alarms = count("alarms");
  e.tree_count = count("tree_count");
  return e;
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw std::invalid_argument("quantile of empty set");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + (values[hi] - values[lo]) * frac;
}

std::map<std::string, SummaryStat> multiseed_summary(std::span<const Endpoints> per_seed) {
  if (per_seed.empty()) throw std::invalid_argument("multiseed_summary: no seeds");
  std::map<std::string, std::vector<double>> columns;
  std::map<std::string, SummaryStat> out;
  for (const auto& e : per_seed) {
    for (const auto& [k, v] : e.numeric_fields()) columns[k].push_back(v);
  }
  // Keys undefined on every seed still appear, with no statistics.
  for (const char* key : {"fp_per_million_benign", "positive_window_recall", "mean_burst_delay"}) {
    out[key];
  }
  for (auto& [k, values] : columns) {
    SummaryStat s;
    s.count = values.size();
    s.median = quantile(values, 0.5);
    s.iqr = quantile(values, 0.75) - quantile(values, 0.25);
    out[k] = s;
  }
  return out;
}

std::string summary_to_json(const std::map<std::string, SummaryStat>& summary, std::span<const std::int64_t> seeds) {
  ordered_json j;
  j["seeds"] = std::vector<std::int64_t>(seeds.begin(), seeds.end());
  ordered_json metrics = ordered_json::object();
  for (const auto& [k, s] : summary) {
    metrics[k] = {{"median", opt_json(s.median)}, {"iqr", opt_json(s.iqr)}, {"n", s.count}};
  }
  j["metrics"] = metrics;
  return j.dump(2) + "\n";
}

}  // namespace alertscreen::metrics
