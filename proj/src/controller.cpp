#include "alertscreen/controller.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include "alertscreen/adwin.hpp"
#include "alertscreen/errors.hpp"
#include "alertscreen/text.hpp"

namespace alertscreen::controller {
namespace {

// Streaming draws come from a generator independent of the training one, so
// strategies sharing a seed share the same trained core.
constexpr std::uint64_t kStreamSeedSalt = 0x9E3779B97F4A7C15ULL;

// Most recent scored events with their encoded rows.
class RecentBuffer {
 public:
  RecentBuffer(std::size_t capacity, std::size_t width) : capacity_(capacity), features_(capacity, width) {
    positions_.resize(capacity);
    scores_.resize(capacity);
  }

  void push(std::size_t position, double score, std::span<const double> row) {
    const std::size_t slot = (head_ + size_) % capacity_;
    if (size_ == capacity_) {
      positions_[head_] = position;
      scores_[head_] = score;
      std::copy(row.begin(), row.end(), features_.row(head_).begin());
      head_ = (head_ + 1) % capacity_;
      return;
    }
    positions_[slot] = position;
    scores_[slot] = score;
    std::copy(row.begin(), row.end(), features_.row(slot).begin());
    ++size_;
  }

  std::size_t size() const { return size_; }
  // i = 0 is the oldest entry.
  std::size_t slot(std::size_t i) const { return (head_ + i) % capacity_; }
  std::size_t position(std::size_t i) const { return positions_[slot(i)]; }
  double score(std::size_t i) const { return scores_[slot(i)]; }
  std::span<const double> row(std::size_t i) const { return features_.row(slot(i)); }

 private:
  std::size_t capacity_;
  std::size_t head_ = 0;
  std::size_t size_ = 0;
  std::vector<std::size_t> positions_;
  std::vector<double> scores_;
  Matrix features_;
};

bool is_adwin(StrategyKind k) { return k == StrategyKind::kAdwinRandom || k == StrategyKind::kAdwinHybrid; }

acquisition::Policy query_policy(const StreamConfig& config) {
  switch (config.strategy.kind) {
    case StrategyKind::kAdwinHybrid:
      return acquisition::Policy::kHybrid;
    case StrategyKind::kMatchedReplay:
      return config.acquisition.policy;
    default:
      return acquisition::Policy::kRandom;
  }
}

}  // namespace

std::string to_string(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::kFrozen:
      return "frozen";
    case StrategyKind::kPeriodic:
      return "periodic";
    case StrategyKind::kAdwinRandom:
      return "adwin-random";
    case StrategyKind::kAdwinHybrid:
      return "adwin-hybrid";
    case StrategyKind::kThresholdOnly:
      return "threshold-only";
    case StrategyKind::kMatchedReplay:
      return "matched-replay";
  }
  return "frozen";
}

StrategyKind strategy_from_string(const std::string& name) {
  for (auto k : {StrategyKind::kFrozen, StrategyKind::kPeriodic, StrategyKind::kAdwinRandom,
                 StrategyKind::kAdwinHybrid, StrategyKind::kThresholdOnly, StrategyKind::kMatchedReplay}) {
    if (to_string(k) == name) return k;
  }
  throw ConfigError("unknown strategy '" + name + "'");
}

StreamData StreamData::from_matrix(Matrix features, std::vector<int> labels) {
  if (features.rows() != labels.size()) throw std::invalid_argument("stream features and labels differ in length");
  StreamData data;
  data.labels = std::move(labels);
  auto shared = std::make_shared<const Matrix>(std::move(features));
  data.rows = [shared](std::size_t begin, std::size_t end) {
    std::vector<std::size_t> idx(end - begin);
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = begin + i;
    return shared->select_rows(idx);
  };
  return data;
}

PreparedData prepare(const ingest::Dataset& dataset, const ingest::SplitSpec& split_spec) {
  ingest::Split split = ingest::chronological_split(dataset.events, split_spec);
  PreparedData out;
  out.preprocessor = ingest::fit_preprocessor(split.train, dataset);
  out.train.features = ingest::transform(split.train, out.preprocessor);
  for (const auto& ev : split.train) out.train.labels.push_back(ev.label);
  out.train_positives = split.train_positives;
  out.stream_positives = split.stream_positives;

  auto events = std::make_shared<const std::vector<ingest::EventRecord>>(std::move(split.stream));
  for (const auto& ev : *events) out.stream.labels.push_back(ev.label);
  out.stream.rows = [events, prep = out.preprocessor](std::size_t begin, std::size_t end) {
    const std::vector<ingest::EventRecord> slice(events->begin() + static_cast<std::ptrdiff_t>(begin),
                                                 events->begin() + static_cast<std::ptrdiff_t>(end));
    return ingest::transform(slice, prep);
  };
  return out;
}

Deployment deploy(const TrainData& train, const StreamConfig& config) {
  Deployment d;
  d.objective = gbt::resolve_objective(config.objective, train.labels);
  Rng rng(config.strategy.seed);
  d.ensemble = gbt::train_initial(train.features, train.labels, d.objective, config.train, rng);

  const std::size_t n = train.labels.size();
  const auto tail = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::llround(config.threshold.tail_fraction * static_cast<double>(n))), 1, n);
  std::vector<std::size_t> idx(tail);
  for (std::size_t i = 0; i < tail; ++i) idx[i] = n - tail + i;
  const Matrix tail_x = train.features.select_rows(idx);
  const std::vector<int> tail_y(train.labels.end() - static_cast<std::ptrdiff_t>(tail), train.labels.end());
  const std::vector<double> tail_scores = gbt::predict_proba(d.ensemble, tail_x);

  const bool constrained = config.strategy.kind == StrategyKind::kThresholdOnly ||
                           config.threshold.policy == threshold::Policy::kRecallConstrained;
  d.operating_point = constrained
                          ? threshold::select_recall_constrained(tail_scores, tail_y, config.threshold.min_recall,
                                                                 config.threshold.grid_points)
                          : threshold::select_max_f1(tail_scores, tail_y, config.threshold.grid_points);
  return d;
}

std::optional<int> LabelOracle::label(std::size_t position) {
  if (asked_.at(position)) return std::nullopt;
  asked_[position] = true;
  ++queries_;
  return truth_[position];
}

RunResult run_stream(const Deployment& deployment, const StreamData& stream, const StreamConfig& config) {
  const StrategyConfig& sc = config.strategy;
  if (sc.batch_size == 0 || sc.buffer_capacity == 0) throw ConfigError("batch_size and buffer_capacity must be > 0");
  if (sc.b_min == 0) throw ConfigError("b_min must be > 0");

  RunResult result;
  result.theta = deployment.operating_point.theta;
  const double theta = result.theta;
  const std::size_t n = stream.size();
  const std::size_t width = deployment.ensemble.n_features;

  gbt::BoostedEnsemble live = deployment.ensemble;
  Rng rng(sc.seed ^ kStreamSeedSalt);
  metrics::RollingWindow window(sc.rolling_window);
  RecentBuffer buffer(sc.buffer_capacity, width);
  drift::Adwin adwin(config.adwin_delta);
  LabelOracle oracle(stream.labels);
  acquisition::ReplayBuffer replay(sc.replay_capacity);
  const std::size_t budget = acquisition::per_trigger_budget(config.acquisition.nominal_budget_fraction,
                                                             sc.buffer_capacity);
  const acquisition::Policy policy = query_policy(config);

  std::vector<std::size_t> schedule;
  if (sc.kind == StrategyKind::kMatchedReplay) {
    for (std::size_t pos : sc.trigger_schedule) {
      if (pos < n) {
        schedule.push_back(pos);
      } else {
        ++result.ignored_schedule_entries;
      }
    }
    if (result.ignored_schedule_entries > 0) {
      std::cerr << "warning: " << result.ignored_schedule_entries
                << " trigger schedule entries lie beyond the stream end and were ignored\n";
    }
    std::sort(schedule.begin(), schedule.end());
  }
  std::size_t schedule_cursor = 0;

  std::vector<acquisition::LabeledExample> pending;
  std::size_t cooldown = 0;
  std::size_t cum_fp = 0, cum_missed = 0, applied_pos = 0, applied_neg = 0, updates = 0, alarms = 0;
  result.scores.reserve(n);
  result.predictions.reserve(n);

  for (std::size_t begin = 0; begin < n; begin += sc.batch_size) {
    const std::size_t end = std::min(n, begin + sc.batch_size);
    result.pending_at_batch_entry.push_back(pending.size());

    const Matrix rows = stream.rows(begin, end);
    const std::vector<double> scores = gbt::predict_proba(live, rows);
    bool alarm = false;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      const std::size_t pos = begin + i;
      const int y = stream.labels[pos];
      const int yhat = scores[i] >= theta ? 1 : 0;
      window.push(y, yhat);
      cum_fp += (y == 0 && yhat == 1);
      cum_missed += (y == 1 && yhat == 0);
      buffer.push(pos, scores[i], rows.row(i));
      result.scores.push_back(scores[i]);
      result.predictions.push_back(yhat);
      if (is_adwin(sc.kind) && adwin.update(scores[i])) {
        result.alarm_positions.push_back(pos);
        ++alarms;
        alarm = true;
      }
    }

    bool trigger = false;
    switch (sc.kind) {
      case StrategyKind::kAdwinRandom:
      case StrategyKind::kAdwinHybrid:
        trigger = alarm && cooldown == 0;
        break;
      case StrategyKind::kPeriodic: {
        const bool crossed = end / sc.periodic_interval > begin / sc.periodic_interval;
        if (crossed) {
          // Recorded as the last event before the crossed multiple.
          result.alarm_positions.push_back((end / sc.periodic_interval) * sc.periodic_interval - 1);
          ++alarms;
        }
        const bool capped = sc.periodic_max_updates > 0 && updates >= sc.periodic_max_updates;
        trigger = crossed && cooldown == 0 && !capped;
        break;
      }
      case StrategyKind::kMatchedReplay: {
        bool hit = false;
        while (schedule_cursor < schedule.size() && schedule[schedule_cursor] < end) {
          hit = true;
          result.alarm_positions.push_back(schedule[schedule_cursor]);
          ++alarms;
          ++schedule_cursor;
        }
        trigger = hit && cooldown == 0;
        break;
      }
      case StrategyKind::kFrozen:
      case StrategyKind::kThresholdOnly:
        break;
    }

    bool queried = false;
    if (trigger && budget > 0) {
      // Events already labeled in this run are not offered again.
      std::vector<std::size_t> candidates;
      std::vector<double> candidate_scores;
      for (std::size_t i = 0; i < buffer.size(); ++i) {
        if (oracle.asked(buffer.position(i))) continue;
        candidates.push_back(i);
        candidate_scores.push_back(buffer.score(i));
      }
      if (!candidates.empty()) {
        const acquisition::QueryBatch batch =
            acquisition::select_query_batch(candidate_scores, theta, budget, policy, rng);
        QueryRecord record{end, {}};
        for (std::size_t k : batch.indices) {
          const std::size_t slot = candidates[k];
          const std::size_t pos = buffer.position(slot);
          const std::optional<int> label = oracle.label(pos);
          if (!label) continue;
          const auto row = buffer.row(slot);
          pending.push_back({std::vector<double>(row.begin(), row.end()), *label});
          record.positions.push_back(pos);
        }
        queried = !record.positions.empty();
        if (queried) result.queries.push_back(std::move(record));
      }
    }

    bool updated = false;
    if (pending.size() >= sc.b_min) {
      std::vector<acquisition::LabeledExample> batch =
          sc.replay_enabled ? acquisition::mix_with_replay(pending, replay, sc.replay_ratio, rng) : pending;
      Matrix x(batch.size(), width);
      std::vector<int> y(batch.size());
      for (std::size_t i = 0; i < batch.size(); ++i) {
        std::copy(batch[i].features.begin(), batch[i].features.end(), x.row(i).begin());
        y[i] = batch[i].label;
      }
      const gbt::UpdateResult up =
          gbt::warm_start_update(live, x, y, deployment.objective, config.train, rng);
      UpdateRecord record{end, pending.size(), 0, up.ensemble.trees.size(), up.status == gbt::UpdateStatus::kCapReached};
      for (const auto& ex : pending) record.positives += ex.label == 1;
      if (up.appended > 0) {
        live = up.ensemble;
        ++updates;
        applied_pos += record.positives;
        applied_neg += pending.size() - record.positives;
        cooldown = sc.cooldown_events;
        updated = true;
        result.updates.push_back(record);
      } else {
        ++result.cap_reached_updates;
      }
      pending.clear();
    }
    cooldown = cooldown > end - begin ? cooldown - (end - begin) : 0;

    metrics::TraceRow row;
    row.batch_end_index = end;
    row.window = window.counts();
    row.rolling = metrics::rates_from_counts(row.window);
    row.cum_fp = cum_fp;
    row.cum_missed_pos = cum_missed;
    row.cum_queries = oracle.queries();
    row.cum_updates = updates;
    row.trigger_fired = queried;
    row.update_fired = updated;
    result.trace.push_back(row);
  }
  result.pending_at_end = pending.size();
  result.final_ensemble = live;

  metrics::Endpoints& e = result.endpoints;
  e.stream_events = n;
  for (int y : stream.labels) e.positive_count += y == 1;
  e.benign_count = n - e.positive_count;
  e.cum_fp = cum_fp;
  e.cum_missed_pos = cum_missed;
  e.fp_per_million_benign = metrics::fp_burden(cum_fp, e.benign_count);
  e.positive_window_recall = metrics::positive_window_recall(result.trace);
  const metrics::MissedPositiveStats missed = metrics::missed_positive_stats(
      stream.labels, result.predictions, config.metrics.burst_gap, config.metrics.delay_unit);
  e.max_missed_streak = missed.max_streak;
  e.mean_burst_delay = missed.mean_burst_delay;
  e.queries = oracle.queries();
  e.realized_query_rate = n > 0 ? metrics::realized_query_rate(e.queries, n) : 0.0;
  e.updates = updates;
  e.applied_pos = applied_pos;
  e.applied_neg = applied_neg;
  e.triggers = result.queries.size();
  e.alarms = alarms;
  e.tree_count = live.trees.size();
  e.theta = theta;
  return result;
}

RunResult run(const PreparedData& data, const StreamConfig& config) {
  return run_stream(deploy(data.train, config), data.stream, config);
}

std::string schedule_to_text(const std::vector<std::size_t>& positions) {
  std::string out;
  for (std::size_t p : positions) out += std::to_string(p) + "\n";
  return out;
}

std::vector<std::size_t> schedule_from_text(const std::string& content) {
  std::vector<std::size_t> out;
  std::istringstream in(content);
  std::string line;
  while (std::getline(in, line)) {
    line = text::trim(line);
    if (line.empty() || line[0] == '#') continue;
    const double v = text::parse_double(line, "trigger schedule");
    if (v < 0 || v != std::floor(v)) throw DataError("trigger schedule: bad index '" + line + "'");
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

}  // namespace alertscreen::controller
