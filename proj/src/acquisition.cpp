#include "alertscreen/acquisition.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "alertscreen/errors.hpp"

namespace alertscreen::acquisition {
namespace {

std::vector<std::size_t> by_uncertainty(std::span<const double> scores, double theta) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::fabs(scores[a] - theta) < std::fabs(scores[b] - theta);
  });
  return order;
}

std::vector<std::size_t> by_score_desc(std::span<const double> scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return order;
}

}  // namespace

std::string to_string(Policy policy) {
  switch (policy) {
    case Policy::kRandom:
      return "random";
    case Policy::kUncertainty:
      return "uncertainty";
    case Policy::kHighScore:
      return "high-score";
    case Policy::kHybrid:
      return "hybrid";
  }
  return "hybrid";
}

Policy policy_from_string(const std::string& name) {
  if (name == "random") return Policy::kRandom;
  if (name == "uncertainty") return Policy::kUncertainty;
  if (name == "high-score") return Policy::kHighScore;
  if (name == "hybrid") return Policy::kHybrid;
  throw ConfigError("unknown acquisition policy '" + name + "'");
}

std::size_t per_trigger_budget(double nominal_fraction, std::size_t buffer_capacity) {
  if (nominal_fraction < 0.0) throw ConfigError("acquisition.nominal_budget_fraction must be >= 0");
  return static_cast<std::size_t>(std::llround(nominal_fraction * static_cast<double>(buffer_capacity)));
}

QueryBatch select_query_batch(std::span<const double> scores, double theta, std::size_t budget, Policy policy,
                              Rng& rng) {
  QueryBatch batch;
  batch.policy = policy;
  batch.budget = budget;
  if (budget == 0) return batch;
  if (scores.empty()) throw std::invalid_argument("select_query_batch: empty buffer with positive budget");

  const std::size_t n = scores.size();
  if (budget >= n) {
    batch.short_batch = budget > n;
    if (policy == Policy::kRandom) {
      batch.indices = rng.sample_without_replacement(n, n);
    } else {
      batch.indices.resize(n);
      std::iota(batch.indices.begin(), batch.indices.end(), 0);
    }
    return batch;
  }

  switch (policy) {
    case Policy::kRandom:
      batch.indices = rng.sample_without_replacement(n, budget);
      break;
    case Policy::kUncertainty: {
      auto order = by_uncertainty(scores, theta);
      batch.indices.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(budget));
      break;
    }
    case Policy::kHighScore: {
      auto order = by_score_desc(scores);
      batch.indices.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(budget));
      break;
    }
    case Policy::kHybrid: {
      const std::size_t near = budget / 2;
      std::vector<bool> taken(n, false);
      for (std::size_t i : by_uncertainty(scores, theta)) {
        if (batch.indices.size() == near) break;
        batch.indices.push_back(i);
        taken[i] = true;
      }
      // High-score slots, which also top up any shortfall after dedup.
      for (std::size_t i : by_score_desc(scores)) {
        if (batch.indices.size() == budget) break;
        if (taken[i]) continue;
        batch.indices.push_back(i);
        taken[i] = true;
      }
      break;
    }
  }
  return batch;
}

void ReplayBuffer::extend(std::span<const LabeledExample> examples) {
  for (const auto& ex : examples) {
    items_.push_back(ex);
    if (items_.size() > capacity_) items_.pop_front();
  }
}

std::vector<LabeledExample> mix_with_replay(std::span<const LabeledExample> queried, ReplayBuffer& replay,
                                            double ratio, Rng& rng) {
  if (ratio < 0.0 || ratio > 1.0) throw std::invalid_argument("replay ratio must lie in [0, 1]");
  std::vector<LabeledExample> out(queried.begin(), queried.end());
  const auto wanted = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(queried.size())));
  const std::size_t k = std::min(wanted, replay.size());
  for (std::size_t i : rng.sample_without_replacement(replay.size(), k)) out.push_back(replay.items()[i]);
  replay.extend(queried);
  return out;
}

}  // namespace alertscreen::acquisition
