#pragma once

#include <cstddef>
#include <deque>
#include <span>
#include <string>
#include <vector>

#include "alertscreen/matrix.hpp"
#include "alertscreen/rng.hpp"

namespace alertscreen::acquisition {

enum class Policy { kRandom, kUncertainty, kHighScore, kHybrid };

std::string to_string(Policy policy);
Policy policy_from_string(const std::string& name);

struct QueryBatch {
  std::vector<std::size_t> indices;  // positions in the candidate list, unique
  Policy policy = Policy::kHybrid;
  std::size_t budget = 0;
  bool short_batch = false;  // budget exceeded the candidate count
};

/// Picks up to `budget` candidates.
///
///   random       uniform without replacement (draw order)
///   uncertainty  smallest |p - theta|
///   high-score   largest p
///   hybrid       floor(budget / 2) by smallest |p - theta|, the rest by
///                largest p among those not already chosen
///
/// Ranking ties go to the lower candidate position. The rng is consumed by
/// the random policy only.
QueryBatch select_query_batch(std::span<const double> scores, double theta, std::size_t budget, Policy policy,
                              Rng& rng);

/// Nominal per-trigger budget: round(fraction * buffer_capacity).
std::size_t per_trigger_budget(double nominal_fraction, std::size_t buffer_capacity);

struct LabeledExample {
  std::vector<double> features;
  int label = 0;
};

/// Most recent labeled examples, oldest evicted first.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity = 512) : capacity_(capacity) {}

  void extend(std::span<const LabeledExample> examples);
  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }
  const std::deque<LabeledExample>& items() const { return items_; }

 private:
  std::size_t capacity_;
  std::deque<LabeledExample> items_;
};

/// Returns the queried examples followed by round(ratio * |queried|) examples
/// drawn uniformly without replacement from the replay buffer (capped at its
/// size), then appends the queried examples to the buffer.
std::vector<LabeledExample> mix_with_replay(std::span<const LabeledExample> queried, ReplayBuffer& replay,
                                            double ratio, Rng& rng);

}  // namespace alertscreen::acquisition
