#pragma once

#include <span>
#include <string>

namespace alertscreen::threshold {

enum class Policy { kMaxF1, kRecallConstrained };

std::string to_string(Policy policy);
Policy policy_from_string(const std::string& name);

struct OperatingPoint {
  double theta = 0.5;
  Policy policy = Policy::kMaxF1;
  std::size_t grid_points = 101;
  double f1 = 0.0;      // tail F1 at theta
  double recall = 0.0;  // tail recall at theta
  // Recall-constrained only: the max-F1 starting point.
  double base_theta = 0.0;
  double base_recall = 0.0;
};

struct Confusion {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
};

/// Confusion counts under the rule predicted = (score >= theta).
Confusion confusion_at(std::span<const double> scores, std::span<const int> labels, double theta);

/// k / (grid_points - 1).
double grid_value(std::size_t k, std::size_t grid_points);

/// Smallest grid theta attaining the maximum F1. Zero predicted positives
/// count as F1 = 0. Throws std::invalid_argument("threshold undefined")
/// when the labels hold no positive.
OperatingPoint select_max_f1(std::span<const double> scores, std::span<const int> labels,
                             std::size_t grid_points = 101);

/// Largest grid theta whose recall is at least min_recall times the recall
/// at the max-F1 theta. Never below the max-F1 theta.
OperatingPoint select_recall_constrained(std::span<const double> scores, std::span<const int> labels,
                                         double min_recall = 0.95, std::size_t grid_points = 101);

}  // namespace alertscreen::threshold
