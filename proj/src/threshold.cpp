#include "alertscreen/threshold.hpp"

#include <stdexcept>

#include "alertscreen/errors.hpp"

namespace alertscreen::threshold {
namespace {

double f1_of(const Confusion& c) {
  if (c.tp + c.fp == 0) return 0.0;
  const double denom = 2.0 * static_cast<double>(c.tp) + static_cast<double>(c.fp) + static_cast<double>(c.fn);
  return 2.0 * static_cast<double>(c.tp) / denom;
}

double recall_of(const Confusion& c) {
  return static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
}

void validate(std::span<const double> scores, std::span<const int> labels, std::size_t grid_points) {
  if (scores.size() != labels.size()) throw std::invalid_argument("scores and labels differ in length");
  if (grid_points < 2) throw std::invalid_argument("grid_points must be at least 2");
  bool any_positive = false;
  for (int y : labels) any_positive |= y == 1;
  if (!any_positive) throw std::invalid_argument("threshold undefined: tail holds no positive");
}

}  // namespace

std::string to_string(Policy policy) {
  return policy == Policy::kMaxF1 ? "max-f1" : "recall-constrained";
}

Policy policy_from_string(const std::string& name) {
  if (name == "max-f1") return Policy::kMaxF1;
  if (name == "recall-constrained") return Policy::kRecallConstrained;
  throw ConfigError("unknown threshold policy '" + name + "'");
}

double grid_value(std::size_t k, std::size_t grid_points) {
  return static_cast<double>(k) / static_cast<double>(grid_points - 1);
}

Confusion confusion_at(std::span<const double> scores, std::span<const int> labels, double theta) {
  Confusion c;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool flagged = scores[i] >= theta;
    if (labels[i] == 1) {
      (flagged ? c.tp : c.fn)++;
    } else {
      (flagged ? c.fp : c.tn)++;
    }
  }
  return c;
}

OperatingPoint select_max_f1(std::span<const double> scores, std::span<const int> labels, std::size_t grid_points) {
  validate(scores, labels, grid_points);
  OperatingPoint best;
  best.policy = Policy::kMaxF1;
  best.grid_points = grid_points;
  bool have = false;
  for (std::size_t k = 0; k < grid_points; ++k) {
    const double theta = grid_value(k, grid_points);
    const Confusion c = confusion_at(scores, labels, theta);
    const double f1 = f1_of(c);
    // Strict improvement only, so ties keep the smaller theta.
    if (!have || f1 > best.f1) {
      best.theta = theta;
      best.f1 = f1;
      best.recall = recall_of(c);
      have = true;
    }
  }
  best.base_theta = best.theta;
  best.base_recall = best.recall;
  return best;
}

OperatingPoint select_recall_constrained(std::span<const double> scores, std::span<const int> labels,
                                         double min_recall, std::size_t grid_points) {
  const OperatingPoint base = select_max_f1(scores, labels, grid_points);
  const double required = min_recall * base.recall;
  OperatingPoint out = base;
  out.policy = Policy::kRecallConstrained;
  for (std::size_t k = grid_points; k-- > 0;) {
    const double theta = grid_value(k, grid_points);
    if (theta < base.theta) break;
    const Confusion c = confusion_at(scores, labels, theta);
    const double recall = recall_of(c);
    if (recall >= required) {
      out.theta = theta;
      out.recall = recall;
      out.f1 = f1_of(c);
      break;
    }
  }
  out.base_theta = base.theta;
  out.base_recall = base.recall;
  return out;
}

}  // namespace alertscreen::threshold
