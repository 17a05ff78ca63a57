#include "alertscreen/objective.hpp"

#include <cmath>
#include <stdexcept>

#include "alertscreen/errors.hpp"

namespace alertscreen::gbt {

std::string to_string(ObjectiveKind kind) {
  switch (kind) {
    case ObjectiveKind::kLogistic:
      return "logistic";
    case ObjectiveKind::kClassWeighted:
      return "class-weighted";
    case ObjectiveKind::kFocal:
      return "focal";
  }
  return "focal";
}

ObjectiveKind objective_kind_from_string(const std::string& name) {
  if (name == "logistic" || name == "plain-logistic") return ObjectiveKind::kLogistic;
  if (name == "class-weighted" || name == "weighted") return ObjectiveKind::kClassWeighted;
  if (name == "focal") return ObjectiveKind::kFocal;
  throw ConfigError("unknown objective kind '" + name + "'");
}

Objective resolve_objective(Objective objective, std::span<const int> labels) {
  if (objective.kind == ObjectiveKind::kClassWeighted && objective.pos_weight <= 0.0) {
    double pos = 0.0;
    for (int y : labels) pos += y == 1;
    const double neg = static_cast<double>(labels.size()) - pos;
    objective.pos_weight = pos > 0.0 ? neg / pos : 1.0;
  }
  return objective;
}

GradHess objective_derivatives(double p, int y, const Objective& objective) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("objective: p must lie in (0, 1)");
  switch (objective.kind) {
    case ObjectiveKind::kLogistic:
      return {p - y, p * (1.0 - p)};
    case ObjectiveKind::kClassWeighted: {
      const double w = y == 1 ? objective.pos_weight : 1.0;
      return {w * (p - y), w * p * (1.0 - p)};
    }
    case ObjectiveKind::kFocal: {
      // q = p_t, the probability of the true class; dq/dz = s q (1 - q)
      // with s = +1 for positives and -1 for negatives.
      const double s = y == 1 ? 1.0 : -1.0;
      const double a = y == 1 ? objective.alpha : 1.0 - objective.alpha;
      const double g = objective.gamma;
      const double q = y == 1 ? p : 1.0 - p;
      const double r = 1.0 - q;
      const double log_q = std::log(q);
      const double r_g = std::pow(r, g);
      const double inner = g * q * log_q - r;
      const double grad = s * a * r_g * inner;
      const double hess = a * q * (r_g * r * (g * log_q + g + 1.0) - g * r_g * inner);
      return {grad, hess};
    }
  }
  return {};
}

GradHess objective_grad_hess(double p, int y, const Objective& objective) {
  GradHess gh = objective_derivatives(p, y, objective);
  if (gh.hess < kHessianFloor) gh.hess = kHessianFloor;
  return gh;
}

double objective_loss(double p, int y, const Objective& objective) {
  const double q = y == 1 ? p : 1.0 - p;
  switch (objective.kind) {
    case ObjectiveKind::kLogistic:
      return -std::log(q);
    case ObjectiveKind::kClassWeighted:
      return -(y == 1 ? objective.pos_weight : 1.0) * std::log(q);
    case ObjectiveKind::kFocal: {
      const double a = y == 1 ? objective.alpha : 1.0 - objective.alpha;
      return -a * std::pow(1.0 - q, objective.gamma) * std::log(q);
    }
  }
  return 0.0;
}

}  // namespace alertscreen::gbt
