#pragma once

#include <span>
#include <string>

namespace alertscreen::gbt {

enum class ObjectiveKind { kLogistic, kClassWeighted, kFocal };

std::string to_string(ObjectiveKind kind);
ObjectiveKind objective_kind_from_string(const std::string& name);

struct Objective {
  ObjectiveKind kind = ObjectiveKind::kFocal;
  double alpha = 0.25;      // focal: weight on positives, 1 - alpha on negatives
  double gamma = 2.0;       // focal focusing exponent
  double pos_weight = 0.0;  // class-weighted; <= 0 means #neg / #pos of the training labels
};

/// Fills in an automatic pos_weight from the training labels.
Objective resolve_objective(Objective objective, std::span<const int> labels);

struct GradHess {
  double grad = 0.0;
  double hess = 0.0;
};

inline constexpr double kHessianFloor = 1e-16;

/// First and second derivative of the per-example loss with respect to the
/// raw log-odds margin, before the Hessian floor is applied. Focal Hessians
/// go negative for some (gamma, p).
GradHess objective_derivatives(double p, int y, const Objective& objective);

/// Same as objective_derivatives with hess clamped to >= kHessianFloor.
/// Throws std::invalid_argument when p is outside (0, 1).
GradHess objective_grad_hess(double p, int y, const Objective& objective);

/// Per-example loss, used for loss traces.
double objective_loss(double p, int y, const Objective& objective);

}  // namespace alertscreen::gbt
