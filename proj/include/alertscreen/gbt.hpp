#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "alertscreen/matrix.hpp"
#include "alertscreen/objective.hpp"
#include "alertscreen/rng.hpp"

namespace alertscreen::gbt {

struct TrainConfig {
  std::size_t initial_rounds = 100;
  std::size_t rounds_per_update = 10;
  std::size_t max_trees = 500;
  std::size_t max_depth = 6;
  double learning_rate = 0.10;
  std::size_t bins = 256;
  double min_child_weight = 1.0;
  double subsample = 0.90;
  double colsample = 0.90;
  double l2_reg = 1.00;
};

// A node is a leaf when feature < 0. Rows with x[feature] < threshold go left.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;

  bool is_leaf() const { return feature < 0; }
  bool operator==(const TreeNode&) const = default;
};

struct Tree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  double leaf_value(std::span<const double> row) const;
  bool operator==(const Tree&) const = default;
};

/// Additive ensemble of regression trees over a log-odds margin:
/// p = sigmoid(base_score + learning_rate * sum of leaf values).
///
/// The histogram cut points computed from the initial training matrix live
/// with the model so warm-start updates bin new batches identically.
class BoostedEnsemble {
 public:
  double base_score = 0.0;
  double learning_rate = 0.10;
  std::size_t max_depth = 6;
  std::size_t max_trees = 500;
  std::size_t n_features = 0;
  std::vector<std::vector<double>> cuts;  // per feature, strictly increasing
  std::vector<Tree> trees;

  double margin(std::span<const double> row) const;

  /// Versioned text form; doubles print in shortest round-trip notation so
  /// load(dump()) reproduces the model exactly.
  std::string dump() const;
  static BoostedEnsemble load(const std::string& text);

  bool operator==(const BoostedEnsemble&) const = default;
};

/// Equal-frequency cut points, one list per column. Columns with at most
/// `bins` distinct values get a cut between every pair of neighbours.
std::vector<std::vector<double>> compute_cuts(const Matrix& features, std::size_t bins);

/// Trains exactly `initial_rounds` trees. Throws std::invalid_argument on
/// single-class labels.
BoostedEnsemble train_initial(const Matrix& features, std::span<const int> labels, const Objective& objective,
                              const TrainConfig& config, Rng& rng);
BoostedEnsemble train_initial(const Matrix& features, std::span<const int> labels, const Objective& objective,
                              const TrainConfig& config, std::uint64_t seed);

/// Vectorized over rows. Throws std::invalid_argument on width mismatch.
std::vector<double> predict_proba(const BoostedEnsemble& ensemble, const Matrix& features);
double predict_proba_row(const BoostedEnsemble& ensemble, std::span<const double> row);

enum class UpdateStatus { kApplied, kCapReached };

struct UpdateResult {
  BoostedEnsemble ensemble;
  std::size_t appended = 0;
  UpdateStatus status = UpdateStatus::kApplied;
};

/// Appends min(rounds_per_update, max_trees - current) trees fitted to the
/// batch gradients under the current ensemble. Existing trees are untouched.
/// An ensemble already at max_trees comes back unchanged with kCapReached;
/// so does one that reaches the cap during this update.
UpdateResult warm_start_update(const BoostedEnsemble& ensemble, const Matrix& features, std::span<const int> labels,
                               const Objective& objective, const TrainConfig& config, Rng& rng);

/// Builds one tree on precomputed gradients with every row and column
/// eligible. Exposed for split-finding tests.
Tree fit_tree(const Matrix& features, const std::vector<std::vector<double>>& cuts, std::span<const double> grad,
              std::span<const double> hess, const TrainConfig& config);

double sigmoid(double margin);

}  // namespace alertscreen::gbt
