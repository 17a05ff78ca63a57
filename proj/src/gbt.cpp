#include "alertscreen/gbt.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <sstream>
#include <stdexcept>

#include "alertscreen/text.hpp"

namespace alertscreen::gbt {
namespace {

constexpr double kMinSplitGain = 1e-12;
constexpr double kProbEps = 1e-15;
constexpr const char* kDumpMagic = "alertscreen-gbt";
constexpr int kDumpVersion = 1;

// Bin index of every cell: the number of cuts <= x.
struct BinnedMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::uint16_t> bins;
  std::vector<std::size_t> bin_count;  // per column, cuts + 1

  std::uint16_t at(std::size_t r, std::size_t c) const { return bins[r * cols + c]; }
};

BinnedMatrix bin_matrix(const Matrix& features, const std::vector<std::vector<double>>& cuts) {
  BinnedMatrix out;
  out.rows = features.rows();
  out.cols = features.cols();
  out.bins.resize(out.rows * out.cols);
  out.bin_count.resize(out.cols);
  for (std::size_t c = 0; c < out.cols; ++c) out.bin_count[c] = cuts[c].size() + 1;
  for (std::size_t r = 0; r < out.rows; ++r) {
    const auto row = features.row(r);
    for (std::size_t c = 0; c < out.cols; ++c) {
      const auto& cc = cuts[c];
      out.bins[r * out.cols + c] =
          static_cast<std::uint16_t>(std::upper_bound(cc.begin(), cc.end(), row[c]) - cc.begin());
    }
  }
  return out;
}

double leaf_weight(double g, double h, double lambda) { return -g / (h + lambda); }

double split_score(double g, double h, double lambda) { return g * g / (h + lambda); }

struct SplitChoice {
  bool found = false;
  std::size_t feature = 0;
  std::size_t bin = 0;  // rows with bin <= this go left
  double gain = 0.0;
};

struct BuildTask {
  int node = 0;
  std::size_t depth = 0;
  std::vector<std::uint32_t> rows;
};

Tree build_tree(const BinnedMatrix& binned, const std::vector<std::vector<double>>& cuts, std::span<const double> grad,
                std::span<const double> hess, std::vector<std::uint32_t> rows, const std::vector<std::size_t>& columns,
                const TrainConfig& config) {
  Tree tree;
  tree.nodes.emplace_back();
  std::deque<BuildTask> queue;
  queue.push_back({0, 0, std::move(rows)});

  std::vector<double> hist_g;
  std::vector<double> hist_h;
  while (!queue.empty()) {
    BuildTask task = std::move(queue.front());
    queue.pop_front();

    double g_total = 0.0;
    double h_total = 0.0;
    for (std::uint32_t r : task.rows) {
      g_total += grad[r];
      h_total += hess[r];
    }
    tree.nodes[task.node].value = leaf_weight(g_total, h_total, config.l2_reg);

    SplitChoice best;
    if (task.depth < config.max_depth && task.rows.size() >= 2) {
      const double parent = split_score(g_total, h_total, config.l2_reg);
      for (std::size_t f : columns) {
        const std::size_t nb = binned.bin_count[f];
        if (nb < 2) continue;
        hist_g.assign(nb, 0.0);
        hist_h.assign(nb, 0.0);
        for (std::uint32_t r : task.rows) {
          const std::uint16_t b = binned.at(r, f);
          hist_g[b] += grad[r];
          hist_h[b] += hess[r];
        }
        double gl = 0.0;
        double hl = 0.0;
        for (std::size_t b = 0; b + 1 < nb; ++b) {
          gl += hist_g[b];
          hl += hist_h[b];
          const double gr = g_total - gl;
          const double hr = h_total - hl;
          if (hl < config.min_child_weight || hr < config.min_child_weight) continue;
          const double gain =
              0.5 * (split_score(gl, hl, config.l2_reg) + split_score(gr, hr, config.l2_reg) - parent);
          if (gain > kMinSplitGain && (!best.found || gain > best.gain)) {
            best = {true, f, b, gain};
          }
        }
      }
    }
    if (!best.found) continue;

    BuildTask left{static_cast<int>(tree.nodes.size()), task.depth + 1, {}};
    BuildTask right{static_cast<int>(tree.nodes.size() + 1), task.depth + 1, {}};
    for (std::uint32_t r : task.rows) {
      (binned.at(r, best.feature) <= best.bin ? left.rows : right.rows).push_back(r);
    }
    TreeNode& node = tree.nodes[task.node];
    node.feature = static_cast<int>(best.feature);
    node.threshold = cuts[best.feature][best.bin];
    node.left = left.node;
    node.right = right.node;
    tree.nodes.emplace_back();
    tree.nodes.emplace_back();
    queue.push_back(std::move(left));
    queue.push_back(std::move(right));
  }
  // Internal nodes keep no value in the model.
  for (auto& node : tree.nodes) {
    if (!node.is_leaf()) node.value = 0.0;
  }
  return tree;
}

std::size_t sample_count(std::size_t n, double rate) {
  if (rate >= 1.0) return n;
  const auto k = static_cast<std::size_t>(std::llround(rate * static_cast<double>(n)));
  return std::clamp<std::size_t>(k, 1, n);
}

// Fits `rounds` trees, updating `margins` in place.
void boost(BoostedEnsemble& model, const Matrix& features, const BinnedMatrix& binned, std::span<const int> labels,
           std::vector<double>& margins, std::size_t rounds, const Objective& objective, const TrainConfig& config,
           Rng& rng) {
  const std::size_t n = binned.rows;
  std::vector<double> grad(n);
  std::vector<double> hess(n);
  for (std::size_t round = 0; round < rounds; ++round) {
    for (std::size_t i = 0; i < n; ++i) {
      const double p = std::clamp(sigmoid(margins[i]), kProbEps, 1.0 - kProbEps);
      const GradHess gh = objective_grad_hess(p, labels[i], objective);
      grad[i] = gh.grad;
      hess[i] = gh.hess;
    }

    std::vector<std::uint32_t> rows;
    const std::size_t k_rows = sample_count(n, config.subsample);
    if (k_rows == n) {
      rows.resize(n);
      for (std::size_t i = 0; i < n; ++i) rows[i] = static_cast<std::uint32_t>(i);
    } else {
      for (std::size_t i : rng.sample_without_replacement(n, k_rows)) rows.push_back(static_cast<std::uint32_t>(i));
      std::sort(rows.begin(), rows.end());
    }
    std::vector<std::size_t> columns;
    const std::size_t k_cols = sample_count(binned.cols, config.colsample);
    if (k_cols == binned.cols) {
      for (std::size_t c = 0; c < binned.cols; ++c) columns.push_back(c);
    } else {
      columns = rng.sample_without_replacement(binned.cols, k_cols);
      std::sort(columns.begin(), columns.end());
    }

    Tree tree = build_tree(binned, model.cuts, grad, hess, std::move(rows), columns, config);
    // Every row, sampled or not, moves by the new tree. Routing on raw
    // values matches the bin rule: x < cuts[b] exactly when bin(x) <= b.
    for (std::size_t i = 0; i < n; ++i) margins[i] += model.learning_rate * tree.leaf_value(features.row(i));
    model.trees.push_back(std::move(tree));
  }
}

void check_labels(std::span<const int> labels, std::size_t rows) {
  if (labels.size() != rows) throw std::invalid_argument("labels length does not match feature rows");
  for (int y : labels) {
    if (y != 0 && y != 1) throw std::invalid_argument("labels must be 0 or 1");
  }
}

}  // namespace

double sigmoid(double margin) {
  if (margin >= 0.0) return 1.0 / (1.0 + std::exp(-margin));
  const double e = std::exp(margin);
  return e / (1.0 + e);
}

double Tree::leaf_value(std::span<const double> row) const {
  int node = 0;
  while (!nodes[node].is_leaf()) {
    const TreeNode& nd = nodes[node];
    node = row[static_cast<std::size_t>(nd.feature)] < nd.threshold ? nd.left : nd.right;
  }
  return nodes[node].value;
}

double BoostedEnsemble::margin(std::span<const double> row) const {
  double sum = 0.0;
  for (const auto& tree : trees) sum += tree.leaf_value(row);
  return base_score + learning_rate * sum;
}

std::string BoostedEnsemble::dump() const {
  std::ostringstream out;
  out << kDumpMagic << ' ' << kDumpVersion << '\n';
  out << "base_score " << text::format_double(base_score) << '\n';
  out << "learning_rate " << text::format_double(learning_rate) << '\n';
  out << "max_depth " << max_depth << '\n';
  out << "max_trees " << max_trees << '\n';
  out << "n_features " << n_features << '\n';
  for (std::size_t f = 0; f < cuts.size(); ++f) {
    out << "cuts " << f << ' ' << cuts[f].size();
    for (double c : cuts[f]) out << ' ' << text::format_double(c);
    out << '\n';
  }
  out << "trees " << trees.size() << '\n';
  for (std::size_t t = 0; t < trees.size(); ++t) {
    out << "tree " << t << ' ' << trees[t].nodes.size() << '\n';
    for (std::size_t i = 0; i < trees[t].nodes.size(); ++i) {
      const TreeNode& nd = trees[t].nodes[i];
      if (nd.is_leaf()) {
        out << i << " leaf " << text::format_double(nd.value) << '\n';
      } else {
        out << i << " split " << nd.feature << ' ' << text::format_double(nd.threshold) << ' ' << nd.left << ' '
            << nd.right << '\n';
      }
    }
  }
  out << "end\n";
  return out.str();
}

BoostedEnsemble BoostedEnsemble::load(const std::string& content) {
  std::istringstream in(content);
  auto fail = [](const std::string& why) { throw std::invalid_argument("model load: " + why); };
  auto expect = [&](const std::string& word) {
    std::string got;
    if (!(in >> got) || got != word) fail("expected '" + word + "'");
  };
  auto read_double = [&]() {
    std::string tok;
    if (!(in >> tok)) fail("truncated input");
    return text::parse_double(tok, "model");
  };
  BoostedEnsemble m;
  std::string magic;
  int version = 0;
  if (!(in >> magic >> version) || magic != kDumpMagic) fail("bad header");
  if (version != kDumpVersion) fail("unsupported version " + std::to_string(version));
  expect("base_score");
  m.base_score = read_double();
  expect("learning_rate");
  m.learning_rate = read_double();
  expect("max_depth");
  in >> m.max_depth;
  expect("max_trees");
  in >> m.max_trees;
  expect("n_features");
  in >> m.n_features;
  m.cuts.resize(m.n_features);
  for (std::size_t f = 0; f < m.n_features; ++f) {
    expect("cuts");
    std::size_t idx = 0, k = 0;
    if (!(in >> idx >> k) || idx != f) fail("bad cuts row");
    m.cuts[f].resize(k);
    for (auto& c : m.cuts[f]) c = read_double();
  }
  expect("trees");
  std::size_t n_trees = 0;
  in >> n_trees;
  m.trees.resize(n_trees);
  for (std::size_t t = 0; t < n_trees; ++t) {
    expect("tree");
    std::size_t idx = 0, n_nodes = 0;
    if (!(in >> idx >> n_nodes) || idx != t) fail("bad tree header");
    m.trees[t].nodes.resize(n_nodes);
    for (std::size_t i = 0; i < n_nodes; ++i) {
      std::size_t id = 0;
      std::string kind;
      if (!(in >> id >> kind) || id != i) fail("bad node");
      TreeNode& nd = m.trees[t].nodes[i];
      if (kind == "leaf") {
        nd.value = read_double();
      } else if (kind == "split") {
        in >> nd.feature;
        nd.threshold = read_double();
        in >> nd.left >> nd.right;
        const auto n = static_cast<int>(n_nodes);
        if (nd.feature < 0 || static_cast<std::size_t>(nd.feature) >= m.n_features || nd.left <= 0 ||
            nd.right <= 0 || nd.left >= n || nd.right >= n) {
          fail("node reference out of range");
        }
      } else {
        fail("unknown node kind '" + kind + "'");
      }
    }
  }
  expect("end");
  return m;
}

std::vector<std::vector<double>> compute_cuts(const Matrix& features, std::size_t bins) {
  if (bins < 2 || bins > 65536) throw std::invalid_argument("bins must lie in [2, 65536]");
  std::vector<std::vector<double>> cuts(features.cols());
  std::vector<double> values(features.rows());
  for (std::size_t c = 0; c < features.cols(); ++c) {
    for (std::size_t r = 0; r < features.rows(); ++r) values[r] = features(r, c);
    std::erase_if(values, [](double v) { return std::isnan(v); });
    std::sort(values.begin(), values.end());
    std::vector<double> distinct = values;
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    auto& out = cuts[c];
    auto midpoint = [](double a, double b) { return a + (b - a) / 2.0; };
    if (distinct.size() <= bins) {
      for (std::size_t i = 1; i < distinct.size(); ++i) out.push_back(midpoint(distinct[i - 1], distinct[i]));
    } else {
      const std::size_t n = values.size();
      for (std::size_t k = 1; k < bins; ++k) {
        const double v = values[k * n / bins];
        const auto it = std::lower_bound(distinct.begin(), distinct.end(), v);
        if (it == distinct.begin()) continue;
        const double cut = midpoint(*(it - 1), v);
        if (out.empty() || cut > out.back()) out.push_back(cut);
      }
    }
    values.resize(features.rows());
  }
  return cuts;
}

BoostedEnsemble train_initial(const Matrix& features, std::span<const int> labels, const Objective& objective,
                              const TrainConfig& config, Rng& rng) {
  check_labels(labels, features.rows());
  std::size_t pos = 0;
  for (int y : labels) pos += y == 1;
  if (pos == 0 || pos == labels.size()) {
    throw std::invalid_argument("train_initial: training labels contain a single class");
  }
  if (config.initial_rounds > config.max_trees) {
    throw std::invalid_argument("train_initial: initial_rounds exceeds max_trees");
  }
  BoostedEnsemble model;
  const double prevalence = static_cast<double>(pos) / static_cast<double>(labels.size());
  model.base_score = std::log(prevalence / (1.0 - prevalence));
  model.learning_rate = config.learning_rate;
  model.max_depth = config.max_depth;
  model.max_trees = config.max_trees;
  model.n_features = features.cols();
  model.cuts = compute_cuts(features, config.bins);

  const BinnedMatrix binned = bin_matrix(features, model.cuts);
  std::vector<double> margins(features.rows(), model.base_score);
  boost(model, features, binned, labels, margins, config.initial_rounds, resolve_objective(objective, labels), config, rng);
  return model;
}

BoostedEnsemble train_initial(const Matrix& features, std::span<const int> labels, const Objective& objective,
                              const TrainConfig& config, std::uint64_t seed) {
  Rng rng(seed);
  return train_initial(features, labels, objective, config, rng);
}

double predict_proba_row(const BoostedEnsemble& ensemble, std::span<const double> row) {
  if (row.size() != ensemble.n_features) {
    throw std::invalid_argument("predict_proba: expected " + std::to_string(ensemble.n_features) +
                                " features, got " + std::to_string(row.size()));
  }
  return std::clamp(sigmoid(ensemble.margin(row)), kProbEps, 1.0 - kProbEps);
}

std::vector<double> predict_proba(const BoostedEnsemble& ensemble, const Matrix& features) {
  if (features.cols() != ensemble.n_features && features.rows() > 0) {
    throw std::invalid_argument("predict_proba: expected " + std::to_string(ensemble.n_features) +
                                " features, got " + std::to_string(features.cols()));
  }
  std::vector<double> out(features.rows());
  // Clamped so scores stay strictly inside (0, 1) for extreme margins.
  for (std::size_t r = 0; r < features.rows(); ++r) {
    out[r] = std::clamp(sigmoid(ensemble.margin(features.row(r))), kProbEps, 1.0 - kProbEps);
  }
  return out;
}

UpdateResult warm_start_update(const BoostedEnsemble& ensemble, const Matrix& features, std::span<const int> labels,
                               const Objective& objective, const TrainConfig& config, Rng& rng) {
  check_labels(labels, features.rows());
  if (features.rows() == 0) throw std::invalid_argument("warm_start_update: empty batch");
  if (features.cols() != ensemble.n_features) throw std::invalid_argument("warm_start_update: width mismatch");

  UpdateResult result{ensemble, 0, UpdateStatus::kApplied};
  if (ensemble.trees.size() >= ensemble.max_trees) {
    result.status = UpdateStatus::kCapReached;
    return result;
  }
  const std::size_t room = ensemble.max_trees - ensemble.trees.size();
  const std::size_t rounds = std::min(config.rounds_per_update, room);

  const BinnedMatrix binned = bin_matrix(features, ensemble.cuts);
  std::vector<double> margins(features.rows());
  for (std::size_t r = 0; r < features.rows(); ++r) margins[r] = ensemble.margin(features.row(r));
  TrainConfig tree_config = config;
  tree_config.max_depth = ensemble.max_depth;
  boost(result.ensemble, features, binned, labels, margins, rounds, objective, tree_config, rng);
  result.appended = rounds;
  if (result.ensemble.trees.size() >= result.ensemble.max_trees) result.status = UpdateStatus::kCapReached;
  return result;
}

Tree fit_tree(const Matrix& features, const std::vector<std::vector<double>>& cuts, std::span<const double> grad,
              std::span<const double> hess, const TrainConfig& config) {
  const BinnedMatrix binned = bin_matrix(features, cuts);
  std::vector<std::uint32_t> rows(features.rows());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = static_cast<std::uint32_t>(i);
  std::vector<std::size_t> columns(features.cols());
  for (std::size_t c = 0; c < columns.size(); ++c) columns[c] = c;
  return build_tree(binned, cuts, grad, hess, std::move(rows), columns, config);
}

}  // namespace alertscreen::gbt
