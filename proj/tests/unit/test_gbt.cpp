#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "alertscreen/gbt.hpp"
#include "alertscreen/objective.hpp"
#include "alertscreen/rng.hpp"
#include "oracles.hpp"

using namespace alertscreen;
using namespace alertscreen::gbt;

namespace {

// Best split over every (feature, cut) by direct row partition.
struct BruteSplit {
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
};

BruteSplit brute_force_split(const Matrix& x, const std::vector<std::vector<double>>& cuts,
                             const std::vector<double>& g, const std::vector<double>& h, double lambda,
                             double min_child_weight) {
  double G = 0, H = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    G += g[i];
    H += h[i];
  }
  BruteSplit best;
  for (std::size_t f = 0; f < x.cols(); ++f) {
    for (double c : cuts[f]) {
      double gl = 0, hl = 0;
      for (std::size_t i = 0; i < x.rows(); ++i) {
        if (x(i, f) < c) {
          gl += g[i];
          hl += h[i];
        }
      }
      const double gr = G - gl, hr = H - hl;
      if (hl < min_child_weight || hr < min_child_weight) continue;
      const double gain = 0.5 * (gl * gl / (hl + lambda) + gr * gr / (hr + lambda) - G * G / (H + lambda));
      if (gain > 1e-12 && (best.feature < 0 || gain > best.gain)) best = {static_cast<int>(f), c, gain};
    }
  }
  return best;
}

Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
  Matrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = rng.normal();
  }
  return m;
}

}  // namespace

TEST_CASE("logistic derivatives at p=0.5") {
  const GradHess gh = objective_derivatives(0.5, 1, Objective{ObjectiveKind::kLogistic});
  CHECK(gh.grad == doctest::Approx(-0.5).epsilon(1e-15));
  CHECK(gh.hess == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("focal with gamma 0 and alpha 0.5 halves the logistic gradient") {
  const GradHess gh = objective_derivatives(0.5, 0, Objective{ObjectiveKind::kFocal, 0.5, 0.0});
  CHECK(gh.grad == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("focal gamma 2 alpha 0.25 y 1 p 0.7 matches finite differences") {
  const GradHess gh = objective_derivatives(0.7, 1, Objective{ObjectiveKind::kFocal, 0.25, 2.0});
  const auto fd = oracle::focal_finite_differences(0.7, 1, 0.25, 2.0);
  CHECK(oracle::within_fd_tolerance(gh.grad, fd.grad));
  CHECK(oracle::within_fd_tolerance(gh.hess, fd.hess));
}

TEST_CASE("focal derivatives match finite differences on random points") {
  Rng rng(7);
  for (int i = 0; i < 300; ++i) {
    const double p = 0.01 + 0.98 * rng.uniform();
    const int y = rng.bernoulli(0.5) ? 1 : 0;
    const double alpha = 0.2 + 0.6 * rng.uniform();
    const double gamma = 0.5 + 2.0 * rng.uniform();
    const GradHess gh = objective_derivatives(p, y, Objective{ObjectiveKind::kFocal, alpha, gamma});
    const auto fd = oracle::focal_finite_differences(p, y, alpha, gamma);
    CAPTURE(p);
    CAPTURE(y);
    CAPTURE(alpha);
    CAPTURE(gamma);
    CHECK(oracle::within_fd_tolerance(gh.grad, fd.grad));
    CHECK(oracle::within_fd_tolerance(gh.hess, fd.hess));
  }
}

TEST_CASE("clamped hessian never falls below the floor") {
  for (double p : {0.01, 0.3, 0.5, 0.9, 0.99}) {
    for (int y : {0, 1}) {
      const GradHess gh = objective_grad_hess(p, y, Objective{ObjectiveKind::kFocal, 0.25, 2.5});
      CHECK(gh.hess >= kHessianFloor);
    }
  }
  CHECK_THROWS_AS(objective_grad_hess(0.0, 1, Objective{}), std::invalid_argument);
  CHECK_THROWS_AS(objective_grad_hess(1.0, 0, Objective{}), std::invalid_argument);
}

TEST_CASE("class-weighted objective scales positives by the resolved weight") {
  const std::vector<int> labels = {1, 0, 0, 0};
  const Objective obj = resolve_objective(Objective{ObjectiveKind::kClassWeighted}, labels);
  CHECK(obj.pos_weight == 3.0);
  CHECK(objective_derivatives(0.25, 1, obj).grad == doctest::Approx(3.0 * (0.25 - 1.0)));
  CHECK(objective_derivatives(0.25, 0, obj).grad == doctest::Approx(0.25));
}

TEST_CASE("empty ensemble predicts one half") {
  BoostedEnsemble m;
  m.n_features = 2;
  const std::vector<double> row = {1.0, -2.0};
  CHECK(predict_proba_row(m, row) == 0.5);
}

TEST_CASE("single leaf tree gives sigmoid of lr times value") {
  BoostedEnsemble m;
  m.n_features = 1;
  m.learning_rate = 0.1;
  Tree t;
  t.nodes.push_back(TreeNode{-1, 0.0, -1, -1, 3.0});
  m.trees.push_back(t);
  const std::vector<double> row = {0.0};
  CHECK(predict_proba_row(m, row) == doctest::Approx(1.0 / (1.0 + std::exp(-0.3))).epsilon(1e-15));
  CHECK_THROWS_AS(predict_proba_row(m, std::vector<double>{1.0, 2.0}), std::invalid_argument);
}

TEST_CASE("adding an all-positive tree raises every score") {
  Rng rng(3);
  const Matrix x = random_matrix(200, 3, rng);
  std::vector<int> y(200);
  for (std::size_t i = 0; i < 200; ++i) y[i] = x(i, 0) + 0.5 * rng.normal() > 0.8;
  TrainConfig cfg;
  cfg.initial_rounds = 10;
  BoostedEnsemble m = train_initial(x, y, Objective{}, cfg, 5);
  const auto before = predict_proba(m, x);
  Tree t;
  t.nodes = {TreeNode{0, 0.0, 1, 2, 0.0}, TreeNode{-1, 0, -1, -1, 0.2}, TreeNode{-1, 0, -1, -1, 0.7}};
  m.trees.push_back(t);
  const auto after = predict_proba(m, x);
  for (std::size_t i = 0; i < before.size(); ++i) CHECK(after[i] > before[i]);
}

TEST_CASE("separable toy set reaches training accuracy 1") {
  Rng rng(11);
  Matrix x(200, 2);
  std::vector<int> y(200);
  for (std::size_t i = 0; i < 200; ++i) {
    const int label = i % 2;
    // Points sit at distance >= 0.5 from the line x0 + x1 = 0.
    const double offset = (label ? 1.0 : -1.0) * (0.5 + rng.uniform());
    const double t = 4.0 * rng.uniform() - 2.0;
    x(i, 0) = t + offset / 2.0;
    x(i, 1) = -t + offset / 2.0;
    y[i] = label;
  }
  const BoostedEnsemble m = train_initial(x, y, Objective{ObjectiveKind::kLogistic}, TrainConfig{}, 42);
  const auto p = predict_proba(m, x);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < 200; ++i) correct += (p[i] >= 0.5 ? 1 : 0) == y[i];
  CHECK(correct == 200);
  CHECK(m.trees.size() == 100);
}

TEST_CASE("root split agrees with brute-force best split") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Rng rng(seed);
    const Matrix x = random_matrix(150, 4, rng);
    std::vector<double> g(150), h(150);
    const std::size_t informative = seed % 4;
    for (std::size_t i = 0; i < 150; ++i) {
      const int label = x(i, informative) > 0.0;
      const double p = 0.3 + 0.4 * rng.uniform();
      const GradHess gh = objective_grad_hess(p, label, Objective{ObjectiveKind::kLogistic});
      g[i] = gh.grad;
      h[i] = gh.hess;
    }
    TrainConfig cfg;
    cfg.max_depth = 1;
    cfg.bins = 32;
    const auto cuts = compute_cuts(x, cfg.bins);
    const Tree tree = fit_tree(x, cuts, g, h, cfg);
    const BruteSplit ref = brute_force_split(x, cuts, g, h, cfg.l2_reg, cfg.min_child_weight);
    CAPTURE(seed);
    REQUIRE(ref.feature >= 0);
    CHECK(tree.nodes[0].feature == ref.feature);
    CHECK(tree.nodes[0].threshold == ref.threshold);
  }
}

TEST_CASE("labels set by one feature's sign make the first tree split on it") {
  Rng rng(21);
  const Matrix x = random_matrix(300, 5, rng);
  std::vector<int> y(300);
  for (std::size_t i = 0; i < 300; ++i) y[i] = x(i, 2) > 0.0;
  TrainConfig cfg;
  cfg.initial_rounds = 1;
  cfg.colsample = 1.0;
  cfg.subsample = 1.0;
  const BoostedEnsemble m = train_initial(x, y, Objective{ObjectiveKind::kLogistic}, cfg, 1);
  CHECK(m.trees[0].nodes[0].feature == 2);
}

TEST_CASE("fixed seed gives byte-identical dumps and dumps round-trip") {
  Rng rng(5);
  const Matrix x = random_matrix(400, 4, rng);
  std::vector<int> y(400);
  for (std::size_t i = 0; i < 400; ++i) y[i] = x(i, 0) - x(i, 1) + 0.3 * rng.normal() > 1.0;
  TrainConfig cfg;
  cfg.initial_rounds = 20;
  const BoostedEnsemble a = train_initial(x, y, Objective{}, cfg, 42);
  const BoostedEnsemble b = train_initial(x, y, Objective{}, cfg, 42);
  CHECK(a.dump() == b.dump());
  const BoostedEnsemble loaded = BoostedEnsemble::load(a.dump());
  CHECK(loaded == a);
  CHECK(predict_proba(loaded, x) == predict_proba(a, x));
  CHECK_THROWS_AS(BoostedEnsemble::load("not a model"), std::invalid_argument);
}

TEST_CASE("warm start appends trees and keeps the existing prefix") {
  Rng rng(8);
  const Matrix x = random_matrix(300, 3, rng);
  std::vector<int> y(300);
  for (std::size_t i = 0; i < 300; ++i) y[i] = x(i, 0) > 0.5;
  TrainConfig cfg;
  cfg.initial_rounds = 30;
  const BoostedEnsemble m = train_initial(x, y, Objective{}, cfg, 1);
  Rng update_rng(2);
  const UpdateResult up = warm_start_update(m, x, y, Objective{}, cfg, update_rng);
  REQUIRE(up.ensemble.trees.size() == 40);
  CHECK(up.appended == 10);
  CHECK(up.status == UpdateStatus::kApplied);
  for (std::size_t t = 0; t < 30; ++t) CHECK(up.ensemble.trees[t] == m.trees[t]);
  CHECK(up.ensemble.cuts == m.cuts);
}

TEST_CASE("warm start on the training batch does not increase training loss") {
  Rng rng(9);
  const Matrix x = random_matrix(300, 3, rng);
  std::vector<int> y(300);
  for (std::size_t i = 0; i < 300; ++i) y[i] = x(i, 0) + 0.5 * rng.normal() > 0.5;
  TrainConfig cfg;
  cfg.initial_rounds = 20;
  cfg.subsample = 1.0;
  cfg.colsample = 1.0;
  cfg.rounds_per_update = 1;
  const Objective obj{};
  BoostedEnsemble m = train_initial(x, y, obj, cfg, 1);
  auto loss = [&](const BoostedEnsemble& e) {
    const auto p = predict_proba(e, x);
    double s = 0;
    for (std::size_t i = 0; i < p.size(); ++i) s += objective_loss(p[i], y[i], obj);
    return s;
  };
  double prev = loss(m);
  Rng urng(1);
  for (int round = 0; round < 10; ++round) {
    m = warm_start_update(m, x, y, obj, cfg, urng).ensemble;
    const double cur = loss(m);
    CHECK(cur <= prev + 1e-9);
    prev = cur;
  }
}

TEST_CASE("cap: 495 trees plus 10 rounds stops at 500 with cap status") {
  Rng rng(4);
  const Matrix x = random_matrix(100, 2, rng);
  std::vector<int> y(100);
  for (std::size_t i = 0; i < 100; ++i) y[i] = x(i, 0) > 0;
  TrainConfig cfg;
  cfg.initial_rounds = 5;
  cfg.max_depth = 2;
  BoostedEnsemble m = train_initial(x, y, Objective{}, cfg, 1);
  while (m.trees.size() < 495) m.trees.push_back(m.trees.front());
  Rng urng(3);
  const UpdateResult up = warm_start_update(m, x, y, Objective{}, cfg, urng);
  CHECK(up.ensemble.trees.size() == 500);
  CHECK(up.appended == 5);
  CHECK(up.status == UpdateStatus::kCapReached);
  const UpdateResult again = warm_start_update(up.ensemble, x, y, Objective{}, cfg, urng);
  CHECK(again.appended == 0);
  CHECK(again.ensemble.trees.size() == 500);
  CHECK(again.status == UpdateStatus::kCapReached);
}

TEST_CASE("all-negative update batch lowers the batch's mean score") {
  Rng rng(12);
  const Matrix x = random_matrix(400, 3, rng);
  std::vector<int> y(400);
  for (std::size_t i = 0; i < 400; ++i) y[i] = x(i, 0) > 0.8;
  TrainConfig cfg;
  cfg.initial_rounds = 20;
  const BoostedEnsemble m = train_initial(x, y, Objective{}, cfg, 1);
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < 400; ++i) {
    if (x(i, 0) > 0.8) idx.push_back(i);
  }
  const Matrix batch = x.select_rows(idx);
  const std::vector<int> negatives(idx.size(), 0);
  Rng urng(1);
  const UpdateResult up = warm_start_update(m, batch, negatives, Objective{}, cfg, urng);
  auto mean = [](const std::vector<double>& v) {
    double s = 0;
    for (double d : v) s += d;
    return s / static_cast<double>(v.size());
  };
  CHECK(mean(predict_proba(up.ensemble, batch)) < mean(predict_proba(m, batch)));
}

TEST_CASE("single-class training labels are rejected") {
  Matrix x(4, 1);
  const std::vector<int> y = {0, 0, 0, 0};
  CHECK_THROWS_AS(train_initial(x, y, Objective{}, TrainConfig{}, 1), std::invalid_argument);
}
