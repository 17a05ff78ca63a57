#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <vector>

#include "alertscreen/rng.hpp"
#include "alertscreen/threshold.hpp"

using namespace alertscreen::threshold;

namespace {

double brute_f1(const std::vector<double>& s, const std::vector<int>& y, double theta) {
  double tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const bool flag = s[i] >= theta;
    tp += flag && y[i] == 1;
    fp += flag && y[i] == 0;
    fn += !flag && y[i] == 1;
  }
  return tp == 0 ? 0.0 : 2 * tp / (2 * tp + fp + fn);
}

double brute_recall(const std::vector<double>& s, const std::vector<int>& y, double theta) {
  double tp = 0, pos = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    pos += y[i] == 1;
    tp += y[i] == 1 && s[i] >= theta;
  }
  return tp / pos;
}

}  // namespace

TEST_CASE("gap between classes gives the smallest grid point above the negatives") {
  const std::vector<double> s = {0.1, 0.2, 0.8, 0.9};
  const std::vector<int> y = {0, 0, 1, 1};
  const OperatingPoint op = select_max_f1(s, y);
  CHECK(op.theta == doctest::Approx(0.21));
  CHECK(op.f1 == 1.0);
}

TEST_CASE("all-positive labels pick the grid minimum") {
  const std::vector<double> s = {0.3, 0.5, 0.7};
  const std::vector<int> y = {1, 1, 1};
  CHECK(select_max_f1(s, y).theta == 0.0);
}

TEST_CASE("0/1 scores equal to labels give F1 1 at a theta in (0, 1]") {
  const std::vector<double> s = {0, 1, 0, 1, 1};
  const std::vector<int> y = {0, 1, 0, 1, 1};
  const OperatingPoint op = select_max_f1(s, y);
  CHECK(op.theta > 0.0);
  CHECK(op.theta <= 1.0);
  CHECK(op.f1 == 1.0);
}

TEST_CASE("no positives leaves the threshold undefined") {
  const std::vector<double> s = {0.1, 0.2};
  const std::vector<int> y = {0, 0};
  CHECK_THROWS_AS(select_max_f1(s, y), std::invalid_argument);
}

TEST_CASE("recall-constrained raises theta to 0.60 on the worked example") {
  const std::vector<double> s = {0.1, 0.6, 0.7, 0.9};
  const std::vector<int> y = {0, 1, 1, 1};
  const OperatingPoint op = select_recall_constrained(s, y, 0.95);
  CHECK(op.base_recall == 1.0);
  CHECK(op.theta == doctest::Approx(0.60));
  CHECK(op.recall == 1.0);
}

TEST_CASE("min_recall 0 moves theta to the grid maximum") {
  const std::vector<double> s = {0.1, 0.6, 0.7, 0.9};
  const std::vector<int> y = {0, 1, 1, 1};
  CHECK(select_recall_constrained(s, y, 0.0).theta == 1.0);
}

TEST_CASE("max-F1 and recall-constrained agree with a brute-force grid scan") {
  alertscreen::Rng rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 5 + rng.below(60);
    std::vector<double> s(n);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = rng.bernoulli(0.3);
      s[i] = std::min(1.0, std::max(0.0, (y[i] ? 0.6 : 0.35) + 0.25 * rng.normal()));
    }
    y[0] = 1;
    double best = -1, best_theta = 0;
    for (int k = 0; k <= 100; ++k) {
      const double theta = k / 100.0;
      const double f = brute_f1(s, y, theta);
      if (f > best) {
        best = f;
        best_theta = theta;
      }
    }
    const OperatingPoint op = select_max_f1(s, y);
    CHECK(op.theta == best_theta);
    CHECK(op.f1 == doctest::Approx(best));

    const double r0 = brute_recall(s, y, best_theta);
    double constrained = best_theta;
    for (int k = 100; k >= 0; --k) {
      const double theta = k / 100.0;
      if (theta < best_theta) break;
      if (brute_recall(s, y, theta) >= 0.95 * r0) {
        constrained = theta;
        break;
      }
    }
    const OperatingPoint rc = select_recall_constrained(s, y, 0.95);
    CHECK(rc.theta == constrained);
    CHECK(rc.theta >= op.theta);
  }
}

TEST_CASE("confusion counts use score >= theta") {
  const std::vector<double> s = {0.5, 0.49, 0.5};
  const std::vector<int> y = {1, 1, 0};
  const Confusion c = confusion_at(s, y, 0.5);
  CHECK(c.tp == 1);
  CHECK(c.fn == 1);
  CHECK(c.fp == 1);
  CHECK(c.tn == 0);
}
