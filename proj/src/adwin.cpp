#include "alertscreen/adwin.hpp"

#include <cmath>
#include <stdexcept>

namespace alertscreen::drift {

double cut_threshold(double n0, double n1, double delta) {
  const double n = n0 + n1;
  const double m = 1.0 / (1.0 / n0 + 1.0 / n1);
  return std::sqrt(std::log(4.0 * n / delta) / (2.0 * m));
}

Adwin::Adwin(double delta, std::size_t max_buckets) : delta_(delta), max_buckets_(max_buckets) {
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("adwin: delta must lie in (0, 1)");
  if (max_buckets < 2) throw std::invalid_argument("adwin: need at least 2 buckets per row");
}

bool Adwin::update(double value) {
  if (!(value >= 0.0 && value <= 1.0)) throw std::invalid_argument("adwin: value outside [0, 1]");
  if (rows_.empty()) rows_.emplace_back();
  rows_[0].push_back({value});
  ++width_;
  total_ += value;
  compress();

  bool changed = false;
  while (shrink_once()) changed = true;
  if (changed) ++detections_;
  return changed;
}

void Adwin::compress() {
  for (std::size_t r = 0; r < rows_.size(); ++r) {
    if (rows_[r].size() <= max_buckets_) break;
    const Bucket a = rows_[r].front();
    rows_[r].pop_front();
    const Bucket b = rows_[r].front();
    rows_[r].pop_front();
    if (r + 1 == rows_.size()) rows_.emplace_back();
    rows_[r + 1].push_back({a.sum + b.sum});
  }
}

bool Adwin::shrink_once() {
  if (width_ < 2) return false;
  std::size_t n0 = 0;
  double s0 = 0.0;
  std::size_t seen = 0;
  const std::size_t buckets = bucket_count();
  for (std::size_t r = rows_.size(); r-- > 0;) {
    const std::size_t size = std::size_t{1} << r;
    for (const Bucket& bucket : rows_[r]) {
      // The newest bucket cannot close W0: W1 would be empty.
      if (++seen == buckets) return false;
      n0 += size;
      s0 += bucket.sum;
      const std::size_t n1 = width_ - n0;
      const double s1 = total_ - s0;
      const double diff = std::fabs(s0 / static_cast<double>(n0) - s1 / static_cast<double>(n1));
      if (diff > cut_threshold(static_cast<double>(n0), static_cast<double>(n1), delta_)) {
        drop_oldest(seen);
        return true;
      }
    }
  }
  return false;
}

void Adwin::drop_oldest(std::size_t buckets) {
  for (std::size_t r = rows_.size(); r-- > 0 && buckets > 0;) {
    while (!rows_[r].empty() && buckets > 0) {
      rows_[r].pop_front();
      --buckets;
    }
  }
  while (!rows_.empty() && rows_.back().empty()) rows_.pop_back();
  // Aggregates are recomputed from the surviving buckets so the window
  // mean always equals the mean of what is retained.
  width_ = recount_width();
  total_ = recount_total();
}

std::size_t Adwin::bucket_count() const {
  std::size_t n = 0;
  for (const auto& row : rows_) n += row.size();
  return n;
}

std::size_t Adwin::granularity() const {
  for (std::size_t r = rows_.size(); r-- > 0;) {
    if (!rows_[r].empty()) return std::size_t{1} << r;
  }
  return 1;
}

double Adwin::recount_total() const {
  double sum = 0.0;
  for (std::size_t r = rows_.size(); r-- > 0;) {
    for (const Bucket& b : rows_[r]) sum += b.sum;
  }
  return sum;
}

std::size_t Adwin::recount_width() const {
  std::size_t n = 0;
  for (std::size_t r = 0; r < rows_.size(); ++r) n += rows_[r].size() << r;
  return n;
}

}  // namespace alertscreen::drift
