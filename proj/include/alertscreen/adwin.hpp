#pragma once

#include <cstddef>
#include <deque>
#include <vector>

namespace alertscreen::drift {

/// Hoeffding cut threshold for sub-windows of n0 and n1 values out of a
/// window of n = n0 + n1, with m the harmonic mean 1 / (1/n0 + 1/n1):
///
///     eps_cut = sqrt( ln(4 n / delta) / (2 m) )
double cut_threshold(double n0, double n1, double delta);

/// ADWIN2 change detector over values in [0, 1].
///
/// The window is an exponential histogram: row r holds up to `max_buckets`
/// buckets, each summarizing 2^r consecutive values. Every insertion checks
/// each bucket boundary as a cut; when the older part W0 and newer part W1
/// differ in mean by more than eps_cut, W0 is dropped and the check repeats
/// until no cut fires.
class Adwin {
 public:
  explicit Adwin(double delta = 0.002, std::size_t max_buckets = 5);

  /// Returns true when the window shrank. Throws std::invalid_argument for
  /// values outside [0, 1].
  bool update(double value);

  std::size_t width() const { return width_; }
  double total() const { return total_; }
  double mean() const { return width_ ? total_ / static_cast<double>(width_) : 0.0; }
  double delta() const { return delta_; }
  std::size_t bucket_count() const;
  std::size_t detections() const { return detections_; }

  /// Size in values of the largest bucket; bounds how far a detection can
  /// land from one found by checking every value as a cut.
  std::size_t granularity() const;

  /// Sum of bucket sums, recomputed.
  double recount_total() const;
  std::size_t recount_width() const;

 private:
  struct Bucket {
    double sum = 0.0;
  };

  void compress();
  bool shrink_once();
  void drop_oldest(std::size_t values);

  double delta_;
  std::size_t max_buckets_;
  // rows_[r] holds buckets of 2^r values; front is oldest within the row.
  // Higher rows are older than lower rows.
  std::vector<std::deque<Bucket>> rows_;
  std::size_t width_ = 0;
  double total_ = 0.0;
  std::size_t detections_ = 0;
};

}  // namespace alertscreen::drift
