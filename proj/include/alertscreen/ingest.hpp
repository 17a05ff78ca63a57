#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "alertscreen/matrix.hpp"

namespace alertscreen::ingest {

/// One timestamped alert. `index` is the dense stream position assigned
/// after chronological sorting.
struct EventRecord {
  std::size_t index = 0;
  std::int64_t timestamp_ms = 0;
  std::map<std::string, std::string> raw_fields;
  int label = 0;
};

enum class ColumnKind { kCategorical, kNumeric };

/// Describes how to read a delimited alert file.
///
/// Text form, one `key=value` per line, `#` comments allowed:
///
///     label_column=label
///     timestamp_column=timestamp
///     categorical=feat_alert_category
///     numeric=feat_severity,feat_src_port,feat_dest_port
///     derive_time_since=feat_time_since_last_alert
///
/// `derive_time_since` is optional. When present, a numeric feature of that
/// name is computed causally from the sorted timestamps over the whole file
/// (so the first stream event sees the last train event) and appended last.
struct Manifest {
  std::string label_column = "label";
  std::string timestamp_column = "timestamp";
  std::vector<std::string> categorical;
  std::vector<std::string> numeric;
  std::string derive_time_since;

  static Manifest parse(const std::string& text);
  static Manifest load(const std::string& path);
  std::string serialize() const;
};

/// Feature columns that survive the leakage denylists, in input order.
/// Throws DataError("no usable features") when nothing survives.
std::vector<std::string> apply_leakage_filter(const std::vector<std::string>& column_names);

/// Gap to the previous event in milliseconds; the first event gets 0.
/// Throws std::invalid_argument on unsorted input.
std::vector<double> compute_time_since(const std::vector<std::int64_t>& sorted_timestamps);

/// Parses integer milliseconds or an ISO-8601 UTC timestamp
/// (`YYYY-MM-DD[T ]hh:mm:ss[.fff][Z|+hh:mm]`).
std::int64_t parse_timestamp_ms(const std::string& text);

struct Dataset {
  std::vector<EventRecord> events;   // chronologically sorted, dense indices
  std::vector<std::string> features;  // retained feature columns, manifest kinds
  std::map<std::string, ColumnKind> kinds;
};

/// Reads a comma-delimited file with a header row. Sorts chronologically
/// (stable) and assigns dense indices.
Dataset load_csv(const std::string& csv_path, const Manifest& manifest);
Dataset parse_csv(const std::string& csv_text, const Manifest& manifest);

/// Builds the dataset from in-memory records; sorts and reindexes.
Dataset make_dataset(std::vector<EventRecord> events, const Manifest& manifest,
                     const std::vector<std::string>& header);

struct Preprocessor {
  struct Column {
    std::string name;
    ColumnKind kind = ColumnKind::kNumeric;
    // Categorical: first-seen categories; the slot after them is UNSEEN.
    std::vector<std::string> vocab;
    std::string mode;
    // Numeric.
    double median = 0.0;
    double mean = 0.0;
    double stddev = 1.0;
  };
  std::vector<Column> columns;

  std::size_t width() const;
};

/// Imputes with train medians/modes first, then computes standardization
/// statistics on the imputed train matrix. Zero-variance columns get
/// stddev 1.
Preprocessor fit_preprocessor(const std::vector<EventRecord>& train, const Dataset& dataset);

/// Stream-time categories missing from the vocabulary map to the UNSEEN slot.
Matrix transform(const std::vector<EventRecord>& events, const Preprocessor& prep);

struct SplitSpec {
  std::size_t train_positive_target = 100;
};

struct Split {
  std::vector<EventRecord> train;
  std::vector<EventRecord> stream;
  std::size_t train_positives = 0;
  std::size_t stream_positives = 0;
};

/// Smallest chronological prefix holding exactly `train_positive_target`
/// positives; the stream is the remainder. Throws DataError when the data
/// has fewer positives than the target.
Split chronological_split(const std::vector<EventRecord>& sorted_events, const SplitSpec& spec);

}  // namespace alertscreen::ingest
