#include "alertscreen/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "alertscreen/errors.hpp"
#include "alertscreen/text.hpp"

namespace alertscreen::ingest {
namespace {

const std::set<std::string> kExplicitDrop = {
    "label", "timestamp", "ts",          "datetime",     "date",
    "split", "fold_id",   "attack_type", "dataset_name", "time_group",
};

const std::vector<std::string> kDenySubstrings = {
    "attack", "verdict",      "malicious",  "suspicious", "incriminated",
    "dataset_name", "time_group", "split", "fold",
};

bool is_missing(const std::string& v) {
  if (v.empty()) return true;
  const std::string lower = text::to_lower(v);
  return lower == "na" || lower == "nan" || lower == "null" || lower == "none";
}

// Days since 1970-01-01 for a proleptic Gregorian date.
std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const auto yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

int parse_label(const std::string& raw, std::size_t line) {
  const std::string v = text::to_lower(text::trim(raw));
  if (v == "1" || v == "1.0" || v == "true" || v == "malicious") return 1;
  if (v == "0" || v == "0.0" || v == "false" || v == "benign") return 0;
  throw DataError("line " + std::to_string(line) + ": label must be 0 or 1, got '" + raw + "'");
}

}  // namespace

Manifest Manifest::parse(const std::string& content) {
  Manifest m;
  m.label_column.clear();
  m.timestamp_column.clear();
  std::istringstream in(content);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = text::trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("manifest line " + std::to_string(lineno) + ": expected key=value");
    }
    const std::string key = text::trim(line.substr(0, eq));
    const std::string value = text::trim(line.substr(eq + 1));
    if (key == "label_column") {
      m.label_column = value;
    } else if (key == "timestamp_column") {
      m.timestamp_column = value;
    } else if (key == "categorical") {
      m.categorical = text::split_list(value);
    } else if (key == "numeric") {
      m.numeric = text::split_list(value);
    } else if (key == "derive_time_since") {
      m.derive_time_since = value;
    } else {
      throw ConfigError("manifest: unknown key '" + key + "'");
    }
  }
  if (m.label_column.empty()) throw ConfigError("manifest: label_column is required");
  if (m.timestamp_column.empty()) throw ConfigError("manifest: timestamp_column is required");
  return m;
}

Manifest Manifest::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open manifest '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::string Manifest::serialize() const {
  std::ostringstream out;
  out << "label_column=" << label_column << "\n";
  out << "timestamp_column=" << timestamp_column << "\n";
  out << "categorical=" << text::join(categorical, ",") << "\n";
  out << "numeric=" << text::join(numeric, ",") << "\n";
  if (!derive_time_since.empty()) out << "derive_time_since=" << derive_time_since << "\n";
  return out.str();
}

std::vector<std::string> apply_leakage_filter(const std::vector<std::string>& column_names) {
  std::vector<std::string> retained;
  for (const auto& name : column_names) {
    if (kExplicitDrop.count(name)) continue;
    const std::string lower = text::to_lower(name);
    const bool denied = std::any_of(kDenySubstrings.begin(), kDenySubstrings.end(),
                                    [&](const std::string& s) { return lower.find(s) != std::string::npos; });
    if (!denied) retained.push_back(name);
  }
  if (retained.empty()) throw DataError("no usable features");
  return retained;
}

std::vector<double> compute_time_since(const std::vector<std::int64_t>& sorted_timestamps) {
  std::vector<double> out(sorted_timestamps.size(), 0.0);
  for (std::size_t i = 1; i < sorted_timestamps.size(); ++i) {
    if (sorted_timestamps[i] < sorted_timestamps[i - 1]) {
      throw std::invalid_argument("compute_time_since: timestamps not sorted at position " +
                                  std::to_string(i));
    }
    out[i] = static_cast<double>(sorted_timestamps[i] - sorted_timestamps[i - 1]);
  }
  return out;
}

std::int64_t parse_timestamp_ms(const std::string& raw) {
  const std::string s = text::trim(raw);
  if (s.empty()) throw DataError("empty timestamp");
  {
    std::int64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec == std::errc() && ptr == s.data() + s.size()) return v;
  }
  // YYYY-MM-DD[T ]hh:mm:ss[.fff][Z|+hh:mm|-hh:mm]
  auto num = [&](std::size_t pos, std::size_t len) -> int {
    if (pos + len > s.size()) throw DataError("bad timestamp '" + s + "'");
    int v = 0;
    for (std::size_t i = pos; i < pos + len; ++i) {
      if (!std::isdigit(static_cast<unsigned char>(s[i]))) throw DataError("bad timestamp '" + s + "'");
      v = v * 10 + (s[i] - '0');
    }
    return v;
  };
  if (s.size() < 10 || s[4] != '-' || s[7] != '-') throw DataError("bad timestamp '" + s + "'");
  const int year = num(0, 4);
  const int month = num(5, 2);
  const int day = num(8, 2);
  int hour = 0, minute = 0, second = 0, millis = 0;
  std::size_t pos = 10;
  if (pos < s.size() && (s[pos] == 'T' || s[pos] == ' ')) {
    hour = num(pos + 1, 2);
    if (s.size() < pos + 6 || s[pos + 3] != ':') throw DataError("bad timestamp '" + s + "'");
    minute = num(pos + 4, 2);
    pos += 6;
    if (pos < s.size() && s[pos] == ':') {
      second = num(pos + 1, 2);
      pos += 3;
    }
    if (pos < s.size() && s[pos] == '.') {
      ++pos;
      int scale = 100;
      while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) {
        millis += (s[pos] - '0') * scale;
        scale /= 10;
        ++pos;
      }
    }
  }
  std::int64_t offset_min = 0;
  if (pos < s.size()) {
    if (s[pos] == 'Z') {
      ++pos;
    } else if (s[pos] == '+' || s[pos] == '-') {
      const int sign = s[pos] == '+' ? 1 : -1;
      const int oh = num(pos + 1, 2);
      int om = 0;
      if (pos + 3 < s.size() && s[pos + 3] == ':') {
        om = num(pos + 4, 2);
        pos += 6;
      } else if (pos + 5 <= s.size()) {
        om = num(pos + 3, 2);
        pos += 5;
      } else {
        pos += 3;
      }
      offset_min = sign * (oh * 60 + om);
    }
  }
  if (pos != s.size() || month < 1 || month > 12 || day < 1 || day > 31 || hour > 23 || minute > 59 ||
      second > 60) {
    throw DataError("bad timestamp '" + s + "'");
  }
  const std::int64_t days = days_from_civil(year, static_cast<unsigned>(month), static_cast<unsigned>(day));
  const std::int64_t secs = days * 86400 + hour * 3600 + minute * 60 + second - offset_min * 60;
  return secs * 1000 + millis;
}

Dataset make_dataset(std::vector<EventRecord> events, const Manifest& manifest,
                     const std::vector<std::string>& header) {
  std::stable_sort(events.begin(), events.end(),
                   [](const EventRecord& a, const EventRecord& b) { return a.timestamp_ms < b.timestamp_ms; });
  for (std::size_t i = 0; i < events.size(); ++i) events[i].index = i;

  Dataset ds;
  std::vector<std::string> declared;
  for (const auto& c : manifest.categorical) {
    declared.push_back(c);
    ds.kinds[c] = ColumnKind::kCategorical;
  }
  for (const auto& c : manifest.numeric) {
    declared.push_back(c);
    ds.kinds[c] = ColumnKind::kNumeric;
  }

  const std::set<std::string> present(header.begin(), header.end());
  std::vector<std::string> candidates;
  for (const auto& h : header) {
    if (h == manifest.label_column || h == manifest.timestamp_column) continue;
    if (ds.kinds.count(h)) candidates.push_back(h);
  }
  for (const auto& d : declared) {
    if (!present.count(d) && d != manifest.derive_time_since) {
      throw DataError("manifest column '" + d + "' not present in data header");
    }
  }

  if (!manifest.derive_time_since.empty()) {
    std::vector<std::int64_t> ts(events.size());
    for (std::size_t i = 0; i < events.size(); ++i) ts[i] = events[i].timestamp_ms;
    const auto gaps = compute_time_since(ts);
    for (std::size_t i = 0; i < events.size(); ++i) {
      events[i].raw_fields[manifest.derive_time_since] =
          std::to_string(static_cast<std::int64_t>(gaps[i]));
    }
    ds.kinds[manifest.derive_time_since] = ColumnKind::kNumeric;
    candidates.push_back(manifest.derive_time_since);
  }

  if (candidates.empty()) throw DataError("no usable features");
  ds.features = apply_leakage_filter(candidates);
  ds.events = std::move(events);
  return ds;
}

Dataset parse_csv(const std::string& csv_text, const Manifest& manifest) {
  std::istringstream in(csv_text);
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty CSV input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::vector<std::string> header = text::split_csv_line(line);

  std::unordered_map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
  if (!col.count(manifest.label_column)) {
    throw DataError("label column '" + manifest.label_column + "' missing from header");
  }
  if (!col.count(manifest.timestamp_column)) {
    throw DataError("timestamp column '" + manifest.timestamp_column + "' missing from header");
  }
  const std::size_t label_col = col[manifest.label_column];
  const std::size_t ts_col = col[manifest.timestamp_column];

  std::vector<std::pair<std::string, std::size_t>> keep;
  for (const auto& c : manifest.categorical) {
    if (col.count(c)) keep.emplace_back(c, col[c]);
  }
  for (const auto& c : manifest.numeric) {
    if (col.count(c)) keep.emplace_back(c, col[c]);
  }

  std::vector<EventRecord> events;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = text::split_csv_line(line);
    if (fields.size() != header.size()) {
      throw DataError("line " + std::to_string(lineno) + ": expected " + std::to_string(header.size()) +
                      " fields, got " + std::to_string(fields.size()));
    }
    EventRecord ev;
    ev.timestamp_ms = parse_timestamp_ms(fields[ts_col]);
    ev.label = parse_label(fields[label_col], lineno);
    for (const auto& [name, idx] : keep) ev.raw_fields[name] = fields[idx];
    events.push_back(std::move(ev));
  }
  return make_dataset(std::move(events), manifest, header);
}

Dataset load_csv(const std::string& csv_path, const Manifest& manifest) {
  std::ifstream in(csv_path, std::ios::binary);
  if (!in) throw DataError("cannot open data file '" + csv_path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_csv(ss.str(), manifest);
}

std::size_t Preprocessor::width() const {
  std::size_t w = 0;
  for (const auto& c : columns) w += c.kind == ColumnKind::kCategorical ? c.vocab.size() + 1 : 1;
  return w;
}

Preprocessor fit_preprocessor(const std::vector<EventRecord>& train, const Dataset& dataset) {
  if (train.empty()) throw std::invalid_argument("fit_preprocessor: empty training set");
  Preprocessor prep;
  for (const auto& name : dataset.features) {
    Preprocessor::Column column;
    column.name = name;
    column.kind = dataset.kinds.at(name);

    if (column.kind == ColumnKind::kCategorical) {
      std::unordered_map<std::string, std::size_t> counts;
      for (const auto& ev : train) {
        const auto it = ev.raw_fields.find(name);
        if (it == ev.raw_fields.end() || is_missing(it->second)) continue;
        if (counts[it->second]++ == 0) column.vocab.push_back(it->second);
      }
      if (column.vocab.empty()) throw DataError("column '" + name + "' entirely missing in train");
      // Ties go to the category seen first.
      std::size_t best = 0;
      for (const auto& v : column.vocab) {
        if (counts[v] > best) {
          best = counts[v];
          column.mode = v;
        }
      }
    } else {
      std::vector<double> present;
      std::size_t missing = 0;
      for (const auto& ev : train) {
        const auto it = ev.raw_fields.find(name);
        if (it == ev.raw_fields.end() || is_missing(it->second)) {
          ++missing;
          continue;
        }
        present.push_back(text::parse_double(it->second, name));
      }
      if (present.empty()) throw DataError("column '" + name + "' entirely missing in train");
      std::vector<double> sorted = present;
      std::sort(sorted.begin(), sorted.end());
      const std::size_t n = sorted.size();
      column.median = n % 2 == 1 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);

      // Statistics over the imputed column: present values plus `missing`
      // copies of the median.
      const double total = static_cast<double>(present.size() + missing);
      double sum = static_cast<double>(missing) * column.median;
      for (double v : present) sum += v;
      column.mean = sum / total;
      double ss = static_cast<double>(missing) * (column.median - column.mean) * (column.median - column.mean);
      for (double v : present) ss += (v - column.mean) * (v - column.mean);
      const double sd = std::sqrt(ss / total);
      column.stddev = sd > 0.0 && std::isfinite(sd) ? sd : 1.0;
    }
    prep.columns.push_back(std::move(column));
  }
  return prep;
}

Matrix transform(const std::vector<EventRecord>& events, const Preprocessor& prep) {
  const std::size_t width = prep.width();
  Matrix out(events.size(), width);
  // Per-column category lookup built once.
  std::vector<std::unordered_map<std::string, std::size_t>> lookup(prep.columns.size());
  for (std::size_t c = 0; c < prep.columns.size(); ++c) {
    const auto& vocab = prep.columns[c].vocab;
    for (std::size_t k = 0; k < vocab.size(); ++k) lookup[c][vocab[k]] = k;
  }
  for (std::size_t r = 0; r < events.size(); ++r) {
    auto row = out.row(r);
    std::size_t offset = 0;
    for (std::size_t c = 0; c < prep.columns.size(); ++c) {
      const auto& column = prep.columns[c];
      const auto it = events[r].raw_fields.find(column.name);
      const bool missing = it == events[r].raw_fields.end() || is_missing(it->second);
      if (column.kind == ColumnKind::kCategorical) {
        const std::string& value = missing ? column.mode : it->second;
        const auto hit = lookup[c].find(value);
        const std::size_t slot = hit == lookup[c].end() ? column.vocab.size() : hit->second;
        row[offset + slot] = 1.0;
        offset += column.vocab.size() + 1;
      } else {
        const double value = missing ? column.median : text::parse_double(it->second, column.name);
        row[offset] = (value - column.mean) / column.stddev;
        offset += 1;
      }
    }
  }
  return out;
}

Split chronological_split(const std::vector<EventRecord>& sorted_events, const SplitSpec& spec) {
  if (spec.train_positive_target == 0) throw std::invalid_argument("train_positive_target must be positive");
  for (std::size_t i = 1; i < sorted_events.size(); ++i) {
    if (sorted_events[i].timestamp_ms < sorted_events[i - 1].timestamp_ms) {
      throw std::invalid_argument("chronological_split: events not sorted");
    }
  }
  std::size_t seen = 0;
  std::size_t cut = sorted_events.size();
  for (std::size_t i = 0; i < sorted_events.size(); ++i) {
    if (sorted_events[i].label == 1 && ++seen == spec.train_positive_target) {
      cut = i + 1;
      break;
    }
  }
  if (seen < spec.train_positive_target) {
    throw DataError("chronological_split: dataset has only " + std::to_string(seen) + " positives, need " +
                    std::to_string(spec.train_positive_target));
  }
  Split split;
  split.train.assign(sorted_events.begin(), sorted_events.begin() + static_cast<std::ptrdiff_t>(cut));
  split.stream.assign(sorted_events.begin() + static_cast<std::ptrdiff_t>(cut), sorted_events.end());
  split.train_positives = seen;
  for (const auto& ev : split.stream) split.stream_positives += ev.label == 1;
  return split;
}

}  // namespace alertscreen::ingest
