#include "alertscreen/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "alertscreen/errors.hpp"
#include "alertscreen/rng.hpp"
#include "alertscreen/text.hpp"

namespace alertscreen::synth {
namespace {

constexpr double kBenignGapMs = 1000.0;
constexpr double kAttackGapMs = 100.0;
constexpr std::int64_t kEpochMs = 1700000000000;

const std::vector<std::string> kBenignProtocols = {"tcp", "udp", "icmp", "dns"};

std::vector<double> parse_vector(const std::string& text, const std::string& what) {
  std::vector<double> out;
  for (const auto& part : text::split_list(text)) {
    try {
      out.push_back(text::parse_double(part, what));
    } catch (const DataError& e) {
      throw ConfigError(e.what());
    }
  }
  return out;
}

std::string format_vector(const std::vector<double>& v) {
  std::vector<std::string> parts;
  for (double x : v) parts.push_back(text::format_double(x));
  return text::join(parts, ",");
}

double exponential(Rng& rng, double mean) { return -std::log1p(-rng.uniform()) * mean; }

// Contiguous window of `width` positions starting at `start`, clipped to the
// stream, with `count` positives placed uniformly inside it.
void place(std::vector<int>& labels, std::vector<bool>& attack, std::size_t start, std::size_t count, double density,
           Rng& rng) {
  const std::size_t n = labels.size();
  if (count == 0) return;
  std::size_t width = static_cast<std::size_t>(std::ceil(static_cast<double>(count) / density));
  width = std::min(std::max(width, count), n);
  start = std::min(start, n - width);
  for (std::size_t i = 0; i < width; ++i) attack[start + i] = true;
  for (std::size_t k : rng.sample_without_replacement(width, count)) labels[start + k] = 1;
}

}  // namespace

std::string to_string(Topology t) { return t == Topology::kSingleBurst ? "single-burst" : "recurrent-spikes"; }

Topology topology_from_string(const std::string& name) {
  if (name == "single-burst") return Topology::kSingleBurst;
  if (name == "recurrent-spikes") return Topology::kRecurrentSpikes;
  throw ConfigError("unknown attack topology '" + name + "'");
}

DriftPoint drift_point_from_string(const std::string& spec) {
  const auto parts = text::split_list(spec, ';');
  if (parts.empty()) throw ConfigError("empty drift point");
  DriftPoint d;
  double index = 0;
  try {
    index = text::parse_double(parts[0], "drift index");
  } catch (const DataError& e) {
    throw ConfigError(e.what());
  }
  if (index < 0 || index != std::floor(index)) throw ConfigError("drift index must be a non-negative integer");
  d.index = static_cast<std::size_t>(index);
  for (std::size_t i = 1; i < parts.size(); ++i) {
    const auto eq = parts[i].find('=');
    if (eq == std::string::npos) throw ConfigError("drift part '" + parts[i] + "' lacks '='");
    const std::string key = text::trim(parts[i].substr(0, eq));
    const std::string value = parts[i].substr(eq + 1);
    if (key == "benign") {
      d.benign_mean = parse_vector(value, "benign mean");
    } else if (key == "positive") {
      d.positive_mean = parse_vector(value, "positive mean");
    } else {
      throw ConfigError("drift part must be benign= or positive=, got '" + key + "'");
    }
  }
  return d;
}

std::string to_string(const DriftPoint& d) {
  std::string out = std::to_string(d.index);
  if (!d.benign_mean.empty()) out += ";benign=" + format_vector(d.benign_mean);
  if (!d.positive_mean.empty()) out += ";positive=" + format_vector(d.positive_mean);
  return out;
}

void SyntheticStreamSpec::validate() const {
  if (length == 0) throw ConfigError("synthetic length must be > 0");
  if (!(prevalence > 0.0 && prevalence <= 0.05)) throw ConfigError("prevalence must lie in (0, 0.05]");
  if (n_features == 0) throw ConfigError("n_features must be > 0");
  if (informative > n_features) throw ConfigError("informative features exceed n_features");
  if (!(burst_density > 0.0 && burst_density <= 1.0)) throw ConfigError("burst density must lie in (0, 1]");
  if (!(burst_start >= 0.0 && burst_start < 1.0)) throw ConfigError("burst start must lie in [0, 1)");
  if (spikes == 0) throw ConfigError("spikes must be > 0");
  for (const auto& d : drift_points) {
    if (d.index >= length) throw ConfigError("drift index " + std::to_string(d.index) + " beyond stream length");
    for (const auto* v : {&d.benign_mean, &d.positive_mean}) {
      if (!v->empty() && v->size() != n_features) {
        throw ConfigError("drift mean vectors need " + std::to_string(n_features) + " values");
      }
    }
  }
}

SyntheticStream generate(const SyntheticStreamSpec& spec) {
  spec.validate();
  const std::size_t n = spec.length;
  const std::size_t k = spec.n_features;
  Rng rng(spec.seed);

  std::size_t positives = 0;
  for (std::size_t i = 0; i < n; ++i) positives += rng.bernoulli(spec.prevalence);

  SyntheticStream out;
  out.labels.assign(n, 0);
  std::vector<bool> attack(n, false);
  if (spec.topology == Topology::kSingleBurst) {
    place(out.labels, attack, static_cast<std::size_t>(spec.burst_start * static_cast<double>(n)), positives,
          spec.burst_density, rng);
  } else {
    for (std::size_t s = 0; s < spec.spikes; ++s) {
      const std::size_t count = positives / spec.spikes + (s < positives % spec.spikes ? 1 : 0);
      const double width = std::ceil(static_cast<double>(count) / spec.burst_density);
      const double center = (static_cast<double>(s) + 0.5) / static_cast<double>(spec.spikes) * static_cast<double>(n);
      const double start = std::max(0.0, center - width / 2.0);
      place(out.labels, attack, static_cast<std::size_t>(start), count, spec.burst_density, rng);
    }
  }

  std::vector<DriftPoint> drifts = spec.drift_points;
  std::stable_sort(drifts.begin(), drifts.end(), [](const auto& a, const auto& b) { return a.index < b.index; });
  std::vector<double> benign_mean(k, 0.0);
  std::vector<double> positive_mean(k, 0.0);
  for (std::size_t j = 0; j < spec.informative; ++j) positive_mean[j] = spec.separation;

  out.numeric = Matrix(n, k);
  out.category.resize(n);
  out.timestamps_ms.resize(n);
  std::size_t next_drift = 0;
  double clock = static_cast<double>(kEpochMs);
  for (std::size_t i = 0; i < n; ++i) {
    while (next_drift < drifts.size() && drifts[next_drift].index <= i) {
      if (!drifts[next_drift].benign_mean.empty()) benign_mean = drifts[next_drift].benign_mean;
      if (!drifts[next_drift].positive_mean.empty()) positive_mean = drifts[next_drift].positive_mean;
      ++next_drift;
    }
    const bool positive = out.labels[i] == 1;
    const auto& mean = positive ? positive_mean : benign_mean;
    auto row = out.numeric.row(i);
    for (std::size_t j = 0; j < k; ++j) row[j] = mean[j] + rng.normal();

    // Protocol is weakly informative: attacks favour smb, benign rarely uses it.
    const double smb_rate = positive ? 0.3 : 0.05;
    out.category[i] = rng.bernoulli(smb_rate) ? "smb" : kBenignProtocols[rng.below(kBenignProtocols.size())];

    clock += std::max(1.0, std::round(exponential(rng, attack[i] ? kAttackGapMs : kBenignGapMs)));
    out.timestamps_ms[i] = static_cast<std::int64_t>(clock);
  }
  return out;
}

std::string to_csv(const SyntheticStream& stream) {
  const std::size_t k = stream.numeric.cols();
  std::string out = "timestamp,feat_proto";
  for (std::size_t j = 0; j < k; ++j) out += ",feat_" + std::to_string(j);
  out += ",label\n";
  for (std::size_t i = 0; i < stream.labels.size(); ++i) {
    out += std::to_string(stream.timestamps_ms[i]);
    out += ',';
    out += stream.category[i];
    for (double v : stream.numeric.row(i)) {
      out += ',';
      out += text::format_double(v);
    }
    out += ',';
    out += std::to_string(stream.labels[i]);
    out += '\n';
  }
  return out;
}

ingest::Manifest manifest_for(const SyntheticStreamSpec& spec) {
  ingest::Manifest m;
  m.label_column = "label";
  m.timestamp_column = "timestamp";
  m.categorical = {"feat_proto"};
  for (std::size_t j = 0; j < spec.n_features; ++j) m.numeric.push_back("feat_" + std::to_string(j));
  m.derive_time_since = "feat_time_since_last";
  return m;
}

void write(const SyntheticStreamSpec& spec, const std::string& csv_path, const std::string& manifest_path) {
  const SyntheticStream stream = generate(spec);
  std::ofstream csv(csv_path, std::ios::binary);
  if (!csv) throw DataError("cannot write '" + csv_path + "'");
  csv << to_csv(stream);
  std::ofstream manifest(manifest_path, std::ios::binary);
  if (!manifest) throw DataError("cannot write '" + manifest_path + "'");
  manifest << manifest_for(spec).serialize();
  if (!csv || !manifest) throw DataError("write failed");
}

}  // namespace alertscreen::synth
