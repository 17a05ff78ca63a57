#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "alertscreen/ingest.hpp"
#include "alertscreen/matrix.hpp"

namespace alertscreen::synth {

enum class Topology { kRecurrentSpikes, kSingleBurst };

std::string to_string(Topology t);
Topology topology_from_string(const std::string& name);

// From `index` on, the class-conditional means become the given vectors.
// An empty vector leaves that class unchanged.
struct DriftPoint {
  std::size_t index = 0;
  std::vector<double> benign_mean;
  std::vector<double> positive_mean;
};

// Text form: `index;benign=v,v,...;positive=v,v,...` (either part optional).
DriftPoint drift_point_from_string(const std::string& text);
std::string to_string(const DriftPoint& d);

struct SyntheticStreamSpec {
  std::size_t length = 100000;
  double prevalence = 0.01;
  std::size_t n_features = 6;
  std::vector<DriftPoint> drift_points;
  Topology topology = Topology::kRecurrentSpikes;
  std::uint64_t seed = 42;

  // Initial positive mean on the first `informative` features; benign
  // means start at zero everywhere.
  double separation = 2.0;
  std::size_t informative = 3;
  // Fraction of positions inside an attack window that are positive.
  double burst_density = 0.5;
  // Single burst: where the window starts, as a fraction of the length.
  double burst_start = 0.1;
  std::size_t spikes = 5;

  // Throws ConfigError.
  void validate() const;
};

struct SyntheticStream {
  std::vector<int> labels;
  Matrix numeric;                      // length x n_features
  std::vector<std::string> category;   // feat_proto
  std::vector<std::int64_t> timestamps_ms;
};

SyntheticStream generate(const SyntheticStreamSpec& spec);

// CSV columns: timestamp, feat_proto, feat_0..feat_{k-1}, label.
std::string to_csv(const SyntheticStream& stream);
ingest::Manifest manifest_for(const SyntheticStreamSpec& spec);

// Generates, then writes the CSV and manifest. Throws DataError on I/O failure.
void write(const SyntheticStreamSpec& spec, const std::string& csv_path, const std::string& manifest_path);

}  // namespace alertscreen::synth
