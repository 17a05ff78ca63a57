#pragma once

// Builds prepared streams from the synthetic generator through the same
// CSV path the CLI uses.

#include <string>
#include <vector>

#include "alertscreen/controller.hpp"
#include "alertscreen/ingest.hpp"
#include "alertscreen/metrics.hpp"
#include "alertscreen/synth.hpp"

namespace fixture {

inline alertscreen::controller::PreparedData prepare(const alertscreen::synth::SyntheticStreamSpec& spec,
                                                     std::size_t train_positives = 100) {
  using namespace alertscreen;
  const synth::SyntheticStream stream = synth::generate(spec);
  const ingest::Dataset ds = ingest::parse_csv(synth::to_csv(stream), synth::manifest_for(spec));
  return controller::prepare(ds, ingest::SplitSpec{train_positives});
}

// Every stream row, encoded in one go.
inline alertscreen::Matrix all_rows(const alertscreen::controller::StreamData& s) { return s.rows(0, s.size()); }

inline std::string trace_text(const alertscreen::controller::RunResult& r) {
  return alertscreen::metrics::trace_to_csv(r.trace);
}

}  // namespace fixture
