#include <pybind11/pybind11.h>
#include <pybind11/stl.h>


#include "alertscreen/acquisition.hpp"
#include "alertscreen/adwin.hpp"
#include "alertscreen/app.hpp"
#include "alertscreen/config.hpp"
#include "alertscreen/controller.hpp"
#include "alertscreen/errors.hpp"
#include "alertscreen/metrics.hpp"
#include "alertscreen/objective.hpp"
#include "alertscreen/rng.hpp"
#include "alertscreen/synth.hpp"

namespace py = pybind11;
using namespace alertscreen;

namespace {

py::dict endpoints_dict(const metrics::Endpoints& e) {
  py::dict d;
  const auto fields = e.numeric_fields();
  for (const auto& [k, v] : fields) d[py::str(k)] = v;
  for (const char* k : {"fp_per_million_benign", "positive_window_recall", "mean_burst_delay"})
    if (!fields.count(k)) d[k] = py::none();
  return d;
}

synth::SyntheticStreamSpec make_spec(std::size_t length, double prevalence, std::size_t n_features,
                                     const std::string& topology, std::uint64_t seed,
                                     const std::vector<std::string>& drifts) {
  synth::SyntheticStreamSpec spec;
  spec.length = length;
  spec.prevalence = prevalence;
  spec.n_features = n_features;
  spec.topology = synth::topology_from_string(topology);
  spec.seed = seed;
  for (const auto& d : drifts) spec.drift_points.push_back(synth::drift_point_from_string(d));
  spec.validate();
  return spec;
}

}  // namespace

PYBIND11_MODULE(_alertscreen, m) {
  m.doc() = "Streaming alert-screening simulator: projections, drift detection, label acquisition, runs.";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<DataError>(m, "DataError", PyExc_RuntimeError);

  m.def(
      "bayes_projection",
      [](double recall, double fpr, double prior, std::int64_t events) {
        const auto p = metrics::bayes_projection(recall, fpr, prior, events);
        py::dict d;
        d["positives"] = p.positives;
        d["negatives"] = p.negatives;
        d["true_alerts"] = p.true_alerts;
        d["false_alerts"] = p.false_alerts;
        d["precision"] = p.precision ? py::cast(*p.precision) : py::none();
        return d;
      },
      py::arg("recall"), py::arg("fpr"), py::arg("prior") = 0.001, py::arg("events") = 1000000);
  m.def("format_projection", &app::format_projection, py::arg("recall"), py::arg("fpr"), py::arg("prior") = 0.001,
        py::arg("events") = 1000000);
  m.def("fp_burden", &metrics::fp_burden, py::arg("cum_fp"), py::arg("benign_count"));

  m.def(
      "focal_derivatives",
      [](double p, int y, double alpha, double gamma) {
        const auto gh = gbt::objective_derivatives(p, y, gbt::Objective{gbt::ObjectiveKind::kFocal, alpha, gamma});
        return py::make_tuple(gh.grad, gh.hess);
      },
      py::arg("p"), py::arg("y"), py::arg("alpha") = 0.25, py::arg("gamma") = 2.0,
      "Gradient and Hessian of the focal loss with respect to the margin.");

  m.def(
      "select_query_batch",
      [](const std::vector<double>& scores, double theta, std::size_t budget, const std::string& policy,
         std::uint64_t seed) {
        Rng rng(seed);
        return acquisition::select_query_batch(scores, theta, budget, acquisition::policy_from_string(policy), rng)
            .indices;
      },
      py::arg("scores"), py::arg("theta"), py::arg("budget"), py::arg("policy") = "hybrid", py::arg("seed") = 42);

  py::class_<drift::Adwin>(m, "Adwin")
      .def(py::init<double, std::size_t>(), py::arg("delta") = 0.002, py::arg("max_buckets") = 5)
      .def("update", &drift::Adwin::update, py::arg("value"))
      .def_property_readonly("width", &drift::Adwin::width)
      .def_property_readonly("mean", &drift::Adwin::mean)
      .def_property_readonly("detections", &drift::Adwin::detections);

  m.def(
      "synth",
      [](std::size_t length, double prevalence, std::size_t n_features, const std::string& topology,
         std::uint64_t seed, const std::vector<std::string>& drifts) {
        const auto s = synth::generate(make_spec(length, prevalence, n_features, topology, seed, drifts));
        py::dict d;
        d["labels"] = s.labels;
        d["numeric"] = s.numeric.data();
        d["n_features"] = s.numeric.cols();
        d["category"] = s.category;
        d["timestamps_ms"] = s.timestamps_ms;
        return d;
      },
      py::arg("length") = 100000, py::arg("prevalence") = 0.01, py::arg("n_features") = 6,
      py::arg("topology") = "recurrent-spikes", py::arg("seed") = 42, py::arg("drifts") = std::vector<std::string>{});
  m.def(
      "write_synth",
      [](const std::string& csv, const std::string& manifest, std::size_t length, double prevalence,
         std::size_t n_features, const std::string& topology, std::uint64_t seed,
         const std::vector<std::string>& drifts) {
        synth::write(make_spec(length, prevalence, n_features, topology, seed, drifts), csv, manifest);
      },
      py::arg("csv"), py::arg("manifest"), py::arg("length") = 100000, py::arg("prevalence") = 0.01,
      py::arg("n_features") = 6, py::arg("topology") = "recurrent-spikes", py::arg("seed") = 42,
      py::arg("drifts") = std::vector<std::string>{});

  m.def("config_keys", &config::known_keys);
  m.def(
      "run",
      [](const std::string& config_text) {
        const auto out = app::cmd_run(config::RunConfig::parse(config_text));
        py::dict d;
        d["run_dirs"] = out.run_dirs;
        d["summary_files"] = out.summary_files;
        return d;
      },
      py::arg("config_text"), "Runs every (strategy, seed) in a key=value config and writes the output tree.");
  m.def("summarize", &app::cmd_summarize, py::arg("out_dir"));
  m.def(
      "read_endpoints", [](const std::string& json_text) { return endpoints_dict(metrics::endpoints_from_json(json_text)); },
      py::arg("json_text"));
}
