// alertscreen: run, synth, project, summarize.

#include <CLI11.hpp>

#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "alertscreen/app.hpp"
#include "alertscreen/config.hpp"
#include "alertscreen/errors.hpp"
#include "alertscreen/synth.hpp"
#include "alertscreen/text.hpp"

using namespace alertscreen;

int main(int argc, char** argv) {
  CLI::App cli{"Streaming alert-screening simulator"};
  cli.require_subcommand(1);

  // run
  auto* run = cli.add_subcommand("run", "Run strategies over a dataset, one directory per (strategy, seed)");
  std::string config_path, seeds, strategies, out_dir;
  std::vector<std::string> overrides;
  std::map<std::string, std::string> key_flags;
  run->add_option("--config", config_path, "key=value config file")->check(CLI::ExistingFile);
  run->add_option("--seed", seeds, "seed or comma-separated seeds")->required();
  run->add_option("--strategy", strategies, "strategy or comma-separated strategies")->required();
  run->add_option("--out", out_dir, "output root")->required();
  run->add_option("--set", overrides, "extra key=value overrides, applied last");
  for (const auto& key : config::known_keys()) {
    if (key == "run.seeds" || key == "strategy.kind" || key == "run.out") continue;
    run->add_option("--" + key, key_flags[key], "config key " + key);
  }

  // synth
  auto* synth = cli.add_subcommand("synth", "Write a synthetic alert stream and its manifest");
  synth::SyntheticStreamSpec spec;
  std::string topology = synth::to_string(spec.topology);
  std::vector<std::string> drifts;
  std::string csv_path, manifest_path;
  synth->add_option("--length", spec.length, "events")->capture_default_str();
  synth->add_option("--prevalence", spec.prevalence, "positive rate in (0, 0.05]")->capture_default_str();
  synth->add_option("--features", spec.n_features, "numeric feature count")->capture_default_str();
  synth->add_option("--informative", spec.informative, "features whose positive mean is shifted")
      ->capture_default_str();
  synth->add_option("--separation", spec.separation, "initial positive mean shift")->capture_default_str();
  synth->add_option("--drift", drifts, "index;benign=v,...;positive=v,... (repeatable)");
  synth->add_option("--topology", topology, "recurrent-spikes or single-burst")->capture_default_str();
  synth->add_option("--spikes", spec.spikes, "spike count for recurrent-spikes")->capture_default_str();
  synth->add_option("--burst-start", spec.burst_start, "single-burst start as a fraction of length")
      ->capture_default_str();
  synth->add_option("--burst-density", spec.burst_density, "positive fraction inside attack windows")
      ->capture_default_str();
  synth->add_option("--seed", spec.seed, "generator seed")->capture_default_str();
  synth->add_option("--out", csv_path, "CSV path")->required();
  synth->add_option("--manifest", manifest_path, "manifest path (default: <out>.manifest)");

  // project
  auto* project = cli.add_subcommand("project", "Expected alert counts at a deployment prior");
  double recall = 0, fpr = 0, prior = 0.001;
  std::int64_t events = 1000000;
  project->add_option("--recall", recall, "model recall")->required();
  project->add_option("--fpr", fpr, "model false-positive rate")->required();
  project->add_option("--prior", prior, "positive prevalence")->capture_default_str();
  project->add_option("--events", events, "events per day")->capture_default_str();

  // summarize
  auto* summarize = cli.add_subcommand("summarize", "Rebuild per-strategy summary.json from run directories");
  std::string summarize_dir;
  summarize->add_option("--out", summarize_dir, "output root")->required();

  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = cli.exit(e);
    return code == 0 ? app::kExitOk : app::kExitConfig;
  }

  if (*run) {
    return app::guarded(
        [&] {
          config::RunConfig cfg = config_path.empty() ? config::RunConfig{} : config::RunConfig::load(config_path);
          for (const auto& [key, value] : key_flags) {
            if (run->count("--" + key) > 0) cfg.set(key, value);
          }
          for (const auto& kv : overrides) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
            cfg.set(text::trim(kv.substr(0, eq)), kv.substr(eq + 1));
          }
          cfg.set("run.seeds", seeds);
          cfg.set("strategy.kind", strategies);
          cfg.set("run.out", out_dir);
          const app::RunOutputs outputs = app::cmd_run(cfg);
          for (const auto& d : outputs.run_dirs) std::cout << d << "\n";
          for (const auto& s : outputs.summary_files) std::cout << s << "\n";
        },
        std::cerr);
  }
  if (*synth) {
    return app::guarded(
        [&] {
          spec.topology = synth::topology_from_string(topology);
          for (const auto& d : drifts) spec.drift_points.push_back(synth::drift_point_from_string(d));
          if (manifest_path.empty()) manifest_path = csv_path + ".manifest";
          synth::write(spec, csv_path, manifest_path);
          std::cout << csv_path << "\n" << manifest_path << "\n";
        },
        std::cerr);
  }
  if (*project) {
    return app::guarded([&] { std::cout << app::format_projection(recall, fpr, prior, events); }, std::cerr);
  }
  return app::guarded(
      [&] {
        for (const auto& s : app::cmd_summarize(summarize_dir)) std::cout << s << "\n";
      },
      std::cerr);
}
