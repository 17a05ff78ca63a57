#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "alertscreen/app.hpp"
#include "alertscreen/config.hpp"
#include "alertscreen/errors.hpp"
#include "alertscreen/synth.hpp"

using namespace alertscreen;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("alertscreen_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t count_entries(const fs::path& dir) {
  std::size_t n = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir)) ++n;
  return n;
}

// A 10k-event stream with a light model so runs stay fast.
config::RunConfig small_run(const fs::path& root) {
  synth::SyntheticStreamSpec spec;
  spec.length = 10000;
  spec.prevalence = 0.02;
  spec.seed = 9;
  synth::write(spec, (root / "data.csv").string(), (root / "data.manifest").string());
  config::RunConfig c;
  c.data_path = (root / "data.csv").string();
  c.manifest_path = (root / "data.manifest").string();
  c.out_dir = (root / "out").string();
  c.train_positives = 50;
  c.stream.train.initial_rounds = 20;
  c.stream.strategy.periodic_interval = 2000;
  return c;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(ALERTSCREEN_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("config parse, serialize, parse is the identity") {
  config::RunConfig c = config::RunConfig::parse(
      "adwin.delta=0.01\nrun.seeds=40,41,42\nstrategy.kind=frozen,adwin-hybrid\ngbt.learning_rate=0.05\n");
  CHECK(c.seeds == std::vector<std::int64_t>{40, 41, 42});
  CHECK(c.stream.adwin_delta == 0.01);
  const config::RunConfig back = config::RunConfig::parse(c.serialize());
  CHECK(back == c);
  CHECK(back.serialize() == c.serialize());
  CHECK(config::RunConfig::parse(config::RunConfig{}.serialize()) == config::RunConfig{});
}

TEST_CASE("defaults are populated when keys are omitted") {
  const config::RunConfig c = config::RunConfig::parse("");
  CHECK(c.seeds == std::vector<std::int64_t>{42});
  CHECK(c.stream.adwin_delta == 0.002);
  CHECK(c.stream.train.initial_rounds == 100);
  CHECK(c.stream.train.rounds_per_update == 10);
  CHECK(c.stream.train.max_trees == 500);
  CHECK(c.stream.strategy.batch_size == 1000);
  CHECK(c.stream.strategy.rolling_window == 10000);
  CHECK(c.stream.strategy.cooldown_events == 2000);
  CHECK(c.stream.strategy.b_min == 32);
  CHECK(config::known_keys().size() == c.entries().size());
}

TEST_CASE("unknown keys and bad values are config errors") {
  CHECK_THROWS_AS(config::RunConfig::parse("adwin.colour=red\n"), ConfigError);
  CHECK_THROWS_AS(config::RunConfig::parse("adwin.delta=abc\n"), ConfigError);
  CHECK_THROWS_AS(config::RunConfig::parse("adwin.delta=1.5\n"), ConfigError);
  CHECK_THROWS_AS(config::RunConfig::parse("no equals sign\n"), ConfigError);
  CHECK_THROWS_AS(config::RunConfig::parse("strategy.kind=psychic\n"), ConfigError);
}

TEST_CASE("synth: positive count within three binomial sigmas") {
  synth::SyntheticStreamSpec spec;
  spec.length = 100000;
  spec.prevalence = 0.01;
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    spec.seed = seed;
    const auto s = synth::generate(spec);
    std::size_t k = 0;
    for (int y : s.labels) k += static_cast<std::size_t>(y);
    const double sigma = std::sqrt(100000 * 0.01 * 0.99);
    CHECK(std::fabs(static_cast<double>(k) - 1000.0) <= 3.0 * sigma);
  }
}

TEST_CASE("synth: single-burst positives lie in one contiguous window") {
  synth::SyntheticStreamSpec spec;
  spec.length = 50000;
  spec.prevalence = 0.005;
  spec.topology = synth::Topology::kSingleBurst;
  spec.burst_density = 0.5;
  const auto s = synth::generate(spec);
  std::size_t first = s.labels.size(), last = 0, k = 0;
  for (std::size_t i = 0; i < s.labels.size(); ++i) {
    if (s.labels[i]) {
      first = std::min(first, i);
      last = i;
      ++k;
    }
  }
  REQUIRE(k > 0);
  const std::size_t width = static_cast<std::size_t>(std::ceil(static_cast<double>(k) / spec.burst_density));
  CHECK(last - first + 1 <= width);
  // Benign events also sit inside the window, so positives are not the whole run.
  CHECK(last - first + 1 >= k);
}

TEST_CASE("synth: a drift point shifts benign means by the configured amount") {
  synth::SyntheticStreamSpec spec;
  spec.length = 100000;
  spec.drift_points = {synth::drift_point_from_string("50000;benign=1.5,0,0,0,0,0")};
  const auto s = synth::generate(spec);
  for (std::size_t f : {0u, 1u}) {
    double sum[2] = {0, 0}, sq[2] = {0, 0};
    double n[2] = {0, 0};
    for (std::size_t i = 0; i < s.labels.size(); ++i) {
      if (s.labels[i]) continue;
      const int side = i >= 50000;
      const double v = s.numeric(i, f);
      sum[side] += v;
      sq[side] += v * v;
      n[side] += 1;
    }
    const double m0 = sum[0] / n[0], m1 = sum[1] / n[1];
    const double v0 = sq[0] / n[0] - m0 * m0, v1 = sq[1] / n[1] - m1 * m1;
    const double expected = f == 0 ? 1.5 : 0.0;
    const double t = (m1 - m0 - expected) / std::sqrt(v0 / n[0] + v1 / n[1]);
    CAPTURE(f);
    CHECK(std::fabs(t) < 4.0);
  }
}

TEST_CASE("synth: generator settings validation and drift text round-trip") {
  synth::SyntheticStreamSpec spec;
  spec.prevalence = 0.2;
  CHECK_THROWS_AS(spec.validate(), ConfigError);
  const auto d = synth::drift_point_from_string("10;benign=1,2;positive=3,4");
  CHECK(synth::to_string(synth::drift_point_from_string(synth::to_string(d))) == synth::to_string(d));
  CHECK(synth::topology_from_string("single-burst") == synth::Topology::kSingleBurst);
}

TEST_CASE("run: frozen on a 10k stream queries nothing") {
  const fs::path root = scratch("frozen");
  config::RunConfig c = small_run(root);
  c.strategies = {controller::StrategyKind::kFrozen};
  app::cmd_run(c);
  const auto e = metrics::endpoints_from_json(slurp(root / "out" / "frozen" / "42" / "endpoints.json"));
  CHECK(e.queries == 0);
  CHECK(e.updates == 0);
  fs::remove_all(root);
}

TEST_CASE("run: strategy matrix writes 6 run directories and 2 summaries") {
  const fs::path root = scratch("matrix");
  config::RunConfig c = small_run(root);
  c.strategies = {controller::StrategyKind::kFrozen, controller::StrategyKind::kAdwinHybrid};
  c.seeds = {40, 41, 42};
  const app::RunOutputs out = app::cmd_run(c);
  CHECK(out.run_dirs.size() == 6);
  CHECK(out.summary_files.size() == 2);
  for (const auto& dir : out.run_dirs) {
    CAPTURE(dir);
    CHECK(count_entries(dir) == 4);
    for (const char* f : {"config.txt", "trace.csv", "endpoints.json", "triggers.txt"}) CHECK(fs::exists(fs::path(dir) / f));
  }
  for (const auto& s : out.summary_files) CHECK(fs::exists(s));

  SUBCASE("summarize rebuilds identical summaries") {
    std::vector<std::string> before;
    for (const auto& s : out.summary_files) before.push_back(slurp(s));
    for (const auto& s : out.summary_files) fs::remove(s);
    const auto rebuilt = app::cmd_summarize(c.out_dir);
    REQUIRE(rebuilt.size() == 2);
    for (std::size_t i = 0; i < before.size(); ++i) CHECK(slurp(out.summary_files[i]) == before[i]);
  }
  SUBCASE("the saved config snapshot reproduces its run") {
    const fs::path dir = fs::path(c.out_dir) / "adwin-hybrid" / "41";
    const std::string trace = slurp(dir / "trace.csv");
    config::RunConfig again = config::RunConfig::load((dir / "config.txt").string());
    again.out_dir = (root / "again").string();
    app::cmd_run(again);
    CHECK(slurp(root / "again" / "adwin-hybrid" / "41" / "trace.csv") == trace);
  }
  fs::remove_all(root);
}

TEST_CASE("run: identical config gives byte-identical files") {
  const fs::path root = scratch("determinism");
  config::RunConfig c = small_run(root);
  c.strategies = {controller::StrategyKind::kAdwinHybrid, controller::StrategyKind::kPeriodic};
  app::cmd_run(c);
  std::vector<std::string> first;
  for (const char* s : {"adwin-hybrid", "periodic"})
    for (const char* f : {"trace.csv", "endpoints.json", "triggers.txt"}) first.push_back(slurp(root / "out" / s / "42" / f));
  app::cmd_run(c);
  std::size_t i = 0;
  for (const char* s : {"adwin-hybrid", "periodic"})
    for (const char* f : {"trace.csv", "endpoints.json", "triggers.txt"}) CHECK(slurp(root / "out" / s / "42" / f) == first[i++]);
  fs::remove_all(root);
}

TEST_CASE("run: a failing run leaves no partial directory") {
  const fs::path root = scratch("partial");
  config::RunConfig c = small_run(root);
  c.strategies = {controller::StrategyKind::kMatchedReplay};
  c.replay_schedule_path = (root / "missing_schedule.txt").string();
  CHECK_THROWS(app::cmd_run(c));
  CHECK_FALSE(fs::exists(root / "out" / "matched-replay" / "42"));

  c.replay_schedule_path.clear();
  CHECK_THROWS_AS(app::cmd_run(c), ConfigError);
  fs::remove_all(root);
}

TEST_CASE("guarded maps exceptions to exit codes") {
  std::ostringstream err;
  CHECK(app::guarded([] {}, err) == app::kExitOk);
  CHECK(app::guarded([] { throw ConfigError("bad key"); }, err) == app::kExitConfig);
  CHECK(app::guarded([] { throw DataError("bad row"); }, err) == app::kExitData);
  CHECK(err.str().find("bad key") != std::string::npos);
}

TEST_CASE("projection table text") {
  const std::string t = app::format_projection(0.7634, 0.000150, 0.001, 1000000);
  CHECK(t.find("763") != std::string::npos);
  CHECK(t.find("149") != std::string::npos);
  CHECK(t.find("83.66%") != std::string::npos);
  CHECK_THROWS_AS(app::format_projection(0.5, 0.1, 1.5, 100), ConfigError);
}

TEST_CASE("binary exit codes") {
  const fs::path root = scratch("binary");
  CHECK(run_cli("--help") == 0);
  CHECK(run_cli("project --recall 0.9566 --fpr 0.000654") == 0);
  CHECK(run_cli("project --recall 0.9 --fpr 0.001 --prior 2") == 1);
  CHECK(run_cli("run --seed 1") == 1);
  CHECK(run_cli("frobnicate") == 1);
  const std::string csv = (root / "s.csv").string();
  CHECK(run_cli("synth --length 5000 --prevalence 0.02 --out " + csv) == 0);
  CHECK(fs::exists(csv + ".manifest"));
  CHECK(run_cli("synth --length 5000 --prevalence 0.5 --out " + csv) == 1);
  const std::string out = (root / "out").string();
  CHECK(run_cli("run --seed 3 --strategy frozen --out " + out + " --data.path " + csv + " --data.manifest " + csv +
                ".manifest --split.train_positives 20 --gbt.initial_rounds 10") == 0);
  CHECK(fs::exists(root / "out" / "frozen" / "3" / "endpoints.json"));
  CHECK(run_cli("run --seed 3 --strategy frozen --out " + out + " --data.path /nonexistent.csv --data.manifest " + csv +
                ".manifest") == 2);
  CHECK(run_cli("run --seed 3 --strategy frozen --out " + out + " --set adwin.delta=7 --data.path " + csv +
                " --data.manifest " + csv + ".manifest") == 1);
  CHECK(run_cli("summarize --out " + out) == 0);
  fs::remove_all(root);
}
