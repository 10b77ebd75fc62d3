#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "knxlab/lab/pipeline.hpp"

namespace fs = std::filesystem;
namespace lab = knxlab::lab;
namespace ids = knxlab::ids;
namespace sim = knxlab::sim;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name)
      : path(fs::temp_directory_path() / ("knxlab-test-" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

lab::ExperimentConfig short_config(const fs::path& out, std::uint64_t seed) {
  lab::ExperimentConfig cfg;
  cfg.seed = seed;
  cfg.out_dir = out.string();
  cfg.bus.duration_h = 2.0;
  cfg.detector.windows_min = {5.0, 10.0};
  return cfg;
}

}  // namespace

TEST(Config, DefaultsAreValid) {
  lab::ExperimentConfig cfg;
  EXPECT_NO_THROW(cfg.bus.validate());
  EXPECT_EQ(cfg.detector.windows_min,
            (std::vector<double>{5, 10, 20, 30, 40, 50, 60}));
  EXPECT_EQ(cfg.bus.controller.subscribed_groups.size(), 2u);
}

TEST(Config, ParsesAndValidates) {
  const auto j = lab::json::parse(R"({
    "seed": 42,
    "out": "results",
    "bus": {"duration_h": 6, "sensor": {"period": 30, "group": "1/2/3"}},
    "attack": {"falsifier": {"kind": "override", "value": 22.005},
               "delay": {"base": 0.08, "jitter_sd": 0.01, "dist": "uniform", "seed": 5}},
    "detector": {"windows_min": [5], "features": ["jsd"], "algorithms": ["svm"]}
  })");
  const auto cfg = lab::ExperimentConfig::from_json(j);
  EXPECT_EQ(cfg.seed, 42u);
  EXPECT_EQ(cfg.bus.duration_h, 6.0);
  EXPECT_EQ(cfg.bus.sensor.period, 30.0);
  EXPECT_EQ(cfg.bus.sensor.group, knxlab::knx::GroupAddress::three_level(1, 2, 3));
  EXPECT_EQ(cfg.attack.kind, knxlab::mitm::Falsifier::Kind::Override);
  EXPECT_EQ(cfg.attack.delay.dist, knxlab::mitm::DelayModel::Dist::Uniform);
  EXPECT_EQ(cfg.detector.features, (std::vector<ids::FeatureKind>{ids::FeatureKind::Jsd}));
}

TEST(Config, UnknownKeysRejected) {
  EXPECT_THROW(lab::ExperimentConfig::from_json(lab::json::parse(R"({"sede": 1})")),
               lab::ConfigError);
  EXPECT_THROW(lab::ExperimentConfig::from_json(
                   lab::json::parse(R"({"bus": {"sensor": {"perid": 30}}})")),
               lab::ConfigError);
  EXPECT_THROW(lab::ExperimentConfig::from_json(
                   lab::json::parse(R"({"attack": {"falsifier": {"kind": "sneaky"}}})")),
               lab::ConfigError);
  EXPECT_THROW(lab::ExperimentConfig::from_json(
                   lab::json::parse(R"({"detector": {"windows_min": []}})")),
               lab::ConfigError);
}

TEST(Pipeline, FeatureCsvRoundTrip) {
  TempDir tmp("features");
  std::vector<ids::FeatureVector> vectors;
  vectors.push_back({{0.125, 3.5e-7, 1.0 / 3.0}, ids::Label::Attack});
  vectors.push_back({{0.0, 1e300, -2.5}, ids::Label::NoAttack});
  const auto path = (tmp.path / "f.csv").string();
  lab::write_feature_csv(vectors, path);
  const auto back = lab::read_feature_csv(path);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].label, ids::Label::Attack);
  EXPECT_EQ(back[1].label, ids::Label::NoAttack);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t f = 0; f < 3; ++f)
      EXPECT_DOUBLE_EQ(back[i].values[f], vectors[i].values[f]);
}

TEST(Pipeline, BaselineBundleRoundTrip) {
  TempDir tmp("bundle");
  ids::HistogramSpec spec;
  spec.edges = {0.0, 0.001, 0.1, 2.5};
  std::vector<ids::Distribution> baseline{{{0.5, 0.25, 0.125, 0.125}},
                                          {{0.0, 1.0, 0.0, 0.0}}};
  const auto path = (tmp.path / "b.json").string();
  lab::write_baseline_bundle(spec, baseline, 300.0, path);
  const auto back = lab::read_baseline_bundle(path);
  EXPECT_EQ(back.window_s, 300.0);
  EXPECT_EQ(back.spec, spec);
  ASSERT_EQ(back.baseline.size(), 2u);
  EXPECT_EQ(back.baseline[0], baseline[0]);
  EXPECT_EQ(back.baseline[1], baseline[1]);
}

TEST(Pipeline, SimulateWritesConsistentCaptures) {
  TempDir tmp("simulate");
  const auto cfg = short_config(tmp.path, 5);
  std::ostringstream log;
  const auto summary = lab::cmd_simulate(cfg, log);
  EXPECT_GT(summary.baseline_telegrams, 0u);
  // Stealth path: one temperature write on the controller side per write on
  // the field side.
  EXPECT_EQ(summary.sensor_temperature_writes,
            summary.controller_temperature_writes);
  EXPECT_EQ(summary.modified, summary.sensor_temperature_writes);

  const auto baseline = sim::read_capture_jsonl(
      (lab::captures_dir(cfg) / "baseline.jsonl").string());
  for (const auto& r : baseline.records)
    EXPECT_NO_THROW(knxlab::knx::decode_telegram(r.raw));
}

TEST(Pipeline, TrainedSuiteDetectsFreshCaptures) {
  TempDir tmp("suite");
  auto cfg = short_config(tmp.path, 6);
  cfg.detector.windows_min = {5.0};
  cfg.detector.features = {ids::FeatureKind::Jsd};
  std::ostringstream log;
  const auto rows = lab::cmd_suite(cfg, log);
  ASSERT_EQ(rows.size(), 2u);  // one window, jsd, two algorithms

  // Verdicts from the trained SVM on the captures themselves.
  const auto model_file =
      lab::model_path(cfg, 5.0, ids::FeatureKind::Jsd, ids::Algo::Svm).string();
  const auto verdicts_file = (tmp.path / "verdicts.csv").string();
  lab::cmd_detect(model_file, (lab::captures_dir(cfg) / "attack.jsonl").string(),
                  verdicts_file, log);
  std::ifstream in(verdicts_file);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "window_start_s,verdict,score");
  std::size_t attack_windows = 0, total = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    ++total;
    if (line.find(",attack,") != std::string::npos) ++attack_windows;
  }
  ASSERT_GT(total, 0u);
  EXPECT_GT(2 * attack_windows, total);  // majority flagged on attack data

  // Rate table and report plots exist.
  EXPECT_TRUE(fs::exists(fs::path(cfg.out_dir) / "detection_rates.csv"));
  EXPECT_TRUE(fs::exists(lab::report_dir(cfg) / "rates_svm.csv"));
  EXPECT_TRUE(fs::exists(lab::hvac_dir(cfg) / "summary.json"));
}

TEST(Pipeline, MatchedSeedZeroDelayWindowsHaveZeroJsd) {
  // With the delay model zeroed and matching device streams, the
  // controller-side arrival process is identical with and without the relay:
  // matching windows diverge by exactly zero.
  lab::ExperimentConfig cfg;
  cfg.bus.duration_h = 2.0;
  lab::AttackConfig attack;
  attack.kind = knxlab::mitm::Falsifier::Kind::Passthrough;
  attack.delay.base = 0.0;
  attack.delay.jitter_sd = 0.0;

  const auto plain = lab::run_no_attack(cfg.bus, 77);
  const auto bridged = lab::run_with_relay(cfg.bus, attack, 77);
  ASSERT_EQ(plain.controller_capture.records.size(),
            bridged.controller_capture.records.size());

  const auto a = plain.controller_capture.timestamps();
  const auto b = bridged.controller_capture.timestamps();
  for (std::size_t i = 0; i < a.size(); ++i) ASSERT_DOUBLE_EQ(a[i], b[i]);

  const auto pooled = ids::inter_arrivals(a);
  const auto spec = ids::HistogramSpec::log_spaced(pooled);
  const auto sa = ids::segment_series(a, 300.0);
  const auto sb = ids::segment_series(b, 300.0);
  ASSERT_EQ(sa.size(), sb.size());
  for (std::size_t k = 0; k < sa.size(); ++k)
    EXPECT_EQ(ids::jsd(ids::histogram(sa[k].values, spec),
                       ids::histogram(sb[k].values, spec)),
              0.0);
}

TEST(Cli, ExitCodes) {
  TempDir tmp("cli");
  const auto bad_cfg = tmp.path / "bad.json";
  std::ofstream(bad_cfg) << R"({"attack": {"falsifier": {"kind": "nonsense"}}})";
  const auto good_cfg = tmp.path / "good.json";
  std::ofstream(good_cfg) << R"({"bus": {"duration_h": 0.5},
    "detector": {"windows_min": [5], "features": ["mean"], "algorithms": ["tree"]}})";

  const std::string bin = KNXLAB_CLI_BIN;
  const auto run = [&](const std::string& args) {
    const auto cmd = bin + " " + args + " >/dev/null 2>&1";
    return WEXITSTATUS(std::system(cmd.c_str()));
  };
  EXPECT_EQ(run("simulate --config " + bad_cfg.string() + " --out " +
                (tmp.path / "o1").string()),
            2);
  EXPECT_EQ(run("simulate --config " + good_cfg.string() + " --out " +
                (tmp.path / "o2").string()),
            0);
  // featurize without captures is a runtime error, not a config error.
  EXPECT_EQ(run("featurize --config " + good_cfg.string() + " --out " +
                (tmp.path / "o3").string()),
            1);
  EXPECT_NE(run("definitely-not-a-command"), 0);  // CLI11 parse failure
}
