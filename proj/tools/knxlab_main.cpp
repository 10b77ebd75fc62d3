// Command-line front end: simulate | hvac | featurize | train | detect |
// suite | report. Configuration comes from --config JSON with defaults for
// everything; --seed and --out override the file.

#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "knxlab/lab/pipeline.hpp"

namespace {

struct GlobalOpts {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
};

knxlab::lab::ExperimentConfig load_config(const GlobalOpts& opts) {
  auto cfg = opts.config_path.empty()
                 ? knxlab::lab::ExperimentConfig{}
                 : knxlab::lab::ExperimentConfig::from_file(opts.config_path);
  if (opts.seed) cfg.seed = *opts.seed;
  if (opts.out_dir) cfg.out_dir = *opts.out_dir;
  return cfg;
}

void add_global_opts(CLI::App* cmd, GlobalOpts& opts) {
  cmd->add_option("--config", opts.config_path, "experiment config JSON");
  cmd->add_option("--seed", opts.seed, "root seed override");
  cmd->add_option("--out", opts.out_dir, "output directory override");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"KNX false-data-injection laboratory"};
  app.require_subcommand(1);

  GlobalOpts opts;
  std::string model_file, capture_file, verdicts_file = "verdicts.csv";

  auto* simulate = app.add_subcommand("simulate", "generate baseline and attack captures");
  add_global_opts(simulate, opts);
  auto* hvac = app.add_subcommand("hvac", "run the energy-impact model");
  add_global_opts(hvac, opts);
  auto* featurize = app.add_subcommand("featurize", "extract features from captures");
  add_global_opts(featurize, opts);
  auto* train = app.add_subcommand("train", "train classifiers and emit the rate table");
  add_global_opts(train, opts);
  auto* suite = app.add_subcommand("suite", "full pipeline: simulate, hvac, featurize, train, report");
  add_global_opts(suite, opts);
  auto* report = app.add_subcommand("report", "emit plot-ready CSVs");
  add_global_opts(report, opts);
  auto* detect = app.add_subcommand("detect", "classify capture windows with a trained model");
  add_global_opts(detect, opts);
  detect->add_option("--model", model_file, "model JSON")->required();
  detect->add_option("--capture", capture_file, "capture JSONL")->required();
  detect->add_option("--verdicts", verdicts_file, "verdict CSV output");

  CLI11_PARSE(app, argc, argv);

  try {
    if (detect->parsed()) {
      knxlab::lab::cmd_detect(model_file, capture_file, verdicts_file);
      return 0;
    }
    const auto cfg = load_config(opts);
    if (simulate->parsed()) knxlab::lab::cmd_simulate(cfg);
    if (hvac->parsed()) knxlab::lab::cmd_hvac(cfg);
    if (featurize->parsed()) knxlab::lab::cmd_featurize(cfg);
    if (train->parsed()) knxlab::lab::cmd_train(cfg);
    if (suite->parsed()) knxlab::lab::cmd_suite(cfg);
    if (report->parsed()) knxlab::lab::cmd_report(cfg);
    return 0;
  } catch (const knxlab::lab::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
