#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "knxlab/ids/dataset.hpp"
#include "knxlab/ids/model.hpp"
#include "knxlab/lab/config.hpp"
#include "knxlab/lab/scenarios.hpp"

namespace knxlab::lab {

namespace fs = std::filesystem;

// --- file name helpers -------------------------------------------------------

inline std::string window_label(double window_min) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", window_min);
  return buf;
}

inline fs::path captures_dir(const ExperimentConfig& cfg) {
  return fs::path(cfg.out_dir) / "captures";
}
inline fs::path features_dir(const ExperimentConfig& cfg) {
  return fs::path(cfg.out_dir) / "features";
}
inline fs::path models_dir(const ExperimentConfig& cfg) {
  return fs::path(cfg.out_dir) / "models";
}
inline fs::path hvac_dir(const ExperimentConfig& cfg) {
  return fs::path(cfg.out_dir) / "hvac";
}
inline fs::path report_dir(const ExperimentConfig& cfg) {
  return fs::path(cfg.out_dir) / "report";
}

inline fs::path feature_csv_path(const ExperimentConfig& cfg, double window_min,
                                 ids::FeatureKind kind) {
  return features_dir(cfg) / ("features_w" + window_label(window_min) + "_" +
                              ids::feature_name(kind) + ".csv");
}
inline fs::path baseline_bundle_path(const ExperimentConfig& cfg, double window_min) {
  return features_dir(cfg) / ("baseline_w" + window_label(window_min) + ".json");
}
inline fs::path model_path(const ExperimentConfig& cfg, double window_min,
                           ids::FeatureKind kind, ids::Algo algo) {
  return models_dir(cfg) / ("model_w" + window_label(window_min) + "_" +
                            ids::feature_name(kind) + "_" + ids::algo_name(algo) +
                            ".json");
}

// --- feature files -----------------------------------------------------------

inline void write_feature_csv(const std::vector<ids::FeatureVector>& vectors,
                              const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open feature file for writing: " + path);
  if (vectors.empty()) throw Error("no feature vectors to write");
  out << "label";
  for (std::size_t f = 0; f < vectors.front().values.size(); ++f)
    out << ",f" << f;
  out << "\n";
  char cell[48];
  for (const auto& v : vectors) {
    out << ids::label_name(v.label);
    for (double x : v.values) {
      std::snprintf(cell, sizeof cell, ",%.17g", x);
      out << cell;
    }
    out << "\n";
  }
}

inline std::vector<ids::FeatureVector> read_feature_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open feature file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw Error("empty feature file: " + path);
  std::vector<ids::FeatureVector> vectors;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream row(line);
    std::string cell;
    ids::FeatureVector v;
    if (!std::getline(row, cell, ',')) continue;
    if (cell == "attack") v.label = ids::Label::Attack;
    else if (cell == "no-attack") v.label = ids::Label::NoAttack;
    else throw Error("bad label in feature file: " + cell);
    while (std::getline(row, cell, ',')) v.values.push_back(std::stod(cell));
    vectors.push_back(std::move(v));
  }
  if (vectors.empty()) throw Error("feature file has no rows: " + path);
  return vectors;
}

// Histogram spec and baseline distributions frozen per window.
inline void write_baseline_bundle(const ids::HistogramSpec& spec,
                                  const std::vector<ids::Distribution>& baseline,
                                  double window_s, const std::string& path) {
  json j;
  j["window_s"] = window_s;
  j["histogram_edges"] = spec.edges;
  json dists = json::array();
  for (const auto& d : baseline) dists.push_back(d.probs);
  j["baseline"] = std::move(dists);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open baseline bundle for writing: " + path);
  out << j.dump(2) << "\n";
}

struct BaselineBundle {
  double window_s = 0.0;
  ids::HistogramSpec spec;
  std::vector<ids::Distribution> baseline;
};

inline BaselineBundle read_baseline_bundle(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open baseline bundle: " + path);
  json j;
  in >> j;
  BaselineBundle b;
  b.window_s = j.at("window_s").get<double>();
  b.spec.edges = j.at("histogram_edges").get<std::vector<double>>();
  for (const auto& probs : j.at("baseline"))
    b.baseline.push_back(ids::Distribution{probs.get<std::vector<double>>()});
  return b;
}

// --- simulate ----------------------------------------------------------------

struct SimulateSummary {
  std::uint64_t baseline_telegrams = 0;
  std::uint64_t attack_field_telegrams = 0;
  std::uint64_t attack_ctrl_telegrams = 0;
  std::uint64_t modified = 0;
  std::uint64_t sensor_temperature_writes = 0;
  std::uint64_t controller_temperature_writes = 0;
};

// Generates the no-attack and attack captures. The two arms use distinct
// derived seeds so the labeled datasets are independent draws of the same
// traffic mix.
inline SimulateSummary cmd_simulate(const ExperimentConfig& cfg,
                                    std::ostream& log = std::cout) {
  fs::create_directories(captures_dir(cfg));
  const auto baseline =
      run_no_attack(cfg.bus, sim::derive_seed(cfg.seed, "baseline-arm"));
  const auto attack =
      run_with_relay(cfg.bus, cfg.attack, sim::derive_seed(cfg.seed, "attack-arm"));

  sim::write_capture_jsonl(baseline.controller_capture,
                           (captures_dir(cfg) / "baseline.jsonl").string());
  sim::write_capture_jsonl(attack.controller_capture,
                           (captures_dir(cfg) / "attack.jsonl").string());
  sim::write_capture_jsonl(attack.sensor_capture,
                           (captures_dir(cfg) / "attack_field.jsonl").string());

  SimulateSummary summary;
  summary.baseline_telegrams = baseline.controller_capture.records.size();
  summary.attack_field_telegrams = attack.sensor_capture.records.size();
  summary.attack_ctrl_telegrams = attack.controller_capture.records.size();
  summary.modified = attack.relay.modified;
  summary.sensor_temperature_writes =
      count_temperature_writes(attack.sensor_capture, cfg.bus.sensor.group);
  summary.controller_temperature_writes =
      count_temperature_writes(attack.controller_capture, cfg.bus.sensor.group);

  log << "baseline capture: " << summary.baseline_telegrams << " telegrams\n"
      << "attack capture: field=" << summary.attack_field_telegrams
      << " controller=" << summary.attack_ctrl_telegrams
      << " modified=" << summary.modified << "\n"
      << "temperature writes: field=" << summary.sensor_temperature_writes
      << " controller=" << summary.controller_temperature_writes << "\n";
  return summary;
}

// --- hvac --------------------------------------------------------------------

inline void write_hvac_summary(const hvac::ImpactReport& bias,
                               const hvac::ImpactReport& override_report,
                               const std::string& path) {
  char buf[1024];
  const auto line = [&](const hvac::ImpactReport& r) {
    std::snprintf(buf, sizeof buf,
                  "{\"baseline_kwh\":%.6f,\"attacked_kwh\":%.6f,"
                  "\"additional_kwh\":{\"fan\":%.6f,\"pump\":%.6f,"
                  "\"chiller\":%.6f,\"total\":%.6f}}",
                  r.baseline.energy.total_kwh, r.attacked.energy.total_kwh,
                  r.additional.fan_kwh, r.additional.pump_kwh,
                  r.additional.chiller_kwh, r.additional.total_kwh);
    return std::string(buf);
  };
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open hvac summary for writing: " + path);
  out << "{\n  \"attack_i_bias\": " << line(bias)
      << ",\n  \"attack_ii_override\": " << line(override_report) << "\n}\n";
}

struct HvacSummary {
  hvac::ImpactReport bias;
  hvac::ImpactReport override_report;
  std::vector<std::pair<double, double>> sweep;  // (bias, additional kWh)
};

// Attack-i (bias) and Attack-ii (override) impact runs plus the bias sweep.
// The falsifier here is the real-valued process model; the wire-level DPT9
// quantization belongs to the relay path.
inline HvacSummary cmd_hvac(const ExperimentConfig& cfg,
                            std::ostream& log = std::cout) {
  fs::create_directories(hvac_dir(cfg));
  const auto& h = cfg.hvac_cfg;
  const double duration_s = h.duration_h * 3600.0;
  const auto weather = h.weather.trace(h.start_hour, duration_s);

  HvacSummary summary;
  summary.bias = hvac::run_attack_impact(
      h.params, weather,
      [&](double t_room) { return t_room + h.bias; }, duration_s);
  summary.override_report = hvac::run_attack_impact(
      h.params, weather, [&](double) { return h.override_value; }, duration_s);

  hvac::write_trajectory_csv(summary.bias.baseline,
                             (hvac_dir(cfg) / "baseline.csv").string());
  hvac::write_trajectory_csv(summary.bias.attacked,
                             (hvac_dir(cfg) / "attack_bias.csv").string());
  hvac::write_trajectory_csv(summary.override_report.attacked,
                             (hvac_dir(cfg) / "attack_override.csv").string());
  write_hvac_summary(summary.bias, summary.override_report,
                     (hvac_dir(cfg) / "summary.json").string());

  std::ofstream sweep_out(hvac_dir(cfg) / "bias_sweep.csv", std::ios::binary);
  if (!sweep_out) throw Error("cannot open bias sweep file for writing");
  sweep_out << "bias_c,additional_kwh\n";
  char row[96];
  for (double b : h.bias_sweep) {
    const auto r = hvac::run_attack_impact(
        h.params, weather, [&](double t_room) { return t_room + b; }, duration_s);
    summary.sweep.emplace_back(b, r.additional.total_kwh);
    std::snprintf(row, sizeof row, "%g,%.6f\n", b, r.additional.total_kwh);
    sweep_out << row;
  }

  log << "hvac: baseline " << summary.bias.baseline.energy.total_kwh
      << " kWh, attack-i additional " << summary.bias.additional.total_kwh
      << " kWh, attack-ii additional "
      << summary.override_report.additional.total_kwh << " kWh\n";
  return summary;
}

// --- featurize ---------------------------------------------------------------

// Builds, per window, the histogram spec (from the pooled baseline
// inter-arrivals), the baseline segment distributions, and the labeled
// feature files for every configured feature kind.
inline void cmd_featurize(const ExperimentConfig& cfg,
                          std::ostream& log = std::cout) {
  fs::create_directories(features_dir(cfg));
  const auto baseline = sim::read_capture_jsonl(
      (captures_dir(cfg) / "baseline.jsonl").string(), sim::CaptureOrigin::NoAttack);
  const auto attack = sim::read_capture_jsonl(
      (captures_dir(cfg) / "attack.jsonl").string(), sim::CaptureOrigin::Attack);

  const auto baseline_ts = baseline.timestamps();
  const auto attack_ts = attack.timestamps();
  const auto pooled = ids::inter_arrivals(baseline_ts);

  for (double wmin : cfg.detector.windows_min) {
    const double window_s = wmin * 60.0;
    const auto spec = ids::HistogramSpec::log_spaced(
        pooled, cfg.detector.histogram_bins, cfg.detector.histogram_min_edge);
    const auto b_segs =
        ids::segment_series(baseline_ts, window_s, ids::Label::NoAttack);
    const auto a_segs =
        ids::segment_series(attack_ts, window_s, ids::Label::Attack);

    std::vector<ids::Distribution> b_dists;
    b_dists.reserve(b_segs.size());
    for (const auto& s : b_segs) b_dists.push_back(ids::histogram(s.values, spec));

    write_baseline_bundle(spec, b_dists, window_s,
                          baseline_bundle_path(cfg, wmin).string());

    for (auto kind : cfg.detector.features) {
      std::vector<ids::FeatureVector> vectors;
      vectors.reserve(a_segs.size() + b_segs.size());
      if (kind == ids::FeatureKind::Jsd) {
        for (const auto& s : a_segs)
          vectors.push_back(ids::jsd_feature_vector(s, spec, b_dists));
        for (std::size_t j = 0; j < b_segs.size(); ++j)
          vectors.push_back(ids::jsd_feature_vector(b_dists[j],
                                                    ids::Label::NoAttack, b_dists));
      } else {
        for (const auto& s : a_segs) vectors.push_back(ids::moment_features(s, kind));
        for (const auto& s : b_segs) vectors.push_back(ids::moment_features(s, kind));
      }
      write_feature_csv(vectors, feature_csv_path(cfg, wmin, kind).string());
    }
    log << "featurize: window " << wmin << " min, " << a_segs.size()
        << " attack + " << b_segs.size() << " baseline segments\n";
  }
}

// --- train / evaluate --------------------------------------------------------

struct RateRow {
  double window_min = 0.0;
  ids::FeatureKind feature = ids::FeatureKind::Jsd;
  ids::Algo algo = ids::Algo::Svm;
  double accuracy = 0.0;
  std::size_t train_size = 0;
  std::size_t test_size = 0;
};

inline void write_rate_table(const std::vector<RateRow>& rows,
                             const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open rate table for writing: " + path);
  out << "window_min,feature,algorithm,accuracy,train_size,test_size\n";
  char buf[160];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%g,%s,%s,%.6f,%zu,%zu\n", r.window_min,
                  ids::feature_name(r.feature), ids::algo_name(r.algo),
                  r.accuracy, r.train_size, r.test_size);
    out << buf;
  }
}

inline std::vector<RateRow> read_rate_table(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open rate table: " + path);
  std::string line;
  std::getline(in, line);
  std::vector<RateRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream row(line);
    std::string cell;
    RateRow r;
    std::getline(row, cell, ',');
    r.window_min = std::stod(cell);
    std::getline(row, cell, ',');
    r.feature = ids::feature_from_name(cell);
    std::getline(row, cell, ',');
    r.algo = ids::algo_from_name(cell);
    std::getline(row, cell, ',');
    r.accuracy = std::stod(cell);
    std::getline(row, cell, ',');
    r.train_size = std::stoul(cell);
    std::getline(row, cell, ',');
    r.test_size = std::stoul(cell);
    rows.push_back(r);
  }
  return rows;
}

// Trains every (window x feature x algorithm) cell from the feature files and
// writes models plus the detection-rate table.
inline std::vector<RateRow> cmd_train(const ExperimentConfig& cfg,
                                      std::ostream& log = std::cout) {
  fs::create_directories(models_dir(cfg));
  std::vector<RateRow> rows;
  ids::Hyperparams hyper = cfg.detector.hyper;
  hyper.svm.seed = sim::derive_seed(cfg.seed ^ hyper.svm.seed, "svm-epochs");

  for (double wmin : cfg.detector.windows_min) {
    const auto bundle = read_baseline_bundle(baseline_bundle_path(cfg, wmin).string());
    const auto split_seed =
        sim::derive_seed(cfg.seed, "split-w" + window_label(wmin));
    for (auto kind : cfg.detector.features) {
      auto vectors = read_feature_csv(feature_csv_path(cfg, wmin, kind).string());
      const auto dataset = ids::make_dataset(std::move(vectors), split_seed,
                                             cfg.detector.train_fraction);
      for (auto algo : cfg.detector.algorithms) {
        auto model = ids::train(dataset, algo, hyper);
        model.feature = kind;
        model.window_s = wmin * 60.0;
        if (kind == ids::FeatureKind::Jsd) {
          model.spec = bundle.spec;
          model.baseline = bundle.baseline;
        }
        ids::save_model(model, model_path(cfg, wmin, kind, algo).string());

        RateRow row;
        row.window_min = wmin;
        row.feature = kind;
        row.algo = algo;
        row.accuracy = ids::evaluate(model, dataset);
        row.train_size = dataset.train_idx.size();
        row.test_size = dataset.test_idx.size();
        rows.push_back(row);
        log << "train: w=" << wmin << "min " << ids::feature_name(kind) << " "
            << ids::algo_name(algo) << " accuracy=" << row.accuracy << "\n";
      }
    }
  }
  write_rate_table(rows, (fs::path(cfg.out_dir) / "detection_rates.csv").string());
  return rows;
}

// --- detect ------------------------------------------------------------------

inline void cmd_detect(const std::string& model_file, const std::string& capture_file,
                       const std::string& verdicts_file,
                       std::ostream& log = std::cout) {
  const auto model = ids::load_model(model_file);
  const auto capture = sim::read_capture_jsonl(capture_file);
  const auto verdicts = ids::detect(model, capture);
  std::ofstream out(verdicts_file, std::ios::binary);
  if (!out) throw Error("cannot open verdict file for writing: " + verdicts_file);
  out << "window_start_s,verdict,score\n";
  char buf[96];
  std::size_t attacks = 0;
  for (const auto& v : verdicts) {
    std::snprintf(buf, sizeof buf, "%.6f,%s,%.6f\n", v.window_start,
                  ids::label_name(v.label), v.score);
    out << buf;
    if (v.label == ids::Label::Attack) ++attacks;
  }
  log << "detect: " << verdicts.size() << " windows, " << attacks
      << " flagged attack\n";
}

// --- report ------------------------------------------------------------------

// Plot-ready pivots: one detection-rate curve file per algorithm and the
// per-component additional-energy bars.
inline void cmd_report(const ExperimentConfig& cfg,
                       std::ostream& log = std::cout) {
  fs::create_directories(report_dir(cfg));
  const auto rows =
      read_rate_table((fs::path(cfg.out_dir) / "detection_rates.csv").string());

  for (auto algo : cfg.detector.algorithms) {
    std::ofstream out(report_dir(cfg) /
                          ("rates_" + std::string(ids::algo_name(algo)) + ".csv"),
                      std::ios::binary);
    out << "window_min";
    for (auto kind : cfg.detector.features) out << "," << ids::feature_name(kind);
    out << "\n";
    char buf[48];
    for (double wmin : cfg.detector.windows_min) {
      std::snprintf(buf, sizeof buf, "%g", wmin);
      out << buf;
      for (auto kind : cfg.detector.features) {
        double acc = 0.0;
        for (const auto& r : rows)
          if (r.window_min == wmin && r.feature == kind && r.algo == algo)
            acc = r.accuracy;
        std::snprintf(buf, sizeof buf, ",%.6f", acc);
        out << buf;
      }
      out << "\n";
    }
  }

  const auto summary_path = hvac_dir(cfg) / "summary.json";
  if (fs::exists(summary_path)) {
    std::ifstream in(summary_path, std::ios::binary);
    json j;
    in >> j;
    std::ofstream out(report_dir(cfg) / "energy_additional.csv", std::ios::binary);
    out << "attack,component,additional_kwh\n";
    char buf[96];
    for (const auto& [attack, name] :
         std::vector<std::pair<const char*, const char*>>{
             {"attack_i_bias", "attack-i"}, {"attack_ii_override", "attack-ii"}}) {
      const auto& add = j.at(attack).at("additional_kwh");
      for (const char* component : {"fan", "pump", "chiller", "total"}) {
        std::snprintf(buf, sizeof buf, "%s,%s,%.6f\n", name, component,
                      add.at(component).get<double>());
        out << buf;
      }
    }
  }
  log << "report written to " << report_dir(cfg).string() << "\n";
}

// --- suite -------------------------------------------------------------------

// The full pipeline: captures, features, models, rate table, energy reports
// and plot files, all from one root seed.
inline std::vector<RateRow> cmd_suite(const ExperimentConfig& cfg,
                                      std::ostream& log = std::cout) {
  cmd_simulate(cfg, log);
  cmd_hvac(cfg, log);
  cmd_featurize(cfg, log);
  auto rows = cmd_train(cfg, log);
  cmd_report(cfg, log);
  return rows;
}

}  // namespace knxlab::lab
