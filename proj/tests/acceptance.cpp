// Acceptance suite: one checked criterion per function, one pass/fail line
// each, nonzero exit if anything fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "knxlab/knx/telegram.hpp"
#include "knxlab/lab/pipeline.hpp"
#include "../tests/test_util.hpp"

namespace fs = std::filesystem;
namespace knx = knxlab::knx;
namespace sim = knxlab::sim;
namespace ids = knxlab::ids;
namespace lab = knxlab::lab;
namespace mitm = knxlab::mitm;
namespace hvac = knxlab::hvac;

namespace {

int failures = 0;
std::vector<std::string> notes;

void report(int criterion, const char* what, bool ok, const std::string& detail) {
  std::printf("[%s] criterion %d: %s (%s)\n", ok ? "PASS" : "FAIL", criterion,
              what, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

bool check(bool condition, const std::string& label) {
  if (!condition) notes.push_back(label);
  return condition;
}

std::string drain_notes() {
  std::string out;
  for (const auto& n : notes) {
    if (!out.empty()) out += "; ";
    out += n;
  }
  notes.clear();
  return out.empty() ? "ok" : out;
}

// --- 1. codec soundness -------------------------------------------------------

void criterion1_codec_soundness() {
  const auto start = std::chrono::steady_clock::now();
  knxlab::testutil::Rand rand(0xACC1);
  bool ok = true;
  std::size_t corruptions = 0;
  for (int i = 0; i < 10000 && ok; ++i) {
    const auto t = knxlab::testutil::random_telegram(rand);
    const auto raw = knx::encode_telegram(t);
    ok &= check(knx::decode_telegram(raw) == t, "round-trip mismatch");
    for (std::size_t byte = 0; byte < raw.size() && ok; ++byte) {
      for (int bit = 0; bit < 8; ++bit) {
        auto corrupt = raw;
        corrupt[byte] ^= static_cast<std::uint8_t>(1u << bit);
        ++corruptions;
        try {
          knx::decode_telegram(corrupt);
          ok = check(false, "corruption accepted");
          break;
        } catch (const knx::BadChecksum&) {
        } catch (const knxlab::Error&) {
          ok = check(false, "corruption rejected with the wrong error");
          break;
        }
      }
    }
  }
  const double elapsed = seconds_since(start);
  ok &= check(elapsed < 5.0, "runtime over 5 s");
  char detail[160];
  std::snprintf(detail, sizeof detail,
                "10000 telegrams, %zu bit corruptions, %.2f s: %s", corruptions,
                elapsed, drain_notes().c_str());
  report(1, "codec round-trip and corruption rejection", ok, detail);
}

// --- 2. checksum oracle -------------------------------------------------------

void criterion2_checksum_oracle() {
  knxlab::testutil::Rand rand(0xACC2);
  bool ok = true;
  for (int i = 0; i < 1000 && ok; ++i) {
    knx::Bytes seq(1 + rand.below(96));
    for (auto& b : seq) b = static_cast<std::uint8_t>(rand.below(256));
    unsigned acc = 0;
    for (auto b : seq) acc ^= b;  // independent fold-XOR-complement oracle
    const auto expected = static_cast<std::uint8_t>(~acc & 0xFF);
    ok &= check(knx::compute_checksum(seq) == expected, "oracle mismatch");
  }
  report(2, "checksum matches independent oracle", ok,
         "1000 random sequences, exact: " + drain_notes());
}

// --- 3. JSD axioms ------------------------------------------------------------

void criterion3_jsd_axioms() {
  knxlab::testutil::Rand rand(0xACC3);
  bool ok = true;
  for (int i = 0; i < 1000 && ok; ++i) {
    const std::size_t bins = 2 + rand.below(40);
    std::vector<double> p(bins), q(bins);
    double sp = 0, sq = 0;
    for (auto& v : p) sp += (v = rand.uniform() + 1e-12);
    for (auto& v : q) sq += (v = rand.uniform() + 1e-12);
    for (auto& v : p) v /= sp;
    for (auto& v : q) v /= sq;
    const ids::Distribution P{p}, Q{q};
    const double pq = ids::jsd(P, Q);
    ok &= check(std::abs(pq - ids::jsd(Q, P)) <= 1e-12, "asymmetric");
    ok &= check(pq >= 0.0 && pq <= 1.0, "out of range");
    ok &= check(ids::jsd(P, P) == 0.0, "jsd(P,P) nonzero");
  }
  // Disjoint dyadic pairs are exactly 1.
  for (int i = 0; i < 1000 && ok; ++i) {
    const std::size_t half = 1 + rand.below(8);
    std::vector<double> p(2 * half, 0.0), q(2 * half, 0.0);
    std::vector<unsigned> counts(2 * half, 0);
    for (int c = 0; c < 64; ++c) ++counts[rand.below(half)];
    for (std::size_t b = 0; b < half; ++b) p[b] = counts[b] / 64.0;
    std::fill(counts.begin(), counts.end(), 0u);
    for (int c = 0; c < 64; ++c) ++counts[half + rand.below(half)];
    for (std::size_t b = half; b < 2 * half; ++b) q[b] = counts[b] / 64.0;
    ok &= check(ids::jsd(ids::Distribution{p}, ids::Distribution{q}) == 1.0,
                "disjoint pair not exactly 1");
  }
  const double kl = ids::kl_divergence(ids::Distribution{{0.5, 0.5}},
                                       ids::Distribution{{0.25, 0.75}});
  const double j = ids::jsd(ids::Distribution{{1.0, 0.0}},
                            ids::Distribution{{0.5, 0.5}});
  ok &= check(std::abs(kl - 0.2075187496394219) <= 1e-9, "KL hand value");
  ok &= check(std::abs(j - 0.3112781244591328) <= 1e-9, "JSD hand value");
  report(3, "JSD axioms and hand-derived values", ok,
         "1000 random pairs + 1000 disjoint pairs: " + drain_notes());
}

// --- 4. hop semantics ---------------------------------------------------------

void criterion4_hop_semantics() {
  bool ok = true;
  const auto src = knx::IndividualAddress::make(1, 1, 10);
  const auto group = knx::GroupAddress::three_level(1, 1, 10);
  knxlab::testutil::Rand rand(0xACC4);
  for (int i = 0; i < 2000 && ok; ++i) {
    const auto hop = static_cast<std::uint8_t>(rand.below(8));
    const auto t = knx::make_group_write(src, group, {0x0C, 0x4C}, hop);
    const auto fwd = sim::coupler_forward(t);
    if (hop == 7) {
      ok &= check(fwd.has_value() && fwd->hop_count == 7, "hop 7 changed");
    } else if (hop == 0) {
      ok &= check(!fwd.has_value(), "hop 0 forwarded");
    } else {
      ok &= check(fwd.has_value() && fwd->hop_count == hop - 1, "hop not decremented");
      if (fwd)
        ok &= check(knx::decode_telegram(knx::encode_telegram(*fwd)) == *fwd,
                    "forwarded frame checksum invalid");
    }
  }
  report(4, "coupler hop-count semantics", ok,
         "decrement 6->5, preserve 7, drop 0, exact: " + drain_notes());
}

// --- 5. MITM conservation -----------------------------------------------------

void criterion5_mitm_conservation() {
  bool ok = true;
  lab::ExperimentConfig cfg;  // default 24 h traffic scenario
  const auto relay_run =
      lab::run_with_relay(cfg.bus, cfg.attack, sim::derive_seed(5, "attack-arm"));
  const auto field_writes =
      lab::count_temperature_writes(relay_run.sensor_capture, cfg.bus.sensor.group);
  const auto ctrl_writes = lab::count_temperature_writes(relay_run.controller_capture,
                                                         cfg.bus.sensor.group);
  ok &= check(field_writes == relay_run.sensor_emitted, "field tap missed writes");
  ok &= check(ctrl_writes == field_writes, "stealth path count mismatch");
  ok &= check(relay_run.relay.modified == field_writes, "modified count mismatch");

  const auto single_run = lab::run_single_device_mitm(cfg.bus, cfg.attack,
                                                      sim::derive_seed(5, "attack-arm"));
  const auto single_writes = lab::count_temperature_writes(
      single_run.controller_capture, cfg.bus.sensor.group);
  ok &= check(single_writes == 2 * single_run.sensor_emitted,
              "single-device variant is not exactly double");

  char detail[200];
  std::snprintf(detail, sizeof detail,
                "24 h run: field=%llu ctrl=%llu single-device=%llu (2x%llu): %s",
                static_cast<unsigned long long>(field_writes),
                static_cast<unsigned long long>(ctrl_writes),
                static_cast<unsigned long long>(single_writes),
                static_cast<unsigned long long>(single_run.sensor_emitted),
                drain_notes().c_str());
  report(5, "MITM temperature-telegram conservation", ok, detail);
}

// --- 6. HVAC impact -----------------------------------------------------------

void criterion6_hvac_impact() {
  bool ok = true;
  lab::ExperimentConfig cfg;
  const auto& h = cfg.hvac_cfg;
  const double duration_s = h.duration_h * 3600.0;
  const auto weather = h.weather.trace(h.start_hour, duration_s);

  const auto t0 = std::chrono::steady_clock::now();
  const auto bias_report = hvac::run_attack_impact(
      h.params, weather, [&](double t) { return t + 1.0; }, duration_s);
  const double one_run = seconds_since(t0);
  const auto override_report = hvac::run_attack_impact(
      h.params, weather, [&](double) { return 22.005; }, duration_s);

  for (const auto* name : {"attack-i", "attack-ii"}) {
    const auto& add = std::string(name) == "attack-i" ? bias_report.additional
                                                      : override_report.additional;
    ok &= check(add.fan_kwh > 0.0, std::string(name) + " fan not positive");
    ok &= check(add.pump_kwh > 0.0, std::string(name) + " pump not positive");
    ok &= check(add.chiller_kwh > 0.0, std::string(name) + " chiller not positive");
    ok &= check(add.total_kwh > 0.0, std::string(name) + " total not positive");
  }

  double previous = -1.0;
  for (double bias : {0.0, 0.5, 1.0, 2.0}) {
    const auto r = hvac::run_attack_impact(
        h.params, weather, [&](double t) { return t + bias; }, duration_s);
    ok &= check(r.additional.total_kwh >= previous, "sweep not nondecreasing");
    if (bias == 0.0)
      ok &= check(r.additional.total_kwh == 0.0, "zero bias not exactly zero");
    previous = r.additional.total_kwh;
  }
  ok &= check(one_run < 10.0, "single run over 10 s");

  char detail[240];
  std::snprintf(detail, sizeof detail,
                "attack-i +%.2f kWh, attack-ii +%.2f kWh, sweep nondecreasing, "
                "%.2f s/run: %s",
                bias_report.additional.total_kwh,
                override_report.additional.total_kwh, one_run,
                drain_notes().c_str());
  report(6, "HVAC additional-energy sign and monotonicity", ok, detail);
}

// --- 7 + 8 + 9: the detection suite -------------------------------------------

struct SuiteArtifacts {
  std::vector<lab::RateRow> rows;
  double runtime_s = 0.0;
  fs::path out_a;
  fs::path out_b;
};

SuiteArtifacts run_suites(const fs::path& root) {
  SuiteArtifacts art;
  art.out_a = root / "suite_a";
  art.out_b = root / "suite_b";

  lab::ExperimentConfig cfg;
  cfg.seed = 1;
  cfg.out_dir = art.out_a.string();
  std::ostringstream log;
  const auto t0 = std::chrono::steady_clock::now();
  art.rows = lab::cmd_suite(cfg, log);
  art.runtime_s = seconds_since(t0);

  cfg.out_dir = art.out_b.string();
  lab::cmd_suite(cfg, log);
  return art;
}

void criterion7_detection(const SuiteArtifacts& art) {
  bool ok = true;
  double worst = 1.0;
  for (const auto& r : art.rows) {
    if (r.feature != ids::FeatureKind::Jsd || r.algo != ids::Algo::Svm) continue;
    worst = std::min(worst, r.accuracy);
    if (r.accuracy < 0.95) {
      char buf[96];
      std::snprintf(buf, sizeof buf, "window %g min at %.3f", r.window_min,
                    r.accuracy);
      ok = check(false, buf);
    }
  }

  // Null arm: delay zeroed, identical generators, fresh seeds per arm.
  lab::ExperimentConfig null_cfg;
  null_cfg.seed = 1;
  null_cfg.attack.kind = mitm::Falsifier::Kind::Passthrough;
  null_cfg.attack.delay.base = 0.0;
  null_cfg.attack.delay.jitter_sd = 0.0;
  const auto baseline = lab::run_no_attack(
      null_cfg.bus, sim::derive_seed(null_cfg.seed, "baseline-arm"));
  const auto attack = lab::run_with_relay(
      null_cfg.bus, null_cfg.attack, sim::derive_seed(null_cfg.seed, "attack-arm"));
  const auto bts = baseline.controller_capture.timestamps();
  const auto ats = attack.controller_capture.timestamps();
  const auto pooled = ids::inter_arrivals(bts);
  const double window_s = 300.0;
  const auto spec = ids::HistogramSpec::log_spaced(pooled);
  const auto bsegs = ids::segment_series(bts, window_s, ids::Label::NoAttack);
  const auto asegs = ids::segment_series(ats, window_s, ids::Label::Attack);
  std::vector<ids::Distribution> bd;
  for (const auto& s : bsegs) bd.push_back(ids::histogram(s.values, spec));
  std::vector<ids::FeatureVector> vectors;
  for (const auto& s : asegs)
    vectors.push_back(ids::jsd_feature_vector(s, spec, bd));
  for (std::size_t j = 0; j < bsegs.size(); ++j)
    vectors.push_back(ids::jsd_feature_vector(bd[j], ids::Label::NoAttack, bd));
  const auto dataset = ids::make_dataset(
      std::move(vectors), sim::derive_seed(null_cfg.seed, "split-w5"));
  ids::Hyperparams hyper;
  hyper.svm.seed = sim::derive_seed(null_cfg.seed ^ hyper.svm.seed, "svm-epochs");
  const auto null_model = ids::train(dataset, ids::Algo::Svm, hyper);
  const double null_acc = ids::evaluate(null_model, dataset);
  ok &= check(null_acc >= 0.35 && null_acc <= 0.65, "null accuracy out of band");
  ok &= check(art.runtime_s < 120.0, "suite runtime over 2 min");

  char detail[200];
  std::snprintf(detail, sizeof detail,
                "SVM+JSD worst window %.4f (>=0.95), null case %.3f in "
                "[0.35,0.65], suite %.1f s: %s",
                worst, null_acc, art.runtime_s, drain_notes().c_str());
  report(7, "detection rate on synthetic traffic", ok, detail);
}

void criterion8_comparative_table(const SuiteArtifacts& art) {
  bool ok = true;
  // 7 windows x 4 features x 2 algorithms.
  ok &= check(art.rows.size() == 7 * 4 * 2, "table cell count");
  std::map<double, std::map<ids::FeatureKind, double>> svm_rates;
  for (const auto& r : art.rows)
    if (r.algo == ids::Algo::Svm) svm_rates[r.window_min][r.feature] = r.accuracy;
  for (const auto& [window, rates] : svm_rates) {
    const double jsd_rate = rates.at(ids::FeatureKind::Jsd);
    for (auto kind : {ids::FeatureKind::Mean, ids::FeatureKind::Variance,
                      ids::FeatureKind::MeanVar}) {
      if (jsd_rate < rates.at(kind)) {
        char buf[120];
        std::snprintf(buf, sizeof buf, "window %g: jsd %.3f < %s %.3f", window,
                      jsd_rate, ids::feature_name(kind), rates.at(kind));
        ok = check(false, buf);
      }
    }
  }
  ok &= check(fs::exists(art.out_a / "report" / "rates_svm.csv") &&
                  fs::exists(art.out_a / "report" / "rates_tree.csv"),
              "report plots missing");
  report(8, "comparative table with JSD >= other features for SVM", ok,
         "7x4x2 cells; ordering checked on synthetic traffic only: " +
             drain_notes());
}

void criterion9_determinism(const SuiteArtifacts& art) {
  bool ok = true;
  std::size_t files = 0;
  std::vector<fs::path> relative;
  for (const auto& entry : fs::recursive_directory_iterator(art.out_a))
    if (entry.is_regular_file())
      relative.push_back(fs::relative(entry.path(), art.out_a));
  for (const auto& rel : relative) {
    ++files;
    const auto read = [](const fs::path& p) {
      std::ifstream in(p, std::ios::binary);
      return std::string(std::istreambuf_iterator<char>(in),
                         std::istreambuf_iterator<char>());
    };
    const auto other = art.out_b / rel;
    if (!fs::exists(other) || read(art.out_a / rel) != read(other)) {
      ok = check(false, "differs: " + rel.string());
      break;
    }
  }
  char detail[160];
  std::snprintf(detail, sizeof detail, "%zu files byte-identical across reruns: %s",
                files, drain_notes().c_str());
  report(9, "suite reruns are byte-identical", ok, detail);
}

}  // namespace

int main() {
  const fs::path root = fs::temp_directory_path() / "knxlab-acceptance";
  fs::remove_all(root);
  fs::create_directories(root);

  try {
    criterion1_codec_soundness();
    criterion2_checksum_oracle();
    criterion3_jsd_axioms();
    criterion4_hop_semantics();
    criterion5_mitm_conservation();
    criterion6_hvac_impact();
    const auto art = run_suites(root);
    criterion7_detection(art);
    criterion8_comparative_table(art);
    criterion9_determinism(art);
  } catch (const std::exception& e) {
    std::printf("[FAIL] acceptance suite aborted: %s\n", e.what());
    fs::remove_all(root);
    return 1;
  }

  fs::remove_all(root);
  std::printf("%s: %d criterion(s) failed\n", failures ? "FAIL" : "ALL PASS",
              failures);
  return failures ? 1 : 0;
}
