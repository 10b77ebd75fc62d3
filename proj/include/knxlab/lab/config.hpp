#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "knxlab/hvac/model.hpp"
#include "knxlab/ids/features.hpp"
#include "knxlab/ids/model.hpp"
#include "knxlab/mitm/relay.hpp"
#include "knxlab/sim/devices.hpp"

namespace knxlab::lab {

struct ConfigError : Error {
  using Error::Error;
};

using nlohmann::json;

namespace detail {

// Every object must contain only known keys; typos fail loudly.
inline void expect_keys(const json& j, const std::string& where,
                        std::initializer_list<const char*> keys) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (const char* k : keys)
      if (key == k) {
        known = true;
        break;
      }
    if (!known) throw ConfigError("unknown key \"" + key + "\" in " + where);
  }
}

template <typename T>
void get_if_present(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

inline void get_if_present(const json& j, const char* key, knx::GroupAddress& out) {
  if (j.contains(key)) out = knx::parse_group(j.at(key).get<std::string>());
}

inline void get_if_present(const json& j, const char* key,
                           knx::IndividualAddress& out) {
  if (j.contains(key)) out = knx::parse_individual(j.at(key).get<std::string>());
}

}  // namespace detail

struct TemperatureTraceConfig {
  double mean = 21.0;
  double amplitude = 1.5;
  double peak_hour = 15.0;

  static TemperatureTraceConfig from_json(const json& j, const std::string& where) {
    TemperatureTraceConfig c;
    detail::expect_keys(j, where, {"mean", "amplitude", "peak_hour"});
    detail::get_if_present(j, "mean", c.mean);
    detail::get_if_present(j, "amplitude", c.amplitude);
    detail::get_if_present(j, "peak_hour", c.peak_hour);
    return c;
  }
};

// Traffic scenario shared by the baseline and attack arms.
struct BusConfig {
  double frame_latency = 0.02;
  double duration_h = 24.0;
  double drain = 10.0;
  sim::SensorConfig sensor;
  sim::ControllerConfig controller;
  sim::ChatterConfig chatter;
  sim::ResponderConfig responder;
  TemperatureTraceConfig temperature;

  double duration_s() const { return duration_h * 3600.0; }

  static BusConfig from_json(const json& j) {
    BusConfig c = defaults();
    detail::expect_keys(j, "bus",
                        {"frame_latency", "duration_h", "drain", "sensor",
                         "controller", "chatter", "responder", "temperature"});
    detail::get_if_present(j, "frame_latency", c.frame_latency);
    detail::get_if_present(j, "duration_h", c.duration_h);
    detail::get_if_present(j, "drain", c.drain);
    if (j.contains("sensor")) {
      const auto& s = j.at("sensor");
      detail::expect_keys(s, "bus.sensor",
                          {"address", "group", "period", "period_jitter_sd",
                           "response_latency", "response_jitter_sd"});
      detail::get_if_present(s, "address", c.sensor.address);
      detail::get_if_present(s, "group", c.sensor.group);
      detail::get_if_present(s, "period", c.sensor.period);
      detail::get_if_present(s, "period_jitter_sd", c.sensor.period_jitter_sd);
      detail::get_if_present(s, "response_latency", c.sensor.response_latency);
      detail::get_if_present(s, "response_jitter_sd", c.sensor.response_jitter_sd);
    }
    if (j.contains("controller")) {
      const auto& s = j.at("controller");
      detail::expect_keys(s, "bus.controller",
                          {"address", "poll_group", "poll_period", "poll_offset",
                           "subscribed_groups", "allowlist", "polling"});
      detail::get_if_present(s, "address", c.controller.address);
      detail::get_if_present(s, "poll_group", c.controller.poll_group);
      detail::get_if_present(s, "poll_period", c.controller.poll_period);
      detail::get_if_present(s, "poll_offset", c.controller.poll_offset);
      detail::get_if_present(s, "polling", c.controller.polling);
      if (s.contains("subscribed_groups")) {
        c.controller.subscribed_groups.clear();
        for (const auto& g : s.at("subscribed_groups"))
          c.controller.subscribed_groups.push_back(
              knx::parse_group(g.get<std::string>()));
      }
      if (s.contains("allowlist") && !s.at("allowlist").is_null()) {
        std::vector<knx::IndividualAddress> allow;
        for (const auto& a : s.at("allowlist"))
          allow.push_back(knx::parse_individual(a.get<std::string>()));
        c.controller.auth_allowlist = std::move(allow);
      }
    }
    if (j.contains("chatter")) {
      const auto& s = j.at("chatter");
      detail::expect_keys(s, "bus.chatter",
                          {"address", "rate", "read_fraction", "write_groups",
                           "read_group"});
      detail::get_if_present(s, "address", c.chatter.address);
      detail::get_if_present(s, "rate", c.chatter.rate);
      detail::get_if_present(s, "read_fraction", c.chatter.read_fraction);
      detail::get_if_present(s, "read_group", c.chatter.read_group);
      if (s.contains("write_groups")) {
        c.chatter.write_groups.clear();
        for (const auto& g : s.at("write_groups"))
          c.chatter.write_groups.push_back(knx::parse_group(g.get<std::string>()));
      }
    }
    if (j.contains("responder")) {
      const auto& s = j.at("responder");
      detail::expect_keys(s, "bus.responder",
                          {"address", "groups", "latency", "jitter_sd", "value"});
      detail::get_if_present(s, "address", c.responder.address);
      detail::get_if_present(s, "latency", c.responder.latency);
      detail::get_if_present(s, "jitter_sd", c.responder.jitter_sd);
      detail::get_if_present(s, "value", c.responder.value);
      if (s.contains("groups")) {
        c.responder.groups.clear();
        for (const auto& g : s.at("groups"))
          c.responder.groups.push_back(knx::parse_group(g.get<std::string>()));
      }
    }
    if (j.contains("temperature"))
      c.temperature = TemperatureTraceConfig::from_json(j.at("temperature"),
                                                        "bus.temperature");
    c.validate();
    return c;
  }

  static BusConfig defaults() {
    BusConfig c;
    // The controller subscribes to the victim temperature group and to the
    // polled datapoint owned by the responder.
    c.controller.subscribed_groups = {c.sensor.group, c.controller.poll_group};
    return c;
  }

  void validate() const {
    if (frame_latency < 0) throw ConfigError("frame_latency must be nonnegative");
    if (duration_h <= 0) throw ConfigError("duration_h must be positive");
    if (drain < 0) throw ConfigError("drain must be nonnegative");
    sensor.validate();
    controller.validate();
    chatter.validate();
  }
};

struct AttackConfig {
  mitm::Falsifier::Kind kind = mitm::Falsifier::Kind::BiasAdd;
  double value = 1.0;
  mitm::DelayModel delay;

  static AttackConfig from_json(const json& j) {
    AttackConfig c;
    detail::expect_keys(j, "attack", {"falsifier", "delay"});
    if (j.contains("falsifier")) {
      const auto& f = j.at("falsifier");
      detail::expect_keys(f, "attack.falsifier", {"kind", "value"});
      if (f.contains("kind")) {
        const auto kind = f.at("kind").get<std::string>();
        if (kind == "bias") c.kind = mitm::Falsifier::Kind::BiasAdd;
        else if (kind == "override") c.kind = mitm::Falsifier::Kind::Override;
        else if (kind == "passthrough") c.kind = mitm::Falsifier::Kind::Passthrough;
        else throw ConfigError("unknown falsifier kind: " + kind);
      }
      detail::get_if_present(f, "value", c.value);
    }
    if (j.contains("delay")) {
      const auto& d = j.at("delay");
      detail::expect_keys(d, "attack.delay",
                          {"base", "jitter_sd", "dist", "seed", "flush_interval"});
      detail::get_if_present(d, "base", c.delay.base);
      detail::get_if_present(d, "jitter_sd", c.delay.jitter_sd);
      detail::get_if_present(d, "seed", c.delay.seed);
      detail::get_if_present(d, "flush_interval", c.delay.flush_interval);
      if (d.contains("dist")) {
        const auto dist = d.at("dist").get<std::string>();
        if (dist == "gauss") c.delay.dist = mitm::DelayModel::Dist::Gauss;
        else if (dist == "uniform") c.delay.dist = mitm::DelayModel::Dist::Uniform;
        else throw ConfigError("unknown delay distribution: " + dist);
      }
    }
    c.delay.validate();
    return c;
  }

  // Falsifier bound to the configured victim.
  mitm::Falsifier falsifier(const BusConfig& bus) const {
    mitm::Falsifier f;
    f.kind = kind;
    f.value = value;
    f.victim_source = bus.sensor.address;
    f.victim_group = bus.sensor.group;
    return f;
  }
};

struct WeatherConfig {
  std::string kind = "sinusoid";
  double mean = 20.0;
  double amplitude = 2.0;
  double peak_hour = 15.0;
  std::vector<std::pair<double, double>> points;

  static WeatherConfig from_json(const json& j) {
    WeatherConfig c;
    detail::expect_keys(j, "hvac.weather",
                        {"kind", "mean", "amplitude", "peak_hour", "points"});
    detail::get_if_present(j, "kind", c.kind);
    detail::get_if_present(j, "mean", c.mean);
    detail::get_if_present(j, "amplitude", c.amplitude);
    detail::get_if_present(j, "peak_hour", c.peak_hour);
    if (j.contains("points"))
      for (const auto& p : j.at("points"))
        c.points.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
    if (c.kind != "sinusoid" && c.kind != "samples")
      throw ConfigError("unknown weather kind: " + c.kind);
    if (c.kind == "samples" && c.points.empty())
      throw ConfigError("weather samples are empty");
    return c;
  }

  hvac::WeatherTrace trace(double start_hour, double duration_s) const {
    if (kind == "samples") {
      hvac::WeatherTrace w;
      w.samples = points;
      w.validate();
      return w;
    }
    return hvac::WeatherTrace::sinusoid(mean, amplitude, peak_hour, start_hour,
                                        duration_s);
  }
};

struct HvacConfig {
  hvac::HvacParams params = hvac::HvacParams::defaults();
  WeatherConfig weather;
  double start_hour = 7.0;
  double duration_h = 12.0;
  double bias = 1.0;                       // Attack-i
  double override_value = 22.005;          // Attack-ii
  std::vector<double> bias_sweep{0.0, 0.5, 1.0, 2.0};

  static void map_from_json(const json& j, const std::string& where,
                            hvac::MonotoneMap& map) {
    detail::expect_keys(j, where, {"offset", "linear", "quadratic", "pivot"});
    detail::get_if_present(j, "offset", map.offset);
    detail::get_if_present(j, "linear", map.linear);
    detail::get_if_present(j, "quadratic", map.quadratic);
    detail::get_if_present(j, "pivot", map.pivot);
  }

  static HvacConfig from_json(const json& j) {
    HvacConfig c;
    detail::expect_keys(
        j, "hvac",
        {"room_setpoint", "supply_air_setpoint", "supply_water_setpoint",
         "damper_fraction", "thermal_capacitance", "envelope_conductance",
         "supply_air_gain", "chw_flow_gain", "chw_flow_floor", "cooling_gain",
         "fan", "pump", "chiller", "step", "weather", "start_hour",
         "duration_h", "bias", "override_value", "bias_sweep"});
    detail::get_if_present(j, "room_setpoint", c.params.room_setpoint);
    detail::get_if_present(j, "supply_air_setpoint", c.params.supply_air_setpoint);
    detail::get_if_present(j, "supply_water_setpoint", c.params.supply_water_setpoint);
    detail::get_if_present(j, "damper_fraction", c.params.damper_fraction);
    detail::get_if_present(j, "thermal_capacitance", c.params.thermal_capacitance);
    detail::get_if_present(j, "envelope_conductance", c.params.envelope_conductance);
    detail::get_if_present(j, "supply_air_gain", c.params.supply_air_gain);
    detail::get_if_present(j, "chw_flow_gain", c.params.chw_flow_gain);
    detail::get_if_present(j, "chw_flow_floor", c.params.chw_flow_floor);
    detail::get_if_present(j, "cooling_gain", c.params.cooling_gain);
    if (j.contains("fan")) map_from_json(j.at("fan"), "hvac.fan", c.params.fan_power);
    if (j.contains("pump")) map_from_json(j.at("pump"), "hvac.pump", c.params.pump_power);
    if (j.contains("chiller"))
      map_from_json(j.at("chiller"), "hvac.chiller", c.params.chiller_power);
    detail::get_if_present(j, "step", c.params.step);
    if (j.contains("weather")) c.weather = WeatherConfig::from_json(j.at("weather"));
    detail::get_if_present(j, "start_hour", c.start_hour);
    detail::get_if_present(j, "duration_h", c.duration_h);
    detail::get_if_present(j, "bias", c.bias);
    detail::get_if_present(j, "override_value", c.override_value);
    detail::get_if_present(j, "bias_sweep", c.bias_sweep);
    if (c.duration_h <= 0) throw ConfigError("hvac duration_h must be positive");
    c.params.validate();
    return c;
  }
};

struct DetectorConfig {
  std::vector<double> windows_min{5, 10, 20, 30, 40, 50, 60};
  std::vector<ids::FeatureKind> features{
      ids::FeatureKind::Mean, ids::FeatureKind::Variance,
      ids::FeatureKind::MeanVar, ids::FeatureKind::Jsd};
  std::vector<ids::Algo> algorithms{ids::Algo::Tree, ids::Algo::Svm};
  double train_fraction = 0.7;
  std::size_t histogram_bins = 50;
  double histogram_min_edge = 1e-3;
  ids::Hyperparams hyper;

  static DetectorConfig from_json(const json& j) {
    DetectorConfig c;
    detail::expect_keys(j, "detector",
                        {"windows_min", "features", "algorithms",
                         "train_fraction", "histogram_bins",
                         "histogram_min_edge", "svm", "tree"});
    detail::get_if_present(j, "windows_min", c.windows_min);
    if (j.contains("features")) {
      c.features.clear();
      for (const auto& f : j.at("features"))
        c.features.push_back(ids::feature_from_name(f.get<std::string>()));
    }
    if (j.contains("algorithms")) {
      c.algorithms.clear();
      for (const auto& a : j.at("algorithms"))
        c.algorithms.push_back(ids::algo_from_name(a.get<std::string>()));
    }
    detail::get_if_present(j, "train_fraction", c.train_fraction);
    detail::get_if_present(j, "histogram_bins", c.histogram_bins);
    detail::get_if_present(j, "histogram_min_edge", c.histogram_min_edge);
    if (j.contains("svm")) {
      const auto& s = j.at("svm");
      detail::expect_keys(s, "detector.svm", {"lambda", "epochs", "seed"});
      detail::get_if_present(s, "lambda", c.hyper.svm.lambda);
      detail::get_if_present(s, "epochs", c.hyper.svm.epochs);
      detail::get_if_present(s, "seed", c.hyper.svm.seed);
    }
    if (j.contains("tree")) {
      const auto& t = j.at("tree");
      detail::expect_keys(t, "detector.tree", {"max_depth", "min_leaf"});
      detail::get_if_present(t, "max_depth", c.hyper.tree.max_depth);
      detail::get_if_present(t, "min_leaf", c.hyper.tree.min_leaf);
    }
    if (c.windows_min.empty()) throw ConfigError("windows_min is empty");
    for (double w : c.windows_min)
      if (w <= 0) throw ConfigError("detection windows must be positive");
    if (c.train_fraction <= 0 || c.train_fraction >= 1)
      throw ConfigError("train_fraction must be within (0,1)");
    if (c.histogram_bins < 2) throw ConfigError("histogram_bins must be at least 2");
    return c;
  }
};

// Root experiment description; a missing file section keeps its defaults.
struct ExperimentConfig {
  std::string scenario = "default";
  std::uint64_t seed = 1;
  std::string out_dir = "out";
  BusConfig bus = BusConfig::defaults();
  AttackConfig attack;
  HvacConfig hvac_cfg;
  DetectorConfig detector;

  static ExperimentConfig from_json(const json& j) {
    ExperimentConfig c;
    detail::expect_keys(j, "config",
                        {"scenario", "seed", "out", "bus", "attack", "hvac",
                         "detector"});
    detail::get_if_present(j, "scenario", c.scenario);
    detail::get_if_present(j, "seed", c.seed);
    detail::get_if_present(j, "out", c.out_dir);
    if (j.contains("bus")) c.bus = BusConfig::from_json(j.at("bus"));
    if (j.contains("attack")) c.attack = AttackConfig::from_json(j.at("attack"));
    if (j.contains("hvac")) c.hvac_cfg = HvacConfig::from_json(j.at("hvac"));
    if (j.contains("detector"))
      c.detector = DetectorConfig::from_json(j.at("detector"));
    return c;
  }

  static ExperimentConfig from_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file: " + path);
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded()) throw ConfigError("config file is not valid JSON: " + path);
    return from_json(j);
  }
};

}  // namespace knxlab::lab
