#pragma once

#include <cstdint>
#include <memory>
#include <utility>

#include "knxlab/lab/config.hpp"
#include "knxlab/mitm/relay.hpp"
#include "knxlab/sim/bus.hpp"
#include "knxlab/sim/devices.hpp"

namespace knxlab::lab {

struct ScenarioResult {
  sim::CaptureSeries controller_capture;  // the defender's vantage point
  sim::CaptureSeries sensor_capture;      // sensor-side tap (attack arm only)
  std::uint64_t sensor_emitted = 0;
  std::uint64_t controller_accepted = 0;
  std::uint64_t controller_rejected = 0;
  mitm::RelayStats relay;
  std::uint64_t segment_telegrams[2] = {0, 0};
};

namespace detail {

inline sim::TemperatureFn temperature_fn(const BusConfig& cfg) {
  return sim::sinusoid_temperature(cfg.temperature.mean, cfg.temperature.amplitude,
                                   cfg.temperature.peak_hour);
}

// Device configs with the run duration applied.
inline sim::SensorConfig sensor_cfg(const BusConfig& cfg) {
  auto s = cfg.sensor;
  s.emit_until = cfg.duration_s();
  return s;
}
inline sim::ControllerConfig controller_cfg(const BusConfig& cfg) {
  auto c = cfg.controller;
  c.emit_until = cfg.duration_s();
  return c;
}
inline sim::ChatterConfig chatter_cfg(const BusConfig& cfg) {
  auto c = cfg.chatter;
  c.emit_until = cfg.duration_s();
  return c;
}

}  // namespace detail

// All field devices on one segment with the controller; the defender taps the
// same wire. Seeded per device so topology changes do not shift streams.
inline ScenarioResult run_no_attack(const BusConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  sim::Simulation s;
  sim::Bus bus(s, cfg.frame_latency);
  const auto seg = bus.add_segment();

  sim::Tap tap(s, sim::CaptureOrigin::NoAttack);
  sim::TemperatureSensor sensor(bus, seg, detail::sensor_cfg(cfg),
                                detail::temperature_fn(cfg),
                                sim::Rng(sim::derive_seed(seed, "sensor")));
  sim::Controller controller(bus, seg, detail::controller_cfg(cfg));
  sim::ChatterDevice chatter(bus, seg, detail::chatter_cfg(cfg),
                             sim::Rng(sim::derive_seed(seed, "chatter")));
  sim::ResponderDevice responder(bus, seg, cfg.responder,
                                 sim::Rng(sim::derive_seed(seed, "responder")));
  bus.attach(seg, &tap);
  bus.attach(seg, &sensor);
  bus.attach(seg, &controller);
  bus.attach(seg, &chatter);
  bus.attach(seg, &responder);
  sensor.start();
  controller.start();
  chatter.start();
  s.run_until(cfg.duration_s() + cfg.drain);

  ScenarioResult result;
  result.controller_capture = tap.take_series();
  result.sensor_emitted = sensor.emitted();
  result.controller_accepted = controller.accepted();
  result.controller_rejected = controller.rejected();
  result.segment_telegrams[0] = bus.telegrams_on(seg);
  return result;
}

// MITM arm: the sensor, chatter and responder sit on the field segment, the
// controller on its own segment, and the relay pair bridges the two.
inline ScenarioResult run_with_relay(const BusConfig& cfg, const AttackConfig& attack,
                                     std::uint64_t seed) {
  cfg.validate();
  sim::Simulation s;
  sim::Bus bus(s, cfg.frame_latency);
  const auto field = bus.add_segment();
  const auto ctrl = bus.add_segment();

  sim::Tap field_tap(s, sim::CaptureOrigin::Attack);
  sim::Tap ctrl_tap(s, sim::CaptureOrigin::Attack);
  sim::TemperatureSensor sensor(bus, field, detail::sensor_cfg(cfg),
                                detail::temperature_fn(cfg),
                                sim::Rng(sim::derive_seed(seed, "sensor")));
  sim::Controller controller(bus, ctrl, detail::controller_cfg(cfg));
  sim::ChatterDevice chatter(bus, field, detail::chatter_cfg(cfg),
                             sim::Rng(sim::derive_seed(seed, "chatter")));
  sim::ResponderDevice responder(bus, field, cfg.responder,
                                 sim::Rng(sim::derive_seed(seed, "responder")));
  mitm::RelayPair relay(bus, field, ctrl, attack.delay, attack.falsifier(cfg),
                        sim::derive_seed(seed + attack.delay.seed, "relay"));
  bus.attach(field, &field_tap);
  bus.attach(field, &sensor);
  bus.attach(field, &chatter);
  bus.attach(field, &responder);
  bus.attach(field, &relay);
  bus.attach(ctrl, &ctrl_tap);
  bus.attach(ctrl, &controller);
  bus.attach(ctrl, &relay);
  sensor.start();
  controller.start();
  chatter.start();
  s.run_until(cfg.duration_s() + cfg.drain);

  ScenarioResult result;
  result.controller_capture = ctrl_tap.take_series();
  result.sensor_capture = field_tap.take_series();
  result.sensor_emitted = sensor.emitted();
  result.controller_accepted = controller.accepted();
  result.controller_rejected = controller.rejected();
  result.relay = relay.stats();
  result.segment_telegrams[0] = bus.telegrams_on(field);
  result.segment_telegrams[1] = bus.telegrams_on(ctrl);
  return result;
}

// One shared segment with a single tampering device: the controller sees both
// the original and the modified telegrams.
inline ScenarioResult run_single_device_mitm(const BusConfig& cfg,
                                             const AttackConfig& attack,
                                             std::uint64_t seed) {
  cfg.validate();
  sim::Simulation s;
  sim::Bus bus(s, cfg.frame_latency);
  const auto seg = bus.add_segment();

  sim::Tap tap(s, sim::CaptureOrigin::Attack);
  sim::TemperatureSensor sensor(bus, seg, detail::sensor_cfg(cfg),
                                detail::temperature_fn(cfg),
                                sim::Rng(sim::derive_seed(seed, "sensor")));
  sim::Controller controller(bus, seg, detail::controller_cfg(cfg));
  sim::ChatterDevice chatter(bus, seg, detail::chatter_cfg(cfg),
                             sim::Rng(sim::derive_seed(seed, "chatter")));
  sim::ResponderDevice responder(bus, seg, cfg.responder,
                                 sim::Rng(sim::derive_seed(seed, "responder")));
  mitm::SingleDeviceMitm device(bus, seg, attack.delay, attack.falsifier(cfg),
                                sim::derive_seed(seed + attack.delay.seed, "mitm"));
  bus.attach(seg, &tap);
  bus.attach(seg, &sensor);
  bus.attach(seg, &controller);
  bus.attach(seg, &chatter);
  bus.attach(seg, &responder);
  bus.attach(seg, &device);
  sensor.start();
  controller.start();
  chatter.start();
  s.run_until(cfg.duration_s() + cfg.drain);

  ScenarioResult result;
  result.controller_capture = tap.take_series();
  result.sensor_emitted = sensor.emitted();
  result.controller_accepted = controller.accepted();
  result.relay = device.stats();
  result.segment_telegrams[0] = bus.telegrams_on(seg);
  return result;
}

// Count of victim temperature telegrams (groupWrites to the victim group) in
// a capture.
inline std::uint64_t count_temperature_writes(const sim::CaptureSeries& capture,
                                              const knx::GroupAddress& group) {
  std::uint64_t n = 0;
  for (const auto& r : capture.records) {
    knx::Telegram t;
    try {
      t = knx::decode_telegram(r.raw);
    } catch (const Error&) {
      continue;
    }
    if (t.lsdu.kind != knx::Lsdu::Kind::GroupWrite) continue;
    const auto* g = t.group_destination();
    if (g && *g == group) ++n;
  }
  return n;
}

}  // namespace knxlab::lab
