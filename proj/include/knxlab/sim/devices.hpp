#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "knxlab/knx/dpt9.hpp"
#include "knxlab/knx/telegram.hpp"
#include "knxlab/sim/bus.hpp"
#include "knxlab/sim/rng.hpp"

namespace knxlab::sim {

using TemperatureFn = std::function<double(double)>;

inline TemperatureFn constant_temperature(double celsius) {
  return [celsius](double) { return celsius; };
}

// Diurnal sinusoid peaking at peak_hour.
inline TemperatureFn sinusoid_temperature(double mean, double amplitude,
                                          double peak_hour = 15.0,
                                          double start_hour = 0.0) {
  constexpr double day = 86400.0;
  return [=](double t) {
    const double hour = start_hour + t / 3600.0;
    return mean + amplitude *
                      std::cos(2.0 * std::numbers::pi * (hour - peak_hour) *
                               3600.0 / day);
  };
}

struct SensorConfig {
  knx::IndividualAddress address = knx::IndividualAddress::make(1, 1, 10);
  knx::GroupAddress group = knx::GroupAddress::three_level(1, 1, 10);
  double period = 60.0;
  double period_jitter_sd = 0.5;
  double response_latency = 0.03;
  double response_jitter_sd = 0.002;
  double emit_until = 86400.0;

  void validate() const {
    if (period <= 0) throw Error("sensor period must be positive");
    if (period_jitter_sd < 0 || response_jitter_sd < 0)
      throw Error("sensor jitter sd must be nonnegative");
    if (group.is_broadcast())
      throw Error("broadcast group address may not be assigned to a sensor");
  }
};

// Periodic temperature reporter. Emissions sit on a drift-free grid with
// Gaussian jitter truncated at a tenth of the period; the device also answers
// groupReads on its group.
class TemperatureSensor : public Device {
 public:
  TemperatureSensor(Bus& bus, SegmentId seg, SensorConfig cfg,
                    TemperatureFn temperature, Rng rng)
      : bus_(bus), seg_(seg), cfg_(std::move(cfg)),
        temperature_(std::move(temperature)), rng_(rng) {
    cfg_.validate();
  }

  void start() { schedule_emission(0); }

  void on_telegram(SegmentId seg, const knx::Bytes& raw,
                   const Device* sender) override {
    if (sender == this || seg != seg_) return;
    knx::Telegram t;
    try {
      t = knx::decode_telegram(raw);
    } catch (const Error&) {
      return;
    }
    if (t.lsdu.kind != knx::Lsdu::Kind::GroupRead) return;
    const auto* g = t.group_destination();
    if (!g || !(*g == cfg_.group)) return;
    const double latency =
        std::max(0.0, cfg_.response_latency +
                          rng_.normal(0.0, cfg_.response_jitter_sd));
    bus_.simulation().schedule_in(latency, [this] {
      const double now = bus_.simulation().now();
      auto payload = knx::encode_dpt9(temperature_(now));
      bus_.transmit(seg_,
                    knx::encode_telegram(knx::make_group_response(
                        cfg_.address, cfg_.group, {payload[0], payload[1]})),
                    this);
    });
  }

  std::uint64_t emitted() const { return emitted_; }

 private:
  void schedule_emission(std::uint64_t k) {
    const double jitter_cap = 0.1 * cfg_.period;
    const double jitter = std::clamp(rng_.normal(0.0, cfg_.period_jitter_sd),
                                     -jitter_cap, jitter_cap);
    const double when = static_cast<double>(k + 1) * cfg_.period + jitter;
    if (when > cfg_.emit_until) return;
    bus_.simulation().schedule_at(when, [this, k] {
      const double now = bus_.simulation().now();
      auto payload = knx::encode_dpt9(temperature_(now));
      bus_.transmit(seg_,
                    knx::encode_telegram(knx::make_group_write(
                        cfg_.address, cfg_.group, {payload[0], payload[1]})),
                    this);
      ++emitted_;
      schedule_emission(k + 1);
    });
  }

  Bus& bus_;
  SegmentId seg_;
  SensorConfig cfg_;
  TemperatureFn temperature_;
  Rng rng_;
  std::uint64_t emitted_ = 0;
};

struct ControllerConfig {
  knx::IndividualAddress address = knx::IndividualAddress::make(1, 1, 1);
  std::vector<knx::GroupAddress> subscribed_groups;
  std::optional<std::vector<knx::IndividualAddress>> auth_allowlist;
  bool polling = true;
  double poll_period = 30.0;
  double poll_offset = 7.0;
  knx::GroupAddress poll_group = knx::GroupAddress::three_level(1, 4, 1);
  double emit_until = 86400.0;

  void validate() const {
    if (polling && poll_period <= 0)
      throw Error("poll period must be positive when polling is enabled");
  }
};

// Room controller stand-in: polls one datapoint, ingests DPT9 values written
// or responded on subscribed groups, optionally enforcing a source allowlist.
class Controller : public Device {
 public:
  enum class Ingest { Accepted, RejectedAuth, Undecodable, Ignored };

  struct Reading {
    double celsius = 0.0;
    double at = 0.0;
  };

  struct AuditEvent {
    double at = 0.0;
    knx::IndividualAddress source;
    std::uint16_t group_raw = 0;
  };

  Controller(Bus& bus, SegmentId seg, ControllerConfig cfg)
      : bus_(bus), seg_(seg), cfg_(std::move(cfg)) {
    cfg_.validate();
  }

  void start() {
    if (cfg_.polling) schedule_poll(0);
  }

  void on_telegram(SegmentId seg, const knx::Bytes& raw,
                   const Device* sender) override {
    if (sender == this || seg != seg_) return;
    knx::Telegram t;
    try {
      t = knx::decode_telegram(raw);
    } catch (const Error&) {
      ++undecodable_;
      return;
    }
    ingest(t, bus_.simulation().now());
  }

  // Core ingest rule, exposed for direct tests.
  Ingest ingest(const knx::Telegram& t, double when) {
    if (t.lsdu.kind != knx::Lsdu::Kind::GroupWrite &&
        t.lsdu.kind != knx::Lsdu::Kind::GroupResponse)
      return Ingest::Ignored;
    const auto* g = t.group_destination();
    if (!g) return Ingest::Ignored;
    if (std::find(cfg_.subscribed_groups.begin(), cfg_.subscribed_groups.end(),
                  *g) == cfg_.subscribed_groups.end())
      return Ingest::Ignored;
    if (cfg_.auth_allowlist) {
      const auto& allow = *cfg_.auth_allowlist;
      if (std::find(allow.begin(), allow.end(), t.source) == allow.end()) {
        ++rejected_;
        audit_log_.push_back(AuditEvent{when, t.source, g->raw()});
        return Ingest::RejectedAuth;
      }
    }
    if (t.lsdu.data.size() != 2) {
      ++undecodable_;
      return Ingest::Undecodable;
    }
    double celsius;
    try {
      celsius = knx::decode_dpt9(t.lsdu.data[0], t.lsdu.data[1]);
    } catch (const Error&) {
      ++undecodable_;
      return Ingest::Undecodable;
    }
    latest_[g->raw()] = Reading{celsius, when};
    ++accepted_;
    return Ingest::Accepted;
  }

  std::optional<Reading> latest(const knx::GroupAddress& g) const {
    auto it = latest_.find(g.raw());
    if (it == latest_.end()) return std::nullopt;
    return it->second;
  }

  std::uint64_t accepted() const { return accepted_; }
  std::uint64_t rejected() const { return rejected_; }
  std::uint64_t undecodable() const { return undecodable_; }
  const std::vector<AuditEvent>& audit_log() const { return audit_log_; }

 private:
  void schedule_poll(std::uint64_t k) {
    const double when = cfg_.poll_offset + static_cast<double>(k) * cfg_.poll_period;
    if (when > cfg_.emit_until) return;
    bus_.simulation().schedule_at(when, [this, k] {
      bus_.transmit(seg_,
                    knx::encode_telegram(
                        knx::make_group_read(cfg_.address, cfg_.poll_group)),
                    this);
      schedule_poll(k + 1);
    });
  }

  Bus& bus_;
  SegmentId seg_;
  ControllerConfig cfg_;
  std::map<std::uint16_t, Reading> latest_;
  std::vector<AuditEvent> audit_log_;
  std::uint64_t accepted_ = 0;
  std::uint64_t rejected_ = 0;
  std::uint64_t undecodable_ = 0;
};

struct ChatterConfig {
  knx::IndividualAddress address = knx::IndividualAddress::make(1, 1, 20);
  std::vector<knx::GroupAddress> write_groups{
      knx::GroupAddress::three_level(2, 3, 1),
      knx::GroupAddress::three_level(2, 3, 2),
      knx::GroupAddress::three_level(2, 3, 3)};
  knx::GroupAddress read_group = knx::GroupAddress::three_level(1, 4, 1);
  double rate = 0.05;
  double read_fraction = 0.3;
  double emit_until = 86400.0;

  void validate() const {
    if (rate < 0) throw Error("chatter rate must be nonnegative");
    if (read_fraction < 0 || read_fraction > 1)
      throw Error("chatter read fraction must be within [0,1]");
    if (write_groups.empty()) throw Error("chatter needs write groups");
  }
};

// Background traffic: Poisson groupRead/groupWrite chatter from other field
// devices sharing the bus.
class ChatterDevice : public Device {
 public:
  ChatterDevice(Bus& bus, SegmentId seg, ChatterConfig cfg, Rng rng)
      : bus_(bus), seg_(seg), cfg_(std::move(cfg)), rng_(rng) {
    cfg_.validate();
  }

  void start() {
    if (cfg_.rate > 0) schedule_next(0.0);
  }

  void on_telegram(SegmentId, const knx::Bytes&, const Device*) override {}

 private:
  void schedule_next(double from) {
    const double when = from + rng_.exponential(cfg_.rate);
    if (when > cfg_.emit_until) return;
    bus_.simulation().schedule_at(when, [this, when] {
      if (rng_.uniform() < cfg_.read_fraction) {
        bus_.transmit(seg_,
                      knx::encode_telegram(
                          knx::make_group_read(cfg_.address, cfg_.read_group)),
                      this);
      } else {
        const auto& g =
            cfg_.write_groups[static_cast<std::size_t>(rng_.next() %
                                                       cfg_.write_groups.size())];
        bus_.transmit(seg_,
                      knx::encode_telegram(knx::make_group_write(
                          cfg_.address, g,
                          {static_cast<std::uint8_t>(counter_++ & 0xFF)})),
                      this);
      }
      schedule_next(when);
    });
  }

  Bus& bus_;
  SegmentId seg_;
  ChatterConfig cfg_;
  Rng rng_;
  std::uint8_t counter_ = 0;
};

struct ResponderConfig {
  knx::IndividualAddress address = knx::IndividualAddress::make(1, 1, 21);
  std::vector<knx::GroupAddress> groups{knx::GroupAddress::three_level(1, 4, 1)};
  double latency = 0.03;
  double jitter_sd = 0.002;
  double value = 21.5;
};

// Field device that owns datapoints and answers groupReads with a DPT9
// groupResponse after a short service latency.
class ResponderDevice : public Device {
 public:
  ResponderDevice(Bus& bus, SegmentId seg, ResponderConfig cfg, Rng rng)
      : bus_(bus), seg_(seg), cfg_(std::move(cfg)), rng_(rng) {}

  void on_telegram(SegmentId seg, const knx::Bytes& raw,
                   const Device* sender) override {
    if (sender == this || seg != seg_) return;
    knx::Telegram t;
    try {
      t = knx::decode_telegram(raw);
    } catch (const Error&) {
      return;
    }
    if (t.lsdu.kind != knx::Lsdu::Kind::GroupRead) return;
    const auto* g = t.group_destination();
    if (!g) return;
    auto it = std::find(cfg_.groups.begin(), cfg_.groups.end(), *g);
    if (it == cfg_.groups.end()) return;
    const knx::GroupAddress group = *it;
    const double latency =
        std::max(0.0, cfg_.latency + rng_.normal(0.0, cfg_.jitter_sd));
    bus_.simulation().schedule_in(latency, [this, group] {
      auto payload = knx::encode_dpt9(cfg_.value);
      bus_.transmit(seg_,
                    knx::encode_telegram(knx::make_group_response(
                        cfg_.address, group, {payload[0], payload[1]})),
                    this);
      ++responses_;
    });
  }

  std::uint64_t responses() const { return responses_; }

 private:
  Bus& bus_;
  SegmentId seg_;
  ResponderConfig cfg_;
  Rng rng_;
  std::uint64_t responses_ = 0;
};

// Pure coupler forwarding rule: hop 7 passes unchanged, hop 0 is dropped,
// anything else is re-emitted with the hop count decremented.
inline std::optional<knx::Telegram> coupler_forward(const knx::Telegram& t) {
  if (t.hop_count == 7) return t;
  if (t.hop_count == 0) return std::nullopt;
  return knx::decrement_hop(t);
}

// Line coupler joining two segments.
class LineCoupler : public Device {
 public:
  LineCoupler(Bus& bus, SegmentId a, SegmentId b,
              knx::IndividualAddress address = knx::IndividualAddress::make(1, 0, 0))
      : bus_(bus), a_(a), b_(b), address_(address) {}

  void on_telegram(SegmentId seg, const knx::Bytes& raw,
                   const Device* sender) override {
    if (sender == this || (seg != a_ && seg != b_)) return;
    knx::Telegram t;
    try {
      t = knx::decode_telegram(raw);
    } catch (const Error&) {
      ++undecodable_;
      return;
    }
    const SegmentId other = seg == a_ ? b_ : a_;
    if (t.hop_count == 7) {
      // Never decremented; forwarded byte-identically.
      bus_.transmit(other, raw, this);
      ++forwarded_;
      return;
    }
    if (t.hop_count == 0) {
      ++dropped_;
      return;
    }
    bus_.transmit(other, knx::encode_telegram(knx::decrement_hop(t)), this);
    ++forwarded_;
  }

  std::uint64_t forwarded() const { return forwarded_; }
  std::uint64_t dropped() const { return dropped_; }

 private:
  Bus& bus_;
  SegmentId a_;
  SegmentId b_;
  knx::IndividualAddress address_;
  std::uint64_t forwarded_ = 0;
  std::uint64_t dropped_ = 0;
  std::uint64_t undecodable_ = 0;
};

}  // namespace knxlab::sim
