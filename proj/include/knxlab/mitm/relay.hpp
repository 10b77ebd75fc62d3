#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>

#include "knxlab/knx/dpt9.hpp"
#include "knxlab/knx/telegram.hpp"
#include "knxlab/sim/bus.hpp"
#include "knxlab/sim/rng.hpp"

namespace knxlab::mitm {

struct UndecodableFrame : Error {
  UndecodableFrame() : Error("undecodable frame at relay") {}
};

// Forwarding delay of one relay crossing. The inter-relay transport is folded
// into this model; sampled delays are never negative.
struct DelayModel {
  enum class Dist { Gauss, Uniform };

  double base = 0.05;
  double jitter_sd = 0.02;
  Dist dist = Dist::Gauss;
  std::uint64_t seed = 0;
  // Burst mode: emissions are held and released at the next multiple of this
  // interval. 0 disables it.
  double flush_interval = 0.0;

  void validate() const {
    if (base < 0 || jitter_sd < 0 || flush_interval < 0)
      throw Error("delay model fields must be nonnegative");
  }

  double sample(sim::Rng& rng) const {
    double d = base;
    if (jitter_sd > 0) {
      if (dist == Dist::Gauss) {
        d = base + rng.normal(0.0, jitter_sd);
      } else {
        // Uniform with the same standard deviation: half-width sqrt(3)*sd.
        const double w = std::sqrt(3.0) * jitter_sd;
        d = base + (2.0 * rng.uniform() - 1.0) * w;
      }
    }
    return std::max(0.0, d);
  }
};

// Selective payload rewrite applied to the victim's temperature writes.
struct Falsifier {
  enum class Kind { Passthrough, BiasAdd, Override };

  Kind kind = Kind::Passthrough;
  double value = 0.0;  // bias in degrees for BiasAdd, absolute for Override
  knx::IndividualAddress victim_source = knx::IndividualAddress::make(1, 1, 10);
  knx::GroupAddress victim_group = knx::GroupAddress::three_level(1, 1, 10);

  // Matches groupWrites from the victim source to the victim group carrying a
  // two-octet (DPT9) payload.
  bool matches(const knx::Telegram& t) const {
    if (t.lsdu.kind != knx::Lsdu::Kind::GroupWrite) return false;
    if (!(t.source == victim_source)) return false;
    const auto* g = t.group_destination();
    return g && *g == victim_group && t.lsdu.data.size() == 2;
  }

  // Real-valued rule, used directly by the process model.
  double apply(double celsius) const {
    switch (kind) {
      case Kind::Passthrough: return celsius;
      case Kind::BiasAdd: return celsius + value;
      case Kind::Override: return value;
    }
    return celsius;
  }

  // Wire rule: decodes the DPT9 payload, applies the rewrite and re-encodes
  // to the nearest representable code. Returns false when nothing changed.
  bool apply_to_telegram(knx::Telegram& t) const {
    if (kind == Kind::Passthrough || !matches(t)) return false;
    const double original = knx::decode_dpt9(t.lsdu.data[0], t.lsdu.data[1]);
    const auto replaced = knx::encode_dpt9(apply(original));
    t.lsdu.data = {replaced[0], replaced[1]};
    return true;
  }
};

struct RelayStats {
  std::uint64_t forwarded = 0;
  std::uint64_t modified = 0;
  std::uint64_t dropped = 0;
};

// The two-node MITM bridge. It joins the sensor-side and controller-side
// segments at the telegram level, impersonating transparent wire: hop counts
// are untouched and unmatched traffic is forwarded byte-identically. Matched
// victim telegrams traveling sensor-to-controller are rewritten (checksum
// recomputed); the reverse direction is always passthrough.
class RelayPair : public sim::Device {
 public:
  RelayPair(sim::Bus& bus, sim::SegmentId sensor_side,
            sim::SegmentId controller_side, DelayModel delay,
            Falsifier falsifier, std::uint64_t rng_seed)
      : bus_(bus), sensor_side_(sensor_side), controller_side_(controller_side),
        delay_(delay), falsifier_(falsifier), rng_(rng_seed) {
    delay_.validate();
  }

  // Forwarding decision for one telegram: the (possibly rewritten) telegram
  // and its scheduled emission time on the opposite segment.
  std::pair<knx::Telegram, double> process(const knx::Telegram& t,
                                           double arrival, bool from_sensor_side) {
    knx::Telegram out = t;
    if (from_sensor_side) falsifier_.apply_to_telegram(out);
    double when = arrival + delay_.sample(rng_);
    if (delay_.flush_interval > 0)
      when = std::ceil(when / delay_.flush_interval) * delay_.flush_interval;
    return {std::move(out), when};
  }

  void on_telegram(sim::SegmentId seg, const knx::Bytes& raw,
                   const Device* sender) override {
    if (sender == this || (seg != sensor_side_ && seg != controller_side_))
      return;
    knx::Telegram t;
    try {
      t = knx::decode_telegram(raw);
    } catch (const Error&) {
      ++stats_.dropped;
      return;
    }
    const bool from_sensor = seg == sensor_side_;
    knx::Bytes emission = raw;
    double when = 0.0;
    try {
      auto [telegram, emit_at] = process(t, bus_.simulation().now(), from_sensor);
      when = emit_at;
      if (!(telegram == t)) {
        emission = knx::encode_telegram(telegram);
        ++stats_.modified;
      }
    } catch (const Error&) {
      ++stats_.dropped;
      return;
    }
    ++stats_.forwarded;
    bus_.transmit_at(from_sensor ? controller_side_ : sensor_side_,
                     std::move(emission), this, when);
  }

  const RelayStats& stats() const { return stats_; }

 private:
  sim::Bus& bus_;
  sim::SegmentId sensor_side_;
  sim::SegmentId controller_side_;
  DelayModel delay_;
  Falsifier falsifier_;
  sim::Rng rng_;
  RelayStats stats_;
};

// Degenerate one-relay configuration sharing a single segment with sensor and
// controller: the tampered copy is emitted next to the original, so the
// controller sees both. Kept as the detectably-noisy counterexample.
class SingleDeviceMitm : public sim::Device {
 public:
  SingleDeviceMitm(sim::Bus& bus, sim::SegmentId seg, DelayModel delay,
                   Falsifier falsifier, std::uint64_t rng_seed)
      : bus_(bus), seg_(seg), delay_(delay), falsifier_(falsifier),
        rng_(rng_seed) {
    delay_.validate();
  }

  void on_telegram(sim::SegmentId seg, const knx::Bytes& raw,
                   const Device* sender) override {
    if (sender == this || seg != seg_) return;
    knx::Telegram t;
    try {
      t = knx::decode_telegram(raw);
    } catch (const Error&) {
      ++stats_.dropped;
      return;
    }
    if (!falsifier_.matches(t)) return;
    knx::Bytes emission = raw;
    try {
      if (falsifier_.apply_to_telegram(t)) {
        emission = knx::encode_telegram(t);
        ++stats_.modified;
      }
    } catch (const Error&) {
      ++stats_.dropped;
      return;
    }
    ++stats_.forwarded;
    bus_.transmit_at(seg_, std::move(emission), this,
                     bus_.simulation().now() + delay_.sample(rng_));
  }

  const RelayStats& stats() const { return stats_; }

 private:
  sim::Bus& bus_;
  sim::SegmentId seg_;
  DelayModel delay_;
  Falsifier falsifier_;
  sim::Rng rng_;
  RelayStats stats_;
};

}  // namespace knxlab::mitm
