#pragma once

#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "knxlab/knx/hex.hpp"
#include "knxlab/sim/capture.hpp"
#include "knxlab/sim/event_queue.hpp"

namespace knxlab::sim {

struct UnknownSegment : Error {
  UnknownSegment() : Error("unknown segment") {}
};

// A device attached to a bus segment. Every frame transmitted on the segment
// is delivered to every attached device, including the sender; devices filter
// their own emissions via the sender pointer.
class Device {
 public:
  virtual ~Device() = default;
  virtual void on_telegram(SegmentId seg, const knx::Bytes& raw,
                           const Device* sender) = 0;
};

// TP1 segments as broadcast domains. A transmission occupies the wire for a
// constant per-frame latency; every attached device observes it at the same
// delivery instant.
class Bus {
 public:
  Bus(Simulation& sim, double frame_latency = 0.02)
      : sim_(sim), frame_latency_(frame_latency) {}

  Simulation& simulation() { return sim_; }
  double frame_latency() const { return frame_latency_; }

  SegmentId add_segment() {
    segments_.emplace_back();
    return static_cast<SegmentId>(segments_.size() - 1);
  }

  void attach(SegmentId seg, Device* device) {
    segment(seg).devices.push_back(device);
  }

  // Normal transmission: delivered frame_latency after emission.
  void transmit(SegmentId seg, knx::Bytes raw, const Device* sender) {
    transmit_at(seg, std::move(raw), sender, sim_.now() + frame_latency_);
  }

  // Delivery at an explicit instant; used by bridging devices whose delay
  // model already covers the crossing.
  void transmit_at(SegmentId seg, knx::Bytes raw, const Device* sender,
                   double delivery_time) {
    segment(seg);  // validate now, not inside the event
    sim_.schedule_at(delivery_time, [this, seg, raw = std::move(raw), sender] {
      Segment& s = segments_[static_cast<std::size_t>(seg)];
      ++s.telegrams;
      for (Device* d : s.devices) d->on_telegram(seg, raw, sender);
    });
  }

  std::uint64_t telegrams_on(SegmentId seg) const {
    return const_cast<Bus*>(this)->segment(seg).telegrams;
  }

  std::size_t segment_count() const { return segments_.size(); }

 private:
  struct Segment {
    std::vector<Device*> devices;
    std::uint64_t telegrams = 0;
  };

  Segment& segment(SegmentId seg) {
    if (seg < 0 || static_cast<std::size_t>(seg) >= segments_.size())
      throw UnknownSegment();
    return segments_[static_cast<std::size_t>(seg)];
  }

  Simulation& sim_;
  double frame_latency_;
  std::vector<Segment> segments_;
};

// Passive wire sniffer; records everything it observes.
class Tap : public Device {
 public:
  explicit Tap(Simulation& sim, CaptureOrigin origin = CaptureOrigin::Unlabeled)
      : sim_(sim) {
    series_.origin = origin;
  }

  void on_telegram(SegmentId seg, const knx::Bytes& raw, const Device*) override {
    series_.records.push_back(CaptureRecord{sim_.now(), seg, raw});
  }

  const CaptureSeries& series() const { return series_; }
  CaptureSeries take_series() { return std::move(series_); }

 private:
  Simulation& sim_;
  CaptureSeries series_;
};

}  // namespace knxlab::sim
