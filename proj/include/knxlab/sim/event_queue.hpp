#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "knxlab/error.hpp"

namespace knxlab::sim {

// Discrete-event core. Events execute in (time, schedule order); the
// monotone sequence number makes tie-breaking deterministic. Single-threaded;
// distinct instances may run on distinct threads.
class Simulation {
 public:
  using Action = std::function<void()>;

  double now() const { return now_; }
  std::uint64_t events_processed() const { return processed_; }

  void schedule_at(double time, Action action) {
    if (time < now_) throw Error("event scheduled in the past");
    events_.push_back(Event{time, next_seq_++, std::move(action)});
    std::push_heap(events_.begin(), events_.end(), Later{});
  }

  void schedule_in(double delay, Action action) {
    schedule_at(now_ + delay, std::move(action));
  }

  // Processes every event with time <= t_end, then advances the clock to
  // t_end.
  void run_until(double t_end) {
    if (t_end < now_) throw Error("run_until into the past");
    while (!events_.empty() && events_.front().time <= t_end) {
      std::pop_heap(events_.begin(), events_.end(), Later{});
      Event ev = std::move(events_.back());
      events_.pop_back();
      now_ = ev.time;
      ev.action();
      ++processed_;
    }
    now_ = t_end;
  }

 private:
  struct Event {
    double time;
    std::uint64_t seq;
    Action action;
  };
  struct Later {
    bool operator()(const Event& a, const Event& b) const {
      if (a.time != b.time) return a.time > b.time;
      return a.seq > b.seq;
    }
  };

  std::vector<Event> events_;
  double now_ = 0.0;
  std::uint64_t next_seq_ = 0;
  std::uint64_t processed_ = 0;
};

}  // namespace knxlab::sim
