#pragma once

#include <cstdint>
#include <queue>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace vfcsim {

enum class EventKind : std::uint8_t {
  VehicleEnter,
  VehicleExit,
  TaskArrival,
  UploadDone,
  ExecutionDone,
  TaskHorizon,  ///< deadline or vehicle exit; drops the task if still unresolved
  Snapshot,
};

[[nodiscard]] constexpr std::string_view to_string(EventKind k) noexcept {
  switch (k) {
    case EventKind::VehicleEnter:  return "VehicleEnter";
    case EventKind::VehicleExit:   return "VehicleExit";
    case EventKind::TaskArrival:   return "TaskArrival";
    case EventKind::UploadDone:    return "UploadDone";
    case EventKind::ExecutionDone: return "ExecutionDone";
    case EventKind::TaskHorizon:   return "TaskHorizon";
    case EventKind::Snapshot:      return "Snapshot";
  }
  return "Unknown";
}

struct Event {
  double time{0.0};
  std::uint64_t seq{0};
  EventKind kind{EventKind::Snapshot};
  std::uint64_t subject{0};  ///< task, vehicle or snapshot ordinal, depending on kind
};

/// Min-queue on (time, seq). The sequence number is assigned on push, so
/// equal-time events pop in insertion order and dispatch is total.
class EventQueue {
 public:
  /// Schedules an event; times earlier than the last popped event are a
  /// causality violation.
  void push(double time, EventKind kind, std::uint64_t subject) {
    if (time < now_) throw std::logic_error("event scheduled in the past");
    heap_.push(Event{time, next_seq_++, kind, subject});
  }

  [[nodiscard]] Event pop() {
    if (heap_.empty()) throw std::logic_error("pop from empty event queue");
    Event e = heap_.top();
    heap_.pop();
    now_ = e.time;
    return e;
  }

  [[nodiscard]] bool empty() const noexcept { return heap_.empty(); }
  [[nodiscard]] std::size_t size() const noexcept { return heap_.size(); }
  [[nodiscard]] double now() const noexcept { return now_; }

 private:
  struct Later {
    bool operator()(const Event& a, const Event& b) const noexcept {
      if (a.time != b.time) return a.time > b.time;
      return a.seq > b.seq;
    }
  };

  std::priority_queue<Event, std::vector<Event>, Later> heap_;
  std::uint64_t next_seq_{0};
  double now_{0.0};
};

}  // namespace vfcsim
