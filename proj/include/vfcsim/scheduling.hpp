#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "vfcsim/core.hpp"
#include "vfcsim/state_space.hpp"

namespace vfcsim {

/// Resource triple: CPU in MIPS, memory in MB, bandwidth in Mbps.
struct Resources {
  double cpu_mips{0.0};
  double mem_mb{0.0};
  double bw_mbps{0.0};

  bool operator==(const Resources&) const = default;

  [[nodiscard]] Resources scaled(double f) const noexcept { return {cpu_mips * f, mem_mb * f, bw_mbps * f}; }

  /// Componentwise >= on CPU and memory; bandwidth is accounted but not
  /// admission-controlled.
  [[nodiscard]] bool covers(const Resources& need, double eps = 1e-9) const noexcept {
    return cpu_mips + eps >= need.cpu_mips && mem_mb + eps >= need.mem_mb;
  }
};

enum class TargetKind : std::uint8_t { Vehicle, Fog, Cloud };

struct Target {
  TargetKind kind{TargetKind::Vehicle};
  int node{-1};  ///< fog node id when kind == Fog

  bool operator==(const Target&) const = default;
};

/// Scheduler output shared by every policy.
struct Placement {
  Target target;
  Resources allocation;
  int action{-1};  ///< Q-agent action ordinal, -1 for rule-based schedulers

  bool operator==(const Placement&) const = default;
};

struct TaskView {
  std::uint64_t id{0};
  double arrival{0.0};
  double size_bits{0.0};
  double deadline{0.0};
  Resources requirement;
};

struct NodeView {
  int id{0};
  bool reachable{false};
  double distance{0.0};
  Resources free;    ///< capacity not yet committed
  Resources usable;  ///< capacity above the background load
  bool queue_empty{true};
  double cpu_util{0.0};    ///< background plus committed CPU, fraction of capacity
  double queued_load{0.0}; ///< CPU demand waiting in the node queue, fraction of capacity

  [[nodiscard]] bool fits(const Resources& need) const noexcept {
    return reachable && queue_empty && free.covers(need);
  }
};

/// Everything a scheduler sees when deciding one task.
struct DecisionContext {
  TaskView task;
  std::span<const NodeView> nodes;  ///< indexed by node id
  int decision_node{-1};
  StateIndex state{0};
};

/// Common interface for the learned and rule-based schedulers. `decide`
/// returns nullopt when the task must wait for capacity.
class Scheduler {
 public:
  virtual ~Scheduler() = default;

  [[nodiscard]] virtual std::string_view name() const = 0;
  [[nodiscard]] virtual std::optional<Placement> decide(const DecisionContext& ctx) = 0;

  [[nodiscard]] virtual bool learns() const { return false; }
  virtual void learn(int /*node*/, StateIndex /*state*/, int /*action*/, StateIndex /*next*/, double /*reward*/) {}
};

// ─────────────────────────────────────────────
// Rule-based baselines
// ─────────────────────────────────────────────

namespace detail {

/// True when the requirement exceeds the usable capacity of every reachable
/// node, i.e. waiting can never help.
[[nodiscard]] inline bool oversize_everywhere(const DecisionContext& ctx) {
  for (const auto& n : ctx.nodes)
    if (n.reachable && n.usable.covers(ctx.task.requirement)) return false;
  return true;
}

[[nodiscard]] inline std::optional<Placement> fallback(const DecisionContext& ctx) {
  if (oversize_everywhere(ctx)) return Placement{{TargetKind::Cloud, -1}, ctx.task.requirement};
  return std::nullopt;
}

}  // namespace detail

/// First node in id order with room for the exact requirement.
[[nodiscard]] inline std::optional<Placement> fcfs_select(const DecisionContext& ctx) {
  for (const auto& n : ctx.nodes)
    if (n.fits(ctx.task.requirement)) return Placement{{TargetKind::Fog, n.id}, ctx.task.requirement};
  return detail::fallback(ctx);
}

/// Cyclic scan from `cursor`; the cursor moves one past the chosen node.
[[nodiscard]] inline std::optional<Placement> rr_select(const DecisionContext& ctx, std::size_t& cursor) {
  const std::size_t n = ctx.nodes.size();
  for (std::size_t k = 0; k < n; ++k) {
    const auto& node = ctx.nodes[(cursor + k) % n];
    if (node.fits(ctx.task.requirement)) {
      cursor = (static_cast<std::size_t>(node.id) + 1) % n;
      return Placement{{TargetKind::Fog, node.id}, ctx.task.requirement};
    }
  }
  return detail::fallback(ctx);
}

/// Per-node weights and virtual finish times for weighted fair queuing.
struct WfqState {
  std::vector<double> weights;
  std::vector<double> finish;

  explicit WfqState(std::vector<double> w) : weights(std::move(w)), finish(weights.size(), 0.0) {
    for (double x : weights)
      if (!(x > 0.0) || !std::isfinite(x)) throw ValidationError("wfq.weights", "weights must be positive");
  }
};

/// Minimum virtual finish time among nodes with room (ties: lowest id); the
/// chosen node's finish time advances by demand / weight.
[[nodiscard]] inline std::optional<Placement> wfq_select(const DecisionContext& ctx, WfqState& wfq) {
  if (wfq.weights.size() != ctx.nodes.size()) throw ValidationError("wfq.weights", "one weight per node required");
  const NodeView* best = nullptr;
  for (const auto& n : ctx.nodes) {
    if (!n.fits(ctx.task.requirement)) continue;
    if (best == nullptr || wfq.finish[n.id] < wfq.finish[best->id]) best = &n;
  }
  if (best == nullptr) return detail::fallback(ctx);
  wfq.finish[best->id] += ctx.task.requirement.cpu_mips / wfq.weights[best->id];
  return Placement{{TargetKind::Fog, best->id}, ctx.task.requirement};
}

class FcfsScheduler final : public Scheduler {
 public:
  [[nodiscard]] std::string_view name() const override { return "fcfs"; }
  [[nodiscard]] std::optional<Placement> decide(const DecisionContext& ctx) override { return fcfs_select(ctx); }
};

class RoundRobinScheduler final : public Scheduler {
 public:
  [[nodiscard]] std::string_view name() const override { return "rr"; }
  [[nodiscard]] std::optional<Placement> decide(const DecisionContext& ctx) override { return rr_select(ctx, cursor_); }
  [[nodiscard]] std::size_t cursor() const noexcept { return cursor_; }

 private:
  std::size_t cursor_{0};
};

class WfqScheduler final : public Scheduler {
 public:
  explicit WfqScheduler(std::vector<double> weights) : state_(std::move(weights)) {}

  [[nodiscard]] std::string_view name() const override { return "wfq"; }
  [[nodiscard]] std::optional<Placement> decide(const DecisionContext& ctx) override { return wfq_select(ctx, state_); }
  [[nodiscard]] const WfqState& state() const noexcept { return state_; }

 private:
  WfqState state_;
};

}  // namespace vfcsim
