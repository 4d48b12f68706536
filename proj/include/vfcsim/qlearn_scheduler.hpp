#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "vfcsim/q_agent.hpp"
#include "vfcsim/scheduling.hpp"
#include "vfcsim/sim_config.hpp"

namespace vfcsim {

/// Least loaded reachable node (committed plus queued CPU); ties to the lowest id.
[[nodiscard]] inline int least_loaded_node(std::span<const NodeView> nodes) {
  int best = -1;
  double best_load = 0.0;
  for (const auto& n : nodes) {
    if (!n.reachable) continue;
    const double load = n.cpu_util + n.queued_load;
    if (best < 0 || load < best_load) {
      best = n.id;
      best_load = load;
    }
  }
  return best;
}

/// Maps an action to a placement. Fog allocations are the requirement scaled
/// by the bundle factor; the engine clamps them to the node's usable capacity.
[[nodiscard]] inline Placement placement_for(const Action& action, const DecisionContext& ctx,
                                             const BundleFactors& bundles) {
  const Resources alloc = ctx.task.requirement.scaled(bundles.factor(action.bundle));
  const int a = static_cast<int>(action.index());
  switch (action.tier) {
    case Tier::Local:
      return {{TargetKind::Vehicle, -1}, ctx.task.requirement, a};
    case Tier::Cloud:
      return {{TargetKind::Cloud, -1}, alloc, a};
    case Tier::Fog: {
      const int node = least_loaded_node(ctx.nodes);
      if (node < 0) return {{TargetKind::Vehicle, -1}, ctx.task.requirement, a};
      return {{TargetKind::Fog, node}, alloc, a};
    }
  }
  return {{TargetKind::Vehicle, -1}, ctx.task.requirement, a};
}

/// One tabular agent per fog node; the decision node's agent chooses and is
/// later credited with the outcome.
class QLearningScheduler final : public Scheduler {
 public:
  QLearningScheduler(const SimConfig& cfg, std::uint64_t explore_seed)
      : bundles_(cfg.bundles), rng_(explore_seed) {
    agents_.reserve(static_cast<std::size_t>(cfg.topology.fog_nodes));
    for (int i = 0; i < cfg.topology.fog_nodes; ++i) agents_.emplace_back(cfg.learning);
  }

  QLearningScheduler(const SimConfig& cfg, std::vector<QAgent> agents, std::uint64_t explore_seed)
      : bundles_(cfg.bundles), rng_(explore_seed), agents_(std::move(agents)) {
    if (static_cast<int>(agents_.size()) != cfg.topology.fog_nodes)
      throw ValidationError("qtables", "need one table per fog node");
  }

  [[nodiscard]] std::string_view name() const override { return "qlearn"; }

  /// Exploration rate for subsequent decisions; 0 means greedy evaluation.
  void set_epsilon(double eps) {
    detail::require_fraction(eps, "epsilon");
    epsilon_ = eps;
  }
  [[nodiscard]] double epsilon() const noexcept { return epsilon_; }

  /// Learning is switched off for evaluation runs.
  void set_learning(bool on) noexcept { learning_ = on; }
  [[nodiscard]] bool learns() const override { return learning_; }

  /// Caps the number of updates until the next reset; 0 means uncapped.
  void set_update_budget(int budget) noexcept {
    budget_ = budget;
    updates_ = 0;
  }

  [[nodiscard]] std::optional<Placement> decide(const DecisionContext& ctx) override {
    auto& agent = agents_.at(static_cast<std::size_t>(ctx.decision_node));
    const auto a = agent.act(ctx.state, epsilon_, rng_);
    return placement_for(Action::from_index(a), ctx, bundles_);
  }

  void learn(int node, StateIndex state, int action, StateIndex next, double reward) override {
    if (!learning_ || action < 0) return;
    if (budget_ > 0 && updates_ >= budget_) return;
    agents_.at(static_cast<std::size_t>(node)).learn(state, static_cast<std::uint32_t>(action), next, reward);
    ++updates_;
  }

  [[nodiscard]] const std::vector<QAgent>& agents() const noexcept { return agents_; }

 private:
  BundleFactors bundles_;
  Rng rng_;
  std::vector<QAgent> agents_;
  double epsilon_{0.0};
  bool learning_{true};
  int budget_{0};
  int updates_{0};
};

}  // namespace vfcsim
