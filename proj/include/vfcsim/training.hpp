#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "vfcsim/engine.hpp"
#include "vfcsim/qlearn_scheduler.hpp"

namespace vfcsim {

// Independent random streams derived from one run seed.
inline constexpr std::uint64_t kTrafficStream = 1;
inline constexpr std::uint64_t kExploreStream = 2;

/// Node weights for WFQ: configured, or each node's clock rate in GHz.
[[nodiscard]] inline std::vector<double> wfq_weights(const SimConfig& cfg) {
  if (!cfg.wfq_weights.empty()) return cfg.wfq_weights;
  std::vector<double> w;
  for (const auto& n : build_topology(cfg)) w.push_back(n.cpu_freq / 1e9);
  return w;
}

[[nodiscard]] inline const std::vector<std::string>& scheduler_names() {
  static const std::vector<std::string> kNames{"qlearn", "fcfs", "rr", "wfq"};
  return kNames;
}

/// Rule-based scheduler by name; "qlearn" is built separately because it
/// needs tables.
[[nodiscard]] inline std::unique_ptr<Scheduler> make_baseline(const std::string& name, const SimConfig& cfg) {
  if (name == "fcfs") return std::make_unique<FcfsScheduler>();
  if (name == "rr") return std::make_unique<RoundRobinScheduler>();
  if (name == "wfq") return std::make_unique<WfqScheduler>(wfq_weights(cfg));
  throw ValidationError("scheduler", "unknown scheduler '" + name + "' (expected qlearn, fcfs, rr or wfq)");
}

[[nodiscard]] inline Traffic traffic_for_seed(const SimConfig& cfg, std::uint64_t seed) {
  Rng rng(derive_seed(seed, kTrafficStream));
  return make_traffic(cfg, rng);
}

/// Runs one episode with traffic drawn from `seed`.
[[nodiscard]] inline EpisodeResult run_episode(const SimConfig& cfg, Scheduler& scheduler, std::uint64_t seed,
                                               EventLog* log = nullptr) {
  cfg.validate();
  const Traffic traffic = traffic_for_seed(cfg, seed);
  Simulation sim(cfg, traffic, scheduler, log);
  return sim.run();
}

struct EpisodeSummary {
  int episode{0};
  double epsilon{0.0};
  std::size_t tasks{0};
  double total_reward{0.0};
  double mean_reward{0.0};
  double asr{0.0};
};

struct TrainingResult {
  std::vector<QAgent> agents;
  std::vector<EpisodeSummary> curve;
};

/// Episode loop: episode e uses traffic seed derive_seed(master, e) and the
/// linearly decayed exploration rate. `on_episode` sees each summary as it
/// completes (used to flush a partial curve).
template <typename OnEpisode = void (*)(const EpisodeSummary&)>
[[nodiscard]] TrainingResult run_training(const SimConfig& cfg, std::uint64_t master_seed,
                                          OnEpisode on_episode = [](const EpisodeSummary&) {}) {
  cfg.validate();
  QLearningScheduler sched(cfg, derive_seed(master_seed, kExploreStream));
  TrainingResult out;
  for (int ep = 0; ep < cfg.learning.episodes; ++ep) {
    const double eps = epsilon_at(ep, cfg.learning);
    sched.set_epsilon(eps);
    sched.set_learning(true);
    sched.set_update_budget(cfg.learning.max_time_steps);
    const auto result = run_episode(cfg, sched, derive_seed(master_seed, static_cast<std::uint64_t>(ep)));
    EpisodeSummary s;
    s.episode = ep;
    s.epsilon = eps;
    s.tasks = result.ledger.k_total();
    s.total_reward = result.total_reward;
    s.mean_reward = s.tasks > 0 ? result.total_reward / static_cast<double>(s.tasks) : 0.0;
    s.asr = asr(result.ledger);
    out.curve.push_back(s);
    on_episode(s);
  }
  out.agents = sched.agents();
  return out;
}

/// Greedy, non-learning evaluation of trained agents.
[[nodiscard]] inline EpisodeResult evaluate_qlearn(const SimConfig& cfg, const std::vector<QAgent>& agents,
                                                   std::uint64_t seed, EventLog* log = nullptr) {
  QLearningScheduler sched(cfg, agents, derive_seed(seed, kExploreStream));
  sched.set_epsilon(0.0);
  sched.set_learning(false);
  return run_episode(cfg, sched, seed, log);
}

[[nodiscard]] inline EpisodeResult evaluate_baseline(const SimConfig& cfg, const std::string& name, std::uint64_t seed,
                                                     EventLog* log = nullptr) {
  auto sched = make_baseline(name, cfg);
  return run_episode(cfg, *sched, seed, log);
}

// ─────────────────────────────────────────────
// Checkpoints
// ─────────────────────────────────────────────

[[nodiscard]] inline std::filesystem::path checkpoint_file(const std::filesystem::path& dir, int node) {
  return dir / ("node_" + std::to_string(node) + ".qt");
}

inline void save_agents(const std::filesystem::path& dir, const std::vector<QAgent>& agents) {
  std::filesystem::create_directories(dir);
  for (std::size_t k = 0; k < agents.size(); ++k)
    save_qtable(checkpoint_file(dir, static_cast<int>(k)).string(), agents[k].table());
}

/// Loads one table per fog node; a missing file is an explicit error.
[[nodiscard]] inline std::vector<QAgent> load_agents(const std::filesystem::path& dir, const SimConfig& cfg) {
  std::vector<QAgent> agents;
  for (int k = 0; k < cfg.topology.fog_nodes; ++k) {
    const auto file = checkpoint_file(dir, k);
    if (!std::filesystem::exists(file))
      throw std::runtime_error("missing checkpoint " + file.string() + " (run 'vfcsim train' first)");
    agents.emplace_back(cfg.learning, load_qtable(file.string()));
  }
  return agents;
}

}  // namespace vfcsim
