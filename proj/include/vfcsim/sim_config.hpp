#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vfcsim/core.hpp"
#include "vfcsim/link_model.hpp"
#include "vfcsim/q_agent.hpp"
#include "vfcsim/reward.hpp"
#include "vfcsim/state_space.hpp"

namespace vfcsim {

/// Traffic statistics of one observation window. Variances are variances,
/// so the generator uses their square roots as standard deviations.
struct Scenario {
  std::string name{"no1"};
  int trace_count{718};
  double adt{198.3};  ///< mean dwell, s
  double vdt{123.8};  ///< dwell variance
  double anv{474.6};  ///< mean concurrent vehicles
  double vnv{11.6};   ///< vehicle-count variance
  double asv{5.22};   ///< mean speed, m/s
  double vsv{2.61};   ///< speed variance
  double duration{300.0};

  bool operator==(const Scenario&) const = default;

  void validate() const {
    if (trace_count < 0) throw ValidationError("scenario.trace_count", "must be >= 0");
    for (auto [v, f] : {std::pair{adt, "scenario.adt"}, {vdt, "scenario.vdt"}, {anv, "scenario.anv"},
                        {vnv, "scenario.vnv"}, {asv, "scenario.asv"}, {vsv, "scenario.vsv"},
                        {duration, "scenario.duration"}})
      detail::require_positive(v, f);
  }
};

/// The four recorded traffic windows.
[[nodiscard]] inline const std::array<Scenario, 4>& builtin_scenarios() {
  static const std::array<Scenario, 4> kScenarios{{
      {"no1", 718, 198.3, 123.8, 474.6, 11.6, 5.22, 2.61, 300.0},
      {"no2", 862, 188.5, 125.1, 541.6, 5.38, 5.59, 2.73, 300.0},
      {"no3", 928, 196.5, 122.5, 608.0, 7.76, 4.60, 2.40, 300.0},
      {"no4", 359, 173.7, 124.1, 207.9, 3.93, 7.30, 3.16, 300.0},
  }};
  return kScenarios;
}

/// Accepts "no1", "NO.1", "1".
[[nodiscard]] inline std::optional<Scenario> find_scenario(std::string_view name) {
  std::string key;
  for (char c : name)
    if (std::isalnum(static_cast<unsigned char>(c))) key.push_back(static_cast<char>(std::tolower(c)));
  if (key.size() == 1) key = "no" + key;
  for (const auto& s : builtin_scenarios())
    if (s.name == key) return s;
  return std::nullopt;
}

struct TaskParams {
  double size_min_mb{5.0};
  double size_max_mb{10.0};
  double demand_min_mips{100.0};
  double demand_max_mips{500.0};
  double deadline_min{5.0};
  double deadline_max{10.0};
  double memory_per_mb{2.0};  ///< working memory per MB of input

  bool operator==(const TaskParams&) const = default;

  void validate() const {
    detail::require_positive(size_min_mb, "task.size_min_mb");
    detail::require_positive(demand_min_mips, "task.demand_min_mips");
    detail::require_positive(deadline_min, "task.deadline_min_s");
    detail::require_non_negative(memory_per_mb, "task.memory_per_mb");
    if (size_max_mb < size_min_mb) throw ValidationError("task.size_max_mb", "must be >= task.size_min_mb");
    if (demand_max_mips < demand_min_mips)
      throw ValidationError("task.demand_max_mips", "must be >= task.demand_min_mips");
    if (deadline_max < deadline_min) throw ValidationError("task.deadline_max_s", "must be >= task.deadline_min_s");
  }
};

struct TopologyParams {
  double area_side{3000.0};
  int fog_nodes{9};
  double cpu_freq_min{3.0e9};
  double cpu_freq_max{10.0e9};
  double cpu_util_initial{0.20};
  double mem_util_initial{0.15};
  /// MIPS of task demand served per GHz of node clock.
  double mips_per_ghz{50.0};
  double memory_mb{4096.0};
  double storage_mb{256.0};
  double bandwidth_mbps{100.0};
  double cloud_freq{10.0e9};
  double local_cpu{1.0e9};
  std::uint64_t seed{2016};

  bool operator==(const TopologyParams&) const = default;

  void validate() const {
    detail::require_positive(area_side, "topology.area_side_m");
    if (fog_nodes <= 0) throw ValidationError("topology.fog_nodes", "must be positive");
    detail::require_positive(cpu_freq_min, "topology.cpu_freq_min_hz");
    if (cpu_freq_max < cpu_freq_min)
      throw ValidationError("topology.cpu_freq_max_hz", "must be >= topology.cpu_freq_min_hz");
    detail::require_fraction(cpu_util_initial, "topology.cpu_util_initial");
    detail::require_fraction(mem_util_initial, "topology.mem_util_initial");
    if (cpu_util_initial >= 1.0) throw ValidationError("topology.cpu_util_initial", "must be < 1");
    if (mem_util_initial >= 1.0) throw ValidationError("topology.mem_util_initial", "must be < 1");
    detail::require_positive(mips_per_ghz, "topology.mips_per_ghz");
    detail::require_positive(memory_mb, "topology.memory_mb");
    detail::require_positive(storage_mb, "topology.storage_mb");
    detail::require_positive(bandwidth_mbps, "topology.bandwidth_mbps");
    detail::require_positive(cloud_freq, "topology.cloud_freq_hz");
    detail::require_positive(local_cpu, "topology.local_cpu_hz");
  }
};

struct TrafficParams {
  double arrival_prob{0.03};
  double decision_interval{1.0};
  std::string trace_csv;  ///< optional vehicle trace replacing synthetic entries

  bool operator==(const TrafficParams&) const = default;

  void validate() const {
    detail::require_fraction(arrival_prob, "traffic.arrival_prob");
    detail::require_positive(decision_interval, "traffic.decision_interval_s");
  }
};

/// Allocation multipliers applied to the declared requirement.
struct BundleFactors {
  double small{1.0};
  double medium{1.5};
  double large{2.0};

  bool operator==(const BundleFactors&) const = default;

  [[nodiscard]] double factor(Bundle b) const noexcept {
    switch (b) {
      case Bundle::Small:  return small;
      case Bundle::Medium: return medium;
      case Bundle::Large:  return large;
    }
    return small;
  }

  void validate() const {
    if (!(small >= 1.0 && medium >= small && large >= medium))
      throw ValidationError("action.bundle_small", "need 1 <= small <= medium <= large");
  }
};

struct TelemetryParams {
  double rate_window{10.0};    ///< s, request-rate window
  double demand_window{60.0};  ///< s, expected-demand window
  int outcome_window{20};      ///< completions in the response / SLA window

  bool operator==(const TelemetryParams&) const = default;

  void validate() const {
    detail::require_positive(rate_window, "telemetry.rate_window_s");
    detail::require_positive(demand_window, "telemetry.demand_window_s");
    if (outcome_window <= 0) throw ValidationError("telemetry.outcome_window", "must be positive");
  }
};

struct SimConfig {
  Scenario scenario{};
  TrafficParams traffic{};
  TaskParams task{};
  TopologyParams topology{};
  LinkParams link{};
  StateSpaceConfig state{};
  RewardWeights reward{};
  double quality_desired{0.9};
  HyperParams learning{};
  BundleFactors bundles{};
  std::vector<double> wfq_weights;  ///< empty: weight each node by its clock
  TelemetryParams telemetry{};
  double period{10.0};  ///< s, edge-reward and aggregate period

  bool operator==(const SimConfig&) const = default;

  void validate() const {
    scenario.validate();
    traffic.validate();
    task.validate();
    topology.validate();
    link.validate();
    state.validate();
    reward.validate();
    detail::require_finite(quality_desired, "reward.quality_desired");
    learning.validate();
    bundles.validate();
    for (double w : wfq_weights) detail::require_positive(w, "wfq.weights");
    if (!wfq_weights.empty() && static_cast<int>(wfq_weights.size()) != topology.fog_nodes)
      throw ValidationError("wfq.weights", "need one weight per fog node");
    telemetry.validate();
    detail::require_positive(period, "metrics.period_s");
  }

  /// Configured rate scale, or twice the mean per-node task rate when unset.
  [[nodiscard]] double effective_rate_scale() const {
    if (state.rate_scale > 0.0) return state.rate_scale;
    const double per_node = scenario.anv * traffic.arrival_prob / traffic.decision_interval / topology.fog_nodes;
    return std::max(2.0 * per_node, 1e-3);
  }
};

}  // namespace vfcsim
