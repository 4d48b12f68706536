#pragma once

#include <array>
#include <cstdint>
#include <string_view>

#include "vfcsim/core.hpp"

namespace vfcsim {

// ─────────────────────────────────────────────
// Telemetry and discrete levels
// ─────────────────────────────────────────────

/// Continuous measurements taken at a fog node when a decision is due.
struct TelemetrySnapshot {
  double cpu_usage{0.0};             ///< fraction of CPU committed
  double mem_usage{0.0};             ///< fraction of memory committed
  double disk_usage{0.0};            ///< fraction of task storage held
  double net_bw_usage{0.0};          ///< backhaul backlog, normalized
  double request_rate{0.0};          ///< tasks/s over the short window
  double app_type_weight{0.0};       ///< task compute demand over its cap
  double expected_demand{0.0};       ///< tasks/s over the long window
  double recent_response_time{0.0};  ///< seconds, rolling mean
  bool sla_met{true};
  double op_requirement{0.0};  ///< deadline urgency in [0,1]
  double available_nodes{0.0};
  double storage_availability{1.0};

  void validate() const {
    detail::require_fraction(cpu_usage, "cpu_usage");
    detail::require_fraction(mem_usage, "mem_usage");
    detail::require_fraction(disk_usage, "disk_usage");
    detail::require_fraction(net_bw_usage, "net_bw_usage");
    detail::require_non_negative(request_rate, "request_rate");
    detail::require_fraction(app_type_weight, "app_type_weight");
    detail::require_non_negative(expected_demand, "expected_demand");
    detail::require_non_negative(recent_response_time, "recent_response_time");
    detail::require_fraction(op_requirement, "op_requirement");
    detail::require_non_negative(available_nodes, "available_nodes");
    detail::require_fraction(storage_availability, "storage_availability");
  }
};

/// Normalization caps applied when raw node measurements are turned into
/// snapshot fractions.
struct StateCaps {
  double demand_mips{600.0};   ///< app type: Light < 200 <= Medium < 400 <= Heavy
  double backlog_seconds{5.0}; ///< backhaul backlog mapped onto [0,1]

  bool operator==(const StateCaps&) const = default;
};

struct StateSpaceConfig {
  double low_threshold{1.0 / 3.0};
  double high_threshold{2.0 / 3.0};
  /// tasks/s that maps onto 1.0 before thresholding; <= 0 means "derive from
  /// the scenario" (see SimConfig::effective_rate_scale).
  double rate_scale{0.0};
  double response_fast{4.0};
  double response_slow{7.0};
  double node_count_low{1.0};
  double node_count_high{2.0};
  StateCaps caps{};

  bool operator==(const StateSpaceConfig&) const = default;

  void validate() const {
    if (!(low_threshold > 0.0 && low_threshold < high_threshold && high_threshold < 1.0))
      throw ValidationError("low_threshold", "need 0 < low_threshold < high_threshold < 1");
    if (!(response_fast < response_slow))
      throw ValidationError("response_fast", "need response_fast < response_slow");
    if (!(node_count_low < node_count_high))
      throw ValidationError("node_count_low", "need node_count_low < node_count_high");
    detail::require_non_negative(response_fast, "response_fast");
    detail::require_non_negative(node_count_low, "node_count_low");
    detail::require_finite(rate_scale, "rate_scale");
    detail::require_positive(caps.demand_mips, "caps.demand_mips");
    detail::require_positive(caps.backlog_seconds, "caps.backlog_seconds");
  }
};

enum class Level : std::uint8_t { Low, Medium, High };
enum class AppType : std::uint8_t { Light, Medium, Heavy };
enum class Responsiveness : std::uint8_t { Fast, Medium, Slow };
enum class Sla : std::uint8_t { Fulfilled, NotFulfilled };

struct DiscreteState {
  Level cpu{Level::Low};
  Level memory{Level::Low};
  Level disk{Level::Low};
  Level network{Level::Low};
  Level requests{Level::Low};
  AppType app_type{AppType::Light};
  Level expected_demand{Level::Low};
  Responsiveness response{Responsiveness::Fast};
  Sla sla{Sla::Fulfilled};
  Level op_requirement{Level::Low};
  Level compute_nodes{Level::Low};
  Level storage{Level::Low};

  bool operator==(const DiscreteState&) const = default;
};

using StateIndex = std::uint32_t;

/// 3^11 * 2: eleven three-level variables and the two-level SLA flag.
inline constexpr StateIndex kStateCount = 354294;

// ─────────────────────────────────────────────
// Discretization
// ─────────────────────────────────────────────

/// Threshold a normalized value. Values equal to a threshold go to the
/// higher level.
[[nodiscard]] constexpr Level level_of(double f, double low, double high) noexcept {
  if (f < low) return Level::Low;
  if (f < high) return Level::Medium;
  return Level::High;
}

[[nodiscard]] inline DiscreteState discretize(const TelemetrySnapshot& s, const StateSpaceConfig& cfg) {
  s.validate();
  if (!(cfg.rate_scale > 0.0)) throw ValidationError("rate_scale", "must be resolved to a positive value");
  const double lo = cfg.low_threshold;
  const double hi = cfg.high_threshold;

  DiscreteState d;
  d.cpu = level_of(s.cpu_usage, lo, hi);
  d.memory = level_of(s.mem_usage, lo, hi);
  d.disk = level_of(s.disk_usage, lo, hi);
  d.network = level_of(s.net_bw_usage, lo, hi);
  d.requests = level_of(s.request_rate / cfg.rate_scale, lo, hi);
  d.app_type = static_cast<AppType>(level_of(s.app_type_weight, lo, hi));
  d.expected_demand = level_of(s.expected_demand / cfg.rate_scale, lo, hi);
  if (s.recent_response_time < cfg.response_fast)
    d.response = Responsiveness::Fast;
  else if (s.recent_response_time >= cfg.response_slow)
    d.response = Responsiveness::Slow;
  else
    d.response = Responsiveness::Medium;
  d.sla = s.sla_met ? Sla::Fulfilled : Sla::NotFulfilled;
  d.op_requirement = level_of(s.op_requirement, lo, hi);
  d.compute_nodes = level_of(s.available_nodes, cfg.node_count_low, cfg.node_count_high);
  d.storage = level_of(s.storage_availability, lo, hi);
  return d;
}

// ─────────────────────────────────────────────
// Mixed-radix indexing
// ─────────────────────────────────────────────

namespace detail {

// Digit order follows the variable table: CU MU DSU NBU NR AT ED RT SLA OR NCN ASD.
inline constexpr std::array<std::uint32_t, 12> kRadix{3, 3, 3, 3, 3, 3, 3, 3, 2, 3, 3, 3};

[[nodiscard]] constexpr std::array<std::uint32_t, 12> digits_of(const DiscreteState& s) noexcept {
  auto u = [](auto e) { return static_cast<std::uint32_t>(e); };
  return {u(s.cpu),      u(s.memory),         u(s.disk),     u(s.network),
          u(s.requests), u(s.app_type),       u(s.expected_demand), u(s.response),
          u(s.sla),      u(s.op_requirement), u(s.compute_nodes),   u(s.storage)};
}

}  // namespace detail

[[nodiscard]] constexpr StateIndex state_index(const DiscreteState& s) noexcept {
  const auto digits = detail::digits_of(s);
  StateIndex idx = 0;
  for (std::size_t i = 0; i < digits.size(); ++i) idx = idx * detail::kRadix[i] + digits[i];
  return idx;
}

[[nodiscard]] inline DiscreteState state_from_index(StateIndex idx) {
  if (idx >= kStateCount) throw ValidationError("state_index", "out of range");
  std::array<std::uint32_t, 12> digits{};
  for (std::size_t i = digits.size(); i-- > 0;) {
    digits[i] = idx % detail::kRadix[i];
    idx /= detail::kRadix[i];
  }
  DiscreteState s;
  s.cpu = static_cast<Level>(digits[0]);
  s.memory = static_cast<Level>(digits[1]);
  s.disk = static_cast<Level>(digits[2]);
  s.network = static_cast<Level>(digits[3]);
  s.requests = static_cast<Level>(digits[4]);
  s.app_type = static_cast<AppType>(digits[5]);
  s.expected_demand = static_cast<Level>(digits[6]);
  s.response = static_cast<Responsiveness>(digits[7]);
  s.sla = static_cast<Sla>(digits[8]);
  s.op_requirement = static_cast<Level>(digits[9]);
  s.compute_nodes = static_cast<Level>(digits[10]);
  s.storage = static_cast<Level>(digits[11]);
  return s;
}

}  // namespace vfcsim
