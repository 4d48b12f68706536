#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "vfcsim/core.hpp"
#include "vfcsim/reward.hpp"

namespace vfcsim {

/// Outcome of one task. Times are seconds; `wait` covers every delay between
/// the end of the upload and the start of execution.
struct TaskRecord {
  std::uint64_t id{0};
  bool serviced{false};
  bool local{false};  ///< executed (or attempted) on the vehicle
  double arrival{0.0};
  double upload{0.0};
  double wait{0.0};
  double processing{0.0};
  double resolved{0.0};  ///< completion or drop time
  int decision_node{-1};
  std::int64_t period{0};
  RewardComponents components{};
  double reward{0.0};

  bool operator==(const TaskRecord&) const = default;
};

struct TaskLedger {
  std::vector<TaskRecord> records;

  [[nodiscard]] std::size_t k_total() const noexcept { return records.size(); }
  [[nodiscard]] std::size_t k_serviced() const noexcept {
    return static_cast<std::size_t>(std::count_if(records.begin(), records.end(), [](const auto& r) { return r.serviced; }));
  }
  [[nodiscard]] std::size_t k_local() const noexcept {
    return static_cast<std::size_t>(
        std::count_if(records.begin(), records.end(), [](const auto& r) { return r.serviced && r.local; }));
  }
  [[nodiscard]] std::size_t k_dropped() const noexcept { return k_total() - k_serviced(); }
};

struct EdgeReward {
  int node{0};
  std::int64_t period{0};
  std::uint64_t task_id{0};
  double reward{0.0};

  bool operator==(const EdgeReward&) const = default;
};

struct EdgeRewardLog {
  std::vector<EdgeReward> entries;
};

namespace detail {

/// Records in task-id order, so every sum below is independent of how the
/// ledger happens to be arranged.
[[nodiscard]] inline std::vector<const TaskRecord*> by_id(std::span<const TaskRecord> records) {
  std::vector<const TaskRecord*> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(&r);
  std::sort(out.begin(), out.end(), [](const TaskRecord* a, const TaskRecord* b) { return a->id < b->id; });
  return out;
}

}  // namespace detail

/// Mean processing time over serviced tasks; 0 (with a note) when none.
[[nodiscard]] inline double apt(const TaskLedger& ledger) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto* r : detail::by_id(ledger.records))
    if (r->serviced) {
      sum += r->processing;
      ++n;
    }
  if (n == 0) {
    diag::note("apt: no serviced tasks, reporting 0");
    return 0.0;
  }
  return sum / static_cast<double>(n);
}

/// Mean of upload + processing over serviced tasks.
[[nodiscard]] inline double ast(const TaskLedger& ledger) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto* r : detail::by_id(ledger.records))
    if (r->serviced) {
      sum += r->processing + r->upload;
      ++n;
    }
  if (n == 0) {
    diag::note("ast: no serviced tasks, reporting 0");
    return 0.0;
  }
  return sum / static_cast<double>(n);
}

[[nodiscard]] inline double asr(const TaskLedger& ledger) {
  if (ledger.k_total() == 0) {
    diag::note("asr: no tasks, reporting 0");
    return 0.0;
  }
  return static_cast<double>(ledger.k_serviced()) / static_cast<double>(ledger.k_total());
}

/// Per-period means of the four reward components (periods with no outcome
/// are skipped).
[[nodiscard]] inline std::vector<RewardComponents> component_series(const TaskLedger& ledger) {
  std::map<std::int64_t, std::pair<RewardComponents, std::size_t>> acc;
  for (const auto* r : detail::by_id(ledger.records)) {
    auto& [sum, n] = acc[r->period];
    sum.wastage += r->components.wastage;
    sum.utilization += r->components.utilization;
    sum.response += r->components.response;
    sum.qos += r->components.qos;
    ++n;
  }
  std::vector<RewardComponents> out;
  out.reserve(acc.size());
  for (const auto& [period, entry] : acc) {
    const auto& [sum, n] = entry;
    const double d = static_cast<double>(n);
    out.push_back({sum.wastage / d, sum.utilization / d, sum.response / d, sum.qos / d});
  }
  return out;
}

/// Min-max normalizes each criterion over the series (wastage inverted) and
/// accumulates the equal-weight sum. A constant criterion scores 1.
[[nodiscard]] inline double cumulative_reward(std::span<const RewardComponents> series) {
  if (series.empty()) {
    diag::note("cumulative_reward: empty series, reporting 0");
    return 0.0;
  }
  using Getter = double (*)(const RewardComponents&);
  constexpr std::array<Getter, 4> getters{
      [](const RewardComponents& c) { return c.wastage; }, [](const RewardComponents& c) { return c.utilization; },
      [](const RewardComponents& c) { return c.response; }, [](const RewardComponents& c) { return c.qos; }};
  constexpr std::array<const char*, 4> names{"wastage", "utilization", "response", "qos"};

  std::array<double, 4> lo{}, hi{};
  for (std::size_t k = 0; k < 4; ++k) {
    lo[k] = hi[k] = getters[k](series.front());
    for (const auto& c : series) {
      lo[k] = std::min(lo[k], getters[k](c));
      hi[k] = std::max(hi[k], getters[k](c));
    }
    if (hi[k] == lo[k]) diag::note(std::string("cumulative_reward: constant ") + names[k] + " series scores 1");
  }

  double total = 0.0;
  for (const auto& c : series) {
    for (std::size_t k = 0; k < 4; ++k) {
      const double span = hi[k] - lo[k];
      double score = 1.0;
      if (span > 0.0) {
        score = (getters[k](c) - lo[k]) / span;
        if (k == 0) score = 1.0 - score;
      }
      total += score;
    }
  }
  return total;
}

[[nodiscard]] inline double cumulative_reward(const TaskLedger& ledger) {
  const auto series = component_series(ledger);
  return cumulative_reward(series);
}

/// Mean per-edge cumulative reward: (1/E) * sum over edges and periods.
[[nodiscard]] inline double aap(const EdgeRewardLog& log, int num_edges) {
  if (num_edges <= 0) throw ValidationError("num_edges", "must be positive");
  if (log.entries.empty()) return 0.0;
  std::vector<const EdgeReward*> sorted;
  sorted.reserve(log.entries.size());
  for (const auto& e : log.entries) {
    if (e.node < 0 || e.node >= num_edges) throw ValidationError("edge_reward.node", "node id out of range");
    sorted.push_back(&e);
  }
  std::sort(sorted.begin(), sorted.end(), [](const EdgeReward* a, const EdgeReward* b) {
    return std::tie(a->node, a->period, a->task_id) < std::tie(b->node, b->period, b->task_id);
  });
  std::vector<double> per_edge(static_cast<std::size_t>(num_edges), 0.0);
  for (const auto* e : sorted) per_edge[static_cast<std::size_t>(e->node)] += e->reward;
  double total = 0.0;
  for (double v : per_edge) total += v;
  return total / static_cast<double>(num_edges);
}

struct MetricsReport {
  std::string scheduler;
  std::string scenario;
  std::uint64_t seed{0};
  double arrival_prob{0.0};
  double apt{0.0};
  double ast{0.0};
  double asr{0.0};
  double cr{0.0};
  double aap{0.0};
  std::size_t k_total{0};
  std::size_t k_serviced{0};
  std::size_t k_local{0};
  std::size_t k_dropped{0};

  bool operator==(const MetricsReport&) const = default;
};

[[nodiscard]] inline MetricsReport compute_metrics(const TaskLedger& ledger, const EdgeRewardLog& edges, int num_edges) {
  MetricsReport m;
  m.apt = apt(ledger);
  m.ast = ast(ledger);
  m.asr = asr(ledger);
  m.cr = cumulative_reward(ledger);
  m.aap = aap(edges, num_edges);
  m.k_total = ledger.k_total();
  m.k_serviced = ledger.k_serviced();
  m.k_local = ledger.k_local();
  m.k_dropped = ledger.k_dropped();
  return m;
}

}  // namespace vfcsim
