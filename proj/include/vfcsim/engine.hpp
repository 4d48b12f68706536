#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <list>
#include <memory>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vfcsim/core.hpp"
#include "vfcsim/event_queue.hpp"
#include "vfcsim/link_model.hpp"
#include "vfcsim/metrics.hpp"
#include "vfcsim/reward.hpp"
#include "vfcsim/scheduling.hpp"
#include "vfcsim/sim_config.hpp"
#include "vfcsim/state_space.hpp"
#include "vfcsim/traffic.hpp"

namespace vfcsim {

// ─────────────────────────────────────────────
// Event log
// ─────────────────────────────────────────────

/// Newline-delimited JSON records: {time, kind, task_id, node_id, detail}.
/// Missing ids are written as null.
class EventLog {
 public:
  using Json = nlohmann::ordered_json;

  explicit EventLog(std::ostream& os) : os_(&os) {}

  void write(double time, std::string_view kind, std::optional<std::uint64_t> task, std::optional<int> node,
             Json detail = Json::object()) {
    Json rec;
    rec["time"] = time;
    rec["kind"] = kind;
    rec["task_id"] = task ? Json(*task) : Json(nullptr);
    rec["node_id"] = node ? Json(*node) : Json(nullptr);
    rec["detail"] = std::move(detail);
    *os_ << rec.dump() << '\n';
    ++records_;
  }

  [[nodiscard]] std::size_t records() const noexcept { return records_; }

 private:
  std::ostream* os_;
  std::size_t records_{0};
};

// ─────────────────────────────────────────────
// Topology
// ─────────────────────────────────────────────

struct FogNodeSpec {
  int id{0};
  Position position;
  double cpu_freq{0.0};  ///< Hz
  Resources capacity;    ///< nominal capacity
  Resources usable;      ///< capacity left after the background load
};

/// Nodes at the cell centres of a ceil(sqrt(n)) grid over the area; clock
/// rates come from the topology seed so every run shares one topology.
[[nodiscard]] inline std::vector<FogNodeSpec> build_topology(const SimConfig& cfg) {
  const auto& t = cfg.topology;
  const int n = t.fog_nodes;
  const int cols = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n))));
  const int rows = (n + cols - 1) / cols;
  const double cw = t.area_side / cols;
  const double ch = t.area_side / rows;
  Rng rng(t.seed);
  std::vector<FogNodeSpec> nodes;
  nodes.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    FogNodeSpec f;
    f.id = i;
    f.position = {(i % cols + 0.5) * cw, (i / cols + 0.5) * ch};
    f.cpu_freq = rng.uniform(t.cpu_freq_min, t.cpu_freq_max);
    f.capacity = {f.cpu_freq / 1e9 * t.mips_per_ghz, t.memory_mb, t.bandwidth_mbps};
    f.usable = {f.capacity.cpu_mips * (1.0 - t.cpu_util_initial), f.capacity.mem_mb * (1.0 - t.mem_util_initial),
                f.capacity.bw_mbps};
    nodes.push_back(f);
  }
  return nodes;
}

/// Declared requirement of a task: CPU = demand, memory proportional to the
/// input size, bandwidth = input over the deadline.
[[nodiscard]] inline Resources task_requirement(const TaskSpec& t, const TaskParams& p) {
  return {t.demand_mips, t.size_bits / kBitsPerMegabyte * p.memory_per_mb, t.size_bits / t.deadline / 1e6};
}

// ─────────────────────────────────────────────
// Episode
// ─────────────────────────────────────────────

struct EpisodeResult {
  TaskLedger ledger;
  EdgeRewardLog edges;
  double total_reward{0.0};  ///< summed in task-id order
  std::size_t events{0};
};

/// One deterministic episode over pre-generated traffic. The simulation is
/// single-threaded; the scheduler is consulted on arrival and, for deferred
/// tasks, whenever capacity is released.
class Simulation {
 public:
  Simulation(const SimConfig& cfg, const Traffic& traffic, Scheduler& scheduler, EventLog* log = nullptr)
      : cfg_(cfg), traffic_(traffic), scheduler_(scheduler), log_(log), specs_(build_topology(cfg)) {
    cfg_.validate();
    cfg_.state.rate_scale = cfg_.effective_rate_scale();
    nodes_.resize(specs_.size());
    deferred_.resize(specs_.size());
    windows_.resize(specs_.size() + 1);  // last slot: tasks with no decision node
    local_busy_.assign(traffic_.vehicles.size(), -std::numeric_limits<double>::infinity());
    tasks_.resize(traffic_.tasks.size());
    for (std::size_t i = 0; i < tasks_.size(); ++i) {
      const auto& spec = traffic_.tasks[i];
      if (spec.id != i) throw std::logic_error("task ids must follow arrival order");
      if (spec.vehicle < 0 || static_cast<std::size_t>(spec.vehicle) >= traffic_.vehicles.size())
        throw ValidationError("task.vehicle", "unknown vehicle");
      tasks_[i].requirement = task_requirement(spec, cfg_.task);
    }
  }

  [[nodiscard]] EpisodeResult run() {
    if (ran_) throw std::logic_error("Simulation::run called twice");
    ran_ = true;
    const double duration = cfg_.scenario.duration;
    if (log_ != nullptr) {
      for (const auto& v : traffic_.vehicles) {
        if (v.entry_time < duration && v.exit_time() > 0.0)
          queue_.push(std::max(v.entry_time, 0.0), EventKind::VehicleEnter, static_cast<std::uint64_t>(v.id));
        if (v.exit_time() > 0.0 && v.exit_time() <= duration)
          queue_.push(v.exit_time(), EventKind::VehicleExit, static_cast<std::uint64_t>(v.id));
      }
    }
    for (const auto& t : traffic_.tasks) queue_.push(t.arrival, EventKind::TaskArrival, t.id);
    const auto snapshots = static_cast<std::uint64_t>(std::floor(duration / cfg_.period));
    for (std::uint64_t k = 0; k <= snapshots; ++k)
      queue_.push(static_cast<double>(k) * cfg_.period, EventKind::Snapshot, k);

    std::size_t dispatched = 0;
    while (!queue_.empty()) {
      const Event e = queue_.pop();
      ++dispatched;
      dispatch(e);
    }

    EpisodeResult out;
    out.events = dispatched;
    out.ledger.records.reserve(tasks_.size());
    for (auto& t : tasks_) {
      if (t.phase != Phase::Done) throw std::logic_error("task left unresolved at end of episode");
      out.ledger.records.push_back(t.record);
      out.total_reward += t.record.reward;
    }
    out.edges = std::move(edges_);
    return out;
  }

  [[nodiscard]] const std::vector<FogNodeSpec>& topology() const noexcept { return specs_; }

 private:
  enum class Phase : std::uint8_t { Waiting, Deferred, Queued, Running, Done };

  struct TaskState {
    Resources requirement;
    Phase phase{Phase::Waiting};
    int decision_node{-1};
    StateIndex state{0};
    Placement placement;
    double horizon{0.0};
    double upload{0.0};
    double upload_done{0.0};
    double wait{0.0};
    double processing{0.0};
    double completes_at{std::numeric_limits<double>::infinity()};
    TaskRecord record;
  };

  struct NodeState {
    Resources committed;
    std::deque<std::uint64_t> queue;
    double queued_cpu{0.0};
    double stored_mb{0.0};
    double backhaul_free{0.0};
    std::deque<double> arrivals;
  };

  /// Rolling outcome statistics for one decision node.
  struct OutcomeWindow {
    std::deque<std::pair<double, double>> completions;  ///< (response, deadline)
    std::deque<bool> serviced;
  };

  // ── event dispatch ──

  void dispatch(const Event& e) {
    switch (e.kind) {
      case EventKind::VehicleEnter:
        log(e.time, "VehicleEnter", std::nullopt, std::nullopt, {{"vehicle", e.subject}});
        break;
      case EventKind::VehicleExit:
        log(e.time, "VehicleExit", std::nullopt, std::nullopt, {{"vehicle", e.subject}});
        break;
      case EventKind::TaskArrival:   on_arrival(e.subject, e.time); break;
      case EventKind::UploadDone:    on_upload_done(e.subject, e.time); break;
      case EventKind::ExecutionDone: on_execution_done(e.subject, e.time); break;
      case EventKind::TaskHorizon:   on_horizon(e.subject, e.time); break;
      case EventKind::Snapshot:      on_snapshot(e.time); break;
    }
  }

  void on_arrival(std::uint64_t id, double now) {
    const auto& spec = traffic_.tasks[id];
    auto& task = tasks_[id];
    const auto& vehicle = traffic_.vehicles[static_cast<std::size_t>(spec.vehicle)];
    task.horizon = std::min(spec.arrival + spec.deadline, vehicle.exit_time());
    task.record.id = id;
    task.record.arrival = spec.arrival;
    log(now, "TaskArrival", id, std::nullopt,
        {{"vehicle", spec.vehicle}, {"size_bits", spec.size_bits}, {"demand_mips", spec.demand_mips},
         {"deadline", spec.deadline}});
    queue_.push(std::max(task.horizon, now), EventKind::TaskHorizon, id);

    const Position pos = vehicle.position_at(now, cfg_.topology.area_side);
    views_ = node_views(pos, task.requirement);
    task.decision_node = nearest_reachable(views_);
    if (task.decision_node < 0) {
      place(id, Placement{{TargetKind::Vehicle, -1}, task.requirement}, now);
      return;
    }
    auto& ns = nodes_[static_cast<std::size_t>(task.decision_node)];
    ns.arrivals.push_back(now);
    task.state = state_index(discretize(telemetry(task.decision_node, id, now), cfg_.state));

    auto& waiting = deferred_[static_cast<std::size_t>(task.decision_node)];
    std::optional<Placement> p;
    if (waiting.empty()) {
      DecisionContext ctx{task_view(id), views_, task.decision_node, task.state};
      p = scheduler_.decide(ctx);
    }
    if (p) {
      place(id, *p, now);
    } else {
      task.phase = Phase::Deferred;
      waiting.push_back(id);
    }
  }

  void on_upload_done(std::uint64_t id, double now) {
    const auto& t = tasks_[id];
    if (t.phase == Phase::Done) return;
    log(now, "UploadDone", id, target_node(t.placement), {{"upload", t.upload}});
  }

  void on_execution_done(std::uint64_t id, double now) {
    auto& t = tasks_[id];
    if (t.phase == Phase::Done) return;
    release(id, now);
    resolve(id, true, now);
    after_release(now);
  }

  void on_horizon(std::uint64_t id, double now) {
    auto& t = tasks_[id];
    if (t.phase == Phase::Done || t.completes_at <= t.horizon) return;
    switch (t.phase) {
      case Phase::Deferred:
        deferred_[static_cast<std::size_t>(t.decision_node)].remove(id);
        break;
      case Phase::Queued: {
        auto& ns = nodes_[static_cast<std::size_t>(t.placement.target.node)];
        ns.queue.erase(std::find(ns.queue.begin(), ns.queue.end(), id));
        ns.queued_cpu = std::max(0.0, ns.queued_cpu - t.placement.allocation.cpu_mips);
        ns.stored_mb = std::max(0.0, ns.stored_mb - mb_of(id));
        break;
      }
      default:
        break;
    }
    const bool was_queued = t.phase == Phase::Queued;
    const bool freed = release(id, now);
    resolve(id, false, now);
    if (freed || was_queued) after_release(now);
  }

  void on_snapshot(double now) {
    if (log_ == nullptr) return;
    EventLog::Json nodes = EventLog::Json::array();
    for (std::size_t k = 0; k < specs_.size(); ++k) {
      const auto& ns = nodes_[k];
      nodes.push_back({{"node", k},
                       {"cpu_util", cpu_util(static_cast<int>(k))},
                       {"mem_util", mem_util(static_cast<int>(k))},
                       {"queue", ns.queue.size()}});
    }
    log(now, "Snapshot", std::nullopt, std::nullopt, {{"nodes", std::move(nodes)}, {"deferred", deferred_count()}});
  }

  // ── placement ──

  void place(std::uint64_t id, Placement p, double now) {
    auto& t = tasks_[id];
    const auto& spec = traffic_.tasks[id];
    const auto& vehicle = traffic_.vehicles[static_cast<std::size_t>(spec.vehicle)];
    const Position pos = vehicle.position_at(now, cfg_.topology.area_side);

    if (p.target.kind == TargetKind::Cloud && nearest_in_range(pos) < 0) p = {{TargetKind::Vehicle, -1}, t.requirement, p.action};
    t.placement = p;
    t.record.local = p.target.kind == TargetKind::Vehicle;
    log(now, "Placement", id, target_node(p),
        {{"target", target_name(p.target.kind)}, {"action", p.action}, {"alloc_cpu", p.allocation.cpu_mips}});

    switch (p.target.kind) {
      case TargetKind::Vehicle: {
        auto& busy = local_busy_[static_cast<std::size_t>(spec.vehicle)];
        t.upload = 0.0;
        t.processing = processing_time(spec.size_bits, cfg_.link.cycles_per_bit, vehicle.local_cpu);
        t.phase = Phase::Running;
        if (!finish(t, spec, std::max(now, busy))) {
          resolve(id, false, now);
          return;
        }
        busy = t.completes_at;
        break;
      }
      case TargetKind::Cloud: {
        const int edge = nearest_in_range(pos);
        auto& ns = nodes_[static_cast<std::size_t>(edge)];
        const double v2i = upload_time(spec.size_bits, v2i_rate(cfg_.link, distance(pos, specs_[edge].position)));
        const double wired = upload_time(spec.size_bits, cfg_.link.wired_rate);
        t.upload = v2i + wired;
        t.processing = processing_time(spec.size_bits, cfg_.link.cycles_per_bit, cfg_.topology.cloud_freq);
        const double wire_start = std::max(now + v2i, ns.backhaul_free);
        t.phase = Phase::Running;
        if (!finish(t, spec, wire_start + wired)) {
          resolve(id, false, now);
          return;
        }
        ns.backhaul_free = wire_start + wired;
        break;
      }
      case TargetKind::Fog: {
        const int k = p.target.node;
        const auto& fs = specs_.at(static_cast<std::size_t>(k));
        if (!fs.usable.covers(t.requirement)) {
          resolve(id, false, now);
          return;
        }
        p.allocation = {std::min(p.allocation.cpu_mips, fs.usable.cpu_mips),
                        std::min(p.allocation.mem_mb, fs.usable.mem_mb),
                        std::min(p.allocation.bw_mbps, fs.usable.bw_mbps)};
        t.placement = p;
        t.upload = upload_time(spec.size_bits, v2i_rate(cfg_.link, distance(pos, fs.position)));
        t.upload_done = now + t.upload;
        auto& ns = nodes_[static_cast<std::size_t>(k)];
        ns.queue.push_back(id);
        ns.queued_cpu += p.allocation.cpu_mips;
        ns.stored_mb += mb_of(id);
        t.phase = Phase::Queued;
        if (t.upload_done <= t.horizon) queue_.push(t.upload_done, EventKind::UploadDone, id);
        try_start(k, now);
        break;
      }
    }
  }

  /// Fixes wait and completion for a task whose execution can begin at
  /// `ready`; completion is arrival + upload + wait + processing, summed in
  /// that order. Returns false, committing nothing, when the task would
  /// finish past its horizon: such a task is never started.
  bool finish(TaskState& t, const TaskSpec& spec, double ready) {
    const double wait = std::max(0.0, ready - (spec.arrival + t.upload));
    const double end = spec.arrival + t.upload + wait + t.processing;
    if (end > t.horizon) return false;
    t.wait = wait;
    t.completes_at = end;
    queue_.push(std::max(end, queue_.now()), EventKind::ExecutionDone, spec.id);
    if (t.placement.target.kind == TargetKind::Cloud)
      queue_.push(std::max(spec.arrival + t.upload + wait, queue_.now()), EventKind::UploadDone, spec.id);
    return true;
  }

  /// Reserves capacity for queued tasks at the head of node k's FIFO.
  void try_start(int k, double now) {
    auto& ns = nodes_[static_cast<std::size_t>(k)];
    const auto& fs = specs_[static_cast<std::size_t>(k)];
    while (!ns.queue.empty()) {
      const auto id = ns.queue.front();
      auto& t = tasks_[id];
      const Resources free = free_of(k);
      if (!free.covers(t.placement.allocation)) break;
      ns.queue.pop_front();
      ns.queued_cpu = std::max(0.0, ns.queued_cpu - t.placement.allocation.cpu_mips);
      const auto& spec = traffic_.tasks[id];
      const double share = t.placement.allocation.cpu_mips / fs.capacity.cpu_mips;
      t.processing = processing_time(spec.size_bits, cfg_.link.cycles_per_bit, share * fs.cpu_freq);
      if (!finish(t, spec, std::max(t.upload_done, now))) {
        ns.stored_mb = std::max(0.0, ns.stored_mb - mb_of(id));
        resolve(id, false, now);
        continue;
      }
      ns.committed.cpu_mips += t.placement.allocation.cpu_mips;
      ns.committed.mem_mb += t.placement.allocation.mem_mb;
      ns.committed.bw_mbps += t.placement.allocation.bw_mbps;
      check_capacity(k);
      t.phase = Phase::Running;
    }
  }

  /// Frees fog capacity held by a running task; returns true if any was held.
  bool release(std::uint64_t id, double /*now*/) {
    auto& t = tasks_[id];
    if (t.placement.target.kind != TargetKind::Fog || t.phase != Phase::Running) return false;
    auto& ns = nodes_[static_cast<std::size_t>(t.placement.target.node)];
    ns.committed.cpu_mips = std::max(0.0, ns.committed.cpu_mips - t.placement.allocation.cpu_mips);
    ns.committed.mem_mb = std::max(0.0, ns.committed.mem_mb - t.placement.allocation.mem_mb);
    ns.committed.bw_mbps = std::max(0.0, ns.committed.bw_mbps - t.placement.allocation.bw_mbps);
    ns.stored_mb = std::max(0.0, ns.stored_mb - mb_of(id));
    return true;
  }

  void after_release(double now) {
    for (std::size_t k = 0; k < specs_.size(); ++k) try_start(static_cast<int>(k), now);
    retry_deferred(now);
  }

  /// Offers waiting tasks to the scheduler again. Each decision node's line
  /// is strictly FIFO: a head that still cannot be placed blocks the rest.
  void retry_deferred(double now) {
    for (auto& waiting : deferred_) {
      while (!waiting.empty()) {
        const auto id = waiting.front();
        const auto& spec = traffic_.tasks[id];
        const auto& vehicle = traffic_.vehicles[static_cast<std::size_t>(spec.vehicle)];
        views_ = node_views(vehicle.position_at(now, cfg_.topology.area_side), tasks_[id].requirement);
        DecisionContext ctx{task_view(id), views_, tasks_[id].decision_node, tasks_[id].state};
        const auto p = scheduler_.decide(ctx);
        if (!p) break;
        waiting.pop_front();
        place(id, *p, now);
      }
    }
  }

  [[nodiscard]] std::size_t deferred_count() const noexcept {
    std::size_t n = 0;
    for (const auto& w : deferred_) n += w.size();
    return n;
  }

  // ── outcomes ──

  void resolve(std::uint64_t id, bool serviced, double now) {
    auto& t = tasks_[id];
    const auto& spec = traffic_.tasks[id];
    t.phase = Phase::Done;
    const int d = t.decision_node;
    auto& win = windows_[d < 0 ? specs_.size() : static_cast<std::size_t>(d)];
    const auto cap = static_cast<std::size_t>(cfg_.telemetry.outcome_window);
    win.serviced.push_back(serviced);
    if (win.serviced.size() > cap) win.serviced.pop_front();

    RewardComponents c = kDropComponents;
    const double response = now - spec.arrival;
    if (serviced) {
      win.completions.emplace_back(response, spec.deadline);
      if (win.completions.size() > cap) win.completions.pop_front();
      c = outcome_components(id, response, now);
    }
    const double reward = total_reward(c, cfg_.reward);

    auto& r = t.record;
    r.serviced = serviced;
    r.upload = t.upload;
    r.wait = t.wait;
    r.processing = t.processing;
    r.resolved = serviced ? spec.arrival + t.upload + t.wait + t.processing : now;
    r.decision_node = d;
    r.period = static_cast<std::int64_t>(std::floor(now / cfg_.period));
    r.components = c;
    r.reward = reward;
    if (d >= 0) edges_.entries.push_back({d, r.period, id, reward});

    if (d >= 0 && scheduler_.learns() && t.placement.action >= 0) {
      const StateIndex next = state_index(discretize(telemetry(d, id, now), cfg_.state));
      scheduler_.learn(d, t.state, t.placement.action, next, reward);
    }

    if (log_ != nullptr) {
      log(now, serviced ? "ExecutionDone" : "TaskDropped", id, target_node(t.placement),
          {{"serviced", serviced},
           {"target", target_name(t.placement.target.kind)},
           {"local", r.local},
           {"arrival", spec.arrival},
           {"upload", r.upload},
           {"wait", r.wait},
           {"processing", r.processing},
           {"resolved", r.resolved},
           {"decision_node", d < 0 ? EventLog::Json(nullptr) : EventLog::Json(d)},
           {"period", r.period},
           {"wastage", c.wastage},
           {"utilization", c.utilization},
           {"response", c.response},
           {"qos", c.qos},
           {"reward", reward}});
    }
  }

  [[nodiscard]] RewardComponents outcome_components(std::uint64_t id, double response, double now) {
    const auto& t = tasks_[id];
    const auto& spec = traffic_.tasks[id];
    const auto& topo = cfg_.topology;

    Resources cap;
    switch (t.placement.target.kind) {
      case TargetKind::Fog:     cap = specs_[static_cast<std::size_t>(t.placement.target.node)].capacity; break;
      case TargetKind::Cloud:   cap = {topo.cloud_freq / 1e9 * topo.mips_per_ghz, topo.memory_mb, cfg_.link.wired_rate / 1e6}; break;
      case TargetKind::Vehicle: cap = {topo.local_cpu / 1e9 * topo.mips_per_ghz, topo.memory_mb, topo.bandwidth_mbps}; break;
    }
    auto frac = [](double v, double c) { return std::clamp(v / c, 0.0, 1.0); };
    WastageSample w;
    w.actual_cpu = frac(t.placement.allocation.cpu_mips, cap.cpu_mips);
    w.actual_mem = frac(t.placement.allocation.mem_mb, cap.mem_mb);
    w.actual_bw = frac(t.placement.allocation.bw_mbps, cap.bw_mbps);
    w.efficient_cpu = std::min(w.actual_cpu, frac(t.requirement.cpu_mips, cap.cpu_mips));
    w.efficient_mem = std::min(w.actual_mem, frac(t.requirement.mem_mb, cap.mem_mb));
    w.efficient_bw = std::min(w.actual_bw, frac(t.requirement.bw_mbps, cap.bw_mbps));

    RewardComponents c;
    c.wastage = resource_wastage(std::span<const WastageSample>(&w, 1));
    if (t.decision_node >= 0) {
      const auto snap = telemetry(t.decision_node, id, now);
      c.utilization = resource_utilization({snap.cpu_usage, snap.mem_usage, snap.net_bw_usage}, cfg_.reward);
    }
    c.response = response_time_reward({response, spec.deadline});
    const auto& win = windows_[t.decision_node < 0 ? specs_.size() : static_cast<std::size_t>(t.decision_node)];
    const double reliability = win.serviced.empty()
                                   ? 0.0
                                   : static_cast<double>(std::count(win.serviced.begin(), win.serviced.end(), true)) /
                                         static_cast<double>(win.serviced.size());
    QualitySample q;
    q.latency = std::max(response, cfg_.reward.latency_floor);
    q.throughput = std::min(1.0, spec.size_bits / q.latency / cfg_.link.wired_rate);
    q.reliability = reliability;
    q.quality_desired = cfg_.quality_desired;
    c.qos = qos_reward(q, cfg_.reward);
    return c;
  }

  // ── telemetry ──

  [[nodiscard]] double cpu_util(int k) const {
    const auto& fs = specs_[static_cast<std::size_t>(k)];
    return std::clamp(cfg_.topology.cpu_util_initial + nodes_[static_cast<std::size_t>(k)].committed.cpu_mips / fs.capacity.cpu_mips,
                      0.0, 1.0);
  }

  [[nodiscard]] double mem_util(int k) const {
    const auto& fs = specs_[static_cast<std::size_t>(k)];
    return std::clamp(cfg_.topology.mem_util_initial + nodes_[static_cast<std::size_t>(k)].committed.mem_mb / fs.capacity.mem_mb,
                      0.0, 1.0);
  }

  /// Snapshot of decision node k as seen by task `id` at time `now`.
  [[nodiscard]] TelemetrySnapshot telemetry(int k, std::uint64_t id, double now) {
    auto& ns = nodes_[static_cast<std::size_t>(k)];
    const auto& spec = traffic_.tasks[id];
    const auto& tel = cfg_.telemetry;
    while (!ns.arrivals.empty() && ns.arrivals.front() < now - tel.demand_window) ns.arrivals.pop_front();
    std::size_t recent = 0;
    for (auto it = ns.arrivals.rbegin(); it != ns.arrivals.rend() && *it >= now - tel.rate_window; ++it) ++recent;

    TelemetrySnapshot s;
    s.cpu_usage = cpu_util(k);
    s.mem_usage = mem_util(k);
    s.disk_usage = std::min(1.0, ns.stored_mb / cfg_.topology.storage_mb);
    s.net_bw_usage = std::clamp((ns.backhaul_free - now) / cfg_.state.caps.backlog_seconds, 0.0, 1.0);
    s.request_rate = static_cast<double>(recent) / tel.rate_window;
    s.expected_demand = static_cast<double>(ns.arrivals.size()) / tel.demand_window;
    s.app_type_weight = std::min(1.0, spec.demand_mips / cfg_.state.caps.demand_mips);

    const auto& win = windows_[static_cast<std::size_t>(k)];
    if (!win.completions.empty()) {
      double resp = 0.0, dl = 0.0;
      for (const auto& [r, d] : win.completions) {
        resp += r;
        dl += d;
      }
      const double n = static_cast<double>(win.completions.size());
      s.recent_response_time = resp / n;
      s.sla_met = resp / n <= dl / n;
    }
    const double span = cfg_.task.deadline_max - cfg_.task.deadline_min;
    s.op_requirement = span > 0.0 ? std::clamp((cfg_.task.deadline_max - spec.deadline) / span, 0.0, 1.0) : 0.0;

    const auto& vehicle = traffic_.vehicles[static_cast<std::size_t>(spec.vehicle)];
    const auto views = node_views(vehicle.position_at(now, cfg_.topology.area_side), tasks_[id].requirement);
    double reachable = 0.0, avail = 0.0, storage = 0.0;
    for (const auto& v : views) {
      if (!v.reachable) continue;
      reachable += 1.0;
      if (v.fits(tasks_[id].requirement)) avail += 1.0;
      storage += 1.0 - std::min(1.0, nodes_[static_cast<std::size_t>(v.id)].stored_mb / cfg_.topology.storage_mb);
    }
    s.available_nodes = avail;
    s.storage_availability = reachable > 0.0 ? storage / reachable : 0.0;
    return s;
  }

  [[nodiscard]] Resources free_of(int k) const {
    const auto& fs = specs_[static_cast<std::size_t>(k)];
    const auto& c = nodes_[static_cast<std::size_t>(k)].committed;
    return {fs.usable.cpu_mips - c.cpu_mips, fs.usable.mem_mb - c.mem_mb, fs.usable.bw_mbps - c.bw_mbps};
  }

  void check_capacity(int k) const {
    const auto& fs = specs_[static_cast<std::size_t>(k)];
    const auto& c = nodes_[static_cast<std::size_t>(k)].committed;
    const double share = cfg_.topology.cpu_util_initial + c.cpu_mips / fs.capacity.cpu_mips;
    if (share > 1.0 + 1e-9) throw std::logic_error("committed CPU share exceeds node capacity");
  }

  [[nodiscard]] std::vector<NodeView> node_views(Position pos, const Resources& /*need*/) const {
    std::vector<NodeView> out(specs_.size());
    for (std::size_t k = 0; k < specs_.size(); ++k) {
      const auto& fs = specs_[k];
      const auto& ns = nodes_[k];
      auto& v = out[k];
      v.id = static_cast<int>(k);
      v.distance = distance(pos, fs.position);
      v.reachable = v.distance <= cfg_.link.v2i_range;
      v.free = free_of(static_cast<int>(k));
      v.usable = fs.usable;
      v.queue_empty = ns.queue.empty();
      v.cpu_util = cpu_util(static_cast<int>(k));
      v.queued_load = ns.queued_cpu / fs.capacity.cpu_mips;
    }
    return out;
  }

  [[nodiscard]] static int nearest_reachable(const std::vector<NodeView>& views) {
    int best = -1;
    for (const auto& v : views)
      if (v.reachable && (best < 0 || v.distance < views[static_cast<std::size_t>(best)].distance)) best = v.id;
    return best;
  }

  [[nodiscard]] int nearest_in_range(Position pos) const {
    int best = -1;
    double best_d = 0.0;
    for (const auto& fs : specs_) {
      const double d = distance(pos, fs.position);
      if (d <= cfg_.link.v2i_range && (best < 0 || d < best_d)) {
        best = fs.id;
        best_d = d;
      }
    }
    return best;
  }

  [[nodiscard]] TaskView task_view(std::uint64_t id) const {
    const auto& s = traffic_.tasks[id];
    return {id, s.arrival, s.size_bits, s.deadline, tasks_[id].requirement};
  }

  [[nodiscard]] double mb_of(std::uint64_t id) const { return traffic_.tasks[id].size_bits / kBitsPerMegabyte; }

  [[nodiscard]] static std::optional<int> target_node(const Placement& p) {
    if (p.target.kind == TargetKind::Fog) return p.target.node;
    return std::nullopt;
  }

  [[nodiscard]] static std::string_view target_name(TargetKind k) {
    switch (k) {
      case TargetKind::Vehicle: return "local";
      case TargetKind::Fog:     return "fog";
      case TargetKind::Cloud:   return "cloud";
    }
    return "unknown";
  }

  void log(double time, std::string_view kind, std::optional<std::uint64_t> task, std::optional<int> node,
           EventLog::Json detail) {
    if (log_ != nullptr) log_->write(time, kind, task, node, std::move(detail));
  }

  SimConfig cfg_;
  const Traffic& traffic_;
  Scheduler& scheduler_;
  EventLog* log_;
  std::vector<FogNodeSpec> specs_;
  std::vector<NodeState> nodes_;
  std::vector<OutcomeWindow> windows_;
  std::vector<double> local_busy_;
  std::vector<TaskState> tasks_;
  std::vector<std::list<std::uint64_t>> deferred_;  ///< per decision node, arrival order
  std::vector<NodeView> views_;
  EdgeRewardLog edges_;
  EventQueue queue_;
  bool ran_{false};
};

}  // namespace vfcsim
