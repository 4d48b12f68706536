#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "vfcsim/core.hpp"
#include "vfcsim/link_model.hpp"
#include "vfcsim/sim_config.hpp"

namespace vfcsim {

/// Folds an unbounded coordinate back into [0, side] (mirror reflection).
[[nodiscard]] inline double reflect(double u, double side) noexcept {
  const double period = 2.0 * side;
  double m = std::fmod(u, period);
  if (m < 0.0) m += period;
  return m <= side ? m : period - m;
}

struct Vehicle {
  int id{0};
  Position origin;  ///< position at entry_time
  double vx{0.0};
  double vy{0.0};
  double entry_time{0.0};  ///< may be negative for vehicles present at t = 0
  double dwell{0.0};
  double local_cpu{1.0e9};

  [[nodiscard]] double exit_time() const noexcept { return entry_time + dwell; }
  [[nodiscard]] double speed() const noexcept { return std::hypot(vx, vy); }

  /// Rectilinear motion reflected at the area boundary.
  [[nodiscard]] Position position_at(double t, double side) const noexcept {
    const double dt = t - entry_time;
    return {reflect(origin.x + vx * dt, side), reflect(origin.y + vy * dt, side)};
  }
};

struct TaskSpec {
  std::uint64_t id{0};
  int vehicle{0};
  double arrival{0.0};
  double size_bits{0.0};
  double demand_mips{0.0};
  double deadline{0.0};
};

/// Vehicles plus the tasks they will emit; independent of any scheduler.
struct Traffic {
  std::vector<Vehicle> vehicles;
  std::vector<TaskSpec> tasks;  ///< sorted by arrival; ids follow that order
};

[[nodiscard]] inline double sample_dwell(const Scenario& s, Rng& rng) {
  return rng.normal_at_least(s.adt, std::sqrt(s.vdt), 1.0);
}

[[nodiscard]] inline double sample_speed(const Scenario& s, Rng& rng) {
  return rng.normal_at_least(s.asv, std::sqrt(s.vsv), 0.0);
}

namespace detail {

inline Vehicle make_vehicle(int id, double entry, double dwell, double speed, Position at, double heading,
                            double local_cpu) {
  Vehicle v;
  v.id = id;
  v.origin = at;
  v.vx = speed * std::cos(heading);
  v.vy = speed * std::sin(heading);
  v.entry_time = entry;
  v.dwell = dwell;
  v.local_cpu = local_cpu;
  return v;
}

/// Bernoulli task emission per vehicle per decision interval. The arrival
/// lands uniformly inside the interval and must fall within the vehicle's
/// lifetime and the scenario window.
inline void emit_tasks(Traffic& traffic, const SimConfig& cfg, Rng& rng) {
  const double dt = cfg.traffic.decision_interval;
  const double horizon = cfg.scenario.duration;
  const double p = cfg.traffic.arrival_prob;
  const auto& tp = cfg.task;
  const auto intervals = static_cast<long long>(std::ceil(horizon / dt - 1e-12));

  for (const auto& v : traffic.vehicles) {
    if (p <= 0.0) break;
    const double start = std::max(v.entry_time, 0.0);
    const double stop = std::min(v.exit_time(), horizon);
    if (!(stop > start)) continue;
    long long k = static_cast<long long>(std::floor(start / dt));
    if (static_cast<double>(k) * dt < start) ++k;  // vehicle must be present at the interval start
    for (; k < intervals && static_cast<double>(k) * dt < stop; ++k) {
      if (!rng.bernoulli(p)) continue;
      const double at = static_cast<double>(k) * dt + rng.uniform01() * dt;
      TaskSpec t;
      t.vehicle = v.id;
      t.arrival = at;
      t.size_bits = megabytes_to_bits(rng.uniform(tp.size_min_mb, tp.size_max_mb));
      t.demand_mips = rng.uniform(tp.demand_min_mips, tp.demand_max_mips);
      t.deadline = rng.uniform(tp.deadline_min, tp.deadline_max);
      if (at < stop && at < horizon) traffic.tasks.push_back(t);
    }
  }
  std::stable_sort(traffic.tasks.begin(), traffic.tasks.end(), [](const TaskSpec& a, const TaskSpec& b) {
    if (a.arrival != b.arrival) return a.arrival < b.arrival;
    return a.vehicle < b.vehicle;
  });
  for (std::size_t i = 0; i < traffic.tasks.size(); ++i) traffic.tasks[i].id = i;
}

}  // namespace detail

/// Synthetic traffic: a stationary population of about ANV vehicles at t = 0
/// plus Poisson entries at rate ANV / ADT, then Bernoulli task emission.
[[nodiscard]] inline Traffic generate_traffic(const SimConfig& cfg, Rng& rng) {
  const auto& sc = cfg.scenario;
  const double side = cfg.topology.area_side;
  Traffic traffic;

  auto spawn = [&](double entry, double dwell) {
    const Position at{rng.uniform(0.0, side), rng.uniform(0.0, side)};
    const double heading = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double speed = sample_speed(sc, rng);
    traffic.vehicles.push_back(detail::make_vehicle(static_cast<int>(traffic.vehicles.size()), entry, dwell, speed,
                                                    at, heading, cfg.topology.local_cpu));
  };

  // Vehicles already in the area: uniform age over their dwell.
  const auto initial = rng.poisson(sc.anv);
  for (std::uint64_t i = 0; i < initial; ++i) {
    const double dwell = sample_dwell(sc, rng);
    const double age = rng.uniform01() * dwell;
    spawn(-age, dwell);
  }
  const double entry_rate = sc.anv / sc.adt;
  for (double t = rng.exponential(entry_rate); t < sc.duration; t += rng.exponential(entry_rate))
    spawn(t, sample_dwell(sc, rng));

  detail::emit_tasks(traffic, cfg, rng);
  return traffic;
}

/// Reads `vehicle_id,entry_time,dwell,speed,x,y` rows (header optional).
/// Headings are drawn from `rng` since traces carry only speed.
[[nodiscard]] inline std::vector<Vehicle> parse_trace_csv(std::istream& is, const SimConfig& cfg, Rng& rng) {
  std::vector<Vehicle> out;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    if (lineno == 1 && line.find("vehicle_id") != std::string::npos) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    long long id = 0;
    double entry = 0, dwell = 0, speed = 0, x = 0, y = 0;
    if (!(row >> id >> entry >> dwell >> speed >> x >> y))
      throw ValidationError("trace_csv", "malformed row on line " + std::to_string(lineno));
    if (!(dwell > 0.0) || speed < 0.0) throw ValidationError("trace_csv", "bad dwell/speed on line " + std::to_string(lineno));
    const double side = cfg.topology.area_side;
    x = std::clamp(x, 0.0, side);
    y = std::clamp(y, 0.0, side);
    const double heading = rng.uniform(0.0, 2.0 * std::numbers::pi);
    out.push_back(detail::make_vehicle(static_cast<int>(out.size()), entry, dwell, speed, {x, y}, heading,
                                       cfg.topology.local_cpu));
  }
  return out;
}

/// Trace-driven traffic: vehicles from the CSV, tasks synthesized as usual.
[[nodiscard]] inline Traffic traffic_from_trace(std::istream& is, const SimConfig& cfg, Rng& rng) {
  Traffic traffic;
  traffic.vehicles = parse_trace_csv(is, cfg, rng);
  detail::emit_tasks(traffic, cfg, rng);
  return traffic;
}

[[nodiscard]] inline Traffic make_traffic(const SimConfig& cfg, Rng& rng) {
  if (cfg.traffic.trace_csv.empty()) return generate_traffic(cfg, rng);
  std::ifstream is(cfg.traffic.trace_csv);
  if (!is) throw std::runtime_error("cannot read trace " + cfg.traffic.trace_csv);
  return traffic_from_trace(is, cfg, rng);
}

}  // namespace vfcsim
