#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "vfcsim/config.hpp"
#include "vfcsim/metrics.hpp"
#include "vfcsim/training.hpp"

namespace vfcsim {

enum class Command { Train, Eval, Compare, Sweep };

inline constexpr int kExitOk = 0;
inline constexpr int kExitRunFailure = 1;
inline constexpr int kExitConfigError = 2;

struct RunSpec {
  Command command{Command::Compare};
  std::string config_path;             ///< empty: built-in defaults
  std::vector<std::string> overrides;  ///< "key=value", applied after the file
  std::vector<std::string> schedulers;
  std::vector<std::string> scenarios;  ///< empty: the configured scenario
  std::vector<std::uint64_t> seeds{1};
  std::vector<double> probs{0.3, 0.4, 0.5, 0.6, 0.7};
  std::filesystem::path out;
  std::filesystem::path checkpoint;  ///< q-table root; empty: <out>/qtables
  unsigned jobs{0};                  ///< 0: hardware concurrency
  std::string invocation;            ///< command line, echoed for provenance
};

/// Fixed reference ASR, CR and AAP per method, emitted as labeled rows.
struct ReportedReference {
  std::string scheduler;
  double asr;
  double cr;
  double aap;
};

[[nodiscard]] inline const std::vector<ReportedReference>& reported_reference() {
  static const std::vector<ReportedReference> kRef{
      {"qlearn", 0.78, 235.0, 51.0}, {"fcfs", 0.62, 190.0, 42.0}, {"ref83", 0.68, 212.0, 23.0},
      {"rr", 0.63, 191.0, 20.0},     {"wfq", 0.72, 225.0, 46.0},
  };
  return kRef;
}

// ─────────────────────────────────────────────
// Configuration resolution
// ─────────────────────────────────────────────

inline void apply_overrides(SimConfig& cfg, const std::vector<std::string>& overrides) {
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos) throw ConfigError(ConfigError::Kind::Parse, 0, o, "override must be key=value");
    const std::string key(detail::trim(std::string_view(o).substr(0, eq)));
    const std::string value(detail::trim(std::string_view(o).substr(eq + 1)));
    const auto* k = detail::find_key(key);
    if (k == nullptr) throw ConfigError(ConfigError::Kind::UnknownKey, 0, key, "not a configuration key");
    try {
      k->set(cfg, value);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(ConfigError::Kind::Parse, 0, key, e.what());
    }
  }
  try {
    cfg.validate();
  } catch (const ValidationError& e) {
    throw ConfigError(ConfigError::Kind::Range, 0, detail::key_for_field(e.field()), e.what());
  }
}

[[nodiscard]] inline SimConfig resolve_config(const RunSpec& spec) {
  SimConfig cfg = spec.config_path.empty() ? SimConfig{} : load_config(spec.config_path);
  apply_overrides(cfg, spec.overrides);
  return cfg;
}

/// The base configuration with a named built-in scenario swapped in.
[[nodiscard]] inline SimConfig with_scenario(const SimConfig& base, const std::string& name) {
  if (name == base.scenario.name) return base;
  const auto s = find_scenario(name);
  if (!s) throw ConfigError(ConfigError::Kind::Range, 0, "scenario", "unknown scenario '" + name + "'");
  SimConfig cfg = base;
  cfg.scenario = *s;
  cfg.scenario.duration = base.scenario.duration;
  return cfg;
}

[[nodiscard]] inline std::vector<std::string> scenario_list(const RunSpec& spec, const SimConfig& base) {
  if (spec.scenarios.empty()) return {base.scenario.name};
  if (spec.scenarios.size() == 1 && spec.scenarios.front() == "all") {
    std::vector<std::string> all;
    for (const auto& s : builtin_scenarios()) all.push_back(s.name);
    return all;
  }
  std::vector<std::string> out;
  for (const auto& name : spec.scenarios) {
    if (name == base.scenario.name) {
      out.push_back(name);
      continue;
    }
    const auto s = find_scenario(name);
    if (!s) throw ConfigError(ConfigError::Kind::Range, 0, "scenario", "unknown scenario '" + name + "'");
    out.push_back(s->name);
  }
  return out;
}

[[nodiscard]] inline std::vector<std::string> scheduler_list(const RunSpec& spec) {
  if (spec.schedulers.empty() || (spec.schedulers.size() == 1 && spec.schedulers.front() == "all"))
    return spec.command == Command::Train ? std::vector<std::string>{"qlearn"} : scheduler_names();
  for (const auto& s : spec.schedulers)
    if (std::find(scheduler_names().begin(), scheduler_names().end(), s) == scheduler_names().end())
      throw ConfigError(ConfigError::Kind::Range, 0, "scheduler", "unknown scheduler '" + s + "'");
  return spec.schedulers;
}

// ─────────────────────────────────────────────
// Output helpers
// ─────────────────────────────────────────────

namespace detail {

[[nodiscard]] inline std::ofstream open_output(const std::filesystem::path& path) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  return os;
}

inline void write_provenance(const RunSpec& spec, const SimConfig& cfg) {
  auto cfg_out = open_output(spec.out / "config.resolved.cfg");
  write_config(cfg_out, cfg);
  auto inv = open_output(spec.out / "invocation.txt");
  inv << spec.invocation << '\n';
}

inline const char* kMetricsHeader =
    "scheduler,scenario,seed,arrival_prob,apt,ast,asr,cr,aap,k_total,k_serviced,k_local,k_dropped";

inline void write_metrics_row(std::ostream& os, const MetricsReport& m) {
  os << m.scheduler << ',' << m.scenario << ',' << m.seed << ',' << format_double(m.arrival_prob) << ','
     << format_double(m.apt) << ',' << format_double(m.ast) << ',' << format_double(m.asr) << ','
     << format_double(m.cr) << ',' << format_double(m.aap) << ',' << m.k_total << ',' << m.k_serviced << ','
     << m.k_local << ',' << m.k_dropped << '\n';
}

struct MeanSd {
  double mean{0.0};
  double sd{0.0};
};

/// Mean and sample standard deviation (0 for a single value).
[[nodiscard]] inline MeanSd mean_sd(const std::vector<double>& v) {
  if (v.empty()) return {};
  double sum = 0.0;
  for (double x : v) sum += x;
  const double mean = sum / static_cast<double>(v.size());
  if (v.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / static_cast<double>(v.size() - 1))};
}

/// Runs `n` independent jobs on up to `jobs` threads; job i writes only slot i.
inline void parallel_for(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& body) {
  if (jobs == 0) jobs = std::max(1U, std::thread::hardware_concurrency());
  jobs = static_cast<unsigned>(std::min<std::size_t>(jobs, std::max<std::size_t>(n, 1)));
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  for (unsigned t = 0; t < jobs; ++t)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) body(i);
    });
}

}  // namespace detail

// ─────────────────────────────────────────────
// Batches of evaluation runs
// ─────────────────────────────────────────────

struct RunRequest {
  std::string scheduler;
  std::string scenario;
  std::uint64_t seed{0};
  double arrival_prob{0.0};
  std::optional<std::filesystem::path> log_path;
};

struct RunOutcome {
  std::optional<MetricsReport> report;
  std::string error;
};

[[nodiscard]] inline std::filesystem::path checkpoint_root(const RunSpec& spec) {
  return spec.checkpoint.empty() ? spec.out / "qtables" : spec.checkpoint;
}

/// Evaluates each request; q-tables are loaded once per scenario. Failures
/// are captured per run rather than aborting the batch.
[[nodiscard]] inline std::vector<RunOutcome> run_batch(const RunSpec& spec, const SimConfig& base,
                                                       const std::vector<RunRequest>& requests) {
  std::map<std::string, std::vector<QAgent>> tables;
  std::map<std::string, std::string> table_errors;
  for (const auto& r : requests) {
    if (r.scheduler != "qlearn" || tables.contains(r.scenario) || table_errors.contains(r.scenario)) continue;
    try {
      tables.emplace(r.scenario, load_agents(checkpoint_root(spec) / r.scenario, with_scenario(base, r.scenario)));
    } catch (const std::exception& e) {
      table_errors.emplace(r.scenario, e.what());
    }
  }

  std::vector<RunOutcome> out(requests.size());
  detail::parallel_for(requests.size(), spec.jobs, [&](std::size_t i) {
    const auto& r = requests[i];
    try {
      SimConfig cfg = with_scenario(base, r.scenario);
      cfg.traffic.arrival_prob = r.arrival_prob;
      cfg.validate();
      std::optional<std::ofstream> log_file;
      std::optional<EventLog> log;
      if (r.log_path) {
        log_file.emplace(detail::open_output(*r.log_path));
        log.emplace(*log_file);
      }
      EventLog* sink = log ? &*log : nullptr;
      EpisodeResult result;
      if (r.scheduler == "qlearn") {
        if (const auto e = table_errors.find(r.scenario); e != table_errors.end()) throw std::runtime_error(e->second);
        result = evaluate_qlearn(cfg, tables.at(r.scenario), r.seed, sink);
      } else {
        result = evaluate_baseline(cfg, r.scheduler, r.seed, sink);
      }
      MetricsReport m = compute_metrics(result.ledger, result.edges, cfg.topology.fog_nodes);
      m.scheduler = r.scheduler;
      m.scenario = r.scenario;
      m.seed = r.seed;
      m.arrival_prob = r.arrival_prob;
      out[i].report = m;
    } catch (const std::exception& e) {
      out[i].error = e.what();
    }
  });
  return out;
}

/// Reports failures on stderr; returns true if any run failed.
inline bool report_failures(const std::vector<RunRequest>& requests, const std::vector<RunOutcome>& outcomes) {
  bool failed = false;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    if (outcomes[i].report) continue;
    failed = true;
    const auto& r = requests[i];
    std::cerr << "run failed: " << r.scheduler << ' ' << r.scenario << " seed " << r.seed << ": " << outcomes[i].error
              << '\n';
  }
  return failed;
}

// ─────────────────────────────────────────────
// Commands
// ─────────────────────────────────────────────

/// Trains per-node tables for each scenario. The learning curve is flushed
/// after every episode so a failed checkpoint write leaves it intact.
[[nodiscard]] inline int cmd_train(const RunSpec& spec, const SimConfig& base) {
  if (spec.seeds.size() != 1)
    throw ConfigError(ConfigError::Kind::Range, 0, "seed", "train takes exactly one master seed");
  if (scheduler_list(spec) != std::vector<std::string>{"qlearn"})
    throw ConfigError(ConfigError::Kind::Range, 0, "scheduler", "only qlearn can be trained");
  const auto scenarios = scenario_list(spec, base);
  detail::write_provenance(spec, base);
  const std::uint64_t seed = spec.seeds.front();

  std::vector<TrainingResult> results(scenarios.size());
  std::vector<std::string> errors(scenarios.size());
  std::mutex io;
  detail::parallel_for(scenarios.size(), spec.jobs, [&](std::size_t i) {
    try {
      const SimConfig cfg = with_scenario(base, scenarios[i]);
      auto curve = detail::open_output(spec.out / ("learning_curve_" + scenarios[i] + ".csv"));
      curve << "scenario,seed,episode,epsilon,tasks,total_reward,mean_reward,asr\n";
      results[i] = run_training(cfg, seed, [&](const EpisodeSummary& s) {
        curve << scenarios[i] << ',' << seed << ',' << s.episode << ',' << detail::format_double(s.epsilon) << ','
              << s.tasks << ',' << detail::format_double(s.total_reward) << ','
              << detail::format_double(s.mean_reward) << ',' << detail::format_double(s.asr) << '\n';
        curve.flush();
      });
      save_agents(checkpoint_root(spec) / scenarios[i], results[i].agents);
      const auto& last = results[i].curve.back();
      std::lock_guard lock(io);
      std::cout << "trained " << scenarios[i] << ": " << results[i].curve.size() << " episodes, final mean reward "
                << last.mean_reward << ", ASR " << last.asr << '\n';
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });

  bool failed = false;
  for (std::size_t i = 0; i < scenarios.size(); ++i)
    if (!errors[i].empty()) {
      failed = true;
      std::cerr << "training failed for " << scenarios[i] << ": " << errors[i] << '\n';
    }
  return failed ? kExitRunFailure : kExitOk;
}

[[nodiscard]] inline std::vector<RunRequest> grid(const RunSpec& spec, const SimConfig& base,
                                                  const std::vector<double>& probs, bool with_logs) {
  std::vector<RunRequest> requests;
  for (double p : probs)
    for (const auto& sc : scenario_list(spec, base))
      for (const auto& sched : scheduler_list(spec))
        for (auto seed : spec.seeds) {
          RunRequest r{sched, sc, seed, p, std::nullopt};
          if (with_logs)
            r.log_path = spec.out / "logs" / (sched + "_" + sc + "_seed" + std::to_string(seed) + ".jsonl");
          requests.push_back(std::move(r));
        }
  return requests;
}

/// Greedy or baseline evaluation with one event log per run.
[[nodiscard]] inline int cmd_eval(const RunSpec& spec, const SimConfig& base) {
  const auto requests = grid(spec, base, {base.traffic.arrival_prob}, true);
  detail::write_provenance(spec, base);
  const auto outcomes = run_batch(spec, base, requests);
  auto csv = detail::open_output(spec.out / "eval.csv");
  csv << "source," << detail::kMetricsHeader << '\n';
  for (const auto& o : outcomes)
    if (o.report) {
      csv << "simulated,";
      detail::write_metrics_row(csv, *o.report);
      const auto& m = *o.report;
      std::cout << m.scheduler << ' ' << m.scenario << " seed " << m.seed << ": ASR " << m.asr << ", APT " << m.apt
                << " s, AST " << m.ast << " s, CR " << m.cr << ", AAP " << m.aap << '\n';
    }
  return report_failures(requests, outcomes) ? kExitRunFailure : kExitOk;
}

/// Per-run rows plus mean and standard deviation per scheduler and scenario,
/// followed by the fixed reference rows.
[[nodiscard]] inline int cmd_compare(const RunSpec& spec, const SimConfig& base) {
  const auto requests = grid(spec, base, {base.traffic.arrival_prob}, false);
  detail::write_provenance(spec, base);
  const auto outcomes = run_batch(spec, base, requests);

  auto runs = detail::open_output(spec.out / "runs.csv");
  runs << "source," << detail::kMetricsHeader << '\n';
  for (const auto& o : outcomes)
    if (o.report) {
      runs << "simulated,";
      detail::write_metrics_row(runs, *o.report);
    }

  auto agg = detail::open_output(spec.out / "aggregate.csv");
  agg << "source,scheduler,scenario,runs,apt_mean,apt_sd,ast_mean,ast_sd,asr_mean,asr_sd,cr_mean,cr_sd,aap_mean,aap_sd\n";
  for (const auto& sc : scenario_list(spec, base))
    for (const auto& sched : scheduler_list(spec)) {
      std::vector<double> apt_v, ast_v, asr_v, cr_v, aap_v;
      for (const auto& o : outcomes)
        if (o.report && o.report->scheduler == sched && o.report->scenario == sc) {
          apt_v.push_back(o.report->apt);
          ast_v.push_back(o.report->ast);
          asr_v.push_back(o.report->asr);
          cr_v.push_back(o.report->cr);
          aap_v.push_back(o.report->aap);
        }
      if (asr_v.empty()) continue;
      agg << "simulated," << sched << ',' << sc << ',' << asr_v.size();
      for (const auto* v : {&apt_v, &ast_v, &asr_v, &cr_v, &aap_v}) {
        const auto s = detail::mean_sd(*v);
        agg << ',' << detail::format_double(s.mean) << ',' << detail::format_double(s.sd);
      }
      agg << '\n';
      const auto asr_s = detail::mean_sd(asr_v);
      std::cout << sc << ' ' << sched << ": ASR " << asr_s.mean << " +/- " << asr_s.sd << " over " << asr_v.size()
                << " seeds\n";
    }
  for (const auto& ref : reported_reference())
    agg << "paper-reported," << ref.scheduler << ",all,,,,,," << detail::format_double(ref.asr) << ",,"
        << detail::format_double(ref.cr) << ",," << detail::format_double(ref.aap) << ",\n";
  return report_failures(requests, outcomes) ? kExitRunFailure : kExitOk;
}

struct MonotonicityFinding {
  std::string scheduler;
  std::string scenario;
  bool non_increasing{true};
  std::vector<std::pair<double, double>> violations;  ///< (p_lo, p_hi) where ASR rose
};

/// Checks that mean ASR does not rise with the arrival probability.
[[nodiscard]] inline std::vector<MonotonicityFinding> asr_monotonicity(
    const std::vector<std::string>& schedulers, const std::vector<std::string>& scenarios,
    const std::vector<double>& probs, const std::vector<RunOutcome>& outcomes) {
  std::vector<MonotonicityFinding> out;
  for (const auto& sc : scenarios)
    for (const auto& sched : schedulers) {
      MonotonicityFinding f{sched, sc, true, {}};
      std::optional<double> prev;
      double prev_p = 0.0;
      for (double p : probs) {
        std::vector<double> v;
        for (const auto& o : outcomes)
          if (o.report && o.report->scheduler == sched && o.report->scenario == sc && o.report->arrival_prob == p)
            v.push_back(o.report->asr);
        if (v.empty()) continue;
        const double mean = detail::mean_sd(v).mean;
        if (prev && mean > *prev) {
          f.non_increasing = false;
          f.violations.emplace_back(prev_p, p);
        }
        prev = mean;
        prev_p = p;
      }
      out.push_back(std::move(f));
    }
  return out;
}

/// Metric series against the arrival probability, plus the monotonicity report.
[[nodiscard]] inline int cmd_sweep(const RunSpec& spec, const SimConfig& base) {
  auto probs = spec.probs;
  if (probs.empty()) throw ConfigError(ConfigError::Kind::Range, 0, "probs", "sweep needs at least one probability");
  for (double p : probs)
    if (!(p >= 0.0 && p <= 1.0)) throw ConfigError(ConfigError::Kind::Range, 0, "probs", "probabilities must lie in [0,1]");
  if (!std::is_sorted(probs.begin(), probs.end()))
    throw ConfigError(ConfigError::Kind::Range, 0, "probs", "probabilities must be increasing");

  const auto requests = grid(spec, base, probs, false);
  detail::write_provenance(spec, base);
  const auto outcomes = run_batch(spec, base, requests);

  auto runs = detail::open_output(spec.out / "sweep_runs.csv");
  runs << "source," << detail::kMetricsHeader << '\n';
  for (const auto& o : outcomes)
    if (o.report) {
      runs << "simulated,";
      detail::write_metrics_row(runs, *o.report);
    }

  const auto scenarios = scenario_list(spec, base);
  const auto schedulers = scheduler_list(spec);
  auto series = detail::open_output(spec.out / "sweep_series.csv");
  series << "source,scheduler,scenario,metric,arrival_prob,runs,mean,sd\n";
  using Getter = double (*)(const MetricsReport&);
  const std::vector<std::pair<const char*, Getter>> metrics{
      {"apt", [](const MetricsReport& m) { return m.apt; }}, {"ast", [](const MetricsReport& m) { return m.ast; }},
      {"asr", [](const MetricsReport& m) { return m.asr; }}, {"cr", [](const MetricsReport& m) { return m.cr; }},
      {"aap", [](const MetricsReport& m) { return m.aap; }}};
  for (const auto& sc : scenarios)
    for (const auto& sched : schedulers)
      for (const auto& [metric, get] : metrics)
        for (double p : probs) {
          std::vector<double> v;
          for (const auto& o : outcomes)
            if (o.report && o.report->scheduler == sched && o.report->scenario == sc && o.report->arrival_prob == p)
              v.push_back(get(*o.report));
          if (v.empty()) continue;
          const auto s = detail::mean_sd(v);
          series << "simulated," << sched << ',' << sc << ',' << metric << ',' << detail::format_double(p) << ','
                 << v.size() << ',' << detail::format_double(s.mean) << ',' << detail::format_double(s.sd) << '\n';
        }

  auto mono = detail::open_output(spec.out / "monotonicity.csv");
  mono << "scheduler,scenario,metric,non_increasing,violations\n";
  for (const auto& f : asr_monotonicity(schedulers, scenarios, probs, outcomes)) {
    std::string v;
    for (const auto& [a, b] : f.violations)
      v += (v.empty() ? "" : ";") + detail::format_double(a) + "->" + detail::format_double(b);
    mono << f.scheduler << ',' << f.scenario << ",asr," << (f.non_increasing ? "yes" : "no") << ',' << v << '\n';
    if (!f.non_increasing)
      std::cout << "note: ASR of " << f.scheduler << " on " << f.scenario << " rises with arrival probability (" << v
                << ")\n";
  }
  return report_failures(requests, outcomes) ? kExitRunFailure : kExitOk;
}

/// Resolves the output directory, configuration and command; config errors
/// map to exit code 2, run failures to 1.
[[nodiscard]] inline int execute(RunSpec spec) {
  try {
    if (spec.out.empty()) {
      if (const char* env = std::getenv("VFCSIM_OUT"); env != nullptr && *env != '\0')
        spec.out = env;
      else
        throw ConfigError(ConfigError::Kind::Range, 0, "out", "no output directory (use --out or VFCSIM_OUT)");
    }
    if (spec.seeds.empty()) throw ConfigError(ConfigError::Kind::Range, 0, "seed", "at least one seed is required");
    const SimConfig base = resolve_config(spec);
    (void)scheduler_list(spec);
    (void)scenario_list(spec, base);
    switch (spec.command) {
      case Command::Train:   return cmd_train(spec, base);
      case Command::Eval:    return cmd_eval(spec, base);
      case Command::Compare: return cmd_compare(spec, base);
      case Command::Sweep:   return cmd_sweep(spec, base);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRunFailure;
  }
  return kExitRunFailure;
}

}  // namespace vfcsim
