#pragma once

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "vfcsim/sim_config.hpp"

namespace vfcsim {

// Configuration text format
//
//   # comment
//   section.key = value
//
// One assignment per line, flat keys with module prefixes. Absent keys keep
// their defaults. Every key is listed in docs/config.md.

/// Located configuration failure.
class ConfigError : public std::runtime_error {
 public:
  enum class Kind { Parse, UnknownKey, Range };

  ConfigError(Kind kind, int line, std::string key, const std::string& what)
      : std::runtime_error(format(kind, line, key, what)), kind_(kind), line_(line), key_(std::move(key)) {}

  [[nodiscard]] Kind kind() const noexcept { return kind_; }
  [[nodiscard]] int line() const noexcept { return line_; }  ///< 0 when not tied to a line
  [[nodiscard]] const std::string& key() const noexcept { return key_; }

 private:
  static std::string format(Kind kind, int line, const std::string& key, const std::string& what) {
    std::string out;
    switch (kind) {
      case Kind::Parse:      out = "parse error"; break;
      case Kind::UnknownKey: out = "unknown key"; break;
      case Kind::Range:      out = "invalid value"; break;
    }
    if (line > 0) out += " on line " + std::to_string(line);
    if (!key.empty()) out += " for '" + key + "'";
    return out + ": " + what;
  }

  Kind kind_;
  int line_;
  std::string key_;
};

namespace detail {

/// Shortest decimal form that parses back to the same double.
[[nodiscard]] inline std::string format_double(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

[[nodiscard]] inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
[[nodiscard]] T parse_number(std::string_view text) {
  T v{};
  const auto* end = text.data() + text.size();
  const auto r = std::from_chars(text.data(), end, v);
  if (r.ec != std::errc() || r.ptr != end) throw std::invalid_argument("expected a number, got '" + std::string(text) + "'");
  return v;
}

[[nodiscard]] inline std::vector<double> parse_list(std::string_view text) {
  std::vector<double> out;
  while (!text.empty()) {
    const auto comma = text.find(',');
    out.push_back(parse_number<double>(trim(text.substr(0, comma))));
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  return out;
}

struct ConfigKey {
  std::string name;
  std::function<std::string(const SimConfig&)> get;
  std::function<void(SimConfig&, std::string_view)> set;
};

template <typename T, typename Ref>
ConfigKey number_key(std::string name, Ref ref) {
  return {std::move(name),
          [ref](const SimConfig& c) {
            const T v = ref(c);
            if constexpr (std::is_floating_point_v<T>)
              return format_double(v);
            else
              return std::to_string(v);
          },
          [ref](SimConfig& c, std::string_view text) { ref(c) = parse_number<T>(text); }};
}

#define VFCSIM_DOUBLE(name, member) number_key<double>(name, [](auto& c) -> auto& { return c.member; })
#define VFCSIM_INT(name, member) number_key<int>(name, [](auto& c) -> auto& { return c.member; })

[[nodiscard]] inline const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> kKeys = [] {
    std::vector<ConfigKey> k;
    k.push_back({"scenario.name", [](const SimConfig& c) { return c.scenario.name; },
                 [](SimConfig& c, std::string_view v) {
                   if (auto s = find_scenario(v)) {
                     const double duration = c.scenario.duration;
                     c.scenario = *s;
                     c.scenario.duration = duration;
                   } else {
                     c.scenario.name = std::string(v);
                   }
                 }});
    k.push_back(VFCSIM_INT("scenario.trace_count", scenario.trace_count));
    k.push_back(VFCSIM_DOUBLE("scenario.adt", scenario.adt));
    k.push_back(VFCSIM_DOUBLE("scenario.vdt", scenario.vdt));
    k.push_back(VFCSIM_DOUBLE("scenario.anv", scenario.anv));
    k.push_back(VFCSIM_DOUBLE("scenario.vnv", scenario.vnv));
    k.push_back(VFCSIM_DOUBLE("scenario.asv", scenario.asv));
    k.push_back(VFCSIM_DOUBLE("scenario.vsv", scenario.vsv));
    k.push_back(VFCSIM_DOUBLE("scenario.duration", scenario.duration));

    k.push_back(VFCSIM_DOUBLE("traffic.arrival_prob", traffic.arrival_prob));
    k.push_back(VFCSIM_DOUBLE("traffic.decision_interval_s", traffic.decision_interval));
    k.push_back({"traffic.trace_csv", [](const SimConfig& c) { return c.traffic.trace_csv; },
                 [](SimConfig& c, std::string_view v) { c.traffic.trace_csv = std::string(v); }});

    k.push_back(VFCSIM_DOUBLE("task.size_min_mb", task.size_min_mb));
    k.push_back(VFCSIM_DOUBLE("task.size_max_mb", task.size_max_mb));
    k.push_back(VFCSIM_DOUBLE("task.demand_min_mips", task.demand_min_mips));
    k.push_back(VFCSIM_DOUBLE("task.demand_max_mips", task.demand_max_mips));
    k.push_back(VFCSIM_DOUBLE("task.deadline_min_s", task.deadline_min));
    k.push_back(VFCSIM_DOUBLE("task.deadline_max_s", task.deadline_max));
    k.push_back(VFCSIM_DOUBLE("task.memory_per_mb", task.memory_per_mb));

    k.push_back(VFCSIM_DOUBLE("topology.area_side_m", topology.area_side));
    k.push_back(VFCSIM_INT("topology.fog_nodes", topology.fog_nodes));
    k.push_back(VFCSIM_DOUBLE("topology.cpu_freq_min_hz", topology.cpu_freq_min));
    k.push_back(VFCSIM_DOUBLE("topology.cpu_freq_max_hz", topology.cpu_freq_max));
    k.push_back(VFCSIM_DOUBLE("topology.cpu_util_initial", topology.cpu_util_initial));
    k.push_back(VFCSIM_DOUBLE("topology.mem_util_initial", topology.mem_util_initial));
    k.push_back(VFCSIM_DOUBLE("topology.mips_per_ghz", topology.mips_per_ghz));
    k.push_back(VFCSIM_DOUBLE("topology.memory_mb", topology.memory_mb));
    k.push_back(VFCSIM_DOUBLE("topology.storage_mb", topology.storage_mb));
    k.push_back(VFCSIM_DOUBLE("topology.bandwidth_mbps", topology.bandwidth_mbps));
    k.push_back(VFCSIM_DOUBLE("topology.cloud_freq_hz", topology.cloud_freq));
    k.push_back(VFCSIM_DOUBLE("topology.local_cpu_hz", topology.local_cpu));
    k.push_back(number_key<std::uint64_t>("topology.seed", [](auto& c) -> auto& { return c.topology.seed; }));

    k.push_back(VFCSIM_DOUBLE("link.v2i_bandwidth", link.v2i_bandwidth));
    k.push_back(VFCSIM_DOUBLE("link.tx_power", link.tx_power));
    k.push_back(VFCSIM_DOUBLE("link.noise_power", link.noise_power));
    k.push_back(VFCSIM_DOUBLE("link.awgn", link.awgn));
    k.push_back(VFCSIM_DOUBLE("link.path_loss_exp", link.path_loss_exp));
    k.push_back(VFCSIM_DOUBLE("link.v2i_range", link.v2i_range));
    k.push_back(VFCSIM_DOUBLE("link.wired_rate", link.wired_rate));
    k.push_back(VFCSIM_DOUBLE("link.cycles_per_bit", link.cycles_per_bit));

    k.push_back(VFCSIM_DOUBLE("state.low_threshold", state.low_threshold));
    k.push_back(VFCSIM_DOUBLE("state.high_threshold", state.high_threshold));
    k.push_back({"state.rate_scale",
                 [](const SimConfig& c) { return c.state.rate_scale > 0.0 ? format_double(c.state.rate_scale) : "auto"; },
                 [](SimConfig& c, std::string_view v) { c.state.rate_scale = v == "auto" ? 0.0 : parse_number<double>(v); }});
    k.push_back(VFCSIM_DOUBLE("state.response_fast", state.response_fast));
    k.push_back(VFCSIM_DOUBLE("state.response_slow", state.response_slow));
    k.push_back(VFCSIM_DOUBLE("state.node_count_low", state.node_count_low));
    k.push_back(VFCSIM_DOUBLE("state.node_count_high", state.node_count_high));
    k.push_back(VFCSIM_DOUBLE("state.caps.demand_mips", state.caps.demand_mips));
    k.push_back(VFCSIM_DOUBLE("state.caps.backlog_seconds", state.caps.backlog_seconds));

    k.push_back(VFCSIM_DOUBLE("reward.w1", reward.w1));
    k.push_back(VFCSIM_DOUBLE("reward.w2", reward.w2));
    k.push_back(VFCSIM_DOUBLE("reward.w3", reward.w3));
    k.push_back(VFCSIM_DOUBLE("reward.w4", reward.w4));
    k.push_back(VFCSIM_DOUBLE("reward.w21", reward.w21));
    k.push_back(VFCSIM_DOUBLE("reward.w22", reward.w22));
    k.push_back(VFCSIM_DOUBLE("reward.w23", reward.w23));
    k.push_back(VFCSIM_DOUBLE("reward.w31", reward.w31));
    k.push_back(VFCSIM_DOUBLE("reward.w32", reward.w32));
    k.push_back(VFCSIM_DOUBLE("reward.w33", reward.w33));
    k.push_back(VFCSIM_DOUBLE("reward.latency_floor", reward.latency_floor));
    k.push_back(VFCSIM_DOUBLE("reward.quality_desired", quality_desired));

    k.push_back(VFCSIM_DOUBLE("learning.alpha", learning.alpha));
    k.push_back(VFCSIM_DOUBLE("learning.gamma", learning.gamma));
    k.push_back(VFCSIM_DOUBLE("learning.epsilon_start", learning.epsilon_start));
    k.push_back(VFCSIM_DOUBLE("learning.epsilon_end", learning.epsilon_end));
    k.push_back(VFCSIM_INT("learning.episodes", learning.episodes));
    k.push_back(VFCSIM_INT("learning.max_time_steps", learning.max_time_steps));
    k.push_back(VFCSIM_DOUBLE("learning.alpha_decay", learning.alpha_decay));

    k.push_back(VFCSIM_DOUBLE("action.bundle_small", bundles.small));
    k.push_back(VFCSIM_DOUBLE("action.bundle_medium", bundles.medium));
    k.push_back(VFCSIM_DOUBLE("action.bundle_large", bundles.large));

    k.push_back({"wfq.weights",
                 [](const SimConfig& c) {
                   if (c.wfq_weights.empty()) return std::string("auto");
                   std::string out;
                   for (std::size_t i = 0; i < c.wfq_weights.size(); ++i)
                     out += (i ? "," : "") + format_double(c.wfq_weights[i]);
                   return out;
                 },
                 [](SimConfig& c, std::string_view v) {
                   c.wfq_weights = v == "auto" ? std::vector<double>{} : parse_list(v);
                 }});

    k.push_back(VFCSIM_DOUBLE("telemetry.rate_window_s", telemetry.rate_window));
    k.push_back(VFCSIM_DOUBLE("telemetry.demand_window_s", telemetry.demand_window));
    k.push_back(VFCSIM_INT("telemetry.outcome_window", telemetry.outcome_window));

    k.push_back(VFCSIM_DOUBLE("metrics.period_s", period));
    return k;
  }();
  return kKeys;
}

#undef VFCSIM_DOUBLE
#undef VFCSIM_INT

[[nodiscard]] inline const ConfigKey* find_key(std::string_view name) {
  for (const auto& k : config_keys())
    if (k.name == name) return &k;
  return nullptr;
}

/// Config key that a validation field refers to: exact match or dotted suffix.
[[nodiscard]] inline std::string key_for_field(std::string_view field) {
  for (const auto& k : config_keys()) {
    const std::string_view name = k.name;
    if (name == field) return k.name;
    if (name.size() > field.size() && name.ends_with(field) && name[name.size() - field.size() - 1] == '.')
      return k.name;
  }
  return std::string(field);
}

}  // namespace detail

/// Parses and validates a configuration; absent keys keep their defaults.
[[nodiscard]] inline SimConfig parse_config(std::istream& is) {
  struct Assignment {
    int line;
    std::string key;
    std::string value;
  };
  std::vector<Assignment> assignments;
  std::map<std::string, int> seen;
  std::string raw;
  int lineno = 0;
  while (std::getline(is, raw)) {
    ++lineno;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError(ConfigError::Kind::Parse, lineno, "", "expected 'key = value'");
    const std::string key(detail::trim(line.substr(0, eq)));
    const std::string value(detail::trim(line.substr(eq + 1)));
    if (key.empty()) throw ConfigError(ConfigError::Kind::Parse, lineno, "", "missing key before '='");
    if (detail::find_key(key) == nullptr) throw ConfigError(ConfigError::Kind::UnknownKey, lineno, key, "not a configuration key");
    if (const auto [it, fresh] = seen.emplace(key, lineno); !fresh)
      throw ConfigError(ConfigError::Kind::Parse, lineno, key, "duplicate key (first set on line " + std::to_string(it->second) + ")");
    assignments.push_back({lineno, key, value});
  }

  SimConfig cfg;
  // The scenario name selects a statistics preset, so it applies before any
  // individual statistic overrides.
  std::stable_partition(assignments.begin(), assignments.end(), [](const Assignment& a) { return a.key == "scenario.name"; });
  for (const auto& a : assignments) {
    try {
      detail::find_key(a.key)->set(cfg, a.value);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(ConfigError::Kind::Parse, a.line, a.key, e.what());
    }
  }
  try {
    cfg.validate();
  } catch (const ValidationError& e) {
    const std::string key = detail::key_for_field(e.field());
    const auto it = seen.find(key);
    throw ConfigError(ConfigError::Kind::Range, it == seen.end() ? 0 : it->second, key, e.what());
  }
  return cfg;
}

[[nodiscard]] inline SimConfig parse_config_string(const std::string& text) {
  std::istringstream is(text);
  return parse_config(is);
}

[[nodiscard]] inline SimConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError(ConfigError::Kind::Parse, 0, "", "cannot open config file " + path);
  return parse_config(is);
}

/// Every key with its resolved value, in documentation order. Parsing the
/// output yields an identical configuration.
inline void write_config(std::ostream& os, const SimConfig& cfg) {
  os << "# vfcsim resolved configuration\n";
  std::string section;
  for (const auto& k : detail::config_keys()) {
    const std::string prefix = k.name.substr(0, k.name.find('.'));
    if (prefix != section) {
      if (!section.empty()) os << '\n';
      section = prefix;
    }
    os << k.name << " = " << k.get(cfg) << '\n';
  }
}

[[nodiscard]] inline std::string config_to_string(const SimConfig& cfg) {
  std::ostringstream os;
  write_config(os, cfg);
  return os.str();
}

}  // namespace vfcsim
