#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "vfcsim/core.hpp"
#include "vfcsim/state_space.hpp"

namespace vfcsim {

// ─────────────────────────────────────────────
// Actions
// ─────────────────────────────────────────────

enum class Tier : std::uint8_t { Local, Fog, Cloud };
enum class Bundle : std::uint8_t { Small, Medium, Large };

using ActionIndex = std::uint32_t;
inline constexpr ActionIndex kActionCount = 9;

/// Placement tier x allocation bundle, ordered tier-major.
struct Action {
  Tier tier{Tier::Local};
  Bundle bundle{Bundle::Small};

  [[nodiscard]] constexpr ActionIndex index() const noexcept {
    return static_cast<ActionIndex>(tier) * 3 + static_cast<ActionIndex>(bundle);
  }

  [[nodiscard]] static constexpr Action from_index(ActionIndex i) noexcept {
    return {static_cast<Tier>(i / 3), static_cast<Bundle>(i % 3)};
  }

  bool operator==(const Action&) const = default;
};

[[nodiscard]] constexpr std::string_view to_string(Tier t) noexcept {
  switch (t) {
    case Tier::Local: return "local";
    case Tier::Fog:   return "fog";
    case Tier::Cloud: return "cloud";
  }
  return "unknown";
}

// ─────────────────────────────────────────────
// Hyper-parameters
// ─────────────────────────────────────────────

struct HyperParams {
  double alpha{0.1};
  double gamma{0.9};
  double epsilon_start{0.1};
  double epsilon_end{0.01};
  int episodes{100};
  /// Learning updates per episode; 0 leaves an episode uncapped.
  int max_time_steps{0};
  /// alpha_n = alpha / (1 + alpha_decay * n) where n counts prior updates of
  /// the (state, action) pair; 0 keeps alpha fixed.
  double alpha_decay{0.0};

  bool operator==(const HyperParams&) const = default;

  void validate() const {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw ValidationError("alpha", "must lie in (0,1]");
    if (!(gamma >= 0.0 && gamma < 1.0)) throw ValidationError("gamma", "must lie in [0,1)");
    detail::require_fraction(epsilon_start, "epsilon_start");
    detail::require_fraction(epsilon_end, "epsilon_end");
    if (epsilon_end > epsilon_start) throw ValidationError("epsilon_end", "must not exceed epsilon_start");
    if (episodes <= 0) throw ValidationError("episodes", "must be positive");
    if (max_time_steps < 0) throw ValidationError("max_time_steps", "must be >= 0");
    detail::require_non_negative(alpha_decay, "alpha_decay");
  }
};

/// Linear decay from epsilon_start (episode 0) to epsilon_end (last episode).
[[nodiscard]] inline double epsilon_at(int episode, const HyperParams& p) {
  if (episode < 0 || episode >= p.episodes) throw ValidationError("episode", "out of range");
  if (p.episodes == 1) return p.epsilon_start;
  const double frac = static_cast<double>(episode) / static_cast<double>(p.episodes - 1);
  return p.epsilon_start + (p.epsilon_end - p.epsilon_start) * frac;
}

// ─────────────────────────────────────────────
// Q-table
// ─────────────────────────────────────────────

/// Sparse state x action value store; absent entries read as exactly 0.
class QTable {
 public:
  QTable(std::uint64_t num_states, std::uint32_t num_actions) : num_states_(num_states), num_actions_(num_actions) {}

  [[nodiscard]] std::uint64_t num_states() const noexcept { return num_states_; }
  [[nodiscard]] std::uint32_t num_actions() const noexcept { return num_actions_; }
  [[nodiscard]] std::size_t entry_count() const noexcept { return values_.size(); }

  [[nodiscard]] double get(std::uint64_t state, std::uint32_t action) const {
    check(state, action);
    const auto it = values_.find(key(state, action));
    return it == values_.end() ? 0.0 : it->second;
  }

  void set(std::uint64_t state, std::uint32_t action, double value) {
    check(state, action);
    detail::require_finite(value, "q_value");
    values_[key(state, action)] = value;
  }

  [[nodiscard]] double max_value(std::uint64_t state) const {
    double best = get(state, 0);
    for (std::uint32_t a = 1; a < num_actions_; ++a) best = std::max(best, get(state, a));
    return best;
  }

  /// Greedy action; ties go to the lowest ordinal.
  [[nodiscard]] std::uint32_t argmax(std::uint64_t state) const {
    std::uint32_t best_a = 0;
    double best = get(state, 0);
    for (std::uint32_t a = 1; a < num_actions_; ++a) {
      const double v = get(state, a);
      if (v > best) {
        best = v;
        best_a = a;
      }
    }
    return best_a;
  }

  /// Entries sorted by (state, action).
  [[nodiscard]] std::vector<std::tuple<std::uint64_t, std::uint32_t, double>> entries() const {
    std::vector<std::tuple<std::uint64_t, std::uint32_t, double>> out;
    out.reserve(values_.size());
    for (const auto& [k, v] : values_) out.emplace_back(k / num_actions_, static_cast<std::uint32_t>(k % num_actions_), v);
    std::sort(out.begin(), out.end());
    return out;
  }

  bool operator==(const QTable& o) const {
    return num_states_ == o.num_states_ && num_actions_ == o.num_actions_ && values_ == o.values_;
  }

 private:
  [[nodiscard]] std::uint64_t key(std::uint64_t s, std::uint32_t a) const noexcept { return s * num_actions_ + a; }

  void check(std::uint64_t s, std::uint32_t a) const {
    if (s >= num_states_) throw ValidationError("state", "index out of range");
    if (a >= num_actions_) throw ValidationError("action", "index out of range");
  }

  std::uint64_t num_states_;
  std::uint32_t num_actions_;
  std::unordered_map<std::uint64_t, double> values_;
};

[[nodiscard]] inline QTable init_q_values(long long num_states, long long num_actions) {
  if (num_states <= 0) throw ValidationError("num_states", "must be positive");
  if (num_actions <= 0) throw ValidationError("num_actions", "must be positive");
  return QTable(static_cast<std::uint64_t>(num_states), static_cast<std::uint32_t>(num_actions));
}

/// epsilon-greedy: uniform action with probability epsilon, else argmax.
[[nodiscard]] inline std::uint32_t select_action(const QTable& q, std::uint64_t state, double epsilon, Rng& rng) {
  detail::require_fraction(epsilon, "epsilon");
  if (epsilon > 0.0 && rng.uniform01() < epsilon)
    return static_cast<std::uint32_t>(rng.uniform_int(q.num_actions()));
  return q.argmax(state);
}

/// Q(s,a) <- Q(s,a) + alpha * [R + gamma * max_a' Q(s',a') - Q(s,a)]. Returns the new value.
inline double update_q_value(QTable& q, std::uint64_t state, std::uint32_t action, std::uint64_t next_state,
                             double reward, const HyperParams& p) {
  if (!std::isfinite(reward)) throw ValidationError("reward", "must be finite");
  const double current = q.get(state, action);
  const double target = reward + p.gamma * q.max_value(next_state);
  const double updated = current + p.alpha * (target - current);
  q.set(state, action, updated);
  return updated;
}

/// Evaluation-mode policy: argmax for every written state, ordinal 0 elsewhere.
class GreedyPolicy {
 public:
  explicit GreedyPolicy(const QTable& q) {
    for (const auto& [s, a, v] : q.entries()) {
      (void)a;
      (void)v;
      if (!actions_.contains(s)) actions_.emplace(s, q.argmax(s));
    }
  }

  [[nodiscard]] std::uint32_t operator()(std::uint64_t state) const {
    const auto it = actions_.find(state);
    return it == actions_.end() ? 0U : it->second;
  }

  [[nodiscard]] const std::map<std::uint64_t, std::uint32_t>& written() const noexcept { return actions_; }

 private:
  std::map<std::uint64_t, std::uint32_t> actions_;
};

[[nodiscard]] inline GreedyPolicy greedy_policy(const QTable& q) { return GreedyPolicy(q); }

// ─────────────────────────────────────────────
// Learning agent
// ─────────────────────────────────────────────

/// One tabular learner: a Q-table plus the optional per-pair visit counts
/// that drive a decaying learning rate.
class QAgent {
 public:
  explicit QAgent(HyperParams params, std::uint64_t num_states = kStateCount, std::uint32_t num_actions = kActionCount)
      : params_(params), table_(init_q_values(static_cast<long long>(num_states), num_actions)) {
    params_.validate();
  }

  QAgent(HyperParams params, QTable table) : params_(params), table_(std::move(table)) { params_.validate(); }

  [[nodiscard]] const QTable& table() const noexcept { return table_; }
  [[nodiscard]] QTable& table() noexcept { return table_; }
  [[nodiscard]] const HyperParams& params() const noexcept { return params_; }

  [[nodiscard]] std::uint32_t act(std::uint64_t state, double epsilon, Rng& rng) const {
    return select_action(table_, state, epsilon, rng);
  }

  double learn(std::uint64_t state, std::uint32_t action, std::uint64_t next_state, double reward) {
    HyperParams step = params_;
    if (params_.alpha_decay > 0.0) {
      auto& n = visits_[state * table_.num_actions() + action];
      step.alpha = params_.alpha / (1.0 + params_.alpha_decay * static_cast<double>(n));
      ++n;
    }
    return update_q_value(table_, state, action, next_state, reward, step);
  }

 private:
  HyperParams params_;
  QTable table_;
  std::unordered_map<std::uint64_t, std::uint64_t> visits_;
};

// ─────────────────────────────────────────────
// Checkpoint format
// ─────────────────────────────────────────────
//
//   # vfcsim q-table v1
//   # states <N> actions <A>
//   <state> <action> <value>
//
// Records are sorted by (state, action); values are printed with 17
// significant digits so they parse back bit-exactly.

inline void write_qtable(std::ostream& os, const QTable& q) {
  os << "# vfcsim q-table v1\n# states " << q.num_states() << " actions " << q.num_actions() << '\n';
  os << std::setprecision(17);
  for (const auto& [s, a, v] : q.entries()) os << s << ' ' << a << ' ' << v << '\n';
}

[[nodiscard]] inline QTable read_qtable(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != "# vfcsim q-table v1")
    throw ValidationError("qtable", "missing 'vfcsim q-table v1' header");
  if (!std::getline(is, line)) throw ValidationError("qtable", "missing shape line");
  std::istringstream shape(line);
  std::string hash, states_kw, actions_kw;
  long long ns = 0, na = 0;
  if (!(shape >> hash >> states_kw >> ns >> actions_kw >> na) || states_kw != "states" || actions_kw != "actions")
    throw ValidationError("qtable", "malformed shape line");
  QTable q = init_q_values(ns, na);
  int lineno = 2;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream rec(line);
    std::uint64_t s = 0;
    std::uint32_t a = 0;
    double v = 0.0;
    if (!(rec >> s >> a >> v)) throw ValidationError("qtable", "malformed record on line " + std::to_string(lineno));
    q.set(s, a, v);
  }
  return q;
}

inline void save_qtable(const std::string& path, const QTable& q) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write checkpoint " + path);
  write_qtable(os, q);
  if (!os) throw std::runtime_error("failed writing checkpoint " + path);
}

[[nodiscard]] inline QTable load_qtable(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot read checkpoint " + path);
  return read_qtable(is);
}

}  // namespace vfcsim
