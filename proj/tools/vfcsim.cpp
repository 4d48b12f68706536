// vfcsim: train, evaluate, compare and sweep fog schedulers.

#include <charconv>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "vfcsim/runner.hpp"

namespace {

std::vector<std::string> split(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');)
    if (!item.empty()) out.push_back(item);
  return out;
}

/// "1,2,5" or ranges such as "1-10".
std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> out;
  for (const auto& item : split(text)) {
    const auto dash = item.find('-');
    auto num = [](std::string_view s) {
      std::uint64_t v = 0;
      const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
      if (r.ec != std::errc() || r.ptr != s.data() + s.size())
        throw vfcsim::ConfigError(vfcsim::ConfigError::Kind::Parse, 0, "seed", "bad seed '" + std::string(s) + "'");
      return v;
    };
    if (dash == std::string::npos) {
      out.push_back(num(item));
      continue;
    }
    const auto lo = num(std::string_view(item).substr(0, dash));
    const auto hi = num(std::string_view(item).substr(dash + 1));
    if (hi < lo) throw vfcsim::ConfigError(vfcsim::ConfigError::Kind::Range, 0, "seed", "empty range '" + item + "'");
    for (auto s = lo; s <= hi; ++s) out.push_back(s);
  }
  return out;
}

std::vector<double> parse_probs(const std::string& text) {
  std::vector<double> out;
  for (const auto& item : split(text)) out.push_back(vfcsim::detail::parse_number<double>(item));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Vehicular fog computing scheduler simulator"};
  app.require_subcommand(1);

  std::string config, schedulers, scenarios, seeds = "1", probs = "0.3,0.4,0.5,0.6,0.7", out, checkpoint;
  std::vector<std::string> overrides;
  unsigned jobs = 0;

  struct Entry {
    const char* name;
    vfcsim::Command command;
    const char* help;
  };
  const Entry entries[] = {
      {"train", vfcsim::Command::Train, "train per-node Q-tables and write checkpoints"},
      {"eval", vfcsim::Command::Eval, "evaluate schedulers and write metrics plus event logs"},
      {"compare", vfcsim::Command::Compare, "run schedulers x scenarios x seeds and aggregate"},
      {"sweep", vfcsim::Command::Sweep, "sweep the vehicle arrival probability"},
  };
  std::vector<std::pair<CLI::App*, vfcsim::Command>> subs;
  for (const auto& e : entries) {
    auto* sub = app.add_subcommand(e.name, e.help);
    sub->add_option("--config", config, "configuration file (key = value)")->check(CLI::ExistingFile);
    sub->add_option("--set", overrides, "override one key, e.g. --set learning.alpha=0.2");
    sub->add_option("--scheduler", schedulers, "qlearn, fcfs, rr, wfq, a comma list or all");
    sub->add_option("--scenario", scenarios, "no1..no4, a comma list or all");
    sub->add_option("--seed", seeds, "seed list, e.g. 1,2,3 or 1-10")->capture_default_str();
    sub->add_option("--out", out, "output directory (default: $VFCSIM_OUT)");
    sub->add_option("--checkpoint", checkpoint, "Q-table root directory (default: <out>/qtables)");
    sub->add_option("--jobs", jobs, "concurrent runs (0: one per core)")->capture_default_str();
    if (e.command == vfcsim::Command::Sweep)
      sub->add_option("--probs", probs, "arrival probabilities")->capture_default_str();
    subs.emplace_back(sub, e.command);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : vfcsim::kExitConfigError;
  }

  vfcsim::RunSpec spec;
  try {
    for (const auto& [sub, command] : subs)
      if (sub->parsed()) spec.command = command;
    spec.config_path = config;
    spec.overrides = overrides;
    spec.schedulers = split(schedulers);
    spec.scenarios = split(scenarios);
    spec.seeds = parse_seeds(seeds);
    spec.probs = parse_probs(probs);
    spec.out = out;
    spec.checkpoint = checkpoint;
    spec.jobs = jobs;
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return vfcsim::kExitConfigError;
  }
  for (int i = 0; i < argc; ++i) spec.invocation += (i ? " " : "") + std::string(i ? argv[i] : "vfcsim");
  return vfcsim::execute(spec);
}
