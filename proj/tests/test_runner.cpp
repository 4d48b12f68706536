#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include "vfcsim/runner.hpp"

using namespace vfcsim;
namespace fs = std::filesystem;

namespace {

class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = fs::temp_directory_path() / ("vfcsim_test_" + std::to_string(rd()) + std::to_string(rd()));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  [[nodiscard]] const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::vector<std::vector<std::string>> rows(const fs::path& p) {
  std::ifstream is(p);
  std::vector<std::vector<std::string>> out;
  std::string line;
  while (std::getline(is, line))
    if (!line.empty()) out.push_back(split(line));
  return out;
}

const std::vector<std::string> kSmall{"scenario.duration = 40", "learning.episodes = 2"};

RunSpec spec_for(Command c, const fs::path& out) {
  RunSpec s;
  s.command = c;
  s.out = out;
  s.overrides = kSmall;
  s.jobs = 4;
  return s;
}

}  // namespace

TEST(Runner, TrainWritesCurveAndTables) {
  TempDir dir;
  auto s = spec_for(Command::Train, dir.path());
  ASSERT_EQ(execute(s), kExitOk);
  const auto curve = rows(dir.path() / "learning_curve_no1.csv");
  ASSERT_EQ(curve.size(), 3U);
  EXPECT_EQ(curve[0], split("scenario,seed,episode,epsilon,tasks,total_reward,mean_reward,asr"));
  for (int k = 0; k < 9; ++k) EXPECT_TRUE(fs::exists(checkpoint_file(dir.path() / "qtables" / "no1", k))) << k;
  EXPECT_TRUE(fs::exists(dir.path() / "config.resolved.cfg"));
  EXPECT_TRUE(fs::exists(dir.path() / "invocation.txt"));
}

TEST(Runner, CompareGridCardinalityAndAggregates) {
  TempDir dir;
  auto train = spec_for(Command::Train, dir.path());
  train.scenarios = {"all"};
  ASSERT_EQ(execute(train), kExitOk);

  auto s = spec_for(Command::Compare, dir.path());
  s.scenarios = {"all"};
  s.seeds = {1, 2, 3};
  ASSERT_EQ(execute(s), kExitOk);

  const auto runs = rows(dir.path() / "runs.csv");
  ASSERT_EQ(runs.size(), 1U + 4 * 4 * 3);
  EXPECT_EQ(runs[0], split(std::string("source,") + detail::kMetricsHeader));

  // Oracle: hand-average each (scheduler, scenario) group from the run rows.
  std::map<std::pair<std::string, std::string>, std::vector<double>> asr_by, apt_by;
  for (std::size_t i = 1; i < runs.size(); ++i) {
    ASSERT_EQ(runs[i].size(), 14U);
    EXPECT_EQ(runs[i][0], "simulated");
    asr_by[{runs[i][1], runs[i][2]}].push_back(std::stod(runs[i][7]));
    apt_by[{runs[i][1], runs[i][2]}].push_back(std::stod(runs[i][5]));
  }
  EXPECT_EQ(asr_by.size(), 16U);

  const auto agg = rows(dir.path() / "aggregate.csv");
  std::size_t simulated = 0, reported = 0;
  for (std::size_t i = 1; i < agg.size(); ++i) {
    ASSERT_EQ(agg[i].size(), 14U);
    if (agg[i][0] == "paper-reported") {
      ++reported;
      EXPECT_EQ(agg[i][2], "all");
      continue;
    }
    ASSERT_EQ(agg[i][0], "simulated");
    ++simulated;
    const auto key = std::make_pair(agg[i][1], agg[i][2]);
    EXPECT_EQ(agg[i][3], "3");
    for (const auto& [col, series] : {std::pair{8, &asr_by[key]}, std::pair{4, &apt_by[key]}}) {
      const double mean = ((*series)[0] + (*series)[1] + (*series)[2]) / 3.0;
      EXPECT_NEAR(std::stod(agg[i][static_cast<std::size_t>(col)]), mean, 1e-12) << key.first << ' ' << key.second;
    }
  }
  EXPECT_EQ(simulated, 16U);
  EXPECT_EQ(reported, 5U);
}

TEST(Runner, ReportedRowsCarryReferenceValues) {
  TempDir dir;
  auto s = spec_for(Command::Compare, dir.path());
  s.schedulers = {"fcfs"};
  ASSERT_EQ(execute(s), kExitOk);
  std::map<std::string, std::vector<std::string>> ref;
  for (const auto& r : rows(dir.path() / "aggregate.csv"))
    if (r[0] == "paper-reported") ref[r[1]] = r;
  ASSERT_EQ(ref.size(), 5U);
  EXPECT_EQ(ref["qlearn"][8], "0.78");
  EXPECT_EQ(ref["qlearn"][10], "235");
  EXPECT_EQ(ref["qlearn"][12], "51");
  EXPECT_EQ(ref["fcfs"][8], "0.62");
  EXPECT_EQ(ref["ref83"][10], "212");
  EXPECT_EQ(ref["rr"][12], "20");
  EXPECT_EQ(ref["wfq"][8], "0.72");
}

TEST(Runner, RepeatedInvocationsAreByteIdentical) {
  TempDir a, b;
  for (const auto* dir : {&a, &b}) {
    auto train = spec_for(Command::Train, dir->path());
    ASSERT_EQ(execute(train), kExitOk);
    auto ev = spec_for(Command::Eval, dir->path());
    ev.seeds = {4, 5};
    ASSERT_EQ(execute(ev), kExitOk);
    auto cmp = spec_for(Command::Compare, dir->path());
    cmp.seeds = {4, 5};
    cmp.jobs = dir == &a ? 1 : 8;
    ASSERT_EQ(execute(cmp), kExitOk);
  }
  std::size_t compared = 0;
  for (const auto& e : fs::recursive_directory_iterator(a.path())) {
    if (!e.is_regular_file()) continue;
    const auto rel = fs::relative(e.path(), a.path());
    ASSERT_TRUE(fs::exists(b.path() / rel)) << rel;
    EXPECT_EQ(slurp(e.path()), slurp(b.path() / rel)) << rel;
    ++compared;
  }
  EXPECT_GE(compared, 20U);
}

TEST(Runner, EvalWritesOneLogPerRun) {
  TempDir dir;
  auto s = spec_for(Command::Eval, dir.path());
  s.schedulers = {"fcfs", "wfq"};
  s.seeds = {1, 2};
  ASSERT_EQ(execute(s), kExitOk);
  EXPECT_EQ(rows(dir.path() / "eval.csv").size(), 5U);
  for (const char* f : {"fcfs_no1_seed1", "fcfs_no1_seed2", "wfq_no1_seed1", "wfq_no1_seed2"})
    EXPECT_GT(fs::file_size(dir.path() / "logs" / (std::string(f) + ".jsonl")), 0U) << f;
}

TEST(Runner, ExitCodes) {
  TempDir dir;
  auto s = spec_for(Command::Compare, dir.path());
  s.overrides.push_back("learning.alpha = 1.5");
  EXPECT_EQ(execute(s), kExitConfigError);

  s = spec_for(Command::Compare, dir.path());
  s.overrides.push_back("no.such = 1");
  EXPECT_EQ(execute(s), kExitConfigError);

  s = spec_for(Command::Compare, dir.path());
  s.schedulers = {"edf"};
  EXPECT_EQ(execute(s), kExitConfigError);

  s = spec_for(Command::Compare, dir.path());
  s.config_path = (dir.path() / "missing.cfg").string();
  EXPECT_EQ(execute(s), kExitConfigError);

  s = spec_for(Command::Sweep, dir.path());
  s.probs = {0.5, 0.3};
  EXPECT_EQ(execute(s), kExitConfigError);

  // No q-tables under the checkpoint root: the qlearn run fails, the others still report.
  s = spec_for(Command::Compare, dir.path());
  s.checkpoint = dir.path() / "nowhere";
  EXPECT_EQ(execute(s), kExitRunFailure);
  EXPECT_EQ(rows(dir.path() / "runs.csv").size(), 4U);
}

TEST(Runner, ConfigFileAndOverridesCompose) {
  TempDir dir;
  {
    std::ofstream cfg(dir.path() / "run.cfg");
    cfg << "scenario.name = no2\nlearning.episodes = 7\n";
  }
  RunSpec s;
  s.config_path = (dir.path() / "run.cfg").string();
  s.overrides = {"learning.episodes=3"};
  const auto cfg = resolve_config(s);
  EXPECT_EQ(cfg.scenario.name, "no2");
  EXPECT_EQ(cfg.learning.episodes, 3);
  s.overrides = {"learning.episodes"};
  EXPECT_THROW((void)resolve_config(s), ConfigError);
}

TEST(Runner, OutputDirectoryFromEnvironment) {
  TempDir dir;
  auto s = spec_for(Command::Compare, fs::path{});
  s.schedulers = {"rr"};
  ::setenv("VFCSIM_OUT", dir.path().c_str(), 1);
  const int rc = execute(s);
  ::unsetenv("VFCSIM_OUT");
  EXPECT_EQ(rc, kExitOk);
  EXPECT_TRUE(fs::exists(dir.path() / "runs.csv"));
  EXPECT_EQ(execute(s), kExitConfigError);
}

TEST(Runner, SinglePointSweep) {
  TempDir dir;
  auto s = spec_for(Command::Sweep, dir.path());
  s.schedulers = {"fcfs", "rr"};
  s.probs = {0.05};
  ASSERT_EQ(execute(s), kExitOk);
  EXPECT_EQ(rows(dir.path() / "sweep_runs.csv").size(), 3U);
  EXPECT_EQ(rows(dir.path() / "sweep_series.csv").size(), 1U + 2 * 5);
  const auto mono = rows(dir.path() / "monotonicity.csv");
  ASSERT_EQ(mono.size(), 3U);
  EXPECT_EQ(mono[1][3], "yes");
}

TEST(Monotonicity, FlagsRisingAsr) {
  auto outcome = [](double p, double asr) {
    RunOutcome o;
    MetricsReport m;
    m.scheduler = "fcfs";
    m.scenario = "no1";
    m.arrival_prob = p;
    m.asr = asr;
    o.report = m;
    return o;
  };
  const std::vector<RunOutcome> outs{outcome(0.3, 0.8), outcome(0.5, 0.7), outcome(0.5, 0.9), outcome(0.7, 0.75)};
  const auto f = asr_monotonicity({"fcfs"}, {"no1"}, {0.3, 0.5, 0.7}, outs);
  ASSERT_EQ(f.size(), 1U);
  EXPECT_TRUE(f[0].non_increasing);
  const std::vector<RunOutcome> rising{outcome(0.3, 0.5), outcome(0.5, 0.6), outcome(0.7, 0.4)};
  const auto g = asr_monotonicity({"fcfs"}, {"no1"}, {0.3, 0.5, 0.7}, rising);
  EXPECT_FALSE(g[0].non_increasing);
  ASSERT_EQ(g[0].violations.size(), 1U);
  EXPECT_EQ(g[0].violations[0], std::make_pair(0.3, 0.5));
}

TEST(Runner, MeanSdUsesSampleDeviation) {
  const auto s = detail::mean_sd({2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0});
  EXPECT_DOUBLE_EQ(s.mean, 5.0);
  EXPECT_DOUBLE_EQ(s.sd, std::sqrt(32.0 / 7.0));
  EXPECT_EQ(detail::mean_sd({3.0}).sd, 0.0);
}
