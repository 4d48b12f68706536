#include <gtest/gtest.h>

#include "vfcsim/config.hpp"

using namespace vfcsim;

namespace {

ConfigError error_of(const std::string& text) {
  try {
    (void)parse_config_string(text);
  } catch (const ConfigError& e) {
    return e;
  }
  ADD_FAILURE() << "accepted:\n" << text;
  return ConfigError(ConfigError::Kind::Parse, 0, "", "none");
}

}  // namespace

TEST(Config, EmptyFileGivesDefaults) {
  const auto cfg = parse_config_string("");
  EXPECT_EQ(cfg, SimConfig{});
  EXPECT_EQ(cfg.link.v2i_bandwidth, 2.0e7);
  EXPECT_EQ(cfg.link.cycles_per_bit, 500.0);
  EXPECT_EQ(cfg.topology.fog_nodes, 9);
  EXPECT_EQ(cfg.learning.alpha, 0.1);
  EXPECT_EQ(cfg.learning.gamma, 0.9);
  EXPECT_EQ(cfg.learning.episodes, 100);
  EXPECT_EQ(cfg.learning.epsilon_start, 0.1);
  EXPECT_EQ(cfg.learning.epsilon_end, 0.01);
  EXPECT_EQ(cfg.link.wired_rate, 5.0e7);
  EXPECT_EQ(cfg.link.v2i_range, 500.0);
  EXPECT_EQ(cfg.topology.area_side, 3000.0);
  EXPECT_EQ(cfg.reward.w1, 0.3);
  EXPECT_EQ(cfg.reward.w21, 0.4);
  EXPECT_EQ(cfg.scenario.adt, 198.3);
  EXPECT_EQ(cfg.scenario.duration, 300.0);
}

TEST(Config, CommentsAndWhitespace) {
  const auto cfg = parse_config_string("# header\n\n  learning.alpha   =  0.25   # trailing\nlink.tx_power=500\n");
  EXPECT_EQ(cfg.learning.alpha, 0.25);
  EXPECT_EQ(cfg.link.tx_power, 500.0);
}

TEST(Config, RangeErrorNamesAlpha) {
  const auto e = error_of("learning.episodes = 10\nlearning.alpha = 1.5\n");
  EXPECT_EQ(e.kind(), ConfigError::Kind::Range);
  EXPECT_EQ(e.key(), "learning.alpha");
  EXPECT_EQ(e.line(), 2);
  EXPECT_NE(std::string(e.what()).find("alpha"), std::string::npos);
}

TEST(Config, UnknownKeyIsLocated) {
  const auto e = error_of("learning.alpha = 0.2\nlearning.alhpa = 0.3\n");
  EXPECT_EQ(e.kind(), ConfigError::Kind::UnknownKey);
  EXPECT_EQ(e.line(), 2);
  EXPECT_EQ(e.key(), "learning.alhpa");
}

TEST(Config, ParseErrorsAreLocated) {
  auto e = error_of("link.tx_power = 10\nthis line has no equals\n");
  EXPECT_EQ(e.kind(), ConfigError::Kind::Parse);
  EXPECT_EQ(e.line(), 2);
  e = error_of("learning.alpha = fast\n");
  EXPECT_EQ(e.kind(), ConfigError::Kind::Parse);
  EXPECT_EQ(e.key(), "learning.alpha");
  e = error_of("learning.episodes = 10.5\n");
  EXPECT_EQ(e.kind(), ConfigError::Kind::Parse);
  e = error_of("learning.alpha = 0.2\nlearning.alpha = 0.3\n");
  EXPECT_EQ(e.kind(), ConfigError::Kind::Parse);
  EXPECT_EQ(e.line(), 2);
}

TEST(Config, DistinctKindsForDistinctFailures) {
  EXPECT_NE(error_of("x.y = 1\n").kind(), error_of("learning.gamma = 1.0\n").kind());
  EXPECT_NE(error_of("learning.gamma = abc\n").kind(), error_of("learning.gamma = 1.0\n").kind());
}

TEST(Config, CrossFieldRangeErrors) {
  auto e = error_of("reward.w1 = 0.5\n");
  EXPECT_EQ(e.kind(), ConfigError::Kind::Range);
  EXPECT_EQ(e.key(), "reward.w1");
  e = error_of("topology.cpu_freq_min_hz = 0\n");
  EXPECT_EQ(e.key(), "topology.cpu_freq_min_hz");
  e = error_of("state.low_threshold = 0.9\n");
  EXPECT_EQ(e.key(), "state.low_threshold");
  e = error_of("wfq.weights = 1,2\n");
  EXPECT_EQ(e.key(), "wfq.weights");
}

TEST(Config, ScenarioPresetAppliesBeforeOverrides) {
  const auto cfg = parse_config_string("scenario.adt = 150\nscenario.name = no3\n");
  EXPECT_EQ(cfg.scenario.name, "no3");
  EXPECT_EQ(cfg.scenario.anv, 608.0);
  EXPECT_EQ(cfg.scenario.adt, 150.0);
  // A name outside the presets labels a custom scenario and keeps the statistics.
  const auto custom = parse_config_string("scenario.name = downtown\nscenario.anv = 50\n");
  EXPECT_EQ(custom.scenario.name, "downtown");
  EXPECT_EQ(custom.scenario.adt, SimConfig{}.scenario.adt);
  EXPECT_EQ(custom.scenario.anv, 50.0);
}

TEST(Config, ListsAndAuto) {
  auto cfg = parse_config_string("wfq.weights = 1, 2.5, 3, 1, 1, 1, 1, 1, 1\nstate.rate_scale = 4\n");
  ASSERT_EQ(cfg.wfq_weights.size(), 9U);
  EXPECT_EQ(cfg.wfq_weights[1], 2.5);
  EXPECT_EQ(cfg.state.rate_scale, 4.0);
  cfg = parse_config_string("wfq.weights = auto\nstate.rate_scale = auto\n");
  EXPECT_TRUE(cfg.wfq_weights.empty());
  EXPECT_EQ(cfg.state.rate_scale, 0.0);
}

TEST(Config, EchoRoundTripsDefaults) {
  const SimConfig defaults;
  EXPECT_EQ(parse_config_string(config_to_string(defaults)), defaults);
}

TEST(ConfigProperty, EchoRoundTripsRandomConfigs) {
  Rng rng(77);
  for (int i = 0; i < 500; ++i) {
    SimConfig c;
    c.learning.alpha = rng.uniform(1e-6, 1.0);
    c.learning.gamma = rng.uniform(0.0, 0.999);
    c.learning.episodes = 1 + static_cast<int>(rng.uniform_int(500));
    c.link.tx_power = rng.uniform(1e-9, 1000.0);
    c.link.noise_power = rng.uniform(-140, -60);
    c.reward.w1 = rng.uniform01();
    c.reward.w2 = 1.0 - c.reward.w1;
    c.reward.w3 = c.reward.w4 = 0.0;
    c.reward.latency_floor = rng.uniform(1e-6, 1e-1);
    c.traffic.arrival_prob = rng.uniform01();
    c.scenario.adt = rng.uniform(1, 500);
    c.topology.cpu_freq_min = rng.uniform(1e9, 3e9);
    c.quality_desired = rng.uniform(0, 2);
    c.state.high_threshold = rng.uniform(0.5, 0.99);
    if (rng.bernoulli(0.5)) c.wfq_weights.assign(9, rng.uniform(0.1, 10));
    ASSERT_NO_THROW(c.validate());
    const auto text = config_to_string(c);
    ASSERT_EQ(parse_config_string(text), c) << text;
  }
}

TEST(Config, EveryFieldHasAKey) {
  const SimConfig base;
  const std::string base_text = config_to_string(base);
  for (const auto& k : detail::config_keys()) {
    if (k.name != "traffic.trace_csv") {
      EXPECT_FALSE(k.get(base).empty()) << k.name;
    }
    EXPECT_NE(base_text.find(k.name + " = "), std::string::npos) << k.name;
  }
}
