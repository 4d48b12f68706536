#include <gtest/gtest.h>

#include <set>

#include "vfcsim/state_space.hpp"

using namespace vfcsim;

namespace {

StateSpaceConfig cfg() {
  StateSpaceConfig c;
  c.rate_scale = 2.0;
  return c;
}

TelemetrySnapshot midpoint(const StateSpaceConfig& c) {
  TelemetrySnapshot s;
  s.cpu_usage = s.mem_usage = s.disk_usage = s.net_bw_usage = 0.5;
  s.app_type_weight = s.op_requirement = s.storage_availability = 0.5;
  s.request_rate = s.expected_demand = 0.5 * c.rate_scale;
  s.recent_response_time = 0.5 * (c.response_fast + c.response_slow);
  s.sla_met = true;
  s.available_nodes = 0.5 * (c.node_count_low + c.node_count_high);
  return s;
}

DiscreteState random_state(Rng& rng) {
  StateIndex idx = static_cast<StateIndex>(rng.uniform_int(kStateCount));
  return state_from_index(idx);
}

}  // namespace

TEST(Discretize, LowCpuIsLow) {
  TelemetrySnapshot s;
  s.cpu_usage = 0.10;
  EXPECT_EQ(discretize(s, cfg()).cpu, Level::Low);
}

TEST(Discretize, MidpointsGiveAllMedium) {
  const auto c = cfg();
  const auto d = discretize(midpoint(c), c);
  EXPECT_EQ(d.cpu, Level::Medium);
  EXPECT_EQ(d.memory, Level::Medium);
  EXPECT_EQ(d.disk, Level::Medium);
  EXPECT_EQ(d.network, Level::Medium);
  EXPECT_EQ(d.requests, Level::Medium);
  EXPECT_EQ(d.app_type, AppType::Medium);
  EXPECT_EQ(d.expected_demand, Level::Medium);
  EXPECT_EQ(d.response, Responsiveness::Medium);
  EXPECT_EQ(d.sla, Sla::Fulfilled);
  EXPECT_EQ(d.op_requirement, Level::Medium);
  EXPECT_EQ(d.compute_nodes, Level::Medium);
  EXPECT_EQ(d.storage, Level::Medium);
}

// Decision table at each boundary: exactly on a threshold goes to the higher level.
TEST(Discretize, BoundariesAssignUpward) {
  const auto c = cfg();
  struct Row {
    double value;
    Level expected;
  };
  const Row table[] = {
      {0.0, Level::Low},
      {std::nextafter(c.low_threshold, 0.0), Level::Low},
      {c.low_threshold, Level::Medium},
      {std::nextafter(c.high_threshold, 0.0), Level::Medium},
      {c.high_threshold, Level::High},
      {1.0, Level::High},
  };
  for (const auto& row : table) {
    TelemetrySnapshot s;
    s.cpu_usage = s.mem_usage = s.disk_usage = s.net_bw_usage = row.value;
    s.op_requirement = s.storage_availability = row.value;
    s.request_rate = s.expected_demand = row.value * c.rate_scale;
    const auto d = discretize(s, c);
    EXPECT_EQ(d.cpu, row.expected) << row.value;
    EXPECT_EQ(d.memory, row.expected) << row.value;
    EXPECT_EQ(d.disk, row.expected) << row.value;
    EXPECT_EQ(d.network, row.expected) << row.value;
    EXPECT_EQ(d.op_requirement, row.expected) << row.value;
    EXPECT_EQ(d.storage, row.expected) << row.value;
  }

  TelemetrySnapshot s;
  s.cpu_usage = 1.0 / 3.0;
  EXPECT_EQ(discretize(s, c).cpu, Level::Medium);

  s.recent_response_time = c.response_fast;
  EXPECT_EQ(discretize(s, c).response, Responsiveness::Medium);
  s.recent_response_time = c.response_slow;
  EXPECT_EQ(discretize(s, c).response, Responsiveness::Slow);
  s.recent_response_time = std::nextafter(c.response_fast, 0.0);
  EXPECT_EQ(discretize(s, c).response, Responsiveness::Fast);

  s.available_nodes = c.node_count_low;
  EXPECT_EQ(discretize(s, c).compute_nodes, Level::Medium);
  s.available_nodes = c.node_count_high;
  EXPECT_EQ(discretize(s, c).compute_nodes, Level::High);
  s.available_nodes = 0.0;
  EXPECT_EQ(discretize(s, c).compute_nodes, Level::Low);
}

TEST(Discretize, AppTypeBandsFromDemand) {
  const auto c = cfg();
  TelemetrySnapshot s;
  const double cap = c.caps.demand_mips;
  s.app_type_weight = 199.0 / cap;
  EXPECT_EQ(discretize(s, c).app_type, AppType::Light);
  s.app_type_weight = 200.0 / cap;
  EXPECT_EQ(discretize(s, c).app_type, AppType::Medium);
  s.app_type_weight = 400.0 / cap;
  EXPECT_EQ(discretize(s, c).app_type, AppType::Heavy);
}

TEST(Discretize, SlaFlag) {
  TelemetrySnapshot s;
  s.sla_met = false;
  EXPECT_EQ(discretize(s, cfg()).sla, Sla::NotFulfilled);
}

TEST(Discretize, RejectsBadFieldsByName) {
  const auto c = cfg();
  auto expect_field = [&](TelemetrySnapshot s, const std::string& field) {
    try {
      (void)discretize(s, c);
      ADD_FAILURE() << "accepted bad " << field;
    } catch (const ValidationError& e) {
      EXPECT_EQ(e.field(), field);
    }
  };
  TelemetrySnapshot s;
  s.cpu_usage = 1.5;
  expect_field(s, "cpu_usage");
  s = {};
  s.mem_usage = std::nan("");
  expect_field(s, "mem_usage");
  s = {};
  s.request_rate = -1.0;
  expect_field(s, "request_rate");
  s = {};
  s.recent_response_time = std::numeric_limits<double>::infinity();
  expect_field(s, "recent_response_time");
  s = {};
  s.storage_availability = -0.1;
  expect_field(s, "storage_availability");
}

TEST(Discretize, RequiresResolvedRateScale) {
  StateSpaceConfig c;
  c.rate_scale = 0.0;
  EXPECT_THROW((void)discretize(TelemetrySnapshot{}, c), ValidationError);
}

TEST(StateSpaceConfig, ValidatesOrdering) {
  StateSpaceConfig c;
  c.low_threshold = 0.7;
  EXPECT_THROW(c.validate(), ValidationError);
  c = {};
  c.response_fast = 9.0;
  EXPECT_THROW(c.validate(), ValidationError);
  c = {};
  c.node_count_low = 3.0;
  EXPECT_THROW(c.validate(), ValidationError);
  EXPECT_NO_THROW(StateSpaceConfig{}.validate());
}

TEST(StateIndex, ExtremesOfEncoding) {
  EXPECT_EQ(state_index(DiscreteState{}), 0U);
  DiscreteState top;
  top.cpu = top.memory = top.disk = top.network = top.requests = Level::High;
  top.expected_demand = top.op_requirement = top.compute_nodes = top.storage = Level::High;
  top.app_type = AppType::Heavy;
  top.response = Responsiveness::Slow;
  top.sla = Sla::NotFulfilled;
  EXPECT_EQ(state_index(top), 354293U);
  EXPECT_EQ(kStateCount, 354294U);
}

TEST(StateIndex, RandomRoundTrip) {
  Rng rng(7);
  for (int i = 0; i < 1000; ++i) {
    // Build the state field by field so the oracle does not go through the decoder.
    DiscreteState s;
    auto lvl = [&] { return static_cast<Level>(rng.uniform_int(3)); };
    s.cpu = lvl();
    s.memory = lvl();
    s.disk = lvl();
    s.network = lvl();
    s.requests = lvl();
    s.app_type = static_cast<AppType>(rng.uniform_int(3));
    s.expected_demand = lvl();
    s.response = static_cast<Responsiveness>(rng.uniform_int(3));
    s.sla = static_cast<Sla>(rng.uniform_int(2));
    s.op_requirement = lvl();
    s.compute_nodes = lvl();
    s.storage = lvl();
    const auto idx = state_index(s);
    ASSERT_LT(idx, kStateCount);
    EXPECT_EQ(state_from_index(idx), s);
  }
}

TEST(StateIndex, BijectionOverFullRange) {
  for (StateIndex i = 0; i < kStateCount; ++i) ASSERT_EQ(state_index(state_from_index(i)), i);
  EXPECT_THROW((void)state_from_index(kStateCount), ValidationError);
}

TEST(StateIndex, DistinctStatesDistinctIndices) {
  Rng rng(11);
  std::set<StateIndex> seen;
  std::set<std::array<std::uint32_t, 12>> states;
  for (int i = 0; i < 2000; ++i) {
    const auto s = random_state(rng);
    seen.insert(state_index(s));
    states.insert(detail::digits_of(s));
  }
  EXPECT_EQ(seen.size(), states.size());
}

TEST(DiscretizeProperty, MonotoneInEachFraction) {
  const auto c = cfg();
  Rng rng(3);
  for (int i = 0; i < 100000; ++i) {
    const double a = rng.uniform01();
    const double b = rng.uniform01();
    TelemetrySnapshot lo, hi;
    lo.cpu_usage = std::min(a, b);
    hi.cpu_usage = std::max(a, b);
    lo.net_bw_usage = std::min(a, b);
    hi.net_bw_usage = std::max(a, b);
    lo.request_rate = std::min(a, b) * c.rate_scale;
    hi.request_rate = std::max(a, b) * c.rate_scale;
    lo.recent_response_time = std::min(a, b) * 10.0;
    hi.recent_response_time = std::max(a, b) * 10.0;
    const auto dl = discretize(lo, c);
    const auto dh = discretize(hi, c);
    ASSERT_LE(dl.cpu, dh.cpu);
    ASSERT_LE(dl.network, dh.network);
    ASSERT_LE(dl.requests, dh.requests);
    ASSERT_LE(dl.response, dh.response);
  }
}

TEST(DiscretizeProperty, EveryInputMapsToOneLevel) {
  const auto c = cfg();
  Rng rng(5);
  for (int i = 0; i < 100000; ++i) {
    const double f = rng.uniform01();
    const Level l = level_of(f, c.low_threshold, c.high_threshold);
    const bool low = f < c.low_threshold;
    const bool high = f >= c.high_threshold;
    const Level expected = low ? Level::Low : (high ? Level::High : Level::Medium);
    ASSERT_EQ(l, expected) << f;
  }
}
