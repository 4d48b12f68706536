#include <gtest/gtest.h>

#include <memory>
#include <vector>

#include "vfcsim/qlearn_scheduler.hpp"
#include "vfcsim/scheduling.hpp"

using namespace vfcsim;

namespace {

NodeView free_node(int id, double cpu = 1000.0, double mem = 1000.0) {
  NodeView n;
  n.id = id;
  n.reachable = true;
  n.free = {cpu, mem, 100.0};
  n.usable = n.free;
  return n;
}

DecisionContext ctx_for(const std::vector<NodeView>& nodes, double demand = 100.0, std::uint64_t id = 0) {
  DecisionContext c;
  c.task.id = id;
  c.task.requirement = {demand, 10.0, 1.0};
  c.nodes = nodes;
  c.decision_node = 0;
  return c;
}

int node_of(const std::optional<Placement>& p) {
  if (!p) return -2;
  return p->target.kind == TargetKind::Fog ? p->target.node : -1;
}

}  // namespace

TEST(Fcfs, FirstNodeInIdOrder) {
  std::vector<NodeView> nodes{free_node(0, 50), free_node(1), free_node(2)};
  const auto p = fcfs_select(ctx_for(nodes));
  ASSERT_TRUE(p);
  EXPECT_EQ(node_of(p), 1);
  EXPECT_EQ(p->allocation, ctx_for(nodes).task.requirement);
}

// One node with room for a single task: the first decision takes it, the
// second waits.
TEST(Fcfs, SecondTaskQueuesWhenFull) {
  std::vector<NodeView> nodes{free_node(0, 100)};
  EXPECT_EQ(node_of(fcfs_select(ctx_for(nodes, 100, 0))), 0);
  nodes[0].free.cpu_mips = 0.0;
  nodes[0].queue_empty = false;
  EXPECT_FALSE(fcfs_select(ctx_for(nodes, 100, 1)).has_value());
}

TEST(Fcfs, OversizeGoesToCloud) {
  std::vector<NodeView> nodes{free_node(0, 200), free_node(1, 300)};
  const auto p = fcfs_select(ctx_for(nodes, 500));
  ASSERT_TRUE(p);
  EXPECT_EQ(p->target.kind, TargetKind::Cloud);
}

TEST(Fcfs, NoReachableNodeGoesToCloud) {
  std::vector<NodeView> nodes{free_node(0)};
  nodes[0].reachable = false;
  const auto p = fcfs_select(ctx_for(nodes));
  ASSERT_TRUE(p);
  EXPECT_EQ(p->target.kind, TargetKind::Cloud);
}

TEST(RoundRobin, RotatesAndWraps) {
  std::vector<NodeView> nodes{free_node(0), free_node(1), free_node(2)};
  std::size_t cursor = 0;
  EXPECT_EQ(node_of(rr_select(ctx_for(nodes), cursor)), 0);
  EXPECT_EQ(node_of(rr_select(ctx_for(nodes), cursor)), 1);
  EXPECT_EQ(node_of(rr_select(ctx_for(nodes), cursor)), 2);
  EXPECT_EQ(node_of(rr_select(ctx_for(nodes), cursor)), 0);
}

TEST(RoundRobin, SkipsSaturatedNode) {
  std::vector<NodeView> nodes{free_node(0), free_node(1, 0), free_node(2)};
  std::size_t cursor = 1;
  EXPECT_EQ(node_of(rr_select(ctx_for(nodes), cursor)), 2);
  EXPECT_EQ(cursor, 0U);
  EXPECT_EQ(node_of(rr_select(ctx_for(nodes), cursor)), 0);
  EXPECT_EQ(node_of(rr_select(ctx_for(nodes), cursor)), 2);
}

TEST(RoundRobin, FairOverFullCycles) {
  for (int n = 1; n <= 7; ++n) {
    std::vector<NodeView> nodes;
    for (int i = 0; i < n; ++i) nodes.push_back(free_node(i));
    RoundRobinScheduler rr;
    std::vector<int> counts(static_cast<std::size_t>(n), 0);
    constexpr int k = 13;
    for (int t = 0; t < n * k; ++t) ++counts[static_cast<std::size_t>(node_of(rr.decide(ctx_for(nodes))))];
    for (int c : counts) EXPECT_EQ(c, k);
  }
}

TEST(Wfq, EqualWeightsAlternate) {
  std::vector<NodeView> nodes{free_node(0), free_node(1)};
  WfqScheduler wfq({1.0, 1.0});
  for (int t = 0; t < 20; ++t) EXPECT_EQ(node_of(wfq.decide(ctx_for(nodes))), t % 2);
}

TEST(Wfq, FirstTaskLowestId) {
  std::vector<NodeView> nodes{free_node(0), free_node(1), free_node(2)};
  WfqScheduler wfq({1.0, 5.0, 2.0});
  EXPECT_EQ(node_of(wfq.decide(ctx_for(nodes))), 0);
}

TEST(Wfq, TwoToOneShare) {
  std::vector<NodeView> nodes{free_node(0), free_node(1)};
  WfqScheduler wfq({2.0, 1.0});
  int on0 = 0;
  constexpr int n = 300;
  for (int t = 0; t < n; ++t) on0 += node_of(wfq.decide(ctx_for(nodes))) == 0;
  EXPECT_NEAR(static_cast<double>(on0) / n, 2.0 / 3.0, 0.02);
}

TEST(Wfq, ShareMatchesWeightsForRandomDemands) {
  Rng rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 + rng.uniform_int(4);
    std::vector<NodeView> nodes;
    std::vector<double> w;
    for (std::size_t i = 0; i < n; ++i) {
      nodes.push_back(free_node(static_cast<int>(i)));
      w.push_back(rng.uniform(1.0, 4.0));
    }
    WfqScheduler wfq(w);
    std::vector<double> work(n, 0.0);
    double total = 0.0;
    for (int t = 0; t < 3000; ++t) {
      const double d = rng.uniform(100.0, 500.0);
      work[static_cast<std::size_t>(node_of(wfq.decide(ctx_for(nodes, d))))] += d;
      total += d;
    }
    double wsum = 0.0;
    for (double x : w) wsum += x;
    for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(work[i] / total, w[i] / wsum, 0.02);
  }
}

TEST(Wfq, RejectsBadWeights) {
  EXPECT_THROW(WfqScheduler({1.0, 0.0}), ValidationError);
  WfqScheduler wfq({1.0});
  std::vector<NodeView> nodes{free_node(0), free_node(1)};
  EXPECT_THROW((void)wfq.decide(ctx_for(nodes)), ValidationError);
}

TEST(Wfq, VirtualFinishTimesNonDecreasing) {
  std::vector<NodeView> nodes{free_node(0), free_node(1), free_node(2)};
  WfqState st({1.0, 2.0, 3.0});
  Rng rng(6);
  for (int t = 0; t < 1000; ++t) {
    const auto before = st.finish;
    (void)wfq_select(ctx_for(nodes, rng.uniform(100, 500)), st);
    for (std::size_t i = 0; i < before.size(); ++i) ASSERT_GE(st.finish[i], before[i]);
  }
}

// No baseline leaves a task waiting while some reachable node has room.
TEST(BaselineProperty, WorkConserving) {
  Rng rng(8);
  std::vector<std::unique_ptr<Scheduler>> scheds;
  scheds.push_back(std::make_unique<FcfsScheduler>());
  scheds.push_back(std::make_unique<RoundRobinScheduler>());
  scheds.push_back(std::make_unique<WfqScheduler>(std::vector<double>{1, 2, 3, 4, 5}));
  for (int i = 0; i < 100000; ++i) {
    std::vector<NodeView> nodes;
    bool any_fit = false;
    const double demand = rng.uniform(100, 500);
    for (int k = 0; k < 5; ++k) {
      auto n = free_node(k, rng.uniform(0, 800), rng.uniform(0, 100));
      n.reachable = rng.bernoulli(0.7);
      n.queue_empty = rng.bernoulli(0.8);
      any_fit = any_fit || n.fits({demand, 10.0, 1.0});
      nodes.push_back(n);
    }
    for (auto& s : scheds) {
      const auto p = s->decide(ctx_for(nodes, demand));
      if (any_fit) {
        ASSERT_TRUE(p.has_value()) << s->name();
        ASSERT_EQ(p->target.kind, TargetKind::Fog);
        ASSERT_TRUE(nodes[static_cast<std::size_t>(p->target.node)].fits({demand, 10.0, 1.0}));
      }
      if (p) {
        ASSERT_TRUE(p->allocation.covers({demand, 10.0, 1.0}));
      }
    }
  }
}

// Every scheduler, learned or not, answers the same context through the same interface.
TEST(BaselineProperty, InterfaceParity) {
  SimConfig cfg;
  cfg.topology.fog_nodes = 3;
  std::vector<std::unique_ptr<Scheduler>> scheds;
  scheds.push_back(std::make_unique<FcfsScheduler>());
  scheds.push_back(std::make_unique<RoundRobinScheduler>());
  scheds.push_back(std::make_unique<WfqScheduler>(std::vector<double>{1, 1, 1}));
  scheds.push_back(std::make_unique<QLearningScheduler>(cfg, 1));
  std::vector<NodeView> nodes{free_node(0), free_node(1), free_node(2)};
  for (auto& s : scheds) {
    const auto p = s->decide(ctx_for(nodes));
    ASSERT_TRUE(p.has_value()) << s->name();
    EXPECT_TRUE(p->allocation.covers(ctx_for(nodes).task.requirement)) << s->name();
  }
}

TEST(QPlacement, FogGoesToLeastLoaded) {
  std::vector<NodeView> nodes{free_node(0), free_node(1), free_node(2)};
  nodes[0].cpu_util = 0.5;
  nodes[1].cpu_util = 0.3;
  nodes[1].queued_load = 0.3;
  nodes[2].cpu_util = 0.4;
  const BundleFactors bundles{};
  const auto p = placement_for({Tier::Fog, Bundle::Medium}, ctx_for(nodes), bundles);
  EXPECT_EQ(p.target.kind, TargetKind::Fog);
  EXPECT_EQ(p.target.node, 2);
  EXPECT_DOUBLE_EQ(p.allocation.cpu_mips, 100.0 * bundles.medium);
  EXPECT_EQ(p.action, 4);
}

TEST(QPlacement, LocalAndCloud) {
  std::vector<NodeView> nodes{free_node(0)};
  const BundleFactors bundles{};
  const auto local = placement_for({Tier::Local, Bundle::Large}, ctx_for(nodes), bundles);
  EXPECT_EQ(local.target.kind, TargetKind::Vehicle);
  const auto cloud = placement_for({Tier::Cloud, Bundle::Large}, ctx_for(nodes), bundles);
  EXPECT_EQ(cloud.target.kind, TargetKind::Cloud);
  EXPECT_DOUBLE_EQ(cloud.allocation.cpu_mips, 100.0 * bundles.large);
}
