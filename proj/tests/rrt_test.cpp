#include <algorithm>

#include <gtest/gtest.h>

#include "mgpf/heuristic.hpp"
#include "mgpf/mgpf.hpp"
#include "mgpf/rrt.hpp"
#include "test_support.hpp"

using namespace mgpf;

namespace {

void expect_valid_path(const GridMap& m, const PlanOutcome& o, const State& start, const State& goal) {
  ASSERT_TRUE(o.success);
  ASSERT_GE(o.path.size(), 2u);
  EXPECT_EQ(o.path.front(), start);
  EXPECT_EQ(o.path.back(), goal);
  for (std::size_t i = 1; i < o.path.size(); ++i) ASSERT_TRUE(segment_collision_free(m, o.path[i - 1], o.path[i]));
}

void expect_tree_invariants(const GridMap& m, const Tree& t) {
  ASSERT_EQ(t.parent.size(), t.nodes.size());
  ASSERT_EQ(t.parent[0], Tree::kNoParent);
  for (std::size_t i = 1; i < t.size(); ++i) {
    ASSERT_GE(t.parent[i], 0);
    ASSERT_LT(static_cast<std::size_t>(t.parent[i]), t.size());
    ASSERT_TRUE(segment_collision_free(m, t.nodes[t.parent[i]], t.nodes[i]));
    // Reaches the root without revisiting a node.
    EXPECT_NO_THROW(extract_path(t, i));
  }
}

GridMap walled_goal_map() {
  return load_map(std::string_view(
      "................\n"
      "................\n"
      "..........#####.\n"
      "..........#...#.\n"
      "..........#...#.\n"
      "..........#####.\n"
      "................\n"
      "................"));
}

}  // namespace

TEST(ExtractPath, Examples) {
  Tree t;
  t.add({0, 0}, Tree::kNoParent);
  EXPECT_EQ(extract_path(t, 0), (std::vector<State>{{0, 0}}));
  t.add({1, 0}, 0);
  t.add({2, 0}, 1);
  EXPECT_EQ(extract_path(t, 2), (std::vector<State>{{0, 0}, {1, 0}, {2, 0}}));
  EXPECT_THROW(extract_path(t, 3), Error);
}

TEST(ExtractPath, RandomTreeEdgesAreParentLinks) {
  Rng rng(1);
  Tree t;
  t.add({0, 0}, Tree::kNoParent);
  for (int i = 1; i < 200; ++i) t.add({static_cast<double>(i), rng.uniform01()}, static_cast<std::int32_t>(rng.below(i)));
  for (std::size_t leaf = 0; leaf < t.size(); leaf += 7) {
    const auto path = extract_path(t, leaf);
    EXPECT_EQ(path.front(), t.nodes[0]);
    EXPECT_EQ(path.back(), t.nodes[leaf]);
    // Each consecutive pair is (parent, child).
    std::size_t node = leaf;
    for (std::size_t k = path.size() - 1; k > 0; --k) {
      ASSERT_EQ(path[k], t.nodes[node]);
      node = static_cast<std::size_t>(t.parent[node]);
      ASSERT_EQ(path[k - 1], t.nodes[node]);
    }
  }
}

TEST(NodeIndex, NearestMatchesLinearScanWithLowestIdTies) {
  Rng rng(2);
  std::vector<State> pts;
  NodeIndex idx(64, 64, 8);
  for (std::uint32_t i = 0; i < 500; ++i) {
    // Snap to a coarse lattice so exact ties occur.
    pts.push_back({std::floor(rng.uniform(0, 64)), std::floor(rng.uniform(0, 64))});
    idx.insert(i, pts.back());
  }
  for (int q = 0; q < 2000; ++q) {
    const State s{rng.uniform(-5, 70), rng.uniform(-5, 70)};
    std::uint32_t best = 0;
    for (std::uint32_t i = 1; i < pts.size(); ++i) {
      if (squared_distance(pts[i], s) < squared_distance(pts[best], s)) best = i;
    }
    ASSERT_EQ(idx.nearest(pts, s), best);
  }
  std::vector<std::uint32_t> near;
  idx.within(pts, {32, 32}, 10, near);
  std::vector<std::uint32_t> expect;
  for (std::uint32_t i = 0; i < pts.size(); ++i) {
    if (distance(pts[i], {32, 32}) <= 10) expect.push_back(i);
  }
  EXPECT_EQ(near, expect);
}

TEST(RrtPlan, ImmediateConnect) {
  const GridMap m = test::empty_map(32, 32);
  UniformSampler s(m, 1);
  const PlanOutcome o = rrt_plan(m, {5, 5}, {9, 8}, s, RrtParams{});
  EXPECT_TRUE(o.success);
  EXPECT_EQ(o.samples, 0u);
  EXPECT_EQ(o.path, (std::vector<State>{{5, 5}, {9, 8}}));
}

TEST(RrtPlan, EmptyMapAlwaysSucceeds) {
  const GridMap m = test::empty_map(64, 64);
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    RrtParams p;
    p.seed = seed;
    UniformSampler s(m, seed);
    const PlanOutcome o = rrt_plan(m, {2.5, 3.5}, {60.5, 58.5}, s, p);
    expect_valid_path(m, o, {2.5, 3.5}, {60.5, 58.5});
    ASSERT_LE(o.tree.size(), o.samples + 2);
    expect_tree_invariants(m, o.tree);
  }
}

TEST(RrtPlan, WalledOffGoalExhaustsBudget) {
  const GridMap m = walled_goal_map();
  RrtParams p;
  p.step = 2;
  p.goal_radius = 2;
  p.max_samples = 500;
  UniformSampler s(m, 3);
  const PlanOutcome o = rrt_plan(m, {1.5, 1.5}, {12.5, 3.5}, s, p);
  EXPECT_FALSE(o.success);
  EXPECT_EQ(o.samples, 500u);
  EXPECT_TRUE(o.path.empty());
}

TEST(RrtPlan, InfeasibleEndpointsAreErrors) {
  const GridMap m = walled_goal_map();
  UniformSampler s(m, 3);
  EXPECT_THROW(rrt_plan(m, {10.5, 2.5}, {1.5, 1.5}, s, RrtParams{}), Error);
  EXPECT_THROW(rrt_plan(m, {1.5, 1.5}, {-1, 1}, s, RrtParams{}), Error);
  RrtParams bad;
  bad.step = 0;
  EXPECT_THROW(rrt_plan(m, {1.5, 1.5}, {2.5, 1.5}, s, bad), Error);
}

TEST(RrtPlan, Deterministic) {
  const GridMap m = test::random_map(48, 48, 0.15, 4);
  State a{0.5, 0.5}, b{47.5, 47.5};
  for (int r = 0; r < 48 && !is_free(m, a); ++r) a = {0.5, r + 0.5};
  for (int r = 47; r >= 0 && !is_free(m, b); --r) b = {47.5, r + 0.5};
  RrtParams p;
  p.step = 3;
  p.goal_radius = 3;
  p.seed = 12;
  UniformSampler s1(m, 12), s2(m, 12);
  const PlanOutcome o1 = rrt_plan(m, a, b, s1, p);
  const PlanOutcome o2 = rrt_plan(m, a, b, s2, p);
  EXPECT_EQ(o1.success, o2.success);
  EXPECT_EQ(o1.samples, o2.samples);
  EXPECT_EQ(o1.path, o2.path);
  EXPECT_EQ(o1.tree.nodes, o2.tree.nodes);
  EXPECT_EQ(o1.tree.parent, o2.tree.parent);
}

TEST(RrtPlan, PureUniformHybridEqualsPlainUniform) {
  const GridMap m = test::random_map(64, 64, 0.1, 5);
  const Mask full = Mask::full(64, 64);
  const State a{1.5, 1.5}, b{62.5, 60.5};
  if (!is_free(m, a) || !is_free(m, b)) GTEST_SKIP();
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    RrtParams p;
    p.seed = seed;
    HybridSampler h(m, full, full, {1.0, 0.0, seed});
    UniformSampler u(m, seed);
    const PlanOutcome oh = rrt_plan(m, a, b, h, p);
    const PlanOutcome ou = rrt_plan(m, a, b, u, p);
    ASSERT_EQ(oh.path, ou.path);
    ASSERT_EQ(oh.samples, ou.samples);
    ASSERT_EQ(oh.tree.nodes, ou.tree.nodes);
  }
}

TEST(RrtStar, EmptyMapNearStraightLine) {
  const GridMap m = test::empty_map(64, 64);
  const State a{4.5, 6.5}, b{58.5, 50.5};
  std::vector<double> ratios;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    RrtParams p;
    p.max_samples = 5000;
    p.seed = seed;
    const PlanOutcome o = rrt_star_plan(m, a, b, p);
    ASSERT_TRUE(o.success);
    ratios.push_back(path_cost(o.path) / distance(a, b));
  }
  std::nth_element(ratios.begin(), ratios.begin() + 50, ratios.end());
  EXPECT_LE(ratios[50], 1.05);
}

TEST(RrtStar, BestCostTraceIsMonotone) {
  const GridMap m = test::random_map(64, 64, 0.1, 6);
  const State a{0.5, 0.5}, b{63.5, 63.5};
  if (!is_free(m, a) || !is_free(m, b)) GTEST_SKIP();
  RrtParams p;
  p.max_samples = 4000;
  p.seed = 3;
  const PlanOutcome o = rrt_star_plan(m, a, b, p);
  ASSERT_TRUE(o.success);
  ASSERT_FALSE(o.best_cost_trace.empty());
  for (std::size_t k = 1; k < o.best_cost_trace.size(); ++k) {
    ASSERT_LT(o.best_cost_trace[k].second, o.best_cost_trace[k - 1].second);
    ASSERT_GT(o.best_cost_trace[k].first, o.best_cost_trace[k - 1].first);
  }
  EXPECT_NEAR(o.best_cost_trace.back().second, path_cost(o.path), 1e-6);
  expect_valid_path(m, o, a, b);
  expect_tree_invariants(m, o.tree);
  EXPECT_EQ(o.samples, 4000u);
}

TEST(RrtStar, SingleGapWallPassesThroughGap) {
  // Vertical wall at columns 30..33 with a gap at rows 40..47.
  std::vector<std::uint8_t> occ(64 * 64, 0);
  for (int r = 0; r < 64; ++r) {
    if (r >= 40 && r < 48) continue;
    for (int c = 30; c < 34; ++c) occ[r * 64 + c] = 1;
  }
  const GridMap m(64, 64, occ);
  RrtParams p;
  p.max_samples = 4000;
  p.seed = 8;
  const PlanOutcome o = rrt_star_plan(m, {10.5, 10.5}, {54.5, 10.5}, p);
  ASSERT_TRUE(o.success);
  bool crossed = false;
  for (std::size_t i = 1; i < o.path.size(); ++i) {
    const State &u = o.path[i - 1], &v = o.path[i];
    if ((u.x < 32) != (v.x < 32)) {
      const double t = (32 - u.x) / (v.x - u.x);
      const double y = u.y + t * (v.y - u.y);
      EXPECT_GE(y, 40.0);
      EXPECT_LE(y, 48.0);
      crossed = true;
    }
  }
  EXPECT_TRUE(crossed);
}

TEST(RrtStar, Deterministic) {
  const GridMap m = test::empty_map(32, 32);
  RrtParams p;
  p.max_samples = 1000;
  p.seed = 5;
  const PlanOutcome a = rrt_star_plan(m, {1, 1}, {30, 30}, p);
  const PlanOutcome b = rrt_star_plan(m, {1, 1}, {30, 30}, p);
  EXPECT_EQ(a.path, b.path);
  EXPECT_EQ(a.best_cost_trace, b.best_cost_trace);
}
