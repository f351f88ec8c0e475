#include <gtest/gtest.h>

#include "mgpf/config.hpp"
#include "mgpf/dataset.hpp"
#include "mgpf/mgpf.hpp"
#include "test_support.hpp"

using namespace mgpf;

namespace {

Scenario generated_scenario(std::uint64_t seed, int goals, bool dense = false) {
  DatasetConfig cfg = dense ? DatasetConfig::dense_small() : DatasetConfig{};
  cfg.seed = seed;
  Rng rng(seed);
  return generate_scenario(generate_map(cfg, rng), goals, rng, cfg, "g" + std::to_string(seed));
}

PlanResult plan(const Scenario& s, ProviderKind kind, std::uint64_t seed) {
  PlannerConfig cfg;
  cfg.set_seed(seed);
  return pke_rrt(s, *make_provider(kind, cfg.oracle), cfg.sampler, cfg.rrt);
}

}  // namespace

TEST(PathCost, Examples) {
  EXPECT_EQ(path_cost({{1, 1}}), 0.0);
  EXPECT_DOUBLE_EQ(path_cost({{0, 0}, {3, 4}}), 5.0);
}

TEST(PathCost, MatchesFineResampling) {
  Rng rng(1);
  for (int t = 0; t < 20; ++t) {
    std::vector<State> poly;
    for (int i = 0; i < 10; ++i) poly.push_back({rng.uniform(0, 100), rng.uniform(0, 100)});
    // Arc length of each segment resampled at 1000 points sums to the same value.
    double fine = 0.0;
    for (std::size_t i = 1; i < poly.size(); ++i) {
      State prev = poly[i - 1];
      for (int k = 1; k <= 1000; ++k) {
        const double u = k / 1000.0;
        const State cur{poly[i - 1].x + u * (poly[i].x - poly[i - 1].x), poly[i - 1].y + u * (poly[i].y - poly[i - 1].y)};
        fine += distance(prev, cur);
        prev = cur;
      }
    }
    EXPECT_NEAR(path_cost(poly), fine, 1e-9);
  }
}

TEST(PkeRrt, SingleGoalEmptyMap) {
  Scenario s;
  s.map = test::empty_map(256, 256);
  s.origin = {20.5, 30.5};
  s.goals = {{200.5, 180.5}};
  const PlanResult r = plan(s, ProviderKind::oracle, 3);
  ASSERT_TRUE(r.success);
  EXPECT_EQ(r.order.sequence, (std::vector<std::size_t>{0, 1, 0}));
  EXPECT_EQ(r.legs.size(), 2u);
  const double l2 = 2 * distance(s.origin, s.goals[0]);
  EXPECT_GE(r.total_length, l2 - 1e-9);
  EXPECT_LE(r.total_length, 1.2 * l2);
  EXPECT_TRUE(validate_solution(s, r).ok());
}

TEST(PkeRrt, EuclideanProviderEqualsPerLegUniformRrt) {
  const Scenario s = generated_scenario(11, 5);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const PlanResult r = plan(s, ProviderKind::euclidean, seed);
    const WeightedGraph g = build_graph(s, EuclideanProvider());
    ASSERT_EQ(r.order, solve_tsp(g, derive_seed(seed, 0)));
    RrtParams rp;
    std::size_t legs_run = 0;
    for (std::size_t k = 0; k + 1 < r.order.sequence.size(); ++k) {
      rp.seed = leg_seed(seed, k);
      UniformSampler u(s.map, leg_seed(seed, k));
      const PlanOutcome o = rrt_plan(s.map, s.vertex(r.order.sequence[k]), s.vertex(r.order.sequence[k + 1]), u, rp);
      ASSERT_EQ(o.samples, r.samples_per_leg[k]);
      ++legs_run;
      if (!o.success) break;
      ASSERT_EQ(o.path, r.legs[k]);
    }
    EXPECT_EQ(legs_run, r.samples_per_leg.size());
  }
}

TEST(PkeRrt, FullMasksWithK1OneEqualUniformRrt) {
  const Scenario s = generated_scenario(12, 4);
  WeightedGraph g = build_graph(s, EuclideanProvider());
  const std::size_t pairs = g.size() * (g.size() - 1) / 2;
  const Mask full = Mask::full(s.map.width(), s.map.height());
  g.set_priors(std::vector<PriorKnowledge>(pairs, PriorKnowledge{full, full, 0.0}));
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const PlanResult guided = plan_with_graph(s, g, {1.0, 0.0, seed}, RrtParams{.seed = seed});
    const PlanResult plain = plan(s, ProviderKind::euclidean, seed);
    ASSERT_EQ(guided.legs, plain.legs);
    ASSERT_EQ(guided.samples_per_leg, plain.samples_per_leg);
  }
}

TEST(PkeRrt, OracleBeatsEuclideanOnSamples) {
  const Scenario s = generated_scenario(21, 5);
  double pke = 0, euc = 0;
  int pke_ok = 0;
  const WeightedGraph go = build_graph(s, OracleProvider(OracleOptions{}));
  const WeightedGraph ge = build_graph(s, EuclideanProvider());
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    PlannerConfig cfg;
    cfg.set_seed(seed);
    const PlanResult a = plan_with_graph(s, go, cfg.sampler, cfg.rrt);
    const PlanResult b = plan_with_graph(s, ge, cfg.sampler, cfg.rrt);
    pke += a.total_samples();
    euc += b.total_samples();
    pke_ok += a.success && validate_solution(s, a).ok();
  }
  EXPECT_EQ(pke_ok, 100);
  EXPECT_LT(pke, euc);
}

TEST(PkeRrt, SeedFixesResultAndLengthBoundedByEuclideanTour) {
  const Scenario s = generated_scenario(13, 6);
  const PlanResult a = plan(s, ProviderKind::oracle, 42);
  const PlanResult b = plan(s, ProviderKind::oracle, 42);
  EXPECT_EQ(result_to_json(a, "x", false), result_to_json(b, "x", false));
  ASSERT_TRUE(a.success);
  const WeightedGraph ge = build_graph(s, EuclideanProvider());
  EXPECT_GE(a.total_length, tour_cost(ge, a.order) - 1e-9);
}

TEST(PkeRrt, LegFailureKeepsPartialLegs) {
  Scenario s;
  s.map = load_map(std::string_view(
      "................\n"
      "................\n"
      "................\n"
      "................"));
  s.origin = {1.5, 1.5};
  s.goals = {{14.5, 2.5}};
  WeightedGraph g = build_graph(s, EuclideanProvider());
  RrtParams rp;
  rp.step = 0.5;
  rp.goal_radius = 0.5;
  rp.max_samples = 3;
  rp.goal_bias = 0.0;
  const PlanResult r = plan_with_graph(s, g, {}, rp);
  EXPECT_FALSE(r.success);
  EXPECT_EQ(r.samples_per_leg.size(), 1u);
  EXPECT_EQ(r.samples_per_leg[0], 3u);
  EXPECT_TRUE(r.legs.empty());
  EXPECT_FALSE(validate_solution(s, r).ok());
}

TEST(Validate, ValidResultPassesAllChecks) {
  const Scenario s = generated_scenario(14, 5);
  const PlanResult r = plan(s, ProviderKind::oracle, 1);
  const ValidationReport rep = validate_solution(s, r);
  for (const auto& c : rep.checks) EXPECT_TRUE(c.passed) << c.name << ": " << c.detail;
  EXPECT_TRUE(rep.ok());
}

TEST(Validate, SkippedGoalFailsDegree) {
  const Scenario s = generated_scenario(15, 4);
  PlanResult r = plan(s, ProviderKind::oracle, 1);
  ASSERT_TRUE(r.success);
  // Merge legs 1 and 2 so the vertex between them is no longer a leg endpoint.
  std::vector<State> merged = r.legs[1];
  merged.insert(merged.end(), r.legs[2].begin() + 1, r.legs[2].end());
  r.legs.erase(r.legs.begin() + 1, r.legs.begin() + 3);
  r.legs.insert(r.legs.begin() + 1, merged);
  const ValidationReport rep = validate_solution(s, r);
  EXPECT_FALSE(rep.ok());
  EXPECT_FALSE(rep.find("degree")->passed);
}

TEST(Validate, TwoDisjointCyclesFailSingleCycle) {
  Scenario s;
  s.map = test::empty_map(32, 32);
  s.origin = {2, 2};
  s.goals = {{10, 2}, {20, 20}, {28, 20}};
  PlanResult r;
  r.success = true;
  // 0 -> 1 -> 0 and 2 -> 3 -> 2.
  r.legs = {{s.vertex(0), s.vertex(1)}, {s.vertex(1), s.vertex(0)}, {s.vertex(2), s.vertex(3)}, {s.vertex(3), s.vertex(2)}};
  r.order.sequence = {0, 1, 0, 2, 3};
  for (const auto& l : r.legs) r.total_length += path_cost(l);
  const ValidationReport rep = validate_solution(s, r);
  EXPECT_TRUE(rep.find("degree")->passed);
  EXPECT_FALSE(rep.find("single_cycle")->passed);
  EXPECT_FALSE(rep.ok());
}

TEST(Validate, CollisionAndClosureFaults) {
  Scenario s;
  s.map = load_map(std::string_view("........\n...#....\n........\n........"));
  s.origin = {0.5, 1.5};
  s.goals = {{6.5, 1.5}};
  PlanResult r;
  r.success = true;
  r.order.sequence = {0, 1, 0};
  r.legs = {{s.origin, s.goals[0]}, {s.goals[0], {6.5, 3.5}, {0.5, 3.5}, s.origin}};
  for (const auto& l : r.legs) r.total_length += path_cost(l);
  ValidationReport rep = validate_solution(s, r);
  EXPECT_FALSE(rep.find("collision_free")->passed);
  EXPECT_TRUE(rep.find("closure")->passed);

  r.legs[1].back() = {0.5, 2.5};
  rep = validate_solution(s, r);
  EXPECT_FALSE(rep.find("closure")->passed);
}

TEST(ResultJson, RoundTrip) {
  const Scenario s = generated_scenario(16, 3);
  const PlanResult r = plan(s, ProviderKind::oracle, 5);
  const PlanResult back = result_from_json(result_to_json(r, s.name, true));
  EXPECT_EQ(back.legs, r.legs);
  EXPECT_EQ(back.order, r.order);
  EXPECT_EQ(back.samples_per_leg, r.samples_per_leg);
  EXPECT_EQ(back.total_length, r.total_length);
  EXPECT_EQ(back.provider, "oracle");
  EXPECT_FALSE(result_to_json(r, s.name, false).contains("wall_time"));
}

TEST(PlannerConfig, JsonOverlayAndRejection) {
  PlannerConfig c = planner_config_from_json(nlohmann::json{{"k1", 0.8}, {"k2", 0.1}, {"budget", 500}, {"seed", 9}});
  EXPECT_EQ(c.sampler.k1, 0.8);
  EXPECT_EQ(c.rrt.max_samples, 500u);
  EXPECT_EQ(c.sampler.seed, 9u);
  EXPECT_EQ(c.rrt.seed, 9u);
  EXPECT_EQ(c.rrt.step, RrtParams{}.step);
  EXPECT_THROW(planner_config_from_json(nlohmann::json{{"k3", 1}}), Error);
  EXPECT_THROW(planner_config_from_json(nlohmann::json{{"k1", 0.1}, {"k2", 0.5}}), Error);
  const PlannerConfig d = planner_config_from_json(to_json(c));
  EXPECT_EQ(to_json(d), to_json(c));
}
