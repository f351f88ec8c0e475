#pragma once
// Multi-goal planner: visiting order from the prior-weighted graph, then one
// prior-guided RRT per leg, assembled into a closed path.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mgpf/geometry.hpp"
#include "mgpf/graph.hpp"
#include "mgpf/gridmap.hpp"
#include "mgpf/heuristic.hpp"
#include "mgpf/rrt.hpp"
#include "mgpf/sampler.hpp"

namespace mgpf {

/// Sum of Euclidean segment lengths.
inline double path_cost(const std::vector<State>& path) {
  double total = 0.0;
  for (std::size_t i = 1; i < path.size(); ++i) total += distance(path[i - 1], path[i]);
  return total;
}

struct PlanResult {
  VisitingOrder order;
  std::vector<std::vector<State>> legs;
  std::vector<std::size_t> samples_per_leg;
  double total_length = 0.0;
  double wall_time = 0.0;   // order computation + leg planning, seconds
  double prior_time = 0.0;  // provider queries, seconds
  bool success = false;
  std::string provider;

  std::size_t total_samples() const {
    std::size_t n = 0;
    for (auto s : samples_per_leg) n += s;
    return n;
  }
};

/// Seed used for leg k of a run with base seed `seed`.
inline std::uint64_t leg_seed(std::uint64_t seed, std::size_t leg) { return derive_seed(seed, leg + 1); }

/// Plans every leg of the visiting order over a prebuilt graph. Legs run in
/// order; the first failing leg stops the run (its partial legs are kept).
inline PlanResult plan_with_graph(const Scenario& scenario, const WeightedGraph& graph,
                                  const SamplerParams& sampler_params, const RrtParams& rrt_params) {
  sampler_params.validate();
  rrt_params.validate();
  const auto t0 = std::chrono::steady_clock::now();

  PlanResult result;
  result.order = solve_tsp(graph, derive_seed(sampler_params.seed, 0));
  const GridMap& map = scenario.map;
  const Mask no_mask = Mask::empty(map.width(), map.height());

  result.success = true;
  for (std::size_t k = 0; k + 1 < result.order.sequence.size(); ++k) {
    const std::size_t a = result.order.sequence[k];
    const std::size_t b = result.order.sequence[k + 1];
    const PriorKnowledge* pk = graph.has_priors() ? &graph.prior(a, b) : nullptr;

    SamplerParams sp = sampler_params;
    sp.seed = leg_seed(sampler_params.seed, k);
    RrtParams rp = rrt_params;
    rp.seed = leg_seed(rrt_params.seed, k);

    HybridSampler sampler(map, pk ? pk->region : no_mask, pk ? pk->guideline : no_mask, sp);
    PlanOutcome leg = rrt_plan(map, scenario.vertex(a), scenario.vertex(b), sampler, rp);
    result.samples_per_leg.push_back(leg.samples);
    if (!leg.success) {
      result.success = false;
      break;
    }
    result.total_length += path_cost(leg.path);
    result.legs.push_back(std::move(leg.path));
  }
  result.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

/// Full pipeline: provider queries for all pairs, visiting order, legs.
inline PlanResult pke_rrt(const Scenario& scenario, const PriorProvider& provider, const SamplerParams& sampler_params,
                          const RrtParams& rrt_params) {
  const auto t0 = std::chrono::steady_clock::now();
  WeightedGraph graph = build_graph(scenario, provider);
  const double prior_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  PlanResult r = plan_with_graph(scenario, graph, sampler_params, rrt_params);
  r.prior_time = prior_time;
  r.provider = to_string(provider.kind());
  return r;
}

struct ValidationCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct ValidationReport {
  std::vector<ValidationCheck> checks;

  bool ok() const {
    for (const auto& c : checks) {
      if (!c.passed) return false;
    }
    return !checks.empty();
  }
  const ValidationCheck* find(const std::string& name) const {
    for (const auto& c : checks) {
      if (c.name == name) return &c;
    }
    return nullptr;
  }
};

/// Checks the closed-tour constraints on a plan: closure at the origin, one
/// incoming and one outgoing leg per vertex, a single cycle through all
/// vertices, and collision-free legs.
inline ValidationReport validate_solution(const Scenario& scenario, const PlanResult& result) {
  ValidationReport report;
  auto add = [&](std::string name, bool ok, std::string detail = {}) {
    report.checks.push_back({std::move(name), ok, std::move(detail)});
  };
  const std::size_t n = scenario.vertex_count();
  const auto vertices = scenario.vertices();
  constexpr double kTol = 1e-9;

  auto vertex_at = [&](const State& s) -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < n; ++i) {
      if (distance(s, vertices[i]) <= kTol) return i;
    }
    return std::nullopt;
  };

  add("success_flag", result.success);
  add("leg_count", result.legs.size() == n,
      std::to_string(result.legs.size()) + " legs for " + std::to_string(n) + " vertices");

  bool nonempty = !result.legs.empty();
  for (const auto& leg : result.legs) nonempty = nonempty && leg.size() >= 2;
  add("legs_nonempty", nonempty);
  if (!nonempty) return report;

  add("closure", distance(result.legs.front().front(), scenario.origin) <= kTol &&
                     distance(result.legs.back().back(), scenario.origin) <= kTol,
      "path must start and end at the origin");

  bool continuous = true;
  for (std::size_t k = 1; k < result.legs.size(); ++k) {
    continuous = continuous && distance(result.legs[k - 1].back(), result.legs[k].front()) <= kTol;
  }
  add("continuity", continuous, "consecutive legs share endpoints");

  std::vector<int> in(n, 0), out(n, 0);
  std::vector<std::optional<std::size_t>> next(n);
  bool endpoints_ok = true;
  for (const auto& leg : result.legs) {
    const auto s = vertex_at(leg.front());
    const auto e = vertex_at(leg.back());
    if (!s || !e || *s == *e) {
      endpoints_ok = false;
      continue;
    }
    ++out[*s];
    ++in[*e];
    next[*s] = *e;
  }
  add("endpoints_are_vertices", endpoints_ok, "every leg joins two distinct vertices");

  std::string bad;
  for (std::size_t i = 0; i < n; ++i) {
    if (in[i] != 1 || out[i] != 1) {
      bad += " v" + std::to_string(i) + "(in=" + std::to_string(in[i]) + ",out=" + std::to_string(out[i]) + ")";
    }
  }
  add("degree", bad.empty(), bad.empty() ? "one incoming and one outgoing leg per vertex" : bad);

  // Follow successors from the origin; a single tour returns after exactly n hops.
  std::size_t hops = 0;
  std::size_t cur = 0;
  std::vector<char> seen(n, 0);
  bool single = true;
  do {
    if (!next[cur] || seen[cur]) {
      single = false;
      break;
    }
    seen[cur] = 1;
    cur = *next[cur];
    ++hops;
  } while (cur != 0 && hops <= n);
  single = single && cur == 0 && hops == n;
  add("single_cycle", single, "cycle from the origin covers " + std::to_string(hops) + " of " + std::to_string(n));

  bool order_ok = is_valid_order(result.order, n) && result.legs.size() + 1 == result.order.sequence.size();
  for (std::size_t k = 0; order_ok && k < result.legs.size(); ++k) {
    order_ok = vertex_at(result.legs[k].front()) == result.order.sequence[k] &&
               vertex_at(result.legs[k].back()) == result.order.sequence[k + 1];
  }
  add("order_consistent", order_ok, "legs follow the visiting order");

  std::string collisions;
  for (std::size_t k = 0; k < result.legs.size(); ++k) {
    const auto& leg = result.legs[k];
    for (std::size_t i = 1; i < leg.size(); ++i) {
      if (!segment_collision_free(scenario.map, leg[i - 1], leg[i])) {
        collisions += " leg" + std::to_string(k) + ":seg" + std::to_string(i - 1);
      }
    }
  }
  add("collision_free", collisions.empty(), collisions);

  double total = 0.0;
  for (const auto& leg : result.legs) total += path_cost(leg);
  add("total_length", std::abs(total - result.total_length) <= 1e-6 * std::max(1.0, total));
  return report;
}

inline nlohmann::json result_to_json(const PlanResult& r, const std::string& scenario_name, bool with_timing) {
  nlohmann::json j;
  j["scenario"] = scenario_name;
  j["provider"] = r.provider;
  j["success"] = r.success;
  j["order"] = r.order.sequence;
  j["legs"] = nlohmann::json::array();
  for (const auto& leg : r.legs) {
    nlohmann::json pts = nlohmann::json::array();
    for (const auto& s : leg) pts.push_back({s.x, s.y});
    j["legs"].push_back(std::move(pts));
  }
  j["samples_per_leg"] = r.samples_per_leg;
  j["total_samples"] = r.total_samples();
  j["total_length"] = r.total_length;
  if (with_timing) {
    j["wall_time"] = r.wall_time;
    j["prior_time"] = r.prior_time;
  }
  return j;
}

inline PlanResult result_from_json(const nlohmann::json& j) {
  PlanResult r;
  r.provider = j.value("provider", "");
  r.success = j.at("success").get<bool>();
  r.order.sequence = j.at("order").get<std::vector<std::size_t>>();
  for (const auto& leg : j.at("legs")) {
    std::vector<State> pts;
    for (const auto& p : leg) pts.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
    r.legs.push_back(std::move(pts));
  }
  r.samples_per_leg = j.at("samples_per_leg").get<std::vector<std::size_t>>();
  r.total_length = j.at("total_length").get<double>();
  r.wall_time = j.value("wall_time", 0.0);
  r.prior_time = j.value("prior_time", 0.0);
  return r;
}

}  // namespace mgpf
