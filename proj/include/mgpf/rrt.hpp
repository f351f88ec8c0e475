#pragma once
// Single-query tree planners: RRT with a pluggable sampler, and RRT*.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "mgpf/geometry.hpp"
#include "mgpf/gridmap.hpp"
#include "mgpf/random.hpp"
#include "mgpf/sampler.hpp"
#include "mgpf/types.hpp"

namespace mgpf {

struct Tree {
  static constexpr std::int32_t kNoParent = -1;

  std::vector<State> nodes;
  std::vector<std::int32_t> parent;

  std::size_t size() const { return nodes.size(); }
  std::size_t add(const State& s, std::int32_t p) {
    nodes.push_back(s);
    parent.push_back(p);
    return nodes.size() - 1;
  }
};

/// Root-to-leaf states.
inline std::vector<State> extract_path(const Tree& tree, std::size_t leaf) {
  if (leaf >= tree.size()) throw Error("leaf index out of range");
  std::vector<State> path;
  for (std::int32_t i = static_cast<std::int32_t>(leaf); i != Tree::kNoParent; i = tree.parent[i]) {
    path.push_back(tree.nodes[i]);
    if (path.size() > tree.size()) throw Error("cycle in tree parent links");
  }
  std::reverse(path.begin(), path.end());
  return path;
}

struct RrtParams {
  double step = 8.0;
  double goal_radius = 8.0;
  std::size_t max_samples = 2000;
  double goal_bias = 0.05;
  double rewire_radius = 16.0;  // RRT* only
  std::uint64_t seed = 0;

  void validate() const {
    if (!(step > 0.0)) throw Error("invalid rrt params: step must be > 0");
    if (!(goal_radius > 0.0)) throw Error("invalid rrt params: goal_radius must be > 0");
    if (max_samples < 1) throw Error("invalid rrt params: max_samples must be >= 1");
    if (!(goal_bias >= 0.0 && goal_bias < 1.0)) throw Error("invalid rrt params: goal_bias must be in [0, 1)");
    if (!(rewire_radius > 0.0)) throw Error("invalid rrt params: rewire_radius must be > 0");
  }
};

struct PlanOutcome {
  bool success = false;
  std::vector<State> path;
  std::size_t samples = 0;
  Tree tree;
  /// RRT* only: (sample count, best cost) whenever the best cost changes.
  std::vector<std::pair<std::size_t, double>> best_cost_trace;
};

/// Uniform bucket grid for nearest / radius queries over tree nodes.
class NodeIndex {
 public:
  NodeIndex(double width, double height, double bucket)
      : bucket_(bucket),
        cols_(std::max(1, static_cast<int>(std::ceil(width / bucket)))),
        rows_(std::max(1, static_cast<int>(std::ceil(height / bucket)))),
        buckets_(static_cast<std::size_t>(cols_) * rows_) {}

  void insert(std::uint32_t id, const State& s) { buckets_[bucket_of(s)].push_back(id); }

  void move(std::uint32_t id, const State& from, const State& to) {
    auto& b = buckets_[bucket_of(from)];
    b.erase(std::find(b.begin(), b.end(), id));
    insert(id, to);
  }

  /// Nearest by L2; ties go to the lowest id. Index must be non-empty.
  std::uint32_t nearest(const std::vector<State>& pts, const State& q) const {
    const int qc = clamp_col(q.x);
    const int qr = clamp_row(q.y);
    double best_d2 = std::numeric_limits<double>::infinity();
    std::uint32_t best = std::numeric_limits<std::uint32_t>::max();
    const int max_ring = std::max(cols_, rows_);
    for (int ring = 0; ring <= max_ring; ++ring) {
      for (int r = qr - ring; r <= qr + ring; ++r) {
        if (r < 0 || r >= rows_) continue;
        const bool edge_row = (r == qr - ring || r == qr + ring);
        for (int c = qc - ring; c <= qc + ring; c += (edge_row || ring == 0) ? 1 : 2 * ring) {
          if (c < 0 || c >= cols_) continue;
          for (std::uint32_t id : buckets_[static_cast<std::size_t>(r) * cols_ + c]) {
            const double d2 = squared_distance(pts[id], q);
            if (d2 < best_d2 || (d2 == best_d2 && id < best)) {
              best_d2 = d2;
              best = id;
            }
          }
        }
      }
      // Anything outside this ring is at least ring * bucket away.
      const double bound = ring * bucket_;
      if (best != std::numeric_limits<std::uint32_t>::max() && best_d2 < bound * bound) break;
    }
    return best;
  }

  void within(const std::vector<State>& pts, const State& q, double radius, std::vector<std::uint32_t>& out) const {
    out.clear();
    const int c0 = clamp_col(q.x - radius), c1 = clamp_col(q.x + radius);
    const int r0 = clamp_row(q.y - radius), r1 = clamp_row(q.y + radius);
    const double r2 = radius * radius;
    for (int r = r0; r <= r1; ++r) {
      for (int c = c0; c <= c1; ++c) {
        for (std::uint32_t id : buckets_[static_cast<std::size_t>(r) * cols_ + c]) {
          if (squared_distance(pts[id], q) <= r2) out.push_back(id);
        }
      }
    }
    std::sort(out.begin(), out.end());
  }

 private:
  int clamp_col(double x) const { return std::clamp(static_cast<int>(std::floor(x / bucket_)), 0, cols_ - 1); }
  int clamp_row(double y) const { return std::clamp(static_cast<int>(std::floor(y / bucket_)), 0, rows_ - 1); }
  std::size_t bucket_of(const State& s) const { return static_cast<std::size_t>(clamp_row(s.y)) * cols_ + clamp_col(s.x); }

  double bucket_;
  int cols_;
  int rows_;
  std::vector<std::vector<std::uint32_t>> buckets_;
};

namespace detail {

inline void check_endpoints(const GridMap& map, const State& start, const State& goal) {
  if (!is_free(map, start)) throw Error("infeasible vertex: start not in free space");
  if (!is_free(map, goal)) throw Error("infeasible vertex: goal not in free space");
}

inline bool connects_to_goal(const GridMap& map, const State& s, const State& goal, double radius) {
  return squared_distance(s, goal) <= radius * radius && segment_collision_free(map, s, goal);
}

}  // namespace detail

/// RRT. Each iteration draws one sample (the goal itself with probability
/// goal_bias, otherwise from `sample`), extends the nearest node by at most
/// one step and keeps the new node if the edge is collision-free. Succeeds
/// once a node is within goal_radius of the goal with a free direct segment;
/// the goal is appended as the last state.
template <typename SampleFn>
PlanOutcome rrt_plan(const GridMap& map, const State& start, const State& goal, SampleFn&& sample,
                     const RrtParams& params) {
  params.validate();
  detail::check_endpoints(map, start, goal);

  PlanOutcome out;
  out.tree.add(start, Tree::kNoParent);
  if (detail::connects_to_goal(map, start, goal, params.goal_radius)) {
    out.tree.add(goal, 0);
    out.success = true;
    out.path = {start, goal};
    return out;
  }

  Rng bias_rng(derive_seed(params.seed, 0x60a1));
  NodeIndex index(map.width(), map.height(), params.step);
  index.insert(0, start);

  for (std::size_t s = 1; s <= params.max_samples; ++s) {
    State target;
    if (params.goal_bias > 0.0 && bias_rng.uniform01() < params.goal_bias) {
      target = goal;
    } else {
      target = sample();
    }
    const std::uint32_t near = index.nearest(out.tree.nodes, target);
    const State from = out.tree.nodes[near];
    const State next = steer(from, target, params.step);
    if (next == from || !segment_collision_free(map, from, next)) continue;
    const auto id = static_cast<std::uint32_t>(out.tree.add(next, static_cast<std::int32_t>(near)));
    index.insert(id, next);
    if (detail::connects_to_goal(map, next, goal, params.goal_radius)) {
      std::size_t leaf = id;
      if (!(next == goal)) leaf = out.tree.add(goal, static_cast<std::int32_t>(id));
      out.success = true;
      out.samples = s;
      out.path = extract_path(out.tree, leaf);
      return out;
    }
  }
  out.samples = params.max_samples;
  return out;
}

/// RRT* with choose-parent and rewiring. The neighbourhood radius is
/// min(rewire_radius, gamma * sqrt(log n / n)) with gamma scaled to the free
/// area. Runs the whole budget and returns the cheapest goal connection.
inline PlanOutcome rrt_star_plan(const GridMap& map, const State& start, const State& goal, const RrtParams& params) {
  params.validate();
  detail::check_endpoints(map, start, goal);

  PlanOutcome out;
  out.tree.add(start, Tree::kNoParent);
  if (detail::connects_to_goal(map, start, goal, params.goal_radius)) {
    out.tree.add(goal, 0);
    out.success = true;
    out.path = {start, goal};
    out.best_cost_trace.emplace_back(0, distance(start, goal));
    return out;
  }

  const double free_area = static_cast<double>(map.free_cell_count());
  const double gamma = 2.0 * std::sqrt(1.5 * free_area / std::numbers::pi);

  Rng bias_rng(derive_seed(params.seed, 0x60a1));
  UniformSampler sampler(map, params.seed);
  NodeIndex index(map.width(), map.height(), params.step);
  index.insert(0, start);

  auto& nodes = out.tree.nodes;
  auto& parent = out.tree.parent;
  std::vector<double> cost{0.0};
  std::vector<std::vector<std::uint32_t>> children(1);
  std::vector<std::uint32_t> goal_links;
  std::vector<std::uint32_t> near;
  std::vector<std::pair<double, std::uint32_t>> candidates;
  std::vector<std::uint32_t> stack;
  double best = std::numeric_limits<double>::infinity();
  std::uint32_t best_leaf = 0;

  for (std::size_t s = 1; s <= params.max_samples; ++s) {
    const State target =
        (params.goal_bias > 0.0 && bias_rng.uniform01() < params.goal_bias) ? goal : sampler();
    const std::uint32_t nearest = index.nearest(nodes, target);
    const State next = steer(nodes[nearest], target, params.step);
    if (next == nodes[nearest] || !segment_collision_free(map, nodes[nearest], next)) continue;

    const double n = static_cast<double>(nodes.size()) + 1.0;
    const double radius = std::min(params.rewire_radius, gamma * std::sqrt(std::log(n) / n));
    index.within(nodes, next, radius, near);

    // Cheapest collision-free parent among the neighbourhood (nearest is a fallback).
    candidates.clear();
    for (std::uint32_t id : near) candidates.emplace_back(cost[id] + distance(nodes[id], next), id);
    std::sort(candidates.begin(), candidates.end());
    std::uint32_t par = nearest;
    double par_cost = cost[nearest] + distance(nodes[nearest], next);
    for (const auto& [c, id] : candidates) {
      if (c >= par_cost) break;
      if (segment_collision_free(map, nodes[id], next)) {
        par = id;
        par_cost = c;
        break;
      }
    }

    const auto id = static_cast<std::uint32_t>(out.tree.add(next, static_cast<std::int32_t>(par)));
    cost.push_back(par_cost);
    children.emplace_back();
    children[par].push_back(id);
    index.insert(id, next);

    for (std::uint32_t x : near) {
      if (x == par) continue;
      const double c = par_cost + distance(next, nodes[x]);
      if (c + 1e-12 >= cost[x] || !segment_collision_free(map, next, nodes[x])) continue;
      auto& siblings = children[parent[x]];
      siblings.erase(std::find(siblings.begin(), siblings.end(), x));
      parent[x] = static_cast<std::int32_t>(id);
      children[id].push_back(x);
      const double delta = cost[x] - c;
      stack.assign(1, x);
      while (!stack.empty()) {
        const std::uint32_t v = stack.back();
        stack.pop_back();
        cost[v] -= delta;
        stack.insert(stack.end(), children[v].begin(), children[v].end());
      }
    }

    if (detail::connects_to_goal(map, next, goal, params.goal_radius)) goal_links.push_back(id);
    for (std::uint32_t g : goal_links) {
      const double c = cost[g] + distance(nodes[g], goal);
      if (c < best - 1e-12) {
        best = c;
        best_leaf = g;
      }
    }
    if (!goal_links.empty() && (out.best_cost_trace.empty() || out.best_cost_trace.back().second != best)) {
      out.best_cost_trace.emplace_back(s, best);
    }
  }

  out.samples = params.max_samples;
  if (goal_links.empty()) return out;
  out.success = true;
  out.path = extract_path(out.tree, best_leaf);
  if (!(out.path.back() == goal)) out.path.push_back(goal);
  return out;
}

}  // namespace mgpf
