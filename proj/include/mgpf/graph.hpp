#pragma once
// Complete weighted graph over origin + goals and the visiting-order solvers.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "mgpf/gridmap.hpp"
#include "mgpf/heuristic.hpp"
#include "mgpf/random.hpp"
#include "mgpf/types.hpp"

namespace mgpf {

/// Vertex 0 is the origin, 1..N the goals. Weights are symmetric with a zero
/// diagonal; priors (when kept) are stored once per unordered pair.
class WeightedGraph {
 public:
  WeightedGraph() = default;

  WeightedGraph(std::vector<State> vertices, std::vector<std::vector<double>> weights)
      : vertices_(std::move(vertices)), weights_(std::move(weights)) {
    const std::size_t n = vertices_.size();
    if (n < 2) throw Error("graph needs at least two vertices");
    if (weights_.size() != n) throw Error("weight matrix size does not match vertex count");
    for (std::size_t i = 0; i < n; ++i) {
      if (weights_[i].size() != n) throw Error("weight matrix is not square");
      if (weights_[i][i] != 0.0) throw Error("weight matrix diagonal must be zero");
      for (std::size_t j = 0; j < n; ++j) {
        if (!(weights_[i][j] >= 0.0)) throw Error("weights must be non-negative");
        if (weights_[i][j] != weights_[j][i]) throw Error("weight matrix must be symmetric");
      }
    }
  }

  std::size_t size() const { return vertices_.size(); }
  std::size_t goal_count() const { return vertices_.size() - 1; }
  const std::vector<State>& vertices() const { return vertices_; }
  const std::vector<std::vector<double>>& weights() const { return weights_; }
  double weight(std::size_t i, std::size_t j) const { return weights_[i][j]; }

  bool has_priors() const { return !priors_.empty(); }
  const PriorKnowledge& prior(std::size_t i, std::size_t j) const {
    if (priors_.empty()) throw Error("graph has no stored priors");
    return priors_.at(pair_index(i, j));
  }
  void set_priors(std::vector<PriorKnowledge> priors) {
    if (priors.size() != size() * (size() - 1) / 2) throw Error("prior count does not match pair count");
    priors_ = std::move(priors);
  }

  /// Index of the unordered pair {i, j} in row-major upper-triangle order.
  std::size_t pair_index(std::size_t i, std::size_t j) const {
    if (i == j) throw Error("no prior for a vertex with itself");
    if (i > j) std::swap(i, j);
    const std::size_t n = size();
    return i * (2 * n - i - 1) / 2 + (j - i - 1);
  }

 private:
  std::vector<State> vertices_;
  std::vector<std::vector<double>> weights_;
  std::vector<PriorKnowledge> priors_;
};

/// Closed sequence 0, p1, ..., pN, 0.
struct VisitingOrder {
  std::vector<std::size_t> sequence;

  friend bool operator==(const VisitingOrder&, const VisitingOrder&) = default;
};

inline bool is_valid_order(const VisitingOrder& order, std::size_t vertex_count) {
  const auto& s = order.sequence;
  if (s.size() != vertex_count + 1 || s.front() != 0 || s.back() != 0) return false;
  std::vector<char> seen(vertex_count, 0);
  for (std::size_t k = 1; k + 1 < s.size(); ++k) {
    if (s[k] == 0 || s[k] >= vertex_count || seen[s[k]]) return false;
    seen[s[k]] = 1;
  }
  return true;
}

/// Averages (w_ij + w_ji) / 2 and zeroes the diagonal.
inline std::vector<std::vector<double>> symmetrize(std::vector<std::vector<double>> w) {
  for (std::size_t i = 0; i < w.size(); ++i) {
    w[i][i] = 0.0;
    for (std::size_t j = i + 1; j < w.size(); ++j) {
      const double avg = 0.5 * (w[i][j] + w[j][i]);
      w[i][j] = w[j][i] = avg;
    }
  }
  return w;
}

/// Queries every unordered pair once (both orders for directional providers)
/// and keeps the priors for the planner.
inline WeightedGraph build_graph(const Scenario& scenario, const PriorProvider& provider) {
  const std::size_t n = scenario.vertex_count();
  std::vector<std::vector<double>> w(n, std::vector<double>(n, 0.0));
  std::vector<PriorKnowledge> priors;
  priors.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      PriorKnowledge pk;
      try {
        pk = provider.query(scenario, i, j);
        w[i][j] = pk.weight;
        w[j][i] = provider.directional() ? provider.query(scenario, j, i).weight : pk.weight;
      } catch (const Error& e) {
        const std::string what = e.what();
        const std::string pair = "(" + std::to_string(i) + "," + std::to_string(j) + ")";
        if (what.find("unreachable") != std::string::npos) throw Error("unreachable pair " + pair + ": " + what);
        throw Error("pair " + pair + ": " + what);
      }
      priors.push_back(std::move(pk));
    }
  }
  WeightedGraph g(scenario.vertices(), symmetrize(std::move(w)));
  g.set_priors(std::move(priors));
  return g;
}

inline double tour_cost(const WeightedGraph& graph, const VisitingOrder& order) {
  double cost = 0.0;
  for (std::size_t k = 1; k < order.sequence.size(); ++k) {
    cost += graph.weight(order.sequence[k - 1], order.sequence[k]);
  }
  return cost;
}

inline constexpr std::size_t kExactTspMaxVertices = 13;

/// Held-Karp over subsets of the goals; the tour starts and ends at vertex 0.
inline VisitingOrder solve_tsp_exact(const WeightedGraph& graph) {
  const std::size_t n = graph.size();
  if (n > kExactTspMaxVertices) {
    throw Error("exact TSP limited to " + std::to_string(kExactTspMaxVertices) + " vertices (got " +
                std::to_string(n) + "); use solve_tsp_2opt");
  }
  const std::size_t m = n - 1;  // goals, bit k <-> vertex k + 1
  const std::size_t subsets = std::size_t{1} << m;
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> dp(subsets * m, kInf);
  std::vector<std::int8_t> prev(subsets * m, -1);
  auto at = [m](std::size_t set, std::size_t k) { return set * m + k; };

  for (std::size_t k = 0; k < m; ++k) dp[at(std::size_t{1} << k, k)] = graph.weight(0, k + 1);
  for (std::size_t set = 1; set < subsets; ++set) {
    for (std::size_t k = 0; k < m; ++k) {
      if (!(set & (std::size_t{1} << k))) continue;
      const double base = dp[at(set, k)];
      if (base == kInf) continue;
      for (std::size_t next = 0; next < m; ++next) {
        if (set & (std::size_t{1} << next)) continue;
        const std::size_t nset = set | (std::size_t{1} << next);
        const double c = base + graph.weight(k + 1, next + 1);
        if (c < dp[at(nset, next)]) {
          dp[at(nset, next)] = c;
          prev[at(nset, next)] = static_cast<std::int8_t>(k);
        }
      }
    }
  }

  const std::size_t full = subsets - 1;
  double best = kInf;
  std::size_t last = 0;
  for (std::size_t k = 0; k < m; ++k) {
    const double c = dp[at(full, k)] + graph.weight(k + 1, 0);
    if (c < best) {
      best = c;
      last = k;
    }
  }

  std::vector<std::size_t> rev;
  std::size_t set = full;
  std::int64_t k = static_cast<std::int64_t>(last);
  while (k >= 0) {
    rev.push_back(static_cast<std::size_t>(k) + 1);
    const std::int8_t p = prev[at(set, static_cast<std::size_t>(k))];
    set &= ~(std::size_t{1} << k);
    k = p;
  }
  VisitingOrder order;
  order.sequence.push_back(0);
  order.sequence.insert(order.sequence.end(), rev.rbegin(), rev.rend());
  order.sequence.push_back(0);
  return order;
}

namespace detail {

inline std::vector<std::size_t> nearest_neighbor_tour(const WeightedGraph& g) {
  const std::size_t n = g.size();
  std::vector<char> used(n, 0);
  std::vector<std::size_t> seq{0};
  used[0] = 1;
  for (std::size_t step = 1; step < n; ++step) {
    const std::size_t cur = seq.back();
    std::size_t best = n;
    for (std::size_t j = 1; j < n; ++j) {
      if (!used[j] && (best == n || g.weight(cur, j) < g.weight(cur, best))) best = j;
    }
    used[best] = 1;
    seq.push_back(best);
  }
  seq.push_back(0);
  return seq;
}

/// First-improvement 2-opt on a closed sequence with fixed endpoints.
inline void two_opt(const WeightedGraph& g, std::vector<std::size_t>& seq, std::vector<double>* trace) {
  const std::size_t last = seq.size() - 1;
  bool improved = true;
  while (improved) {
    improved = false;
    for (std::size_t i = 1; i + 1 < last && !improved; ++i) {
      for (std::size_t k = i + 1; k < last; ++k) {
        const double delta = g.weight(seq[i - 1], seq[k]) + g.weight(seq[i], seq[k + 1]) -
                             g.weight(seq[i - 1], seq[i]) - g.weight(seq[k], seq[k + 1]);
        if (delta < -1e-12) {
          std::reverse(seq.begin() + static_cast<std::ptrdiff_t>(i), seq.begin() + static_cast<std::ptrdiff_t>(k) + 1);
          improved = true;
          if (trace) trace->push_back(tour_cost(g, VisitingOrder{seq}));
          break;
        }
      }
    }
  }
}

}  // namespace detail

/// Nearest-neighbour construction plus 2-opt; further restarts begin from
/// random permutations. Returns the best tour over all restarts. If `trace`
/// is given it receives the cost after construction and after every move of
/// each restart.
inline VisitingOrder solve_tsp_2opt(const WeightedGraph& graph, std::size_t restarts, Rng& rng,
                                    std::vector<double>* trace = nullptr) {
  restarts = std::max<std::size_t>(restarts, 1);
  std::vector<std::size_t> best;
  double best_cost = std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < restarts; ++r) {
    std::vector<std::size_t> seq;
    if (r == 0) {
      seq = detail::nearest_neighbor_tour(graph);
    } else {
      seq.resize(graph.size() + 1);
      std::iota(seq.begin(), seq.end() - 1, std::size_t{0});
      seq.back() = 0;
      for (std::size_t i = graph.size() - 1; i > 1; --i) {
        const std::size_t j = 1 + rng.below(i);
        std::swap(seq[i], seq[j]);
      }
    }
    if (trace) trace->push_back(tour_cost(graph, VisitingOrder{seq}));
    detail::two_opt(graph, seq, trace);
    const double c = tour_cost(graph, VisitingOrder{seq});
    if (c < best_cost) {
      best_cost = c;
      best = seq;
    }
  }
  return VisitingOrder{best};
}

/// Exact when the graph is small enough, otherwise 2-opt with restarts.
inline VisitingOrder solve_tsp(const WeightedGraph& graph, std::uint64_t seed, std::size_t restarts = 16) {
  if (graph.size() <= kExactTspMaxVertices) return solve_tsp_exact(graph);
  Rng rng(seed);
  return solve_tsp_2opt(graph, restarts, rng);
}

inline nlohmann::json graph_to_json(const WeightedGraph& g) {
  nlohmann::json j;
  j["vertices"] = nlohmann::json::array();
  for (const auto& v : g.vertices()) j["vertices"].push_back({v.x, v.y});
  j["weights"] = g.weights();
  return j;
}

inline WeightedGraph graph_from_json(const nlohmann::json& j) {
  std::vector<State> vertices;
  for (const auto& v : j.at("vertices")) vertices.push_back({v.at(0).get<double>(), v.at(1).get<double>()});
  return WeightedGraph(std::move(vertices), j.at("weights").get<std::vector<std::vector<double>>>());
}

}  // namespace mgpf
