#pragma once
// Prior knowledge per vertex pair: promising region, guideline and weight
// estimate. Three providers: a grid-search oracle, trainer-exported files,
// and a Euclidean baseline with empty masks.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <memory>
#include <numbers>
#include <queue>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "mgpf/gridmap.hpp"
#include "mgpf/sampler.hpp"
#include "mgpf/types.hpp"

namespace mgpf {

struct PriorKnowledge {
  Mask region;
  Mask guideline;
  double weight = 0.0;
};

enum class ProviderKind { oracle, files, euclidean };

inline std::string to_string(ProviderKind k) {
  switch (k) {
    case ProviderKind::oracle: return "oracle";
    case ProviderKind::files: return "files";
    case ProviderKind::euclidean: return "euclidean";
  }
  return "?";
}

inline ProviderKind parse_provider_kind(const std::string& s) {
  if (s == "oracle") return ProviderKind::oracle;
  if (s == "files") return ProviderKind::files;
  if (s == "euclidean") return ProviderKind::euclidean;
  throw Error("unknown provider kind: " + s);
}

struct GridPath {
  std::vector<Cell> cells;
  double length = 0.0;  // sum of step costs, 1 per axis step and sqrt(2) per diagonal
};

/// 8-connected A* from a's cell to b's cell. Diagonal moves are only allowed
/// when both adjacent axis cells are free.
inline GridPath astar_shortest_path(const GridMap& map, const State& a, const State& b) {
  if (!is_free(map, a) || !is_free(map, b)) throw Error("infeasible vertex: endpoint not in free space");
  const Cell start = GridMap::cell_of(a);
  const Cell goal = GridMap::cell_of(b);
  const int w = map.width();
  const std::size_t n = map.cell_count();
  constexpr double kDiag = std::numbers::sqrt2;

  auto octile = [&](int r, int c) {
    const int dr = std::abs(r - goal.row);
    const int dc = std::abs(c - goal.col);
    return std::max(dr, dc) + (kDiag - 1.0) * std::min(dr, dc);
  };

  std::vector<double> g(n, std::numeric_limits<double>::infinity());
  std::vector<std::int32_t> parent(n, -1);
  std::vector<std::uint8_t> closed(n, 0);

  struct Entry {
    double f;
    double g;
    std::uint32_t idx;
  };
  // Lowest f first; among equal f prefer deeper nodes, then lower index.
  auto worse = [](const Entry& x, const Entry& y) {
    if (x.f != y.f) return x.f > y.f;
    if (x.g != y.g) return x.g < y.g;
    return x.idx > y.idx;
  };
  std::priority_queue<Entry, std::vector<Entry>, decltype(worse)> open(worse);

  const auto start_idx = static_cast<std::uint32_t>(map.index(start.row, start.col));
  const auto goal_idx = static_cast<std::uint32_t>(map.index(goal.row, goal.col));
  g[start_idx] = 0.0;
  open.push({octile(start.row, start.col), 0.0, start_idx});

  static constexpr int kDr[8] = {-1, 1, 0, 0, -1, -1, 1, 1};
  static constexpr int kDc[8] = {0, 0, -1, 1, -1, 1, -1, 1};

  while (!open.empty()) {
    const Entry cur = open.top();
    open.pop();
    if (closed[cur.idx]) continue;
    closed[cur.idx] = 1;
    if (cur.idx == goal_idx) break;
    const int r = static_cast<int>(cur.idx / w);
    const int c = static_cast<int>(cur.idx % w);
    for (int k = 0; k < 8; ++k) {
      const int nr = r + kDr[k];
      const int nc = c + kDc[k];
      if (!map.in_bounds(nr, nc) || map.occupied(nr, nc)) continue;
      const bool diagonal = k >= 4;
      if (diagonal && (map.occupied(nr, c) || map.occupied(r, nc))) continue;
      const auto nidx = static_cast<std::uint32_t>(map.index(nr, nc));
      if (closed[nidx]) continue;
      const double ng = g[cur.idx] + (diagonal ? kDiag : 1.0);
      if (ng < g[nidx]) {
        g[nidx] = ng;
        parent[nidx] = static_cast<std::int32_t>(cur.idx);
        open.push({ng + octile(nr, nc), ng, nidx});
      }
    }
  }

  if (!closed[goal_idx]) throw Error("unreachable: no grid path between the endpoints");

  GridPath path;
  int axis = 0;
  int diag = 0;
  for (std::int32_t i = static_cast<std::int32_t>(goal_idx); i != -1; i = parent[i]) {
    path.cells.push_back({i / w, i % w});
  }
  std::reverse(path.cells.begin(), path.cells.end());
  for (std::size_t i = 1; i < path.cells.size(); ++i) {
    const bool d = path.cells[i].row != path.cells[i - 1].row && path.cells[i].col != path.cells[i - 1].col;
    (d ? diag : axis) += 1;
  }
  path.length = axis + diag * kDiag;
  return path;
}

/// Chebyshev dilation: a bit is set iff some original bit lies within L-inf
/// distance `radius`.
inline Mask dilate_mask(const Mask& mask, int radius) {
  if (radius < 0) throw Error("dilation radius must be >= 0");
  if (radius == 0) return mask;
  const int w = mask.width();
  const int h = mask.height();
  const auto& src = mask.bits();
  std::vector<std::uint8_t> horiz(src.size(), 0);
  std::vector<int> prefix(static_cast<std::size_t>(std::max(w, h)) + 1);
  for (int r = 0; r < h; ++r) {
    prefix[0] = 0;
    for (int c = 0; c < w; ++c) prefix[c + 1] = prefix[c] + src[static_cast<std::size_t>(r) * w + c];
    for (int c = 0; c < w; ++c) {
      const int lo = std::max(0, c - radius);
      const int hi = std::min(w - 1, c + radius);
      horiz[static_cast<std::size_t>(r) * w + c] = prefix[hi + 1] - prefix[lo] > 0;
    }
  }
  std::vector<std::uint8_t> out(src.size(), 0);
  for (int c = 0; c < w; ++c) {
    prefix[0] = 0;
    for (int r = 0; r < h; ++r) prefix[r + 1] = prefix[r] + horiz[static_cast<std::size_t>(r) * w + c];
    for (int r = 0; r < h; ++r) {
      const int lo = std::max(0, r - radius);
      const int hi = std::min(h - 1, r + radius);
      out[static_cast<std::size_t>(r) * w + c] = prefix[hi + 1] - prefix[lo] > 0;
    }
  }
  return Mask(w, h, std::move(out));
}

inline Mask cells_to_mask(const std::vector<Cell>& cells, int width, int height) {
  std::vector<std::uint8_t> bits(static_cast<std::size_t>(width) * height, 0);
  for (const auto& c : cells) bits[static_cast<std::size_t>(c.row) * width + c.col] = 1;
  return Mask(width, height, std::move(bits));
}

struct OracleOptions {
  int region_radius = 10;
  int guide_radius = 1;
};

/// Labels from the grid-optimal path: guideline and region are that path
/// dilated by the two radii. The weight is the grid path length, floored at
/// the straight-line distance since continuous endpoints need not sit on
/// cell centers.
inline PriorKnowledge oracle_prior(const GridMap& map, const State& a, const State& b, const OracleOptions& opt = {}) {
  if (opt.guide_radius < 0 || opt.region_radius < opt.guide_radius) {
    throw Error("oracle radii must satisfy 0 <= guide_radius <= region_radius");
  }
  GridPath path = astar_shortest_path(map, a, b);
  Mask core = cells_to_mask(path.cells, map.width(), map.height());
  PriorKnowledge pk;
  pk.guideline = dilate_mask(core, opt.guide_radius);
  pk.region = dilate_mask(core, opt.region_radius);
  pk.weight = std::max(path.length, distance(a, b));
  return pk;
}

inline PriorKnowledge euclidean_prior(const GridMap& map, const State& a, const State& b) {
  return {Mask::empty(map.width(), map.height()), Mask::empty(map.width(), map.height()), distance(a, b)};
}

inline std::string pair_key(std::size_t i, std::size_t j) {
  if (i > j) std::swap(i, j);
  return std::to_string(i) + "_" + std::to_string(j);
}

/// Reads region_<i>_<j>.png, guide_<i>_<j>.png and weights.json["<i>_<j>"]
/// (i < j) from `dir`. The guideline is clipped to the region.
inline PriorKnowledge files_prior(const std::filesystem::path& dir, const GridMap& map, std::size_t i, std::size_t j) {
  const std::string key = pair_key(i, j);
  const auto weights_path = dir / "weights.json";
  if (!std::filesystem::exists(weights_path)) throw Error("missing weights: " + weights_path.string());
  nlohmann::json weights;
  {
    std::ifstream in(weights_path);
    try {
      weights = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw Error(std::string("malformed weights.json: ") + e.what());
    }
  }
  if (!weights.contains(key) || !weights[key].is_number()) throw Error("missing weights entry " + key);
  const double w = weights[key].get<double>();
  if (!(w >= 0.0) || !std::isfinite(w)) throw Error("negative weight for pair " + key);

  Mask region = load_mask_png(dir / ("region_" + key + ".png"));
  Mask guide = load_mask_png(dir / ("guide_" + key + ".png"));
  if (!region.matches(map) || !guide.matches(map)) {
    throw Error("dimension mismatch: masks for pair " + key + " are not " + std::to_string(map.width()) + "x" +
                std::to_string(map.height()));
  }
  return {region, guide.intersect(region), w};
}

/// Writes priors in the layout files_prior reads. `priors` is indexed by the
/// pairs in `pairs`.
inline void write_files_priors(const std::filesystem::path& dir,
                               const std::vector<std::pair<std::size_t, std::size_t>>& pairs,
                               const std::vector<PriorKnowledge>& priors) {
  std::filesystem::create_directories(dir);
  nlohmann::json weights = nlohmann::json::object();
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const std::string key = pair_key(pairs[k].first, pairs[k].second);
    save_mask_png(priors[k].region, dir / ("region_" + key + ".png"));
    save_mask_png(priors[k].guideline, dir / ("guide_" + key + ".png"));
    weights[key] = priors[k].weight;
  }
  std::ofstream out(dir / "weights.json");
  if (!out) throw Error("cannot write weights.json");
  out << weights.dump(2) << '\n';
}

/// Source of prior knowledge for vertex pairs of a scenario.
class PriorProvider {
 public:
  virtual ~PriorProvider() = default;
  virtual ProviderKind kind() const = 0;
  /// Prior for the pair (i, j) of scenario vertices (0 = origin).
  virtual PriorKnowledge query(const Scenario& s, std::size_t i, std::size_t j) const = 0;
  /// True when the weight estimate for (i, j) may differ from (j, i).
  virtual bool directional() const { return false; }
};

class OracleProvider final : public PriorProvider {
 public:
  explicit OracleProvider(OracleOptions opt = {}) : opt_(opt) {}
  ProviderKind kind() const override { return ProviderKind::oracle; }
  PriorKnowledge query(const Scenario& s, std::size_t i, std::size_t j) const override {
    return oracle_prior(s.map, s.vertex(i), s.vertex(j), opt_);
  }

 private:
  OracleOptions opt_;
};

class EuclideanProvider final : public PriorProvider {
 public:
  ProviderKind kind() const override { return ProviderKind::euclidean; }
  PriorKnowledge query(const Scenario& s, std::size_t i, std::size_t j) const override {
    return euclidean_prior(s.map, s.vertex(i), s.vertex(j));
  }
};

class FilesProvider final : public PriorProvider {
 public:
  explicit FilesProvider(std::filesystem::path dir) : dir_(std::move(dir)) {}
  ProviderKind kind() const override { return ProviderKind::files; }
  PriorKnowledge query(const Scenario& s, std::size_t i, std::size_t j) const override {
    return files_prior(dir_, s.map, i, j);
  }
  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
};

inline std::unique_ptr<PriorProvider> make_provider(ProviderKind kind, const OracleOptions& oracle = {},
                                                    const std::filesystem::path& masks_dir = {}) {
  switch (kind) {
    case ProviderKind::oracle: return std::make_unique<OracleProvider>(oracle);
    case ProviderKind::euclidean: return std::make_unique<EuclideanProvider>();
    case ProviderKind::files:
      if (masks_dir.empty()) throw Error("files provider needs a masks directory");
      return std::make_unique<FilesProvider>(masks_dir);
  }
  throw Error("unknown provider kind");
}

}  // namespace mgpf
