#pragma once
// Synthetic training/benchmark data: random rectangle maps, reachable vertex
// pairs with region/guideline/weight labels, and multi-goal scenarios.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mgpf/gridmap.hpp"
#include "mgpf/heuristic.hpp"
#include "mgpf/png_io.hpp"
#include "mgpf/random.hpp"
#include "mgpf/sampler.hpp"

namespace mgpf {

struct DatasetConfig {
  int map_size = 256;
  int rect_count_min = 6;
  int rect_count_max = 14;
  int rect_size_min = 12;
  int rect_size_max = 56;
  int map_count = 10;
  int pair_count = 1;          // labeled pairs per map
  int region_radius = 10;
  int guide_radius = 1;
  int dot_size = 5;            // vertex squares burned into the input image
  double min_free_fraction = 0.3;
  double min_pair_distance = 16.0;
  int vertex_clearance = 2;    // free Chebyshev neighbourhood around each vertex
  int gap_fill_radius = 1;     // free gaps up to 2*r cells wide between obstacles are closed
  std::uint64_t seed = 1;

  // Optional multi-goal scenarios written by gen-dataset.
  int scenario_count = 0;
  int goals_min = 5;
  int goals_max = 7;

  void validate() const {
    if (map_size < 2) throw Error("config error: map_size must be >= 2");
    if (rect_count_min < 0 || rect_count_max < rect_count_min) throw Error("config error: bad rect_count range");
    if (rect_size_min < 1 || rect_size_max < rect_size_min || rect_size_max >= map_size) {
      throw Error("config error: rect sizes must satisfy 1 <= min <= max < map_size");
    }
    if (region_radius < guide_radius || guide_radius < 0) throw Error("config error: need 0 <= guide_radius <= region_radius");
    if (!(min_free_fraction >= 0.0 && min_free_fraction <= 1.0)) throw Error("config error: min_free_fraction");
    if (map_count < 0 || pair_count < 0 || scenario_count < 0) throw Error("config error: negative count");
    if (goals_min < 1 || goals_max < goals_min) throw Error("config error: bad goal range");
    if (gap_fill_radius < 0) throw Error("config error: gap_fill_radius must be >= 0");
  }

  /// Dense small rectangles: harder maps unlike the default family.
  static DatasetConfig dense_small() {
    DatasetConfig c;
    c.rect_count_min = 150;
    c.rect_count_max = 250;
    c.rect_size_min = 3;
    c.rect_size_max = 10;
    return c;
  }
};

inline nlohmann::json to_json(const DatasetConfig& c) {
  return {{"map_size", c.map_size},
          {"rect_count_min", c.rect_count_min},
          {"rect_count_max", c.rect_count_max},
          {"rect_size_min", c.rect_size_min},
          {"rect_size_max", c.rect_size_max},
          {"map_count", c.map_count},
          {"pair_count", c.pair_count},
          {"region_radius", c.region_radius},
          {"guide_radius", c.guide_radius},
          {"dot_size", c.dot_size},
          {"min_free_fraction", c.min_free_fraction},
          {"min_pair_distance", c.min_pair_distance},
          {"vertex_clearance", c.vertex_clearance},
          {"gap_fill_radius", c.gap_fill_radius},
          {"seed", c.seed},
          {"scenario_count", c.scenario_count},
          {"goals_min", c.goals_min},
          {"goals_max", c.goals_max}};
}

inline DatasetConfig dataset_config_from_json(const nlohmann::json& j) {
  DatasetConfig c = j.value("preset", std::string("default")) == "dense_small" ? DatasetConfig::dense_small()
                                                                              : DatasetConfig{};
  static const char* known[] = {"preset", "map_size", "rect_count_min", "rect_count_max", "rect_size_min",
                                "rect_size_max", "map_count", "pair_count", "region_radius", "guide_radius",
                                "dot_size", "min_free_fraction", "min_pair_distance", "vertex_clearance", "gap_fill_radius", "seed",
                                "scenario_count", "goals_min", "goals_max"};
  for (const auto& [key, _] : j.items()) {
    if (std::find(std::begin(known), std::end(known), key) == std::end(known)) {
      throw Error("config error: unknown key \"" + key + "\"");
    }
  }
  c.map_size = j.value("map_size", c.map_size);
  c.rect_count_min = j.value("rect_count_min", c.rect_count_min);
  c.rect_count_max = j.value("rect_count_max", c.rect_count_max);
  c.rect_size_min = j.value("rect_size_min", c.rect_size_min);
  c.rect_size_max = j.value("rect_size_max", c.rect_size_max);
  c.map_count = j.value("map_count", c.map_count);
  c.pair_count = j.value("pair_count", c.pair_count);
  c.region_radius = j.value("region_radius", c.region_radius);
  c.guide_radius = j.value("guide_radius", c.guide_radius);
  c.dot_size = j.value("dot_size", c.dot_size);
  c.min_free_fraction = j.value("min_free_fraction", c.min_free_fraction);
  c.min_pair_distance = j.value("min_pair_distance", c.min_pair_distance);
  c.vertex_clearance = j.value("vertex_clearance", c.vertex_clearance);
  c.gap_fill_radius = j.value("gap_fill_radius", c.gap_fill_radius);
  c.seed = j.value("seed", c.seed);
  c.scenario_count = j.value("scenario_count", c.scenario_count);
  c.goals_min = j.value("goals_min", c.goals_min);
  c.goals_max = j.value("goals_max", c.goals_max);
  c.validate();
  return c;
}

/// Morphological closing of the obstacle set with a (2r+1)^2 square. Cells
/// outside the map count as obstacles, so gaps against the border close too.
inline GridMap close_gaps(const GridMap& map, int radius) {
  if (radius <= 0) return map;
  std::vector<std::uint8_t> occ(map.occupancy().begin(), map.occupancy().end());
  const Mask grown = dilate_mask(Mask(map.width(), map.height(), occ), radius);
  std::vector<std::uint8_t> free_bits(grown.bits().size());
  for (std::size_t i = 0; i < free_bits.size(); ++i) free_bits[i] = !grown.bits()[i];
  const Mask free_grown = dilate_mask(Mask(map.width(), map.height(), std::move(free_bits)), radius);
  for (std::size_t i = 0; i < occ.size(); ++i) occ[i] = !free_grown.bits()[i];
  return GridMap(map.width(), map.height(), std::move(occ));
}

/// Stamps random axis-aligned rectangles onto a free grid, closes gaps of at
/// most 2 * gap_fill_radius cells, and retries until at least
/// min_free_fraction of the cells stay free.
inline GridMap generate_map(const DatasetConfig& config, Rng& rng) {
  config.validate();
  const int n = config.map_size;
  for (int attempt = 0; attempt < 100; ++attempt) {
    GridMap map(n, n);
    const int count = config.rect_count_min +
                      static_cast<int>(rng.below(static_cast<std::uint64_t>(config.rect_count_max - config.rect_count_min) + 1));
    for (int k = 0; k < count; ++k) {
      const auto span = static_cast<std::uint64_t>(config.rect_size_max - config.rect_size_min) + 1;
      const int w = config.rect_size_min + static_cast<int>(rng.below(span));
      const int h = config.rect_size_min + static_cast<int>(rng.below(span));
      const int x = static_cast<int>(rng.below(static_cast<std::uint64_t>(n - w) + 1));
      const int y = static_cast<int>(rng.below(static_cast<std::uint64_t>(n - h) + 1));
      for (int r = y; r < y + h; ++r) {
        for (int c = x; c < x + w; ++c) map.set_occupied(r, c, true);
      }
    }
    map = close_gaps(map, config.gap_fill_radius);
    if (static_cast<double>(map.free_cell_count()) >= config.min_free_fraction * static_cast<double>(map.cell_count())) {
      return map;
    }
  }
  throw Error("config error: 100 consecutive maps fell below the free-space fraction");
}

/// Cell center of a random free cell whose Chebyshev neighbourhood of
/// `clearance` cells is free as well.
inline std::optional<State> random_vertex(const GridMap& map, Rng& rng, int clearance, int attempts = 1000) {
  for (int t = 0; t < attempts; ++t) {
    const int r = static_cast<int>(rng.below(static_cast<std::uint64_t>(map.height())));
    const int c = static_cast<int>(rng.below(static_cast<std::uint64_t>(map.width())));
    bool ok = true;
    for (int dr = -clearance; dr <= clearance && ok; ++dr) {
      for (int dc = -clearance; dc <= clearance && ok; ++dc) {
        ok = map.in_bounds(r + dr, c + dc) && !map.occupied(r + dr, c + dc);
      }
    }
    if (ok) return cell_center({r, c});
  }
  return std::nullopt;
}

struct LabeledPair {
  std::size_t map_index = 0;
  State a;
  State b;
  PriorKnowledge labels;
};

/// Draws a free, mutually reachable pair and labels it with the oracle.
inline LabeledPair generate_labeled_pair(const GridMap& map, Rng& rng, const DatasetConfig& config,
                                         std::size_t map_index = 0) {
  const OracleOptions opt{config.region_radius, config.guide_radius};
  for (int t = 0; t < 1000; ++t) {
    const auto a = random_vertex(map, rng, config.vertex_clearance, 1);
    const auto b = random_vertex(map, rng, config.vertex_clearance, 1);
    if (!a || !b || distance(*a, *b) < config.min_pair_distance) continue;
    try {
      return {map_index, *a, *b, oracle_prior(map, *a, *b, opt)};
    } catch (const Error&) {
      continue;  // unreachable
    }
  }
  throw Error("no reachable pair found in 1000 draws");
}

struct Dataset {
  DatasetConfig config;
  std::vector<GridMap> maps;
  std::vector<LabeledPair> records;
};

inline Dataset generate_dataset(const DatasetConfig& config) {
  config.validate();
  Dataset ds{config, {}, {}};
  Rng rng(config.seed);
  for (int m = 0; m < config.map_count; ++m) {
    ds.maps.push_back(generate_map(config, rng));
    for (int p = 0; p < config.pair_count; ++p) {
      ds.records.push_back(generate_labeled_pair(ds.maps.back(), rng, config, ds.maps.size() - 1));
    }
  }
  return ds;
}

/// Origin plus goal_count goals, all pairwise reachable and separated by at
/// least config.min_pair_distance.
inline Scenario generate_scenario(const GridMap& map, int goal_count, Rng& rng, const DatasetConfig& config,
                                  std::string name) {
  Scenario s;
  s.map = map;
  s.name = std::move(name);
  std::vector<State> picked;
  for (int t = 0; t < 20000 && static_cast<int>(picked.size()) < goal_count + 1; ++t) {
    const auto v = random_vertex(map, rng, config.vertex_clearance, 1);
    if (!v) continue;
    bool ok = true;
    for (const auto& p : picked) ok = ok && distance(p, *v) >= config.min_pair_distance;
    if (ok && !picked.empty()) {
      try {
        astar_shortest_path(map, picked.front(), *v);
      } catch (const Error&) {
        ok = false;
      }
    }
    if (ok) picked.push_back(*v);
  }
  if (static_cast<int>(picked.size()) < goal_count + 1) throw Error("could not place scenario vertices");
  s.origin = picked.front();
  s.goals.assign(picked.begin() + 1, picked.end());
  validate_scenario(s);
  return s;
}

namespace detail {

inline std::string sample_stem(std::size_t k) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%06zu", k);
  return buf;
}

inline void burn_dot(png::RgbImage& img, const State& s, int size, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  const Cell c = GridMap::cell_of(s);
  const int lo = -(size / 2);
  for (int dr = lo; dr < lo + size; ++dr) {
    for (int dc = lo; dc < lo + size; ++dc) {
      const int rr = c.row + dr, cc = c.col + dc;
      if (rr < 0 || cc < 0 || rr >= img.height || cc >= img.width) continue;
      auto* px = img.pixel(rr, cc);
      px[0] = r;
      px[1] = g;
      px[2] = b;
    }
  }
}

}  // namespace detail

/// Input image: map in black/white with the pair burned in as a red (first
/// vertex) and a blue (second vertex) square.
inline png::RgbImage input_image(const GridMap& map, const State& a, const State& b, int dot_size) {
  png::RgbImage img{map.width(), map.height(), std::vector<std::uint8_t>(map.cell_count() * 3)};
  for (int r = 0; r < map.height(); ++r) {
    for (int c = 0; c < map.width(); ++c) {
      const std::uint8_t v = map.occupied(r, c) ? 0 : 255;
      auto* px = img.pixel(r, c);
      px[0] = px[1] = px[2] = v;
    }
  }
  detail::burn_dot(img, a, dot_size, 255, 0, 0);
  detail::burn_dot(img, b, dot_size, 0, 0, 255);
  return img;
}

/// Layout: maps/, regions/, guides/ (one PNG each per record), labels.json,
/// manifest.json. Returns the manifest.
inline nlohmann::json export_dataset(const Dataset& ds, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir / "maps");
  fs::create_directories(dir / "regions");
  fs::create_directories(dir / "guides");
  nlohmann::json samples = nlohmann::json::array();
  for (std::size_t k = 0; k < ds.records.size(); ++k) {
    const auto& rec = ds.records[k];
    const GridMap& map = ds.maps.at(rec.map_index);
    const std::string stem = detail::sample_stem(k) + ".png";
    const auto img = input_image(map, rec.a, rec.b, ds.config.dot_size);
    png::write_file(dir / "maps" / stem, png::encode(img.rgb.data(), img.width, img.height, false));
    save_mask_png(rec.labels.region, dir / "regions" / stem);
    save_mask_png(rec.labels.guideline, dir / "guides" / stem);
    samples.push_back({{"id", k},
                       {"map_index", rec.map_index},
                       {"a", {rec.a.x, rec.a.y}},
                       {"b", {rec.b.x, rec.b.y}},
                       {"weight", rec.labels.weight},
                       {"image", "maps/" + stem},
                       {"region", "regions/" + stem},
                       {"guide", "guides/" + stem}});
  }
  nlohmann::json labels{{"samples", samples}};
  {
    std::ofstream out(dir / "labels.json");
    if (!out) throw Error("cannot write labels.json");
    out << labels.dump(2) << '\n';
  }
  nlohmann::json manifest{{"config", to_json(ds.config)},
                          {"seed", ds.config.seed},
                          {"count", ds.records.size()},
                          {"map_count", ds.maps.size()},
                          {"layout", {{"maps", "maps/"}, {"regions", "regions/"}, {"guides", "guides/"}, {"labels", "labels.json"}}}};
  std::ofstream out(dir / "manifest.json");
  if (!out) throw Error("cannot write manifest.json");
  out << manifest.dump(2) << '\n';
  return manifest;
}

/// Reads record k back from an exported dataset (masks via the mask file
/// contract, so the guideline is clipped to the region as files_prior does).
inline LabeledPair load_record(const std::filesystem::path& dir, std::size_t k) {
  std::ifstream in(dir / "labels.json");
  if (!in) throw Error("missing labels.json in " + dir.string());
  const auto labels = nlohmann::json::parse(in);
  const auto& s = labels.at("samples").at(k);
  LabeledPair rec;
  rec.map_index = s.at("map_index").get<std::size_t>();
  rec.a = {s.at("a").at(0).get<double>(), s.at("a").at(1).get<double>()};
  rec.b = {s.at("b").at(0).get<double>(), s.at("b").at(1).get<double>()};
  rec.labels.weight = s.at("weight").get<double>();
  rec.labels.region = load_mask_png(dir / s.at("region").get<std::string>());
  rec.labels.guideline = load_mask_png(dir / s.at("guide").get<std::string>()).intersect(rec.labels.region);
  return rec;
}

}  // namespace mgpf
