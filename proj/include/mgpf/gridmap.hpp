#pragma once
// Occupancy grid world model, scenarios and their file formats.
//
// Cell (r, c) covers the half-open square [c, c+1) x [r, r+1). A continuous
// point maps to cell (floor(y), floor(x)); y grows downward like raster rows.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "mgpf/png_io.hpp"
#include "mgpf/types.hpp"

namespace mgpf {

class GridMap {
 public:
  GridMap() = default;

  GridMap(int width, int height, std::vector<std::uint8_t> occupancy)
      : width_(width), height_(height), occupied_(std::move(occupancy)) {
    if (width < 2 || height < 2) throw Error("map too small: width and height must be >= 2");
    if (occupied_.size() != static_cast<std::size_t>(width) * height) {
      throw Error("occupancy size does not match map dimensions");
    }
  }

  /// All-free map.
  GridMap(int width, int height)
      : GridMap(width, height, std::vector<std::uint8_t>(static_cast<std::size_t>(width) * height, 0)) {}

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t cell_count() const { return occupied_.size(); }

  bool in_bounds(int row, int col) const { return row >= 0 && row < height_ && col >= 0 && col < width_; }
  bool in_bounds(const State& s) const { return s.x >= 0.0 && s.x < width_ && s.y >= 0.0 && s.y < height_; }

  bool occupied(int row, int col) const { return occupied_[index(row, col)] != 0; }
  bool occupied(const Cell& c) const { return occupied(c.row, c.col); }
  void set_occupied(int row, int col, bool value) { occupied_[index(row, col)] = value ? 1 : 0; }

  std::size_t index(int row, int col) const { return static_cast<std::size_t>(row) * width_ + col; }

  /// Precondition: in_bounds(s).
  static Cell cell_of(const State& s) {
    return {static_cast<int>(std::floor(s.y)), static_cast<int>(std::floor(s.x))};
  }

  std::size_t free_cell_count() const {
    std::size_t n = 0;
    for (auto v : occupied_) n += v == 0;
    return n;
  }

  std::span<const std::uint8_t> occupancy() const { return occupied_; }

  friend bool operator==(const GridMap&, const GridMap&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> occupied_;
};

/// True iff s lies in bounds and its cell is free.
inline bool is_free(const GridMap& map, const State& s) {
  if (!is_finite(s) || !map.in_bounds(s)) return false;
  return !map.occupied(GridMap::cell_of(s));
}

namespace detail {

inline GridMap parse_ascii_map(std::string_view text) {
  std::vector<std::string_view> rows;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    rows.push_back(line);
    start = end + 1;
  }
  while (!rows.empty() && rows.back().empty()) rows.pop_back();
  if (rows.empty()) throw Error("empty map input");

  const std::size_t width = rows.front().size();
  std::vector<std::uint8_t> occ;
  occ.reserve(width * rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != width) {
      throw Error("non-rectangular ASCII map: row " + std::to_string(r) + " has " +
                  std::to_string(rows[r].size()) + " cells, expected " + std::to_string(width));
    }
    for (char ch : rows[r]) {
      if (ch == '#') {
        occ.push_back(1);
      } else if (ch == '.') {
        occ.push_back(0);
      } else {
        throw Error("unsupported map format: unexpected character in ASCII grid");
      }
    }
  }
  return GridMap(static_cast<int>(width), static_cast<int>(rows.size()), std::move(occ));
}

}  // namespace detail

/// Parse a PNG raster (luminance < 128 is an obstacle) or an ASCII grid
/// ('#' obstacle, '.' free). The format is detected from the content.
inline GridMap load_map(const std::vector<std::uint8_t>& bytes) {
  if (bytes.empty()) throw Error("empty map input");
  if (png::has_signature(bytes)) {
    png::RgbImage img = png::decode(bytes);
    std::vector<std::uint8_t> occ(static_cast<std::size_t>(img.width) * img.height);
    for (int r = 0; r < img.height; ++r) {
      for (int c = 0; c < img.width; ++c) {
        occ[static_cast<std::size_t>(r) * img.width + c] = png::luminance(img.pixel(r, c)) < 128 ? 1 : 0;
      }
    }
    return GridMap(img.width, img.height, std::move(occ));
  }
  for (std::uint8_t b : bytes) {
    if (b != '#' && b != '.' && b != '\n' && b != '\r') throw Error("unsupported map format");
  }
  return detail::parse_ascii_map(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

inline GridMap load_map(std::string_view text) {
  return load_map(std::vector<std::uint8_t>(text.begin(), text.end()));
}

inline GridMap load_map_file(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw Error("missing map file: " + path.string());
  return load_map(png::read_file(path));
}

inline std::string to_ascii(const GridMap& map) {
  std::string out;
  out.reserve(map.cell_count() + map.height());
  for (int r = 0; r < map.height(); ++r) {
    for (int c = 0; c < map.width(); ++c) out.push_back(map.occupied(r, c) ? '#' : '.');
    out.push_back('\n');
  }
  return out;
}

/// 8-bit grayscale: obstacles black, free space white.
inline std::vector<std::uint8_t> to_png(const GridMap& map) {
  std::vector<std::uint8_t> gray(map.cell_count());
  for (std::size_t i = 0; i < gray.size(); ++i) gray[i] = map.occupancy()[i] ? 0 : 255;
  return png::encode(gray.data(), map.width(), map.height(), true);
}

inline void save_map(const GridMap& map, const std::filesystem::path& path) {
  if (path.extension() == ".png") {
    png::write_file(path, to_png(map));
  } else {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << to_ascii(map);
  }
}

struct Scenario {
  GridMap map;
  State origin;
  std::vector<State> goals;
  std::string name;

  std::size_t vertex_count() const { return goals.size() + 1; }

  /// Vertex 0 is the origin, 1..N are the goals.
  const State& vertex(std::size_t i) const { return i == 0 ? origin : goals.at(i - 1); }

  std::vector<State> vertices() const {
    std::vector<State> v{origin};
    v.insert(v.end(), goals.begin(), goals.end());
    return v;
  }
};

/// Throws on the first violated scenario invariant.
inline void validate_scenario(const Scenario& s) {
  if (s.goals.empty()) throw Error("scenario needs at least one goal");
  const auto vertices = s.vertices();
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    if (!is_free(s.map, vertices[i])) {
      throw Error("infeasible vertex " + std::to_string(i) + " (" + std::to_string(vertices[i].x) + ", " +
                  std::to_string(vertices[i].y) + ")");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (vertices[i] == vertices[j]) {
        throw Error("duplicate vertex " + std::to_string(j) + " and " + std::to_string(i));
      }
    }
  }
}

namespace detail {

inline State parse_state(const nlohmann::json& j, const char* what) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw Error(std::string("malformed ") + what + ": expected [x, y]");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

}  // namespace detail

/// Scenario JSON: {"map": <path relative to the JSON file>, "origin": [x, y],
/// "goals": [[x, y], ...], "name": <string>}.
inline Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open scenario " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed scenario JSON: ") + e.what());
  }
  if (!doc.contains("map") || !doc["map"].is_string()) throw Error("scenario missing \"map\"");
  if (!doc.contains("origin")) throw Error("scenario missing \"origin\"");
  if (!doc.contains("goals") || !doc["goals"].is_array()) throw Error("scenario missing \"goals\"");

  Scenario s;
  s.map = load_map_file(path.parent_path() / doc["map"].get<std::string>());
  s.origin = detail::parse_state(doc["origin"], "origin");
  for (const auto& g : doc["goals"]) s.goals.push_back(detail::parse_state(g, "goal"));
  s.name = doc.value("name", path.stem().string());
  validate_scenario(s);
  return s;
}

/// Writes the scenario JSON; the map is written next to it as `map_file`.
inline void save_scenario(const Scenario& s, const std::filesystem::path& path, const std::string& map_file) {
  save_map(s.map, path.parent_path() / map_file);
  nlohmann::json doc;
  doc["map"] = map_file;
  doc["origin"] = {s.origin.x, s.origin.y};
  doc["goals"] = nlohmann::json::array();
  for (const auto& g : s.goals) doc["goals"].push_back({g.x, g.y});
  doc["name"] = s.name;
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << doc.dump(2) << '\n';
}

}  // namespace mgpf
