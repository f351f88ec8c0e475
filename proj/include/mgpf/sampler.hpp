#pragma once
// Uniform, mask-guided and hybrid sample generation.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mgpf/gridmap.hpp"
#include "mgpf/png_io.hpp"
#include "mgpf/random.hpp"
#include "mgpf/types.hpp"

namespace mgpf {

/// Binary mask over the map grid; a set bit marks a promising cell.
/// Immutable: the list of set cells is built once at construction.
class Mask {
 public:
  Mask() = default;

  Mask(int width, int height, std::vector<std::uint8_t> bits) : width_(width), height_(height), bits_(std::move(bits)) {
    if (bits_.size() != static_cast<std::size_t>(width) * height) throw Error("mask size does not match dimensions");
    for (std::size_t i = 0; i < bits_.size(); ++i) {
      if (bits_[i]) {
        bits_[i] = 1;
        set_cells_.push_back(static_cast<std::uint32_t>(i));
      }
    }
  }

  static Mask empty(int width, int height) {
    return Mask(width, height, std::vector<std::uint8_t>(static_cast<std::size_t>(width) * height, 0));
  }
  static Mask full(int width, int height) {
    return Mask(width, height, std::vector<std::uint8_t>(static_cast<std::size_t>(width) * height, 1));
  }

  int width() const { return width_; }
  int height() const { return height_; }
  bool test(int row, int col) const { return bits_[static_cast<std::size_t>(row) * width_ + col] != 0; }
  bool test(const Cell& c) const { return test(c.row, c.col); }
  bool empty() const { return set_cells_.empty(); }
  std::size_t count() const { return set_cells_.size(); }
  const std::vector<std::uint32_t>& set_cells() const { return set_cells_; }
  const std::vector<std::uint8_t>& bits() const { return bits_; }

  bool matches(const GridMap& map) const { return width_ == map.width() && height_ == map.height(); }

  bool subset_of(const Mask& other) const {
    if (other.width_ != width_ || other.height_ != height_) return false;
    for (auto i : set_cells_) {
      if (!other.bits_[i]) return false;
    }
    return true;
  }

  Mask intersect(const Mask& other) const {
    if (other.width_ != width_ || other.height_ != height_) throw Error("dimension mismatch");
    std::vector<std::uint8_t> out(bits_.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = bits_[i] & other.bits_[i];
    return Mask(width_, height_, std::move(out));
  }

  friend bool operator==(const Mask& a, const Mask& b) {
    return a.width_ == b.width_ && a.height_ == b.height_ && a.bits_ == b.bits_;
  }

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> bits_;
  std::vector<std::uint32_t> set_cells_;
};

/// Luminance >= 128 sets the bit.
inline Mask load_mask_png(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw Error("missing file: " + path.string());
  png::RgbImage img = png::decode(png::read_file(path));
  std::vector<std::uint8_t> bits(static_cast<std::size_t>(img.width) * img.height);
  for (int r = 0; r < img.height; ++r) {
    for (int c = 0; c < img.width; ++c) {
      bits[static_cast<std::size_t>(r) * img.width + c] = png::luminance(img.pixel(r, c)) >= 128 ? 1 : 0;
    }
  }
  return Mask(img.width, img.height, std::move(bits));
}

inline void save_mask_png(const Mask& mask, const std::filesystem::path& path) {
  std::vector<std::uint8_t> gray(mask.bits().size());
  for (std::size_t i = 0; i < gray.size(); ++i) gray[i] = mask.bits()[i] ? 255 : 0;
  png::write_file(path, png::encode(gray.data(), mask.width(), mask.height(), true));
}

/// Hybrid sampling probabilities: u > k1 draws from the guideline, u < k2 from
/// the region, anything else is uniform. Requires 0 <= k2 <= k1 <= 1.
struct SamplerParams {
  double k1 = 0.3;
  double k2 = 0.2;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(k2 >= 0.0 && k2 <= k1 && k1 <= 1.0)) {
      throw Error("invalid sampler params: need 0 <= k2 <= k1 <= 1 (k1=" + std::to_string(k1) +
                  ", k2=" + std::to_string(k2) + ")");
    }
  }
};

enum class Branch { uniform, region, guideline };

/// Rejection-samples the bounding box until a free point is hit.
/// Precondition: the map has at least one free cell.
inline State uniform_sample(const GridMap& map, Rng& rng) {
  for (;;) {
    State s{rng.uniform(0.0, map.width()), rng.uniform(0.0, map.height())};
    if (is_free(map, s)) return s;
  }
}

/// Uniform over set cells, then uniform jitter inside the chosen cell.
inline State mask_sample(const Mask& mask, Rng& rng) {
  if (mask.empty()) throw Error("empty mask");
  const std::uint32_t idx = mask.set_cells()[rng.below(mask.count())];
  const int row = static_cast<int>(idx / static_cast<std::uint32_t>(mask.width()));
  const int col = static_cast<int>(idx % static_cast<std::uint32_t>(mask.width()));
  return {rng.uniform(col, col + 1.0), rng.uniform(row, row + 1.0)};
}

/// One branch draw from `branch_rng`, then the position from `rng`. Keeping
/// the branch decision on its own stream means a sampler that always takes
/// the uniform branch consumes `rng` exactly like plain uniform sampling.
/// Empty masks fall back to uniform sampling.
inline State hybrid_sample(const GridMap& map, const Mask& region, const Mask& guideline, const SamplerParams& params,
                           Rng& branch_rng, Rng& rng, Branch* taken = nullptr) {
  const double u = branch_rng.uniform01();
  Branch branch = Branch::uniform;
  if (u > params.k1) {
    branch = Branch::guideline;
  } else if (u < params.k2) {
    branch = Branch::region;
  }
  if (branch == Branch::guideline && guideline.empty()) branch = Branch::uniform;
  if (branch == Branch::region && region.empty()) branch = Branch::uniform;
  if (taken) *taken = branch;
  switch (branch) {
    case Branch::guideline:
      return mask_sample(guideline, rng);
    case Branch::region:
      return mask_sample(region, rng);
    case Branch::uniform:
      break;
  }
  return uniform_sample(map, rng);
}

struct BranchCounts {
  std::uint64_t uniform = 0;
  std::uint64_t region = 0;
  std::uint64_t guideline = 0;
};

/// Stateful sampler bound to one map and one pair of masks. Owns its RNG
/// streams; one instance per thread.
class HybridSampler {
 public:
  HybridSampler(const GridMap& map, const Mask& region, const Mask& guideline, SamplerParams params)
      : map_(&map),
        region_(&region),
        guideline_(&guideline),
        params_(params),
        branch_rng_(derive_seed(params.seed, 0xb7a9c4)),
        rng_(params.seed) {
    params_.validate();
    if (!region.empty() && !region.matches(map)) throw Error("dimension mismatch: region mask vs map");
    if (!guideline.empty() && !guideline.matches(map)) throw Error("dimension mismatch: guideline mask vs map");
  }

  State operator()() {
    Branch b;
    State s = hybrid_sample(*map_, *region_, *guideline_, params_, branch_rng_, rng_, &b);
    switch (b) {
      case Branch::uniform: ++counts_.uniform; break;
      case Branch::region: ++counts_.region; break;
      case Branch::guideline: ++counts_.guideline; break;
    }
    return s;
  }

  const BranchCounts& counts() const { return counts_; }

 private:
  const GridMap* map_;
  const Mask* region_;
  const Mask* guideline_;
  SamplerParams params_;
  Rng branch_rng_;
  Rng rng_;
  BranchCounts counts_;
};

/// Plain uniform sampler with the same seeding convention as HybridSampler.
class UniformSampler {
 public:
  UniformSampler(const GridMap& map, std::uint64_t seed) : map_(&map), rng_(seed) {}
  State operator()() { return uniform_sample(*map_, rng_); }

 private:
  const GridMap* map_;
  Rng rng_;
};

}  // namespace mgpf
