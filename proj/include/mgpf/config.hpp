#pragma once
// Every tunable default of the planner in one place, with a JSON form that
// the CLI and bench specs share.
//
//   {
//     "k1": 0.3,              hybrid sampler: u > k1 -> guideline
//     "k2": 0.2,              hybrid sampler: u < k2 -> region (k2 <= k1)
//     "step": 8,              RRT steer length, map units
//     "goal_radius": 8,       goal connection radius, map units
//     "goal_bias": 0.05,      probability of sampling the goal itself
//     "budget": 2000,         samples per leg
//     "rewire_radius": 16,    RRT* neighbourhood cap, map units
//     "region_radius": 10,    oracle region dilation, cells
//     "guide_radius": 1,      oracle guideline dilation, cells
//     "seed": 0
//   }

#include <algorithm>
#include <cstdint>
#include <iterator>
#include <string>

#include <json.hpp>

#include "mgpf/heuristic.hpp"
#include "mgpf/rrt.hpp"
#include "mgpf/sampler.hpp"

namespace mgpf {

struct PlannerConfig {
  SamplerParams sampler;
  RrtParams rrt;
  OracleOptions oracle;

  void set_seed(std::uint64_t seed) {
    sampler.seed = seed;
    rrt.seed = seed;
  }

  void validate() const {
    sampler.validate();
    rrt.validate();
    if (oracle.guide_radius < 0 || oracle.region_radius < oracle.guide_radius) {
      throw Error("invalid oracle radii: need 0 <= guide_radius <= region_radius");
    }
  }
};

inline nlohmann::json to_json(const PlannerConfig& c) {
  return {{"k1", c.sampler.k1},
          {"k2", c.sampler.k2},
          {"step", c.rrt.step},
          {"goal_radius", c.rrt.goal_radius},
          {"goal_bias", c.rrt.goal_bias},
          {"budget", c.rrt.max_samples},
          {"rewire_radius", c.rrt.rewire_radius},
          {"region_radius", c.oracle.region_radius},
          {"guide_radius", c.oracle.guide_radius},
          {"seed", c.rrt.seed}};
}

/// Overlays the keys present in `j` onto `base`. Unknown keys are rejected.
inline PlannerConfig planner_config_from_json(const nlohmann::json& j, PlannerConfig base = {}) {
  static const char* known[] = {"k1", "k2", "step", "goal_radius", "goal_bias", "budget",
                                "rewire_radius", "region_radius", "guide_radius", "seed"};
  for (const auto& [key, _] : j.items()) {
    if (std::find(std::begin(known), std::end(known), key) == std::end(known)) {
      throw Error("unknown config key \"" + key + "\"");
    }
  }
  base.sampler.k1 = j.value("k1", base.sampler.k1);
  base.sampler.k2 = j.value("k2", base.sampler.k2);
  base.rrt.step = j.value("step", base.rrt.step);
  base.rrt.goal_radius = j.value("goal_radius", base.rrt.goal_radius);
  base.rrt.goal_bias = j.value("goal_bias", base.rrt.goal_bias);
  base.rrt.max_samples = j.value("budget", base.rrt.max_samples);
  base.rrt.rewire_radius = j.value("rewire_radius", base.rrt.rewire_radius);
  base.oracle.region_radius = j.value("region_radius", base.oracle.region_radius);
  base.oracle.guide_radius = j.value("guide_radius", base.oracle.guide_radius);
  if (j.contains("seed")) base.set_seed(j["seed"].get<std::uint64_t>());
  base.validate();
  return base;
}

}  // namespace mgpf
