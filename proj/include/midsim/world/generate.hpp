#pragma once

#include <cstdint>

#include "midsim/world/world.hpp"

namespace midsim::world {

struct WorldSpec {
  int n_lanes = 2;          // parallel lanes sharing one corridor
  double curviness = 0.02;  // max |curvature| of the base path, 1/m
  bool with_stop_signs = true;
  bool with_lights = false;
  double length_m = 400.0;
  double lane_width = 3.4;
  double speed_limit = 8.0;

  bool valid() const {
    return n_lanes >= 1 && n_lanes <= 4 && curviness >= 0.0 &&
           curviness <= 0.15 && length_m >= 100.0 && length_m <= 2000.0 &&
           lane_width > 2.5 && speed_limit > 0.0;
  }
};

// Deterministic per seed. Lane 0 is the ego lane (rightmost); the road
// polygon is the union of the lane corridors.
World generate_world(std::uint64_t seed, const WorldSpec& spec);

}  // namespace midsim::world
