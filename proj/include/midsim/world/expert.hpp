#pragma once

#include <vector>

#include "midsim/world/world.hpp"

namespace midsim::world {

// Longitudinal and lateral rules of the scripted demonstrator. It tracks the
// lane centerline, merges in smoothly from an offset start, nudges around
// static vehicles that intrude into the lane, obeys speed limits, brakes for
// stop signs and non-green lights with a trapezoidal profile, and follows
// slower leaders with a constant-time-gap rule.
struct ExpertParams {
  double accel_max = 2.0;        // m/s^2
  double decel_max = 3.0;        // m/s^2
  double stop_offset = 0.5;      // stop this far before the line
  double stop_hold_s = 1.0;      // full-stop dwell at stop signs
  double gap_standstill = 4.0;   // m
  double gap_time = 1.5;         // s
  double follow_kp_gap = 0.5;
  double follow_kp_speed = 1.0;
  double ego_half_width = 1.05;  // m
  double nudge_clearance = 0.45; // lateral margin past obstacles
  double nudge_ramp_in = 14.0;   // m
  double nudge_ramp_out = 10.0;  // m
  double sim_dt = 0.05;          // internal integration step
};

// Rolls the expert forward from `start` for `horizon` seconds and samples
// the result at `dt`. `t0` anchors time-dependent elements (lights, moving
// agents). Throws NoPath when the route is unusable from `start`.
Trajectory scripted_expert(const World& world, const std::vector<int>& route,
                           const Pose& start, double horizon, double dt,
                           const std::vector<DynamicAgent>& agents = {},
                           double t0 = 0.0,
                           const ExpertParams& params = ExpertParams{});

}  // namespace midsim::world
