#pragma once

#include <cstdint>
#include <vector>

#include "midsim/geom/pose.hpp"

namespace midsim::geom {

struct PerturbParams {
  // Half-range of the uniform midpoint position jitter, applied
  // independently along the longitudinal and lateral axes of the
  // trajectory-local frame at the midpoint.
  double pos_jitter_m = 0.5;
  // Half-range of the uniform midpoint heading jitter.
  double heading_jitter_rad = M_PI / 3.0;
  // Fitted trajectories whose max curvature exceeds this are rejected.
  double max_curvature_per_m = 0.2;
  // Training weight of perturbed examples relative to originals.
  double perturbed_weight = 0.1;

  bool valid() const {
    return pos_jitter_m >= 0.0 && heading_jitter_rad >= 0.0 &&
           max_curvature_per_m > 0.0 && perturbed_weight > 0.0 &&
           perturbed_weight <= 1.0;
  }
};

struct PerturbResult {
  bool accepted = false;
  Trajectory trajectory;   // valid only when accepted
  double max_curvature = 0.0;
  // Draws actually applied at the midpoint (local frame / radians).
  double d_long = 0.0, d_lat = 0.0, d_heading = 0.0;
};

// Jitters the midpoint pose (sample floor(n/2)), refits a smooth trajectory
// through {start, jittered midpoint, end}, and resamples it on the input's
// time grid. Endpoints are preserved. Rejected iff the fitted curve's max
// curvature exceeds params.max_curvature_per_m. Zero jitter ranges return
// the input unchanged.
PerturbResult perturb_trajectory(const Trajectory& traj,
                                 const PerturbParams& params,
                                 std::uint64_t rng_seed);

// Unsigned curvature per sample via the three-point circumscribed-circle
// formula; endpoints copy their neighbors. Samples whose speed is below
// 1e-6 m/s (or with degenerate chords) report zero.
std::vector<double> curvature_profile(const Trajectory& traj);

}  // namespace midsim::geom
