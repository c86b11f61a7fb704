#pragma once

#include <vector>

#include "midsim/geom/pose.hpp"

namespace midsim::geom {

struct TimedPose {
  double t = 0.0;
  Pose pose;
};

// One quintic segment per coordinate, parameterized by tau = t - t0.
struct QuinticSegment {
  double t0 = 0.0, t1 = 0.0;
  double cx[6] = {0}, cy[6] = {0};

  Vec2 position(double t) const;
  Vec2 velocity(double t) const;
  Vec2 acceleration(double t) const;
};

// C2 piecewise-quintic plan through timed waypoints: position and velocity
// (speed * heading) are pinned at every knot, acceleration is zero at knots.
class SmoothPath {
 public:
  explicit SmoothPath(std::vector<QuinticSegment> segments)
      : segments_(std::move(segments)) {}

  double start_time() const { return segments_.front().t0; }
  double end_time() const { return segments_.back().t1; }

  Vec2 position(double t) const { return segment_at(t).position(t); }
  Vec2 velocity(double t) const { return segment_at(t).velocity(t); }
  Vec2 acceleration(double t) const { return segment_at(t).acceleration(t); }

  // |x'y'' - y'x''| / speed^3; zero below the stationary speed cutoff.
  double curvature(double t) const;

  // Max analytic curvature over a dense uniform grid (samples per segment).
  double max_curvature(int samples_per_segment = 400) const;

  // Samples pose at t: heading from velocity direction (held through
  // stationary points), speed = |velocity|.
  Pose pose_at(double t) const;

  Trajectory sample(double t_begin, double dt, int count) const;

 private:
  const QuinticSegment& segment_at(double t) const;
  std::vector<QuinticSegment> segments_;
};

// Fits the piecewise quintic through >= 2 timed waypoints. Knot velocities
// come from each pose's speed and heading; with fix_endpoint_headings =
// false the first/last headings are replaced by chord directions.
// Throws DegenerateInput when waypoint times are not strictly increasing.
SmoothPath fit_smooth_path(const std::vector<TimedPose>& waypoints,
                           bool fix_endpoint_headings = true);

// Convenience wrapper returning a uniformly sampled trajectory covering the
// full waypoint span.
Trajectory fit_smooth_trajectory(const std::vector<TimedPose>& waypoints,
                                 bool fix_endpoint_headings, double dt);

}  // namespace midsim::geom
