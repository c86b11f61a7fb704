#include "midsim/geom/pose.hpp"

#include <cmath>

namespace midsim::geom {

Trajectory resample(const Trajectory& traj, double dt_new) {
  traj.validate();
  if (!(dt_new > 0.0)) throw DegenerateInput("dt_new must be > 0");
  const double span = traj.dt * (traj.size() - 1);
  const int count = static_cast<int>(std::floor(span / dt_new + 1e-9)) + 1;
  Trajectory out;
  out.start_time = traj.start_time;
  out.dt = dt_new;
  out.poses.reserve(count);
  for (int i = 0; i < count; ++i)
    out.poses.push_back(traj.sample(traj.start_time + i * dt_new));
  // Guard the final sample against accumulated round-off when the span
  // divides evenly.
  if (std::abs((count - 1) * dt_new - span) < 1e-9)
    out.poses.back() = traj.poses.back();
  return out;
}

}  // namespace midsim::geom
