#include "midsim/geom/perturb.hpp"

#include <cmath>

#include "midsim/core/error.hpp"
#include "midsim/core/rng.hpp"
#include "midsim/geom/smooth_path.hpp"

namespace midsim::geom {

namespace {

double menger_curvature(Vec2 a, Vec2 b, Vec2 c) {
  const Vec2 ab = b - a;
  const Vec2 bc = c - b;
  const Vec2 ac = c - a;
  const double la = ab.norm(), lb = bc.norm(), lc = ac.norm();
  if (la < 1e-9 || lb < 1e-9 || lc < 1e-9) return 0.0;
  return 2.0 * std::abs(ab.cross(bc)) / (la * lb * lc);
}

// Internal accept margin: the accept decision is taken on the densely
// sampled analytic curvature of the fitted quintic, which independent
// finite-difference measurements approach from either side.
constexpr double kAcceptMargin = 1e-4;

}  // namespace

std::vector<double> curvature_profile(const Trajectory& traj) {
  if (traj.size() < 3) throw DegenerateInput("curvature needs >= 3 poses");
  const int n = traj.size();
  std::vector<double> kappa(n, 0.0);
  for (int i = 1; i + 1 < n; ++i) {
    if (traj.poses[i].speed < 1e-6) {
      kappa[i] = 0.0;
      continue;
    }
    kappa[i] = menger_curvature(traj.poses[i - 1].position(),
                                traj.poses[i].position(),
                                traj.poses[i + 1].position());
  }
  kappa[0] = (traj.poses[0].speed < 1e-6) ? 0.0 : kappa[1];
  kappa[n - 1] = (traj.poses[n - 1].speed < 1e-6) ? 0.0 : kappa[n - 2];
  return kappa;
}

PerturbResult perturb_trajectory(const Trajectory& traj,
                                 const PerturbParams& params,
                                 std::uint64_t rng_seed) {
  if (traj.size() < 3) throw DegenerateInput("perturb needs >= 3 samples");
  if (!params.valid()) throw DegenerateInput("invalid perturbation parameters");

  PerturbResult result;
  if (params.pos_jitter_m == 0.0 && params.heading_jitter_rad == 0.0) {
    result.accepted = true;
    result.trajectory = traj;
    result.max_curvature = 0.0;
    return result;
  }

  Rng rng(rng_seed);
  result.d_long = rng.uniform(-params.pos_jitter_m, params.pos_jitter_m);
  result.d_lat = rng.uniform(-params.pos_jitter_m, params.pos_jitter_m);
  result.d_heading =
      rng.uniform(-params.heading_jitter_rad, params.heading_jitter_rad);

  const int n = traj.size();
  const int mid = n / 2;
  const Pose& m = traj.poses[mid];
  const Vec2 fwd = unit(m.theta);
  const Vec2 left = fwd.perp_left();
  const Vec2 new_pos =
      m.position() + fwd * result.d_long + left * result.d_lat;
  const Pose jittered(new_pos.x, new_pos.y, m.theta + result.d_heading,
                      m.speed);

  const std::vector<TimedPose> knots = {
      {traj.time_at(0), traj.poses.front()},
      {traj.time_at(mid), jittered},
      {traj.time_at(n - 1), traj.poses.back()},
  };
  const SmoothPath path = fit_smooth_path(knots, /*fix_endpoint_headings=*/true);

  result.max_curvature = path.max_curvature();
  if (result.max_curvature >
      params.max_curvature_per_m * (1.0 - kAcceptMargin)) {
    result.accepted = false;
    return result;
  }

  result.accepted = true;
  result.trajectory = path.sample(traj.start_time, traj.dt, n);
  // Knot reproduction is exact up to round-off; pin the endpoints bitwise.
  result.trajectory.poses.front() = traj.poses.front();
  result.trajectory.poses.back() = traj.poses.back();
  return result;
}

}  // namespace midsim::geom
