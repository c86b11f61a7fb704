#include <cmath>

#include "doctest.h"
#include "midsim/core/error.hpp"
#include "midsim/core/rng.hpp"
#include "midsim/geom/frame.hpp"
#include "midsim/geom/perturb.hpp"
#include "midsim/geom/pose.hpp"
#include "midsim/geom/smooth_path.hpp"
#include "support/oracles.hpp"

using namespace midsim;
using namespace midsim::geom;

namespace {

RasterFrame table_frame(Pose origin, double jitter = 0.0) {
  RasterFrame f;
  f.origin = origin;
  f.rotation_jitter = jitter;
  f.width_px = 400;
  f.height_px = 400;
  f.u0 = 200.0;
  f.v0 = 320.0;
  f.resolution = 0.2;
  return f;
}

Trajectory straight_trajectory(double speed, double dt, int n,
                               double heading = 0.0) {
  Trajectory traj;
  traj.dt = dt;
  const Vec2 dir = unit(heading);
  for (int i = 0; i < n; ++i) {
    const Vec2 p = dir * (speed * dt * i);
    traj.poses.emplace_back(p.x, p.y, heading, speed);
  }
  return traj;
}

}  // namespace

TEST_CASE("world_to_raster maps the origin pose to (u0, v0)") {
  const Pose origin(13.5, -2.25, 0.7, 4.0);
  const RasterFrame f = table_frame(origin);
  const Vec2 uv = f.world_to_raster(origin.position());
  CHECK(uv.x == doctest::Approx(200.0).epsilon(1e-12));
  CHECK(uv.y == doctest::Approx(320.0).epsilon(1e-12));
}

TEST_CASE("world_to_raster axis conventions") {
  const Pose origin(0.0, 0.0, 0.3, 0.0);
  const RasterFrame f = table_frame(origin);

  SUBCASE("1 m to the left lands 5 px toward -u") {
    const Vec2 left = origin.position() + unit(origin.theta).perp_left();
    const Vec2 uv = f.world_to_raster(left);
    CHECK(uv.x == doctest::Approx(195.0));
    CHECK(uv.y == doctest::Approx(320.0));
  }

  SUBCASE("forward maps to decreasing v") {
    const Vec2 ahead = origin.position() + unit(origin.theta) * 10.0;
    const Vec2 uv = f.world_to_raster(ahead);
    CHECK(uv.x == doctest::Approx(200.0));
    CHECK(uv.y == doctest::Approx(270.0));
  }
}

TEST_CASE("world_to_raster under rotation jitter matches a hand-built 2x2") {
  const Pose origin(0.0, 0.0, 0.0, 0.0);
  const RasterFrame f = table_frame(origin, M_PI / 6.0);
  const Vec2 ahead{10.0, 0.0};  // 10 m along the agent heading
  const Vec2 uv = f.world_to_raster(ahead);
  // fwd = 10 cos(pi/6), right = 10 sin(pi/6), scale 1/0.2
  CHECK(uv.x == doctest::Approx(200.0 + 10.0 * 0.5 / 0.2).epsilon(1e-12));
  CHECK(uv.y ==
        doctest::Approx(320.0 - 10.0 * std::sqrt(3.0) / 2.0 / 0.2).epsilon(1e-12));
}

TEST_CASE("raster round trip is exact to 1e-9 m") {
  Rng rng(12345);
  const Pose origin(3.0, 4.0, -1.1, 2.0);
  const RasterFrame f = table_frame(origin, 0.31);
  CHECK((f.raster_to_world(200.0, 320.0) - origin.position()).norm() < 1e-12);
  for (int i = 0; i < 1000; ++i) {
    const Vec2 p{rng.uniform(-40.0, 40.0), rng.uniform(-40.0, 40.0)};
    const Vec2 uv = f.world_to_raster(p);
    const Vec2 back = f.raster_to_world(uv.x, uv.y);
    CHECK((back - p).norm() < 1e-9);
  }
  // (u0, v0 - 50) is 10 m ahead at 0.2 m/px.
  const Vec2 ahead = f.raster_to_world(200.0, 270.0);
  const Vec2 expect = origin.position() + unit(f.forward_angle()) * 10.0;
  CHECK((ahead - expect).norm() < 1e-9);
}

TEST_CASE("smooth fit through collinear waypoints is straight") {
  std::vector<TimedPose> wps;
  for (int i = 0; i < 3; ++i)
    wps.push_back({static_cast<double>(i), Pose(5.0 * i, 0.0, 0.0, 5.0)});
  const Trajectory traj = fit_smooth_trajectory(wps, true, 0.05);
  for (const auto& p : traj.poses) {
    CHECK(std::abs(p.y) < 1e-9);
    CHECK(p.speed == doctest::Approx(5.0).epsilon(1e-9));
  }
  CHECK(oracles::fd_max_curvature(oracles::positions(traj), 0.05) < 1e-9);
}

TEST_CASE("smooth fit midpoint curvature matches the dense FD oracle") {
  const std::vector<TimedPose> wps = {
      {0.0, Pose(0.0, 0.0, 0.0, 5.0)},
      {1.0, Pose(5.0, 0.5, 0.0, 5.0)},
      {2.0, Pose(10.0, 0.0, 0.0, 5.0)},
  };
  const SmoothPath path = fit_smooth_path(wps, true);
  const double h = 1e-3;
  const auto fd_at = [&](double t) {
    std::vector<Vec2> dense;
    for (int i = -2; i <= 2; ++i) dense.push_back(path.position(t + i * h));
    return oracles::fd_curvature(dense, h)[2];
  };
  // Knots pin acceleration to zero, so curvature there vanishes; the bend
  // lives inside the segments.
  CHECK(std::abs(path.curvature(1.0) - fd_at(1.0)) < 1e-3);
  const double quarter = path.curvature(0.25);
  CHECK(quarter == doctest::Approx(fd_at(0.25)).epsilon(1e-3));
  CHECK(quarter > 0.01);
}

TEST_CASE("smooth fit rejects non-increasing waypoint times") {
  const std::vector<TimedPose> wps = {
      {0.0, Pose(0, 0, 0, 1)}, {0.0, Pose(1, 0, 0, 1)}, {1.0, Pose(2, 0, 0, 1)}};
  CHECK_THROWS_AS(fit_smooth_trajectory(wps, true, 0.1), DegenerateInput);
}

TEST_CASE("curvature_profile on a straight line is zero") {
  const Trajectory traj = straight_trajectory(4.0, 0.2, 20);
  for (double k : curvature_profile(traj)) CHECK(k == 0.0);
}

TEST_CASE("curvature_profile on a circle reports 1/R within 2%") {
  const double R = 5.0, speed = 2.0, dt = 0.2;
  Trajectory traj;
  traj.dt = dt;
  for (int i = 0; i < 60; ++i) {
    const double phi = speed * dt * i / R;
    traj.poses.emplace_back(R * std::sin(phi), R * (1 - std::cos(phi)),
                            phi, speed);
  }
  const auto kappa = curvature_profile(traj);
  for (std::size_t i = 1; i + 1 < kappa.size(); ++i)
    CHECK(kappa[i] == doctest::Approx(1.0 / R).epsilon(0.02));
}

TEST_CASE("curvature_profile matches the oversampled FD oracle on an S-curve") {
  const std::vector<TimedPose> wps = {
      {0.0, Pose(0.0, 0.0, 0.0, 5.0)},
      {2.0, Pose(9.5, 1.5, 0.3, 5.0)},
      {4.0, Pose(18.0, 0.0, -0.2, 5.0)},
  };
  const SmoothPath path = fit_smooth_path(wps, true);
  const Trajectory coarse = path.sample(0.0, 0.2, 21);
  const Trajectory fine = path.sample(0.0, 0.02, 201);
  const auto kappa = curvature_profile(coarse);
  const auto oracle = oracles::fd_curvature(oracles::positions(fine), 0.02);
  for (int i = 2; i + 2 < coarse.size(); ++i) {
    const double ref = oracle[i * 10];
    if (ref < 0.02) continue;  // relative comparison is meaningless near zero
    CHECK(kappa[i] == doctest::Approx(ref).epsilon(0.05));
  }
}

TEST_CASE("zero-range perturbation is the identity") {
  const Trajectory traj = straight_trajectory(4.0, 0.2, 15, 0.4);
  PerturbParams params;
  params.pos_jitter_m = 0.0;
  params.heading_jitter_rad = 0.0;
  const PerturbResult res = perturb_trajectory(traj, params, 99);
  REQUIRE(res.accepted);
  REQUIRE(res.trajectory.size() == traj.size());
  for (int i = 0; i < traj.size(); ++i) {
    CHECK((res.trajectory.poses[i].position() - traj.poses[i].position()).norm() <
          1e-6);
    CHECK(std::abs(wrap_angle(res.trajectory.poses[i].theta -
                              traj.poses[i].theta)) < 1e-6);
  }
}

TEST_CASE("perturbation draws stay in range and keep endpoints fixed") {
  const Trajectory traj = straight_trajectory(5.0, 0.2, 21, -0.7);
  const PerturbParams params;
  const int mid = traj.size() / 2;
  const Pose& m = traj.poses[mid];
  const Vec2 fwd = unit(m.theta);
  const Vec2 left = fwd.perp_left();

  int accepted = 0;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const PerturbResult res = perturb_trajectory(traj, params, seed);
    CHECK(std::abs(res.d_long) <= 0.5);
    CHECK(std::abs(res.d_lat) <= 0.5);
    CHECK(std::abs(res.d_heading) <= M_PI / 3.0);
    if (!res.accepted) continue;
    ++accepted;
    const Trajectory& out = res.trajectory;
    CHECK((out.poses.front().position() - traj.poses.front().position()).norm() <
          1e-6);
    CHECK((out.poses.back().position() - traj.poses.back().position()).norm() <
          1e-6);
    CHECK(std::abs(wrap_angle(out.poses.front().theta -
                              traj.poses.front().theta)) < 1e-6);
    CHECK(std::abs(wrap_angle(out.poses.back().theta -
                              traj.poses.back().theta)) < 1e-6);
    // Midpoint landed where the draws say, measured in the local frame.
    const Vec2 d = out.poses[mid].position() - m.position();
    CHECK(d.dot(fwd) == doctest::Approx(res.d_long).epsilon(1e-6));
    CHECK(d.dot(left) == doctest::Approx(res.d_lat).epsilon(1e-6));
    // Independent curvature check on the returned samples.
    CHECK(oracles::fd_max_curvature(oracles::positions(out), out.dt) <=
          params.max_curvature_per_m);
  }
  CHECK(accepted > 200);  // plenty of draws survive the curvature filter
}

TEST_CASE("a near-limit heading jitter on a straight segment is rejected") {
  const Trajectory traj = straight_trajectory(5.0, 0.2, 11);
  PerturbParams params;
  params.pos_jitter_m = 0.0;
  params.heading_jitter_rad = M_PI / 3.0;
  bool found = false;
  for (std::uint64_t seed = 0; seed < 200 && !found; ++seed) {
    const PerturbResult res = perturb_trajectory(traj, params, seed);
    if (std::abs(res.d_heading) < 0.9 * M_PI / 3.0) continue;
    found = true;
    CHECK_FALSE(res.accepted);
    CHECK(res.max_curvature > params.max_curvature_per_m);
  }
  CHECK(found);
}

TEST_CASE("perturbation is bit-reproducible per seed") {
  const Trajectory traj = straight_trajectory(5.0, 0.2, 21);
  const PerturbParams params;
  const PerturbResult a = perturb_trajectory(traj, params, 42);
  const PerturbResult b = perturb_trajectory(traj, params, 42);
  REQUIRE(a.accepted == b.accepted);
  if (a.accepted) {
    REQUIRE(a.trajectory.size() == b.trajectory.size());
    for (int i = 0; i < a.trajectory.size(); ++i) {
      CHECK(a.trajectory.poses[i].x == b.trajectory.poses[i].x);
      CHECK(a.trajectory.poses[i].y == b.trajectory.poses[i].y);
      CHECK(a.trajectory.poses[i].theta == b.trajectory.poses[i].theta);
    }
  }
}

TEST_CASE("resample identities and spacing") {
  const Trajectory traj = straight_trajectory(4.0, 0.2, 12);

  SUBCASE("same dt returns the same samples") {
    const Trajectory out = resample(traj, traj.dt);
    REQUIRE(out.size() == traj.size());
    for (int i = 0; i < traj.size(); ++i)
      CHECK((out.poses[i].position() - traj.poses[i].position()).norm() < 1e-12);
  }

  SUBCASE("halving dt gives 2n-1 samples") {
    const Trajectory out = resample(traj, traj.dt / 2.0);
    CHECK(out.size() == 2 * traj.size() - 1);
    CHECK((out.poses.back().position() - traj.poses.back().position()).norm() <
          1e-12);
  }

  SUBCASE("constant 4 m/s spacing is 0.8 m at 0.2 s") {
    const Trajectory out = resample(traj, 0.2);
    for (int i = 0; i + 1 < out.size(); ++i)
      CHECK((out.poses[i + 1].position() - out.poses[i].position()).norm() ==
            doctest::Approx(0.8).epsilon(1e-9));
  }
}

TEST_CASE("trajectory speed consistency helper") {
  const Trajectory good = straight_trajectory(4.0, 0.2, 10);
  CHECK(speeds_consistent(good));
  Trajectory bad = good;
  bad.poses[3] = Pose(bad.poses[3].x + 3.0, bad.poses[3].y, 0.0, 4.0);
  CHECK_FALSE(speeds_consistent(bad));
}
