#include <cmath>
#include <cstdio>
#include <cstring>

#include "doctest.h"
#include "midsim/core/error.hpp"
#include "midsim/core/rng.hpp"
#include "midsim/raster/canvas.hpp"
#include "midsim/raster/example_io.hpp"
#include "midsim/raster/render.hpp"
#include "midsim/world/generate.hpp"

using namespace midsim;
using namespace midsim::raster;
using geom::Pose;
using geom::Trajectory;
using geom::Vec2;

namespace {

Trajectory stationary_history(Pose pose, double t_end, double dt, int n) {
  Trajectory traj;
  traj.dt = dt;
  traj.start_time = t_end - dt * (n - 1);
  traj.poses.assign(n, pose);
  return traj;
}

Trajectory straight_history(Pose end_pose, double speed, double t_end,
                            double dt, int n) {
  Trajectory traj;
  traj.dt = dt;
  traj.start_time = t_end - dt * (n - 1);
  const Vec2 dir = geom::unit(end_pose.theta);
  for (int i = 0; i < n; ++i) {
    const double back = (n - 1 - i) * dt * speed;
    const Vec2 p = end_pose.position() - dir * back;
    traj.poses.emplace_back(p.x, p.y, end_pose.theta, speed);
  }
  return traj;
}

int count_nonzero(const TensorF& t, int ch) {
  int n = 0;
  for (int i = 0; i < t.plane_size(); ++i)
    if (t.plane(ch)[i] != 0.0f) ++n;
  return n;
}

double channel_max(const TensorF& t, int ch) {
  float m = 0.0f;
  for (int i = 0; i < t.plane_size(); ++i)
    m = std::max(m, t.plane(ch)[i]);
  return m;
}

world::World empty_world() { return world::World{}; }

}  // namespace

TEST_CASE("channel count follows the render config arithmetic") {
  const RenderConfig desk = RenderConfig::named_profile("desk");
  CHECK(desk.scene_frames() == 6);
  CHECK(desk.input_channels() == 19);
  CHECK(desk.ch_past() == desk.input_channels() - 1);
  const RenderConfig paper = RenderConfig::named_profile("paper");
  CHECK(paper.input_channels() == 19);
  CHECK(paper.width_px == 400);
  CHECK(paper.v0 == 320.0);
  CHECK(paper.frame_for(Pose(), 0.0).forward_range_m() ==
        doctest::Approx(64.0));
}

TEST_CASE("empty world with stationary ego renders only the box and one dot") {
  const RenderConfig cfg = RenderConfig::named_profile("desk");
  const Pose ego(5.0, 3.0, 1.0, 0.0);
  const auto frame = cfg.frame_for(ego, 0.0);
  const auto hist = stationary_history(ego, 0.0, cfg.dt, cfg.past_samples());
  const InputStack in = render_input(empty_world(), {}, {}, hist, 0.0, frame,
                                     cfg, false);
  for (int ch = 0; ch < cfg.input_channels(); ++ch) {
    if (ch == cfg.ch_cur_box()) {
      CHECK(count_nonzero(in.channels, ch) > 10);
    } else if (ch == cfg.ch_past()) {
      CHECK(count_nonzero(in.channels, ch) == 1);
    } else {
      CHECK(count_nonzero(in.channels, ch) == 0);
    }
  }
  // Current box centroid sits at (u0, v0) within a pixel.
  double su = 0, sv = 0;
  int n = 0;
  for (int y = 0; y < in.channels.h; ++y)
    for (int x = 0; x < in.channels.w; ++x)
      if (in.channels.at(cfg.ch_cur_box(), y, x) > 0) {
        su += x + 0.5;
        sv += y + 0.5;
        ++n;
      }
  CHECK(std::abs(su / n - cfg.u0) < 1.0);
  CHECK(std::abs(sv / n - cfg.v0) < 1.0);
}

TEST_CASE("red lights render brighter than green on the same lane") {
  const RenderConfig cfg = RenderConfig::named_profile("desk");
  world::WorldSpec spec;
  spec.curviness = 0.0;
  spec.with_stop_signs = false;
  world::World w = world::generate_world(4, spec);
  world::TrafficLight light;
  light.lane_id = 0;
  light.s = 40.0;
  // Red through the history window, green at the current frame.
  light.schedule = {{-100.0, world::LightState::Red},
                    {-0.05, world::LightState::Green}};
  w.traffic_lights.push_back(light);

  const auto& lane = w.lanes[0].centerline;
  const Pose ego(lane.position(25.0).x, lane.position(25.0).y,
                 lane.heading(25.0), 5.0);
  const auto frame = cfg.frame_for(ego, 0.0);
  const auto hist = stationary_history(ego, 0.0, cfg.dt, cfg.past_samples());
  const InputStack in = render_input(w, {}, {0}, hist, 0.0, frame, cfg, false);

  const double red_level = channel_max(in.channels, cfg.ch_lights());
  const double green_level =
      channel_max(in.channels, cfg.ch_lights() + cfg.scene_frames() - 1);
  CHECK(red_level == doctest::Approx(cfg.gray_red));
  CHECK(green_level == doctest::Approx(cfg.gray_green_or_unknown));
  CHECK(red_level > green_level);
  CHECK(cfg.gray_red > cfg.gray_yellow);
  CHECK(cfg.gray_yellow > cfg.gray_green_or_unknown);
}

TEST_CASE("past pose trail spacing is speed * dt / resolution along +v") {
  const RenderConfig cfg = RenderConfig::named_profile("paper");
  const Pose ego(0.0, 0.0, 0.0, 4.0);
  const auto frame = cfg.frame_for(ego, 0.0);
  const auto hist =
      straight_history(ego, 4.0, 0.0, cfg.dt, cfg.past_samples() + 4);
  const InputStack in =
      render_input(empty_world(), {}, {}, hist, 0.0, frame, cfg, false);

  // Expected dots: at (u0, v0 + k * s*dt/phi) for k = 0.. while in view.
  const double spacing = 4.0 * cfg.dt / cfg.resolution;  // 4 px
  const int expect_visible = static_cast<int>(
      std::floor((cfg.height_px - 1 - cfg.v0) / spacing)) + 1;
  CHECK(count_nonzero(in.channels, cfg.ch_past()) == expect_visible);
  for (int k = 0; k < expect_visible; ++k) {
    const int v = static_cast<int>(std::floor(cfg.v0 + k * spacing));
    CHECK(in.channels.at(cfg.ch_past(), v, static_cast<int>(cfg.u0)) == 1.0f);
  }

  // Dropout keeps only the current position.
  const InputStack dropped =
      render_input(empty_world(), {}, {}, hist, 0.0, frame, cfg, true);
  CHECK(count_nonzero(dropped.channels, cfg.ch_past()) == 1);
  CHECK(dropped.channels.at(cfg.ch_past(), static_cast<int>(cfg.v0),
                            static_cast<int>(cfg.u0)) == 1.0f);
}

TEST_CASE("render_input rejects short history") {
  const RenderConfig cfg = RenderConfig::named_profile("desk");
  const Pose ego;
  const auto frame = cfg.frame_for(ego, 0.0);
  const auto hist = stationary_history(ego, 0.0, cfg.dt, 5);
  CHECK_THROWS_AS(
      render_input(empty_world(), {}, {}, hist, 0.0, frame, cfg, false),
      InsufficientHistory);
}

TEST_CASE("rendering is byte-deterministic") {
  const RenderConfig cfg = RenderConfig::named_profile("desk");
  world::WorldSpec spec;
  spec.with_lights = true;
  const world::World w = world::generate_world(9, spec);
  const auto& lane = w.lanes[0].centerline;
  const Pose ego(lane.position(30.0).x, lane.position(30.0).y,
                 lane.heading(30.0), 6.0);
  const auto frame = cfg.frame_for(ego, 0.2);
  const auto hist = straight_history(ego, 6.0, 0.0, cfg.dt, cfg.past_samples());
  const InputStack a = render_input(w, {}, {0}, hist, 0.0, frame, cfg, false);
  const InputStack b = render_input(w, {}, {0}, hist, 0.0, frame, cfg, false);
  REQUIRE(a.channels.size() == b.channels.size());
  CHECK(std::memcmp(a.channels.data(), b.channels.data(),
                    a.channels.size() * sizeof(float)) == 0);
  for (float v : a.channels.v) {
    CHECK(v >= 0.0f);
    CHECK(v <= 1.0f);
  }
}

TEST_CASE("stationary expert targets are one-hot at the anchor pixel") {
  const RenderConfig cfg = RenderConfig::named_profile("desk");
  const Pose ego(2.0, -1.0, 0.5, 0.0);
  const auto frame = cfg.frame_for(ego, 0.0);
  Trajectory future;
  future.dt = cfg.dt;
  future.poses.assign(cfg.n_future + 1, ego);
  const TargetStack t = render_targets(future, {}, empty_world(), frame, cfg);
  for (int k = 0; k < cfg.n_future; ++k) {
    CHECK(t.coarse_px[k].first == static_cast<int>(cfg.u0));
    CHECK(t.coarse_px[k].second == static_cast<int>(cfg.v0));
    CHECK(t.subpixel[k].x == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(t.subpixel[k].y == doctest::Approx(0.0).epsilon(1e-9));
    // One-hot by construction: the materialized image sums to exactly 1.
    const TensorF onehot = t.onehot_image(k);
    double sum = 0.0;
    for (float v : onehot.v) sum += v;
    CHECK(sum == 1.0);
  }
}

TEST_CASE("ego box mask area matches the analytic footprint") {
  const RenderConfig cfg = RenderConfig::named_profile("paper");
  const Pose ego(0.0, 0.0, 0.0, 2.0);
  const auto frame = cfg.frame_for(ego, 0.0);
  Trajectory future;
  future.dt = cfg.dt;
  for (int i = 0; i <= cfg.n_future; ++i) {
    const Vec2 p = ego.position() + geom::unit(ego.theta) * (2.0 * cfg.dt * i);
    future.poses.emplace_back(p.x, p.y, ego.theta, 2.0);
  }
  const TargetStack t = render_targets(future, {}, empty_world(), frame, cfg);
  // 4.8 m x 2.1 m at 0.2 m/px = 24 x 10.5 px = 252 px^2.
  for (int k = 0; k < cfg.n_future; ++k) {
    const int area = count_nonzero(t.ego_box_masks, k);
    CHECK(std::abs(area - 252) <= 20);
  }
  for (float v : t.ego_box_masks.v) CHECK((v == 0.0f || v == 1.0f));
}

TEST_CASE("waypoints leaving the view raise WaypointOutOfView") {
  const RenderConfig cfg = RenderConfig::named_profile("desk");
  const Pose ego(0.0, 0.0, 0.0, 30.0);
  const auto frame = cfg.frame_for(ego, 0.0);
  Trajectory future;
  future.dt = cfg.dt;
  for (int i = 0; i <= cfg.n_future; ++i) {
    const Vec2 p = ego.position() + geom::unit(ego.theta) * (30.0 * cfg.dt * i);
    future.poses.emplace_back(p.x, p.y, ego.theta, 30.0);
  }
  CHECK_THROWS_AS(render_targets(future, {}, empty_world(), frame, cfg),
                  WaypointOutOfView);
}

TEST_CASE("axis-aligned box rasterization sets the exact pixel count") {
  geom::RasterFrame frame;
  frame.origin = Pose(0.0, 0.0, M_PI / 2.0, 0.0);  // heading +y = image up
  frame.width_px = 64;
  frame.height_px = 64;
  frame.u0 = 32.0;
  frame.v0 = 32.0;
  frame.resolution = 1.0;
  // 10 m x 4 m at 1 m/px, axis-aligned: exactly 10 x 4 = 40 pixels.
  const TensorF img = rasterize_oriented_box({0.0, 0.0}, M_PI / 2.0, 10.0, 4.0,
                                             frame);
  CHECK(count_nonzero(img, 0) == 40);
}

TEST_CASE("rotated box pixel count approximates the analytic area") {
  const RenderConfig cfg = RenderConfig::named_profile("paper");
  const Pose ego(0.0, 0.0, 0.0, 0.0);
  const auto frame = cfg.frame_for(ego, 0.0);
  const TensorF img = rasterize_oriented_box({5.0, 2.0}, M_PI / 4.0, 4.8, 2.1,
                                             frame);
  const double analytic = 4.8 * 2.1 / (cfg.resolution * cfg.resolution);
  CHECK(std::abs(count_nonzero(img, 0) - analytic) / analytic < 0.05);

  // Monte-Carlo point-in-box oracle over the bounding region.
  Rng rng(7);
  int hits = 0;
  const int samples = 200000;
  const Vec2 c{5.0, 2.0};
  const Vec2 f = geom::unit(M_PI / 4.0);
  const Vec2 l = f.perp_left();
  for (int i = 0; i < samples; ++i) {
    const Vec2 p{rng.uniform(-2.0, 12.0), rng.uniform(-5.0, 9.0)};
    const Vec2 d = p - c;
    if (std::abs(d.dot(f)) <= 2.4 && std::abs(d.dot(l)) <= 1.05) ++hits;
  }
  const double mc_area_px =
      (14.0 * 14.0) * (static_cast<double>(hits) / samples) /
      (cfg.resolution * cfg.resolution);
  CHECK(std::abs(count_nonzero(img, 0) - mc_area_px) / mc_area_px < 0.05);
}

TEST_CASE("boxes fully outside the frame rasterize to nothing") {
  const RenderConfig cfg = RenderConfig::named_profile("desk");
  const auto frame = cfg.frame_for(Pose(), 0.0);
  const TensorF img =
      rasterize_oriented_box({500.0, 500.0}, 0.3, 4.8, 2.1, frame);
  CHECK(count_nonzero(img, 0) == 0);
}

namespace {

// Nearest-neighbor rotation about (u0, v0) by the jitter angle. `valid`
// marks pixels whose source lies inside the unrotated image; outside it the
// composition is undefined (the jittered view sees world the source never
// rendered).
TensorF rotate_about_anchor(const TensorF& img, const RenderConfig& cfg,
                            double rho, std::vector<bool>* valid) {
  TensorF rot(1, img.h, img.w);
  valid->assign(img.size(), false);
  for (int y = 0; y < img.h; ++y)
    for (int x = 0; x < img.w; ++x) {
      const double du = (x + 0.5) - cfg.u0;
      const double dv = (y + 0.5) - cfg.v0;
      const double su = cfg.u0 + std::cos(rho) * du + std::sin(rho) * dv;
      const double sv = cfg.v0 - std::sin(rho) * du + std::cos(rho) * dv;
      const int ix = static_cast<int>(std::floor(su));
      const int iy = static_cast<int>(std::floor(sv));
      if (ix >= 0 && ix < img.w && iy >= 0 && iy < img.h) {
        rot.at(0, y, x) = img.at(0, iy, ix);
        (*valid)[static_cast<std::size_t>(y) * img.w + x] = true;
      }
    }
  return rot;
}

double mask_iou(const TensorF& a, const TensorF& b,
                const std::vector<bool>& valid) {
  int inter = 0, uni = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!valid[i]) continue;
    const bool pa = a.v[i] > 0.0f;
    const bool pb = b.v[i] > 0.0f;
    inter += (pa && pb) ? 1 : 0;
    uni += (pa || pb) ? 1 : 0;
  }
  return uni > 0 ? static_cast<double>(inter) / uni : 1.0;
}

}  // namespace

TEST_CASE("rotation jitter equals image-space rotation within IoU 0.9") {
  const RenderConfig cfg = RenderConfig::named_profile("paper");
  const Pose ego(0.0, 0.0, 0.4, 2.0);
  const double rho = 0.35;
  const auto frame0 = cfg.frame_for(ego, 0.0);
  const auto frame1 = cfg.frame_for(ego, rho);

  // A bus-sized box ahead-left of the agent, rendered through both frames.
  const Vec2 center = ego.position() + geom::unit(ego.theta) * 20.0 +
                      geom::unit(ego.theta).perp_left() * 5.0;
  const TensorF img0 = rasterize_oriented_box(center, 0.9, 10.0, 4.0, frame0);
  const TensorF img1 = rasterize_oriented_box(center, 0.9, 10.0, 4.0, frame1);
  std::vector<bool> valid;
  CHECK(mask_iou(rotate_about_anchor(img0, cfg, rho, &valid), img1, valid) >=
        0.9);

  // Same property on the (area-dominated) road mask.
  world::WorldSpec spec;
  spec.curviness = 0.015;
  const world::World w = world::generate_world(17, spec);
  const auto& lane = w.lanes[0].centerline;
  const Pose origin(lane.position(60.0).x, lane.position(60.0).y,
                    lane.heading(60.0), 4.0);
  Trajectory future;
  future.dt = cfg.dt;
  for (int i = 0; i <= cfg.n_future; ++i)
    future.poses.push_back(Pose(lane.position(60.0 + 4.0 * cfg.dt * i).x,
                                lane.position(60.0 + 4.0 * cfg.dt * i).y,
                                lane.heading(60.0 + 4.0 * cfg.dt * i), 4.0));
  const TargetStack t0 = render_targets(future, {}, w,
                                        cfg.frame_for(origin, 0.0), cfg);
  const TargetStack t1 = render_targets(future, {}, w,
                                        cfg.frame_for(origin, rho), cfg);
  CHECK(mask_iou(rotate_about_anchor(t0.road_mask, cfg, rho, &valid),
                 t1.road_mask, valid) >= 0.9);
}

TEST_CASE("geometry mask stroke width matches the agent width") {
  const RenderConfig cfg = RenderConfig::named_profile("desk");
  const Pose ego(0.0, 0.0, 0.0, 4.0);
  const auto frame = cfg.frame_for(ego, 0.0);
  Trajectory future;
  future.dt = cfg.dt;
  for (int i = 0; i <= cfg.n_future; ++i) {
    const Vec2 p = ego.position() + geom::unit(ego.theta) * (4.0 * cfg.dt * i);
    future.poses.emplace_back(p.x, p.y, ego.theta, 4.0);
  }
  const TargetStack t = render_targets(future, {}, empty_world(), frame, cfg);
  const double expect = cfg.ego_width / cfg.resolution;  // 4.2 px
  // The path runs straight up the image; measure row widths along it.
  int rows_checked = 0;
  for (int y = static_cast<int>(cfg.v0) - 10; y < static_cast<int>(cfg.v0);
       ++y) {
    int width = 0;
    for (int x = 0; x < t.geometry_mask.w; ++x)
      if (t.geometry_mask.at(0, y, x) > 0) ++width;
    if (width == 0) continue;
    ++rows_checked;
    CHECK(std::abs(width - expect) <= 1.0);
  }
  CHECK(rows_checked >= 8);
}

TEST_CASE("rendered examples round-trip through midsim-ex v1") {
  const RenderConfig cfg = RenderConfig::named_profile("desk");
  world::WorldSpec spec;
  const world::World w = world::generate_world(6, spec);
  const auto& lane = w.lanes[0].centerline;
  const Pose ego(lane.position(30.0).x, lane.position(30.0).y,
                 lane.heading(30.0), 5.0);
  const auto frame = cfg.frame_for(ego, -0.1);
  const auto hist = straight_history(ego, 5.0, 0.0, cfg.dt, cfg.past_samples());

  RenderedExample ex;
  ex.input = render_input(w, {}, {0}, hist, 0.0, frame, cfg, true);
  Trajectory future;
  future.dt = cfg.dt;
  for (int i = 0; i <= cfg.n_future; ++i) {
    const Vec2 p = ego.position() + geom::unit(ego.theta) * (5.0 * cfg.dt * i);
    future.poses.emplace_back(p.x, p.y, ego.theta, 5.0);
  }
  ex.targets = render_targets(future, {}, w, frame, cfg);
  ex.weight = 0.1f;
  ex.past_dropout = true;
  ex.perturbed = true;

  const std::string path = "/tmp/midsim_test_example.ex";
  save_example(path, ex, cfg);
  const RenderedExample back = load_example(path, cfg);
  CHECK(back.weight == ex.weight);
  CHECK(back.past_dropout == ex.past_dropout);
  CHECK(back.perturbed == ex.perturbed);
  CHECK(std::memcmp(back.input.channels.data(), ex.input.channels.data(),
                    ex.input.channels.size() * sizeof(float)) == 0);
  CHECK(std::memcmp(back.targets.ego_box_masks.data(),
                    ex.targets.ego_box_masks.data(),
                    ex.targets.ego_box_masks.size() * sizeof(float)) == 0);
  for (int k = 0; k < cfg.n_future; ++k) {
    CHECK(back.targets.waypoint_px[k].x == ex.targets.waypoint_px[k].x);
    CHECK(back.targets.theta_frame[k] == ex.targets.theta_frame[k]);
    CHECK(back.targets.speed[k] == ex.targets.speed[k]);
  }
  std::remove(path.c_str());
}
