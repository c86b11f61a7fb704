#include "midsim/raster/render.hpp"

#include <algorithm>
#include <cmath>

#include "midsim/core/error.hpp"
#include "midsim/core/rng.hpp"
#include "midsim/raster/canvas.hpp"

namespace midsim::raster {

namespace {

std::vector<Vec2> to_raster(const std::vector<Vec2>& world_pts,
                            const RasterFrame& frame) {
  std::vector<Vec2> out;
  out.reserve(world_pts.size());
  for (const auto& p : world_pts) out.push_back(frame.world_to_raster(p));
  return out;
}

// Centerline points of one lane restricted to [s_lo, s_hi].
std::vector<Vec2> lane_span(const world::Lane& lane, double s_lo, double s_hi,
                            double step = 1.0) {
  std::vector<Vec2> pts;
  s_lo = std::max(0.0, s_lo);
  s_hi = std::min(lane.centerline.length(), s_hi);
  for (double s = s_lo; s < s_hi; s += step)
    pts.push_back(lane.centerline.position(s));
  pts.push_back(lane.centerline.position(s_hi));
  return pts;
}

std::vector<Vec2> lane_corridor(const world::Lane& lane) {
  std::vector<Vec2> poly;
  const double len = lane.centerline.length();
  for (double s = 0.0; s <= len; s += 2.0)
    poly.push_back(lane.centerline.offset_point(s, lane.width / 2.0));
  for (double s = len; s >= 0.0; s -= 2.0)
    poly.push_back(lane.centerline.offset_point(s, -lane.width / 2.0));
  return poly;
}

double light_level(world::LightState st, const RenderConfig& cfg) {
  switch (st) {
    case world::LightState::Red: return cfg.gray_red;
    case world::LightState::Yellow: return cfg.gray_yellow;
    case world::LightState::Green:
    case world::LightState::Unknown: return cfg.gray_green_or_unknown;
  }
  return 0.0;
}

constexpr double kLightApproach = 25.0;  // colored lane span before the line
constexpr double kStopLineHalfWidth = 0.5;

}  // namespace

TensorF TargetStack::onehot_image(int k) const {
  TensorF img(1, ego_box_masks.h, ego_box_masks.w);
  img.at(0, coarse_px[k].second, coarse_px[k].first) = 1.0f;
  return img;
}

InputStack render_input(const world::World& w,
                        const std::vector<world::DynamicAgent>& agents,
                        const std::vector<int>& route,
                        const Trajectory& ego_history, double t_now,
                        const RasterFrame& frame, const RenderConfig& cfg,
                        bool past_dropout) {
  if (ego_history.start_time > t_now - cfg.t_pose + 1e-6 ||
      ego_history.end_time() < t_now - 1e-6)
    throw InsufficientHistory("ego history does not cover [t-T_pose, t]");

  InputStack stack;
  stack.channels = TensorF(cfg.input_channels(), cfg.height_px, cfg.width_px);
  TensorF& img = stack.channels;
  const int nf = cfg.scene_frames();

  // Roadmap: surface+curbs, centerlines+crosswalks, stop lines.
  fill_polygon(img, cfg.ch_roadmap() + 0, to_raster(w.road_polygon, frame),
               0.4f);
  for (const auto& curb : w.curbs)
    draw_polyline(img, cfg.ch_roadmap() + 0, to_raster(curb, frame), 1.0f);
  for (const auto& lane : w.lanes)
    draw_polyline(img, cfg.ch_roadmap() + 1,
                  to_raster(lane.centerline.points(), frame), 0.85f);
  for (const auto& cw : w.crosswalks)
    draw_polyline(img, cfg.ch_roadmap() + 1, to_raster(cw, frame), 0.5f);
  for (const auto& sign : w.stop_signs) {
    const world::Lane* lane = w.lane_by_id(sign.lane_id);
    if (lane == nullptr) continue;
    const std::vector<Vec2> line = {
        lane->centerline.offset_point(sign.s, -lane->width / 2.0),
        lane->centerline.offset_point(sign.s, lane->width / 2.0)};
    draw_polyline(img, cfg.ch_roadmap() + 2, to_raster(line, frame), 1.0f);
  }

  // Traffic lights: one frame per past scene step, oldest first.
  for (int f = 0; f < nf; ++f) {
    const double t = t_now - cfg.t_scene + f * cfg.dt;
    for (const auto& light : w.traffic_lights) {
      const world::Lane* lane = w.lane_by_id(light.lane_id);
      if (lane == nullptr) continue;
      const double level = light_level(light.state_at(t), cfg);
      draw_polyline(img, cfg.ch_lights() + f,
                    to_raster(lane_span(*lane, light.s - kLightApproach,
                                        light.s),
                              frame),
                    static_cast<float>(level));
      const std::vector<Vec2> line = {
          lane->centerline.offset_point(light.s, -lane->width / 2.0),
          lane->centerline.offset_point(light.s, lane->width / 2.0)};
      draw_polyline(img, cfg.ch_lights() + f, to_raster(line, frame),
                    static_cast<float>(level));
    }
  }

  // Speed limit: lane centers in proportion to their limit.
  for (const auto& lane : w.lanes) {
    const float level = static_cast<float>(
        std::clamp(lane.speed_limit / cfg.speed_norm, 0.0, 1.0));
    draw_polyline(img, cfg.ch_speed(), to_raster(lane.centerline.points(), frame),
                  level);
  }

  // Route corridor.
  for (int id : route) {
    const world::Lane* lane = w.lane_by_id(id);
    if (lane == nullptr) continue;
    fill_polygon(img, cfg.ch_route(), to_raster(lane_corridor(*lane), frame),
                 1.0f);
  }

  // Current agent box, centered at (u0, v0) by construction.
  fill_oriented_box(img, cfg.ch_cur_box(), frame, frame.origin.position(),
                    frame.origin.theta, cfg.ego_length, cfg.ego_width, 1.0f);

  // Dynamic boxes: one frame per past scene step.
  for (int f = 0; f < nf; ++f) {
    const double t = t_now - cfg.t_scene + f * cfg.dt;
    for (const auto& agent : agents) {
      const Pose p = agent.pose_at(t);
      fill_oriented_box(img, cfg.ch_dynamic() + f, frame, p.position(), p.theta,
                        agent.box_length, agent.box_width, 1.0f);
    }
  }

  // Past agent poses: a trail of single-pixel dots, or just the current
  // position under dropout.
  if (past_dropout) {
    const Vec2 uv = frame.world_to_raster(frame.origin.position());
    set_pixel(img, cfg.ch_past(), static_cast<int>(std::floor(uv.x)),
              static_cast<int>(std::floor(uv.y)), 1.0f);
  } else {
    for (int i = 0; i < cfg.past_samples(); ++i) {
      const double t = t_now - cfg.t_pose + i * cfg.dt;
      const Vec2 uv = frame.world_to_raster(ego_history.sample(t).position());
      set_pixel(img, cfg.ch_past(), static_cast<int>(std::floor(uv.x)),
                static_cast<int>(std::floor(uv.y)), 1.0f);
    }
  }

  return stack;
}

TargetStack render_targets(const Trajectory& expert_future,
                           const std::vector<world::DynamicAgent>& agents,
                           const world::World& w, const RasterFrame& frame,
                           const RenderConfig& cfg) {
  const int n = cfg.n_future;
  if (expert_future.size() < n + 1)
    throw DegenerateInput("expert future shorter than N samples");

  TargetStack t;
  t.ego_box_masks = TensorF(n, cfg.height_px, cfg.width_px);
  t.object_masks = TensorF(n, cfg.height_px, cfg.width_px);
  t.road_mask = TensorF(1, cfg.height_px, cfg.width_px);
  t.geometry_mask = TensorF(1, cfg.height_px, cfg.width_px);

  for (int k = 1; k <= n; ++k) {
    const Pose& pose = expert_future.poses[k];
    const Vec2 uv = frame.world_to_raster(pose.position());
    const int cu = static_cast<int>(std::floor(uv.x));
    const int cv = static_cast<int>(std::floor(uv.y));
    if (cu < 0 || cu >= cfg.width_px || cv < 0 || cv >= cfg.height_px)
      throw WaypointOutOfView("future waypoint outside the rendered view");
    t.waypoint_px.push_back(uv);
    t.coarse_px.push_back({cu, cv});
    t.subpixel.push_back({uv.x - cu, uv.y - cv});
    t.theta_frame.push_back(frame.heading_to_frame(pose.theta));
    t.speed.push_back(pose.speed);

    fill_oriented_box(t.ego_box_masks, k - 1, frame, pose.position(),
                      pose.theta, cfg.ego_length, cfg.ego_width, 1.0f);

    const double tk = expert_future.start_time + k * cfg.dt;
    for (const auto& agent : agents) {
      const Pose ap = agent.pose_at(tk);
      fill_oriented_box(t.object_masks, k - 1, frame, ap.position(), ap.theta,
                        agent.box_length, agent.box_width, 1.0f);
    }
  }

  fill_polygon(t.road_mask, 0, to_raster(w.road_polygon, frame), 1.0f);

  // Target geometry: the future path densified 4x and stroked one agent
  // width thick.
  std::vector<Vec2> dense;
  const int per_step = 4;
  for (int k = 0; k < n; ++k) {
    const Pose& a = expert_future.poses[k];
    const Pose& b = expert_future.poses[k + 1];
    for (int i = 0; i < per_step; ++i) {
      const double u = static_cast<double>(i) / per_step;
      dense.push_back(frame.world_to_raster(
          {geom::lerp(a.x, b.x, u), geom::lerp(a.y, b.y, u)}));
    }
  }
  dense.push_back(frame.world_to_raster(expert_future.poses[n].position()));
  stroke_polyline(t.geometry_mask, 0, dense,
                  cfg.ego_width / 2.0 / cfg.resolution, 1.0f);

  return t;
}

TensorF current_box_channel(const InputStack& input, const RenderConfig& cfg) {
  TensorF out(1, input.channels.h, input.channels.w);
  const float* src = input.channels.plane(cfg.ch_cur_box());
  std::copy(src, src + out.plane_size(), out.data());
  return out;
}

TensorF current_objects_channel(const InputStack& input,
                                const RenderConfig& cfg) {
  TensorF out(1, input.channels.h, input.channels.w);
  const float* src = input.channels.plane(cfg.ch_dynamic() + cfg.scene_frames() - 1);
  std::copy(src, src + out.plane_size(), out.data());
  return out;
}

std::uint64_t RenderConfig::hash() const {
  std::uint64_t h = fnv1a("midsim-render-config");
  const auto mix_d = [&h](double v) {
    std::uint64_t bits;
    static_assert(sizeof(bits) == sizeof(v));
    __builtin_memcpy(&bits, &v, sizeof(bits));
    h = hash_mix(h, bits);
  };
  h = hash_mix(h, static_cast<std::uint64_t>(width_px));
  h = hash_mix(h, static_cast<std::uint64_t>(height_px));
  mix_d(u0);
  mix_d(v0);
  mix_d(resolution);
  mix_d(dt);
  mix_d(t_scene);
  mix_d(t_pose);
  h = hash_mix(h, static_cast<std::uint64_t>(n_future));
  mix_d(rotation_jitter_range);
  mix_d(gray_red);
  mix_d(gray_yellow);
  mix_d(gray_green_or_unknown);
  mix_d(speed_norm);
  mix_d(ego_length);
  mix_d(ego_width);
  return h;
}

RenderConfig RenderConfig::named_profile(const std::string& name) {
  RenderConfig cfg;
  cfg.profile = name;
  if (name == "desk") {
    return cfg;
  }
  if (name == "desk128") {
    cfg.width_px = 128;
    cfg.height_px = 128;
    cfg.u0 = 64.0;
    cfg.v0 = 102.0;
    cfg.resolution = 0.5;
    return cfg;
  }
  if (name == "paper") {
    cfg.width_px = 400;
    cfg.height_px = 400;
    cfg.u0 = 200.0;
    cfg.v0 = 320.0;
    cfg.resolution = 0.2;
    return cfg;
  }
  if (name == "tiny") {  // gradient-check scale
    cfg.width_px = 16;
    cfg.height_px = 16;
    cfg.u0 = 8.0;
    cfg.v0 = 12.0;
    cfg.resolution = 0.5;
    cfg.n_future = 3;
    return cfg;
  }
  throw ConfigMismatch("unknown render profile: " + name);
}

}  // namespace midsim::raster
