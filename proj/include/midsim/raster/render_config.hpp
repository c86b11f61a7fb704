#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include "midsim/geom/frame.hpp"

namespace midsim::raster {

// Geometry and timing of the rendered top-down view. Three built-in
// profiles: "desk" (64 px, the training default here), "desk128" and
// "paper" (400 px) which share all timing parameters.
struct RenderConfig {
  std::string profile = "desk";
  int width_px = 64;
  int height_px = 64;
  double u0 = 32.0;
  double v0 = 51.0;
  double resolution = 0.5;  // meters per pixel
  double dt = 0.2;
  double t_scene = 1.0;
  double t_pose = 8.0;
  int n_future = 10;
  double rotation_jitter_range = 25.0 * M_PI / 180.0;

  // Traffic-light gray levels, brightest for red.
  double gray_red = 1.0;
  double gray_yellow = 0.6;
  double gray_green_or_unknown = 0.3;

  double speed_norm = 20.0;  // m/s rendered as full scale

  double ego_length = 4.8;
  double ego_width = 2.1;

  int scene_frames() const {
    return static_cast<int>(std::lround(t_scene / dt)) + 1;
  }
  int past_samples() const {
    return static_cast<int>(std::lround(t_pose / dt)) + 1;
  }

  // Channel layout: roadmap(3), lights(scene_frames), speed limit, route,
  // current agent box, dynamic boxes(scene_frames), past poses.
  int ch_roadmap() const { return 0; }
  int ch_lights() const { return 3; }
  int ch_speed() const { return 3 + scene_frames(); }
  int ch_route() const { return 4 + scene_frames(); }
  int ch_cur_box() const { return 5 + scene_frames(); }
  int ch_dynamic() const { return 6 + scene_frames(); }
  int ch_past() const { return 6 + 2 * scene_frames(); }
  int input_channels() const { return 7 + 2 * scene_frames(); }

  double buffer_s() const { return std::max(t_pose, t_scene); }

  geom::RasterFrame frame_for(const geom::Pose& origin,
                              double rotation_jitter) const {
    geom::RasterFrame f;
    f.origin = origin;
    f.rotation_jitter = rotation_jitter;
    f.width_px = width_px;
    f.height_px = height_px;
    f.u0 = u0;
    f.v0 = v0;
    f.resolution = resolution;
    return f;
  }

  std::uint64_t hash() const;

  static RenderConfig named_profile(const std::string& name);
};

}  // namespace midsim::raster
