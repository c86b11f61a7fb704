#pragma once

#include "midsim/geom/pose.hpp"

namespace midsim::geom {

// Top-down raster frame anchored at the agent. The agent pose maps to the
// fixed pixel (u0, v0); its forward direction (rotated by rotation_jitter)
// points toward decreasing v. resolution is meters per pixel.
struct RasterFrame {
  Pose origin;
  double rotation_jitter = 0.0;  // radians
  int width_px = 0;
  int height_px = 0;
  double u0 = 0.0;
  double v0 = 0.0;
  double resolution = 0.0;

  bool valid() const {
    return width_px > 0 && height_px > 0 && resolution > 0.0 && u0 >= 0.0 &&
           u0 < width_px && v0 >= 0.0 && v0 < height_px;
  }

  double forward_angle() const { return origin.theta + rotation_jitter; }
  double forward_range_m() const { return v0 * resolution; }

  // Real-valued pixel coordinates; out-of-view points come back out of
  // bounds and are clipped by the caller.
  Vec2 world_to_raster(Vec2 p) const {
    const double psi = forward_angle();
    const Vec2 d = p - origin.position();
    const double fwd = d.x * std::cos(psi) + d.y * std::sin(psi);
    const double right = d.x * std::sin(psi) - d.y * std::cos(psi);
    return {u0 + right / resolution, v0 - fwd / resolution};
  }

  Vec2 raster_to_world(double u, double v) const {
    const double psi = forward_angle();
    const double right = (u - u0) * resolution;
    const double fwd = (v0 - v) * resolution;
    return {origin.x + fwd * std::cos(psi) + right * std::sin(psi),
            origin.y + fwd * std::sin(psi) - right * std::cos(psi)};
  }

  bool in_view(Vec2 raster_pt) const {
    return raster_pt.x >= 0.0 && raster_pt.x < width_px && raster_pt.y >= 0.0 &&
           raster_pt.y < height_px;
  }

  // Headings as seen by the frame (0 = straight up the image).
  double heading_to_frame(double theta_world) const {
    return wrap_angle(theta_world - forward_angle());
  }
  double heading_from_frame(double theta_frame) const {
    return wrap_angle(theta_frame + forward_angle());
  }
};

}  // namespace midsim::geom
