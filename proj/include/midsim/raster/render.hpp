#pragma once

#include <utility>
#include <vector>

#include "midsim/core/tensor.hpp"
#include "midsim/raster/render_config.hpp"
#include "midsim/world/world.hpp"

namespace midsim::raster {

using geom::Pose;
using geom::RasterFrame;
using geom::Trajectory;
using geom::Vec2;

struct InputStack {
  TensorF channels;  // (input_channels, H, W), values in [0,1]
};

// Ground truth for one rendered example, steps k = 1..N.
struct TargetStack {
  std::vector<Vec2> waypoint_px;                 // real-valued (u,v)
  std::vector<std::pair<int, int>> coarse_px;    // floor(waypoint)
  std::vector<Vec2> subpixel;                    // frac(waypoint), [0,1)^2
  std::vector<double> theta_frame;               // heading in frame coords
  std::vector<double> speed;                     // m/s
  TensorF ego_box_masks;                         // (N,H,W) binary
  TensorF object_masks;                          // (N,H,W) binary
  TensorF road_mask;                             // (1,H,W) binary
  TensorF geometry_mask;                         // (1,H,W) binary

  // Materializes the one-hot waypoint image for step k (0-based).
  TensorF onehot_image(int k) const;
};

// Renders the input channel stack for the scene at time t_now in the given
// frame. ego_history must cover [t_now - t_pose, t_now] (throws
// InsufficientHistory otherwise). With past_dropout only the current
// position survives in the past-pose channel.
InputStack render_input(const world::World& w,
                        const std::vector<world::DynamicAgent>& agents,
                        const std::vector<int>& route,
                        const Trajectory& ego_history, double t_now,
                        const RasterFrame& frame, const RenderConfig& cfg,
                        bool past_dropout);

// Renders ground truth from the expert future. expert_future.poses[0] is
// the pose at t0 (the frame origin time); poses[1..N] are the targets.
// Throws WaypointOutOfView when a target waypoint leaves the image.
TargetStack render_targets(const Trajectory& expert_future,
                           const std::vector<world::DynamicAgent>& agents,
                           const world::World& w, const RasterFrame& frame,
                           const RenderConfig& cfg);

// Copies of the single-channel feeds the recurrent heads start from.
TensorF current_box_channel(const InputStack& input, const RenderConfig& cfg);
TensorF current_objects_channel(const InputStack& input,
                                const RenderConfig& cfg);

}  // namespace midsim::raster
