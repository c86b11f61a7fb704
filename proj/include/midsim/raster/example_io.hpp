#pragma once

#include <string>

#include "midsim/raster/render.hpp"

namespace midsim::raster {

struct RenderedExample {
  InputStack input;
  TargetStack targets;
  float weight = 1.0f;
  bool past_dropout = false;
  bool perturbed = false;
};

// `midsim-ex v1`: little-endian binary. Header (magic, W, H, total channel
// count, input channel count, N, flags), then all channels as row-major
// 32-bit floats (inputs, ego box masks, object masks, road, geometry), then
// per-step target scalars (u, v, du, dv, theta, speed) as 64-bit floats.
void save_example(const std::string& path, const RenderedExample& ex,
                  const RenderConfig& cfg);
RenderedExample load_example(const std::string& path, const RenderConfig& cfg);

}  // namespace midsim::raster
