#pragma once

#include <vector>

#include "midsim/core/tensor.hpp"
#include "midsim/geom/frame.hpp"

namespace midsim::raster {

using geom::Vec2;

// Deterministic drawing primitives on one channel of a (C,H,W) float image.
// All coordinates are real-valued raster coordinates; pixel (i,j) covers
// [i,i+1) x [j,j+1) with center (i+0.5, j+0.5). Writes blend by max so
// channel values stay in [0,1]. No anti-aliasing anywhere.

void set_pixel(TensorF& img, int ch, int x, int y, float value);

// Marks floor(p) of points sampled every quarter pixel along the segment.
void draw_segment(TensorF& img, int ch, Vec2 a, Vec2 b, float value);

void draw_polyline(TensorF& img, int ch, const std::vector<Vec2>& pts,
                   float value);

// Even-odd scanline fill sampled at pixel centers.
void fill_polygon(TensorF& img, int ch, const std::vector<Vec2>& poly,
                  float value);

// Sets pixels whose center lies inside the convex quad (any winding).
void fill_quad(TensorF& img, int ch, const Vec2 corners[4], float value);

// Sets pixels whose center is within half_width_px of the polyline.
void stroke_polyline(TensorF& img, int ch, const std::vector<Vec2>& pts,
                     double half_width_px, float value);

// Oriented box given in world coordinates, rasterized through the frame.
void fill_oriented_box(TensorF& img, int ch, const geom::RasterFrame& frame,
                       Vec2 center_world, double heading_world, double length,
                       double width, float value);

// Standalone single-channel variant of the above (the box-mask primitive).
TensorF rasterize_oriented_box(Vec2 center_world, double heading_world,
                               double length, double width,
                               const geom::RasterFrame& frame);

}  // namespace midsim::raster
