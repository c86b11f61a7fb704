#include "midsim/raster/canvas.hpp"

#include <algorithm>
#include <cmath>

namespace midsim::raster {

void set_pixel(TensorF& img, int ch, int x, int y, float value) {
  if (x < 0 || x >= img.w || y < 0 || y >= img.h) return;
  float& px = img.at(ch, y, x);
  px = std::max(px, value);
}

void draw_segment(TensorF& img, int ch, Vec2 a, Vec2 b, float value) {
  const double len = (b - a).norm();
  const int steps = std::max(1, static_cast<int>(std::ceil(len * 4.0)));
  for (int i = 0; i <= steps; ++i) {
    const Vec2 p = a + (b - a) * (static_cast<double>(i) / steps);
    set_pixel(img, ch, static_cast<int>(std::floor(p.x)),
              static_cast<int>(std::floor(p.y)), value);
  }
}

void draw_polyline(TensorF& img, int ch, const std::vector<Vec2>& pts,
                   float value) {
  for (std::size_t i = 0; i + 1 < pts.size(); ++i)
    draw_segment(img, ch, pts[i], pts[i + 1], value);
}

void fill_polygon(TensorF& img, int ch, const std::vector<Vec2>& poly,
                  float value) {
  if (poly.size() < 3) return;
  double y_min = poly[0].y, y_max = poly[0].y;
  for (const auto& p : poly) {
    y_min = std::min(y_min, p.y);
    y_max = std::max(y_max, p.y);
  }
  const int j0 = std::max(0, static_cast<int>(std::floor(y_min - 0.5)));
  const int j1 = std::min(img.h - 1, static_cast<int>(std::ceil(y_max)));
  std::vector<double> xs;
  for (int j = j0; j <= j1; ++j) {
    const double y = j + 0.5;
    xs.clear();
    const std::size_t n = poly.size();
    for (std::size_t i = 0, k = n - 1; i < n; k = i++) {
      const Vec2& a = poly[k];
      const Vec2& b = poly[i];
      if ((b.y > y) != (a.y > y))
        xs.push_back(b.x + (y - b.y) * (a.x - b.x) / (a.y - b.y));
    }
    std::sort(xs.begin(), xs.end());
    for (std::size_t i = 0; i + 1 < xs.size(); i += 2) {
      const int x0 = std::max(0, static_cast<int>(std::ceil(xs[i] - 0.5)));
      const int x1 = std::min(
          img.w - 1, static_cast<int>(std::floor(xs[i + 1] - 0.5 - 1e-12)));
      for (int x = x0; x <= x1; ++x) set_pixel(img, ch, x, j, value);
    }
  }
}

void fill_quad(TensorF& img, int ch, const Vec2 corners[4], float value) {
  double x_min = corners[0].x, x_max = corners[0].x;
  double y_min = corners[0].y, y_max = corners[0].y;
  for (int i = 1; i < 4; ++i) {
    x_min = std::min(x_min, corners[i].x);
    x_max = std::max(x_max, corners[i].x);
    y_min = std::min(y_min, corners[i].y);
    y_max = std::max(y_max, corners[i].y);
  }
  const int i0 = std::max(0, static_cast<int>(std::floor(x_min - 0.5)));
  const int i1 = std::min(img.w - 1, static_cast<int>(std::ceil(x_max)));
  const int j0 = std::max(0, static_cast<int>(std::floor(y_min - 0.5)));
  const int j1 = std::min(img.h - 1, static_cast<int>(std::ceil(y_max)));

  // Winding sign from the (assumed convex) corner loop.
  double winding = 0.0;
  for (int i = 0; i < 4; ++i)
    winding += (corners[(i + 1) % 4] - corners[i])
                   .cross(corners[(i + 2) % 4] - corners[(i + 1) % 4]);
  const double sign = winding >= 0 ? 1.0 : -1.0;

  for (int j = j0; j <= j1; ++j) {
    for (int i = i0; i <= i1; ++i) {
      const Vec2 c{i + 0.5, j + 0.5};
      bool inside = true;
      for (int e = 0; e < 4 && inside; ++e) {
        const Vec2& a = corners[e];
        const Vec2& b = corners[(e + 1) % 4];
        if (sign * (b - a).cross(c - a) < 0.0) inside = false;
      }
      if (inside) set_pixel(img, ch, i, j, value);
    }
  }
}

void stroke_polyline(TensorF& img, int ch, const std::vector<Vec2>& pts,
                     double half_width_px, float value) {
  if (pts.empty()) return;
  double x_min = pts[0].x, x_max = pts[0].x, y_min = pts[0].y, y_max = pts[0].y;
  for (const auto& p : pts) {
    x_min = std::min(x_min, p.x);
    x_max = std::max(x_max, p.x);
    y_min = std::min(y_min, p.y);
    y_max = std::max(y_max, p.y);
  }
  const int i0 = std::max(0, static_cast<int>(std::floor(x_min - half_width_px - 1)));
  const int i1 =
      std::min(img.w - 1, static_cast<int>(std::ceil(x_max + half_width_px + 1)));
  const int j0 = std::max(0, static_cast<int>(std::floor(y_min - half_width_px - 1)));
  const int j1 =
      std::min(img.h - 1, static_cast<int>(std::ceil(y_max + half_width_px + 1)));

  const auto dist2_to_segment = [](Vec2 p, Vec2 a, Vec2 b) {
    const Vec2 ab = b - a;
    const double len2 = ab.dot(ab);
    double t = len2 > 0 ? (p - a).dot(ab) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    const Vec2 q = a + ab * t;
    return (p - q).dot(p - q);
  };

  const double r2 = half_width_px * half_width_px;
  for (int j = j0; j <= j1; ++j) {
    for (int i = i0; i <= i1; ++i) {
      const Vec2 c{i + 0.5, j + 0.5};
      bool hit = pts.size() == 1 && (c - pts[0]).dot(c - pts[0]) <= r2;
      for (std::size_t k = 0; k + 1 < pts.size() && !hit; ++k)
        hit = dist2_to_segment(c, pts[k], pts[k + 1]) <= r2;
      if (hit) set_pixel(img, ch, i, j, value);
    }
  }
}

void fill_oriented_box(TensorF& img, int ch, const geom::RasterFrame& frame,
                       Vec2 center_world, double heading_world, double length,
                       double width, float value) {
  const Vec2 f = geom::unit(heading_world);
  const Vec2 l = f.perp_left();
  Vec2 corners[4];
  const Vec2 half_f = f * (length / 2.0);
  const Vec2 half_l = l * (width / 2.0);
  corners[0] = frame.world_to_raster(center_world + half_f + half_l);
  corners[1] = frame.world_to_raster(center_world + half_f - half_l);
  corners[2] = frame.world_to_raster(center_world - half_f - half_l);
  corners[3] = frame.world_to_raster(center_world - half_f + half_l);
  fill_quad(img, ch, corners, value);
}

TensorF rasterize_oriented_box(Vec2 center_world, double heading_world,
                               double length, double width,
                               const geom::RasterFrame& frame) {
  TensorF img(1, frame.height_px, frame.width_px);
  fill_oriented_box(img, 0, frame, center_world, heading_world, length, width,
                    1.0f);
  return img;
}

}  // namespace midsim::raster
