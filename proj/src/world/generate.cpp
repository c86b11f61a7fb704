#include "midsim/world/generate.hpp"

#include <cmath>

#include "midsim/core/error.hpp"
#include "midsim/core/rng.hpp"

namespace midsim::world {

namespace {

// Smooth curvature field: control values every 40 m, cosine-interpolated,
// scaled so |kappa| never exceeds `curviness`.
struct CurvatureField {
  std::vector<double> controls;  // in [-1, 1]
  double spacing = 40.0;
  double scale = 0.0;

  double at(double s) const {
    if (controls.size() < 2 || scale == 0.0) return 0.0;
    const double u = std::clamp(s / spacing, 0.0,
                                static_cast<double>(controls.size() - 1) - 1e-9);
    const std::size_t i = static_cast<std::size_t>(u);
    const double a = u - i;
    const double w = 0.5 - 0.5 * std::cos(a * M_PI);
    return scale * (controls[i] * (1.0 - w) + controls[i + 1] * w);
  }
};

}  // namespace

World generate_world(std::uint64_t seed, const WorldSpec& spec) {
  if (!spec.valid()) throw DegenerateInput("world spec out of range");
  Rng rng = derived_rng(seed, "world");

  CurvatureField field;
  // Offset lanes curve tighter than the base path on the inside of a bend;
  // scale the field so every lane centerline stays under spec.curviness.
  const double max_lane_offset = (spec.n_lanes - 1) * spec.lane_width / 2.0;
  field.scale =
      0.98 * spec.curviness / (1.0 + spec.curviness * max_lane_offset);
  const int n_controls =
      static_cast<int>(std::ceil(spec.length_m / field.spacing)) + 2;
  for (int i = 0; i < n_controls; ++i)
    field.controls.push_back(rng.uniform(-1.0, 1.0));

  // Base path down the middle of the corridor.
  const double ds = 0.5;
  double heading = rng.uniform(-M_PI, M_PI);
  Vec2 pos{0.0, 0.0};
  std::vector<Vec2> base;
  base.push_back(pos);
  for (double s = 0.0; s < spec.length_m; s += ds) {
    heading += field.at(s) * ds;
    pos = pos + geom::unit(heading) * ds;
    base.push_back(pos);
  }
  const ArcPath base_path(base);

  World world;
  const double total_w = spec.n_lanes * spec.lane_width;

  const auto offset_polyline = [&](double lateral, double step) {
    std::vector<Vec2> pts;
    for (double s = 0.0; s <= base_path.length(); s += step)
      pts.push_back(base_path.offset_point(s, lateral));
    return pts;
  };

  for (int i = 0; i < spec.n_lanes; ++i) {
    Lane lane;
    lane.id = i;
    lane.width = spec.lane_width;
    lane.speed_limit = spec.speed_limit;
    const double lateral = (i + 0.5) * spec.lane_width - total_w / 2.0;
    lane.centerline = ArcPath(offset_polyline(lateral, 1.0));
    world.lanes.push_back(std::move(lane));
  }

  // Road polygon: corridor boundary (left edge forward, right edge back).
  const auto left_edge = offset_polyline(total_w / 2.0, 2.0);
  auto right_edge = offset_polyline(-total_w / 2.0, 2.0);
  world.road_polygon = left_edge;
  world.road_polygon.insert(world.road_polygon.end(), right_edge.rbegin(),
                            right_edge.rend());
  world.curbs.push_back(left_edge);
  world.curbs.push_back(right_edge);

  if (spec.with_stop_signs) {
    const int count = 1 + rng.uniform_int(2);
    for (int i = 0; i < count; ++i) {
      StopSign sign;
      sign.lane_id = 0;
      sign.s = rng.uniform(0.25, 0.85) * base_path.length();
      world.stop_signs.push_back(sign);
    }
  }

  if (spec.with_lights) {
    TrafficLight light;
    light.lane_id = 0;
    light.s = rng.uniform(0.3, 0.8) * base_path.length();
    // Fixed cycle with a random phase: green 12 s, yellow 2 s, red 8 s.
    const double period = 22.0;
    double t = -rng.uniform(0.0, period);
    while (t < 240.0) {
      light.schedule.push_back({t, LightState::Green});
      light.schedule.push_back({t + 12.0, LightState::Yellow});
      light.schedule.push_back({t + 14.0, LightState::Red});
      t += period;
    }
    world.traffic_lights.push_back(std::move(light));
  }

  // Occasional crosswalk, render-only.
  if (rng.bernoulli(0.5)) {
    const double s = rng.uniform(0.3, 0.7) * base_path.length();
    std::vector<Vec2> stripe = {
        base_path.offset_point(s, -total_w / 2.0),
        base_path.offset_point(s, total_w / 2.0),
    };
    world.crosswalks.push_back(std::move(stripe));
  }

  return world;
}

}  // namespace midsim::world
