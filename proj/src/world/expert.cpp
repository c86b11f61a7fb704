#include "midsim/world/expert.hpp"

#include <algorithm>
#include <cmath>

#include "midsim/core/error.hpp"

namespace midsim::world {

namespace {

// Lateral offset plan relative to the lane centerline: a merge-in ramp from
// the start offset plus avoidance bumps around static vehicles intruding
// into the lane.
class LateralPlan {
 public:
  LateralPlan(const Lane& lane, double s0, double lat0, double heading_err,
              double speed, const std::vector<DynamicAgent>& agents,
              const ExpertParams& p) {
    s0_ = s0;
    lat0_ = lat0;
    slope0_ = std::tan(std::clamp(heading_err, -1.2, 1.2));
    merge_len_ = std::max(10.0, 2.0 * speed);
    merge_active_ = std::abs(lat0) > 0.02 || std::abs(heading_err) > 0.02;

    for (const auto& agent : agents) {
      if (!agent.is_static()) continue;
      double lat_a = 0.0;
      const double s_a =
          lane.centerline.project(agent.trajectory.poses.front().position(),
                                  &lat_a);
      const double half_w = agent.box_width / 2.0;
      const double corridor = p.ego_half_width + p.nudge_clearance;
      // Skip vehicles fully clear of the straight-driving corridor.
      if (lat_a - half_w > corridor || lat_a + half_w < -corridor) continue;
      Bump b;
      b.s_lo = s_a - agent.box_length / 2.0 - 2.0;
      b.s_hi = s_a + agent.box_length / 2.0 + 2.0;
      b.ramp_in = p.nudge_ramp_in;
      b.ramp_out = p.nudge_ramp_out;
      b.offset = (lat_a <= 0.0) ? (lat_a + half_w) + corridor
                                : (lat_a - half_w) - corridor;
      bumps_.push_back(b);
    }
  }

  double at(double s) const {
    double lat = 0.0;
    if (merge_active_) {
      const double u = (s - s0_) / merge_len_;
      if (u <= 0.0) {
        lat += lat0_;
      } else if (u < 1.0) {
        // Cubic Hermite from (lat0, slope0) to (0, 0).
        const double h00 = 2 * u * u * u - 3 * u * u + 1;
        const double h10 = u * u * u - 2 * u * u + u;
        lat += h00 * lat0_ + h10 * slope0_ * merge_len_;
      }
    }
    double bump_val = 0.0;
    for (const auto& b : bumps_) {
      double w = 0.0;
      if (s >= b.s_lo && s <= b.s_hi) {
        w = 1.0;
      } else if (s > b.s_lo - b.ramp_in && s < b.s_lo) {
        const double u = (s - (b.s_lo - b.ramp_in)) / b.ramp_in;
        w = 0.5 - 0.5 * std::cos(u * M_PI);
      } else if (s > b.s_hi && s < b.s_hi + b.ramp_out) {
        const double u = (s - b.s_hi) / b.ramp_out;
        w = 0.5 + 0.5 * std::cos(u * M_PI);
      }
      const double v = b.offset * w;
      if (std::abs(v) > std::abs(bump_val)) bump_val = v;
    }
    return lat + bump_val;
  }

  double slope(double s) const {
    const double h = 0.25;
    return (at(s + h) - at(s - h)) / (2.0 * h);
  }

 private:
  struct Bump {
    double s_lo = 0.0, s_hi = 0.0, ramp_in = 10.0, ramp_out = 10.0;
    double offset = 0.0;
  };
  double s0_ = 0.0, lat0_ = 0.0, slope0_ = 0.0, merge_len_ = 10.0;
  bool merge_active_ = false;
  std::vector<Bump> bumps_;
};

struct StopPoint {
  double s_line = 0.0;
  bool is_sign = false;
  const TrafficLight* light = nullptr;
  bool served = false;
  double hold_timer = 0.0;
};

}  // namespace

Trajectory scripted_expert(const World& world, const std::vector<int>& route,
                           const Pose& start, double horizon, double dt,
                           const std::vector<DynamicAgent>& agents, double t0,
                           const ExpertParams& p) {
  if (route.empty()) throw NoPath("empty route");
  const Lane* lane = world.lane_by_id(route.front());
  if (lane == nullptr) throw NoPath("route lane not in world");
  for (int id : route)
    if (world.lane_by_id(id) == nullptr) throw NoPath("route lane not in world");

  double lat0 = 0.0;
  const double s0 = lane->centerline.project(start.position(), &lat0);
  if (std::abs(lat0) > 8.0) throw NoPath("start too far from route");
  const double heading_err =
      geom::wrap_angle(start.theta - lane->centerline.heading(s0));
  if (std::abs(heading_err) > M_PI / 2.0)
    throw NoPath("start opposes route direction");

  const LateralPlan lateral(*lane, s0, lat0, heading_err, start.speed, agents,
                            p);

  std::vector<StopPoint> stops;
  for (const auto& sign : world.stop_signs) {
    if (sign.lane_id != route.front()) continue;
    if (sign.s > s0 + 0.5)
      stops.push_back({sign.s, true, nullptr, false, 0.0});
  }
  for (const auto& light : world.traffic_lights) {
    if (light.lane_id != route.front()) continue;
    if (light.s > s0 + 0.5) stops.push_back({light.s, false, &light, false, 0.0});
  }
  // Implicit stop near the end of the mapped lane.
  stops.push_back({lane->centerline.length() - 5.0, true, nullptr, false, 0.0});

  const double dti = p.sim_dt;
  const int n_steps = static_cast<int>(std::ceil(horizon / dti + 1e-9));
  std::vector<double> s_path(n_steps + 1), v_path(n_steps + 1);
  double s = s0;
  double v = std::min(start.speed, lane->speed_limit);
  s_path[0] = s;
  v_path[0] = v;

  const double ego_half_len = 2.4;

  for (int i = 1; i <= n_steps; ++i) {
    const double t = t0 + (i - 1) * dti;
    double v_allow = lane->speed_limit;

    for (auto& stop : stops) {
      if (stop.served) continue;
      if (stop.light != nullptr) {
        const LightState st = stop.light->state_at(t);
        if (st == LightState::Green || st == LightState::Unknown) continue;
      }
      const double d = stop.s_line - p.stop_offset - s;
      if (d <= 0.08 && v <= 0.08) {
        v_allow = 0.0;
        if (stop.is_sign) {
          stop.hold_timer += dti;
          if (stop.hold_timer >= p.stop_hold_s) stop.served = true;
        }
      } else if (d > 0.0) {
        // Envelope at the position reached after this step, so the discrete
        // integration never overshoots it.
        const double d_next = std::max(0.0, d - v * dti);
        v_allow = std::min(v_allow, std::sqrt(2.0 * p.decel_max * d_next));
      } else {
        // Already past the line (light flipped late); keep going.
        stop.served = stop.is_sign;
      }
    }

    // Constant-time-gap follower behind the nearest moving in-lane leader.
    const DynamicAgent* lead = nullptr;
    double lead_s = 0.0, lead_v = 0.0;
    for (const auto& agent : agents) {
      if (agent.is_static()) continue;  // handled by the lateral plan
      const Pose ap = agent.pose_at(t);
      double lat_a = 0.0;
      const double s_a = lane->centerline.project(ap.position(), &lat_a);
      if (std::abs(lat_a) > 1.6) continue;
      if (s_a <= s) continue;
      if (lead == nullptr || s_a < lead_s) {
        lead = &agent;
        lead_s = s_a;
        lead_v = ap.speed;
      }
    }
    if (lead != nullptr) {
      const double gap = (lead_s - lead->box_length / 2.0) - (s + ego_half_len);
      const double gap_des = p.gap_standstill + p.gap_time * v;
      const double a_f = p.follow_kp_gap * (gap - gap_des) +
                         p.follow_kp_speed * (lead_v - v);
      const double v_follow =
          v + std::clamp(a_f, -p.decel_max, p.accel_max) * dti;
      v_allow = std::min(v_allow, std::max(v_follow, 0.0));
    }

    double v_next = std::min(v_allow, v + p.accel_max * dti);
    v_next = std::max(v_next, v - p.decel_max * dti);
    v_next = std::clamp(v_next, 0.0, lane->speed_limit);
    s += 0.5 * (v + v_next) * dti;
    v = v_next;
    s_path[i] = s;
    v_path[i] = v;
  }

  Trajectory out;
  out.start_time = t0;
  out.dt = dt;
  const int stride = static_cast<int>(std::round(dt / dti));
  if (stride < 1 || std::abs(stride * dti - dt) > 1e-9)
    throw DegenerateInput("expert output dt must be a multiple of sim_dt");
  for (int i = 0; i <= n_steps; i += stride) {
    const double si = s_path[i];
    const double li = lateral.at(si);
    const Vec2 pos = lane->centerline.offset_point(si, li);
    const double theta =
        lane->centerline.heading(si) + std::atan(lateral.slope(si));
    out.poses.emplace_back(pos.x, pos.y, theta, v_path[i]);
  }
  return out;
}

}  // namespace midsim::world
