#pragma once

#include <cmath>
#include <vector>

#include "midsim/core/error.hpp"

namespace midsim::geom {

struct Vec2 {
  double x = 0.0, y = 0.0;

  Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double k) const { return {x * k, y * k}; }
  double dot(Vec2 o) const { return x * o.x + y * o.y; }
  double cross(Vec2 o) const { return x * o.y - y * o.x; }
  double norm() const { return std::hypot(x, y); }
  Vec2 normalized() const {
    const double n = norm();
    return n > 0 ? Vec2{x / n, y / n} : Vec2{1.0, 0.0};
  }
  Vec2 perp_left() const { return {-y, x}; }
};

inline Vec2 unit(double heading) { return {std::cos(heading), std::sin(heading)}; }

// Wraps into (-pi, pi].
inline double wrap_angle(double a) {
  a = std::remainder(a, 2.0 * M_PI);
  if (a <= -M_PI) a += 2.0 * M_PI;
  return a;
}

inline double lerp(double a, double b, double t) { return a + (b - a) * t; }

// Shortest-path angular interpolation.
inline double lerp_angle(double a, double b, double t) {
  return wrap_angle(a + wrap_angle(b - a) * t);
}

struct Pose {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;  // radians, (-pi, pi]
  double speed = 0.0;  // m/s, >= 0

  Pose() = default;
  Pose(double x_, double y_, double theta_, double speed_)
      : x(x_), y(y_), theta(wrap_angle(theta_)), speed(speed_ < 0 ? 0 : speed_) {}

  Vec2 position() const { return {x, y}; }
  Vec2 heading_vec() const { return unit(theta); }
  Vec2 velocity() const { return unit(theta) * speed; }
};

// Uniformly sampled pose sequence.
struct Trajectory {
  double start_time = 0.0;
  double dt = 0.1;
  std::vector<Pose> poses;

  int size() const { return static_cast<int>(poses.size()); }
  double end_time() const { return start_time + dt * (size() - 1); }
  double time_at(int i) const { return start_time + dt * i; }

  // Pose at arbitrary time; clamps outside the covered span. Position is
  // interpolated linearly, heading along the shortest angular path.
  Pose sample(double t) const {
    if (poses.empty()) throw DegenerateInput("empty trajectory");
    const double u = (t - start_time) / dt;
    if (u <= 0.0) return poses.front();
    if (u >= size() - 1) return poses.back();
    const int i = static_cast<int>(u);
    const double a = u - i;
    const Pose& p = poses[i];
    const Pose& q = poses[i + 1];
    return Pose(lerp(p.x, q.x, a), lerp(p.y, q.y, a),
                lerp_angle(p.theta, q.theta, a), lerp(p.speed, q.speed, a));
  }

  void validate() const {
    if (poses.size() < 2) throw DegenerateInput("trajectory needs >= 2 poses");
    if (!(dt > 0.0)) throw DegenerateInput("trajectory dt must be > 0");
  }
};

// Checks |d(p)/dt - s_i| <= tol_frac * max(s_i, 1) on every interior step.
inline bool speeds_consistent(const Trajectory& traj, double tol_frac = 0.2) {
  for (int i = 0; i + 1 < traj.size(); ++i) {
    const double step =
        (traj.poses[i + 1].position() - traj.poses[i].position()).norm();
    const double s = traj.poses[i].speed;
    if (std::abs(step / traj.dt - s) > tol_frac * std::max(s, 1.0)) return false;
  }
  return true;
}

// Resamples at dt_new: position linear within segments, heading along the
// shortest path, speed linear. Endpoints are preserved when the span divides
// evenly; a trailing remainder shorter than dt_new is dropped.
Trajectory resample(const Trajectory& traj, double dt_new);

}  // namespace midsim::geom
