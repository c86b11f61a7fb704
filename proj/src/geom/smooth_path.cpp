#include "midsim/geom/smooth_path.hpp"

#include <algorithm>
#include <cmath>

#include "midsim/core/error.hpp"

namespace midsim::geom {

namespace {

// Quintic coefficients for one coordinate on [0, T] with p(0)=p0, p'(0)=v0,
// p''(0)=0, p(T)=p1, p'(T)=v1, p''(T)=0.
void solve_quintic(double p0, double v0, double p1, double v1, double T,
                   double c[6]) {
  c[0] = p0;
  c[1] = v0;
  c[2] = 0.0;
  const double a = (p1 - p0 - v0 * T) / (T * T * T);
  const double b = (v1 - v0) / (T * T);
  const double z = (12.0 * a - 6.0 * b) / 2.0;  // == c5 * T^2
  const double y = b - 3.0 * a - 2.0 * z;       // == c4 * T
  const double x = a - y - z;                   // == c3
  c[3] = x;
  c[4] = y / T;
  c[5] = z / (T * T);
}

double poly(const double c[6], double tau) {
  return c[0] + tau * (c[1] + tau * (c[2] + tau * (c[3] + tau * (c[4] + tau * c[5]))));
}

double dpoly(const double c[6], double tau) {
  return c[1] + tau * (2 * c[2] + tau * (3 * c[3] + tau * (4 * c[4] + tau * 5 * c[5])));
}

double ddpoly(const double c[6], double tau) {
  return 2 * c[2] + tau * (6 * c[3] + tau * (12 * c[4] + tau * 20 * c[5]));
}

constexpr double kStationarySpeed = 1e-6;

}  // namespace

Vec2 QuinticSegment::position(double t) const {
  const double tau = t - t0;
  return {poly(cx, tau), poly(cy, tau)};
}

Vec2 QuinticSegment::velocity(double t) const {
  const double tau = t - t0;
  return {dpoly(cx, tau), dpoly(cy, tau)};
}

Vec2 QuinticSegment::acceleration(double t) const {
  const double tau = t - t0;
  return {ddpoly(cx, tau), ddpoly(cy, tau)};
}

const QuinticSegment& SmoothPath::segment_at(double t) const {
  for (const auto& seg : segments_)
    if (t <= seg.t1) return seg;
  return segments_.back();
}

double SmoothPath::curvature(double t) const {
  const Vec2 v = velocity(t);
  const double sp = v.norm();
  if (sp < kStationarySpeed) return 0.0;
  const Vec2 a = acceleration(t);
  return std::abs(v.cross(a)) / (sp * sp * sp);
}

double SmoothPath::max_curvature(int samples_per_segment) const {
  double best = 0.0;
  for (const auto& seg : segments_) {
    for (int i = 0; i <= samples_per_segment; ++i) {
      const double t =
          seg.t0 + (seg.t1 - seg.t0) * (static_cast<double>(i) / samples_per_segment);
      best = std::max(best, curvature(t));
    }
  }
  return best;
}

Pose SmoothPath::pose_at(double t) const {
  const Vec2 p = position(t);
  Vec2 v = velocity(t);
  double sp = v.norm();
  if (sp < kStationarySpeed) {
    // Hold the nearest moving direction through stationary samples.
    const double span = end_time() - start_time();
    const double h = std::max(span * 1e-4, 1e-6);
    for (double probe = h; probe <= span; probe *= 2.0) {
      Vec2 vb = velocity(std::max(start_time(), t - probe));
      Vec2 vf = velocity(std::min(end_time(), t + probe));
      if (vb.norm() >= kStationarySpeed) {
        v = vb;
        break;
      }
      if (vf.norm() >= kStationarySpeed) {
        v = vf;
        break;
      }
    }
    sp = 0.0;
  }
  const double heading = (v.norm() >= kStationarySpeed) ? std::atan2(v.y, v.x) : 0.0;
  return Pose(p.x, p.y, heading, sp);
}

Trajectory SmoothPath::sample(double t_begin, double dt, int count) const {
  Trajectory out;
  out.start_time = t_begin;
  out.dt = dt;
  out.poses.reserve(count);
  for (int i = 0; i < count; ++i) out.poses.push_back(pose_at(t_begin + i * dt));
  return out;
}

SmoothPath fit_smooth_path(const std::vector<TimedPose>& waypoints,
                           bool fix_endpoint_headings) {
  if (waypoints.size() < 2) throw DegenerateInput("need >= 2 waypoints");
  for (std::size_t i = 0; i + 1 < waypoints.size(); ++i)
    if (!(waypoints[i + 1].t > waypoints[i].t))
      throw DegenerateInput("waypoint times must be strictly increasing");

  std::vector<Vec2> vel(waypoints.size());
  for (std::size_t i = 0; i < waypoints.size(); ++i)
    vel[i] = waypoints[i].pose.velocity();
  if (!fix_endpoint_headings) {
    const auto chord_dir = [&](std::size_t a, std::size_t b) {
      return (waypoints[b].pose.position() - waypoints[a].pose.position())
          .normalized();
    };
    vel.front() = chord_dir(0, 1) * waypoints.front().pose.speed;
    vel.back() = chord_dir(waypoints.size() - 2, waypoints.size() - 1) *
                 waypoints.back().pose.speed;
  }

  std::vector<QuinticSegment> segments;
  segments.reserve(waypoints.size() - 1);
  for (std::size_t i = 0; i + 1 < waypoints.size(); ++i) {
    QuinticSegment seg;
    seg.t0 = waypoints[i].t;
    seg.t1 = waypoints[i + 1].t;
    const double T = seg.t1 - seg.t0;
    solve_quintic(waypoints[i].pose.x, vel[i].x, waypoints[i + 1].pose.x,
                  vel[i + 1].x, T, seg.cx);
    solve_quintic(waypoints[i].pose.y, vel[i].y, waypoints[i + 1].pose.y,
                  vel[i + 1].y, T, seg.cy);
    segments.push_back(seg);
  }
  return SmoothPath(std::move(segments));
}

Trajectory fit_smooth_trajectory(const std::vector<TimedPose>& waypoints,
                                 bool fix_endpoint_headings, double dt) {
  const SmoothPath path = fit_smooth_path(waypoints, fix_endpoint_headings);
  const double span = path.end_time() - path.start_time();
  const int count = static_cast<int>(std::floor(span / dt + 1e-9)) + 1;
  return path.sample(path.start_time(), dt, count);
}

}  // namespace midsim::geom
