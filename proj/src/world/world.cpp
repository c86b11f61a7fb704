#include "midsim/world/world.hpp"

#include <algorithm>
#include <cmath>

#include "midsim/core/error.hpp"

namespace midsim::world {

ArcPath::ArcPath(std::vector<Vec2> pts) : pts_(std::move(pts)) {
  if (pts_.size() < 2) throw DegenerateInput("arc path needs >= 2 points");
  cum_.resize(pts_.size());
  cum_[0] = 0.0;
  for (std::size_t i = 1; i < pts_.size(); ++i)
    cum_[i] = cum_[i - 1] + (pts_[i] - pts_[i - 1]).norm();
}

Vec2 ArcPath::position(double s) const {
  if (s <= 0.0) return pts_.front();
  if (s >= length()) return pts_.back();
  const auto it = std::upper_bound(cum_.begin(), cum_.end(), s);
  const std::size_t i = static_cast<std::size_t>(it - cum_.begin()) - 1;
  const double seg = cum_[i + 1] - cum_[i];
  const double a = seg > 0 ? (s - cum_[i]) / seg : 0.0;
  return pts_[i] + (pts_[i + 1] - pts_[i]) * a;
}

Vec2 ArcPath::tangent(double s) const {
  std::size_t i;
  if (s <= 0.0) {
    i = 0;
  } else if (s >= length()) {
    i = pts_.size() - 2;
  } else {
    const auto it = std::upper_bound(cum_.begin(), cum_.end(), s);
    i = static_cast<std::size_t>(it - cum_.begin()) - 1;
  }
  return (pts_[i + 1] - pts_[i]).normalized();
}

double ArcPath::heading(double s) const {
  const Vec2 t = tangent(s);
  return std::atan2(t.y, t.x);
}

double ArcPath::project(Vec2 p, double* lateral) const {
  double best_d2 = std::numeric_limits<double>::max();
  double best_s = 0.0;
  Vec2 best_tan{1.0, 0.0};
  Vec2 best_pt = pts_.front();
  for (std::size_t i = 0; i + 1 < pts_.size(); ++i) {
    const Vec2 a = pts_[i];
    const Vec2 b = pts_[i + 1];
    const Vec2 ab = b - a;
    const double len2 = ab.dot(ab);
    double t = len2 > 0 ? (p - a).dot(ab) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    const Vec2 q = a + ab * t;
    const double d2 = (p - q).dot(p - q);
    if (d2 < best_d2) {
      best_d2 = d2;
      best_s = cum_[i] + std::sqrt(len2) * t;
      best_tan = ab.normalized();
      best_pt = q;
    }
  }
  if (lateral != nullptr) {
    const Vec2 d = p - best_pt;
    *lateral = best_tan.cross(d) >= 0 ? d.norm() : -d.norm();
  }
  return best_s;
}

bool point_in_polygon(const std::vector<Vec2>& poly, Vec2 p) {
  bool inside = false;
  const std::size_t n = poly.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2& a = poly[j];
    const Vec2& b = poly[i];
    if ((b.y > p.y) != (a.y > p.y)) {
      const double x_cross = b.x + (p.y - b.y) * (a.x - b.x) / (a.y - b.y);
      if (p.x < x_cross) inside = !inside;
    }
  }
  return inside;
}

bool DynamicAgent::is_static() const {
  if (trajectory.poses.empty()) return true;
  const Vec2 p0 = trajectory.poses.front().position();
  for (const auto& p : trajectory.poses)
    if (p.speed > 0.05 || (p.position() - p0).norm() > 0.05) return false;
  return true;
}

const char* to_string(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::ParkedCarNudge: return "ParkedCarNudge";
    case ScenarioKind::PerturbRecovery: return "PerturbRecovery";
    case ScenarioKind::SlowLeadCar: return "SlowLeadCar";
    case ScenarioKind::StopSign: return "StopSign";
    case ScenarioKind::TrafficLight: return "TrafficLight";
  }
  return "?";
}

const char* to_string(SuccessCriterion c) {
  switch (c) {
    case SuccessCriterion::ReachEnd: return "ReachEnd";
    case SuccessCriterion::PassObject: return "PassObject";
    case SuccessCriterion::Recover: return "Recover";
    case SuccessCriterion::FollowWithoutCollision:
      return "FollowWithoutCollision";
  }
  return "?";
}

const char* to_string(LightState s) {
  switch (s) {
    case LightState::Red: return "Red";
    case LightState::Yellow: return "Yellow";
    case LightState::Green: return "Green";
    case LightState::Unknown: return "Unknown";
  }
  return "?";
}

bool scenario_kind_from_string(const std::string& s, ScenarioKind* out) {
  for (ScenarioKind k :
       {ScenarioKind::ParkedCarNudge, ScenarioKind::PerturbRecovery,
        ScenarioKind::SlowLeadCar, ScenarioKind::StopSign,
        ScenarioKind::TrafficLight}) {
    if (s == to_string(k)) {
      *out = k;
      return true;
    }
  }
  return false;
}

}  // namespace midsim::world
