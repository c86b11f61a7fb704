#pragma once

#include <string>
#include <vector>

#include "midsim/geom/pose.hpp"

namespace midsim::world {

using geom::Pose;
using geom::Trajectory;
using geom::Vec2;

// Polyline with cumulative arc length; the parameterization for lanes.
class ArcPath {
 public:
  ArcPath() = default;
  explicit ArcPath(std::vector<Vec2> pts);

  bool empty() const { return pts_.empty(); }
  double length() const { return cum_.empty() ? 0.0 : cum_.back(); }
  const std::vector<Vec2>& points() const { return pts_; }

  Vec2 position(double s) const;
  Vec2 tangent(double s) const;
  double heading(double s) const;
  Vec2 offset_point(double s, double lateral) const {
    return position(s) + tangent(s).perp_left() * lateral;
  }

  // Arc length of the closest point on the path; also reports the signed
  // lateral offset (positive = left of travel) when out parameters given.
  double project(Vec2 p, double* lateral = nullptr) const;

 private:
  std::vector<Vec2> pts_;
  std::vector<double> cum_;
};

struct Lane {
  int id = 0;
  ArcPath centerline;
  double width = 3.4;        // meters
  double speed_limit = 8.0;  // m/s
};

struct StopSign {
  int lane_id = 0;
  double s = 0.0;  // arc-length position of the stop line
};

enum class LightState { Red, Yellow, Green, Unknown };

struct LightPhase {
  double t = 0.0;  // state holds from t until the next phase
  LightState state = LightState::Unknown;
};

struct TrafficLight {
  int lane_id = 0;
  double s = 0.0;
  std::vector<LightPhase> schedule;  // sorted by t

  LightState state_at(double t) const {
    LightState st = LightState::Unknown;
    for (const auto& ph : schedule) {
      if (ph.t <= t) st = ph.state;
      else break;
    }
    return st;
  }
};

struct World {
  std::vector<Lane> lanes;
  std::vector<Vec2> road_polygon;  // closed (first != last, implicit edge)
  std::vector<StopSign> stop_signs;
  std::vector<TrafficLight> traffic_lights;
  std::vector<std::vector<Vec2>> crosswalks;  // render-only
  std::vector<std::vector<Vec2>> curbs;       // render-only

  const Lane* lane_by_id(int id) const {
    for (const auto& l : lanes)
      if (l.id == id) return &l;
    return nullptr;
  }
};

bool point_in_polygon(const std::vector<Vec2>& poly, Vec2 p);

struct DynamicAgent {
  int id = 0;
  double box_length = 4.6;
  double box_width = 2.0;
  Trajectory trajectory;  // scripted; clamped outside its span
  bool policy_driven = false;

  Pose pose_at(double t) const { return trajectory.sample(t); }
  bool is_static() const;
};

enum class ScenarioKind {
  ParkedCarNudge,
  PerturbRecovery,
  SlowLeadCar,
  StopSign,
  TrafficLight,
};

enum class SuccessCriterion {
  ReachEnd,
  PassObject,
  Recover,
  FollowWithoutCollision,
};

struct Scenario {
  std::string id;
  ScenarioKind kind = ScenarioKind::StopSign;
  int variation = 0;
  World world;
  std::vector<int> route;
  Pose ego_start;            // pose at policy handoff (after the buffer)
  double ego_initial_speed = 0.0;
  std::vector<DynamicAgent> agents;
  double duration = 30.0;    // seconds, includes the buffer
  double buffer_s = 8.0;     // history warm-up before handoff
  SuccessCriterion success = SuccessCriterion::ReachEnd;
  double goal_s = 0.0;       // route arc length that counts as completed
  Trajectory warmup;         // replayed ego log over [0, buffer_s]
  double ego_length = 4.8;
  double ego_width = 2.1;
};

const char* to_string(ScenarioKind k);
const char* to_string(SuccessCriterion c);
const char* to_string(LightState s);
bool scenario_kind_from_string(const std::string& s, ScenarioKind* out);

}  // namespace midsim::world
