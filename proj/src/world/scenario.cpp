#include "midsim/world/scenario.hpp"

#include <cmath>

#include "midsim/core/error.hpp"
#include "midsim/core/rng.hpp"
#include "midsim/world/expert.hpp"
#include "midsim/world/generate.hpp"

namespace midsim::world {

namespace {

constexpr double kBufferS = 8.0;  // max(T_pose, T_scene) under both profiles
constexpr double kLogDt = 0.2;

std::string scenario_id(ScenarioKind kind, int variation, std::uint64_t seed) {
  return std::string(to_string(kind)) + "_v" + std::to_string(variation) +
         "_s" + std::to_string(seed);
}

DynamicAgent static_agent(int id, Pose pose, double length, double width,
                          double duration) {
  DynamicAgent agent;
  agent.id = id;
  agent.box_length = length;
  agent.box_width = width;
  agent.trajectory.start_time = 0.0;
  agent.trajectory.dt = duration;
  agent.trajectory.poses = {pose, pose};
  return agent;
}

// Ego log from the lane start; the warmup is its first kBufferS seconds and
// the handoff pose is wherever the expert is at that moment.
void attach_expert_warmup(Scenario& sc, double start_s, double start_speed) {
  const Lane& lane = sc.world.lanes[0];
  const Pose start(lane.centerline.position(start_s).x,
                   lane.centerline.position(start_s).y,
                   lane.centerline.heading(start_s), start_speed);
  sc.warmup = scripted_expert(sc.world, sc.route, start, kBufferS, kLogDt,
                              sc.agents, 0.0);
  sc.ego_start = sc.warmup.poses.back();
  sc.ego_initial_speed = start_speed;
}

Scenario make_parked_car_nudge(int variation, std::uint64_t seed) {
  const int geom_idx = variation / 5;
  const int speed_idx = variation % 5;
  static constexpr double kCurviness[4] = {0.0, 0.008, 0.012, 0.018};
  static constexpr double kSpeeds[5] = {3.0, 4.0, 5.0, 6.0, 7.0};

  WorldSpec wspec;
  wspec.n_lanes = 2;
  wspec.curviness = kCurviness[geom_idx];
  wspec.with_stop_signs = false;
  wspec.with_lights = false;
  wspec.length_m = 320.0;

  Scenario sc;
  sc.kind = ScenarioKind::ParkedCarNudge;
  sc.variation = variation;
  sc.world = generate_world(hash_mix(seed, fnv1a("pcn") + geom_idx), wspec);
  sc.route = {0};
  sc.success = SuccessCriterion::PassObject;
  sc.buffer_s = kBufferS;

  const double v = kSpeeds[speed_idx];
  const double start_s = 10.0;
  const double handoff_s = start_s + v * kBufferS;
  const double parked_s = handoff_s + 30.0;
  const double sign_s = parked_s + 22.0;
  sc.goal_s = sign_s + 8.0;
  sc.duration = kBufferS + 6.0 + 120.0 / v;

  const Lane& lane = sc.world.lanes[0];
  sc.world.stop_signs.push_back({0, sign_s});

  // Shoulder vehicle intruding 0.8 m into the ego lane.
  const double intrusion = 0.8;
  const double park_w = 2.0, park_l = 4.6;
  const double lat = -(lane.width / 2.0 + park_w / 2.0 - intrusion);
  const Vec2 pos = lane.centerline.offset_point(parked_s, lat);
  sc.agents.push_back(static_agent(
      1, Pose(pos.x, pos.y, lane.centerline.heading(parked_s), 0.0), park_l,
      park_w, sc.duration));

  attach_expert_warmup(sc, start_s, v);
  sc.id = scenario_id(sc.kind, variation, seed);
  return sc;
}

Scenario make_perturb_recovery(int variation, std::uint64_t seed) {
  static constexpr double kOffsets[4] = {0.4, 0.7, 1.0, 1.3};
  static constexpr double kHeadingErr[5] = {-0.25, -0.12, 0.0, 0.12, 0.25};
  static constexpr double kSpeeds[5] = {2.0, 3.0, 4.0, 5.0, 6.0};
  static constexpr double kCurviness[4] = {0.012, 0.016, 0.020, 0.024};

  const int group = variation / 5;
  const int sub = variation % 5;
  const double offset = kOffsets[group] * ((variation % 2 == 0) ? 1.0 : -1.0);
  const double heading_err = kHeadingErr[sub];
  const double speed = kSpeeds[sub];

  WorldSpec wspec;
  wspec.n_lanes = 2;
  wspec.curviness = kCurviness[group];
  wspec.with_stop_signs = false;
  wspec.with_lights = false;
  wspec.length_m = 360.0;

  Scenario sc;
  sc.kind = ScenarioKind::PerturbRecovery;
  sc.variation = variation;
  sc.world = generate_world(hash_mix(seed, fnv1a("rec") + group), wspec);
  sc.route = {0};
  sc.success = SuccessCriterion::Recover;
  sc.buffer_s = kBufferS;
  sc.duration = kBufferS + 20.0;
  sc.goal_s = sc.world.lanes[0].centerline.length() - 20.0;

  const Lane& lane = sc.world.lanes[0];
  const double handoff_s = 60.0;
  const Vec2 pos = lane.centerline.offset_point(handoff_s, offset);
  const double theta =
      geom::wrap_angle(lane.centerline.heading(handoff_s) + heading_err);
  sc.ego_start = Pose(pos.x, pos.y, theta, speed);
  sc.ego_initial_speed = speed;

  // Drift history: a straight constant-speed line ending at the handoff
  // pose, as if the agent had been carried off the lane.
  sc.warmup.start_time = 0.0;
  sc.warmup.dt = kLogDt;
  const Vec2 dir = geom::unit(theta);
  const int n = static_cast<int>(std::round(kBufferS / kLogDt)) + 1;
  for (int i = 0; i < n; ++i) {
    const double back = (n - 1 - i) * kLogDt * speed;
    const Vec2 q = pos - dir * back;
    sc.warmup.poses.emplace_back(q.x, q.y, theta, speed);
  }
  sc.id = scenario_id(sc.kind, variation, seed);
  return sc;
}

Scenario make_slow_lead_car(int variation, std::uint64_t seed) {
  static constexpr double kEgoSpeeds[5] = {4.0, 5.0, 6.0, 7.0, 8.0};
  static constexpr double kLeadFrac[4] = {0.2, 0.4, 0.6, 0.8};
  const double v_e = kEgoSpeeds[variation % 5];
  const double v_l = std::max(0.8, kLeadFrac[variation / 5] * v_e);

  WorldSpec wspec;
  wspec.n_lanes = 2;
  wspec.curviness = 0.0;
  wspec.with_stop_signs = false;
  wspec.with_lights = false;
  wspec.length_m = 420.0;

  Scenario sc;
  sc.kind = ScenarioKind::SlowLeadCar;
  sc.variation = variation;
  sc.world = generate_world(hash_mix(seed, fnv1a("slc")), wspec);
  sc.route = {0};
  sc.success = SuccessCriterion::FollowWithoutCollision;
  sc.buffer_s = kBufferS;
  sc.duration = kBufferS + 25.0;
  sc.goal_s = sc.world.lanes[0].centerline.length() - 20.0;

  const Lane& lane = sc.world.lanes[0];
  const double start_s = 10.0;
  const double handoff_s = start_s + v_e * kBufferS;
  const double gap_at_handoff = 22.0 + 2.0 * v_e;
  const double lead_s0 = handoff_s + gap_at_handoff - v_l * kBufferS;

  DynamicAgent lead;
  lead.id = 1;
  lead.box_length = 4.6;
  lead.box_width = 2.0;
  lead.trajectory.start_time = 0.0;
  lead.trajectory.dt = kLogDt;
  const int n = static_cast<int>(std::ceil(sc.duration / kLogDt)) + 2;
  for (int i = 0; i < n; ++i) {
    const double s = lead_s0 + v_l * i * kLogDt;
    const Vec2 q = lane.centerline.position(s);
    lead.trajectory.poses.emplace_back(q.x, q.y, lane.centerline.heading(s),
                                       v_l);
  }
  sc.agents.push_back(std::move(lead));

  attach_expert_warmup(sc, start_s, v_e);
  sc.id = scenario_id(sc.kind, variation, seed);
  return sc;
}

Scenario make_stop_sign(int variation, std::uint64_t seed) {
  static constexpr double kCurviness[4] = {0.0, 0.008, 0.014, 0.020};
  static constexpr double kSpeeds[5] = {3.0, 4.0, 5.0, 6.0, 7.0};
  const int geom_idx = variation / 5;
  const double v = kSpeeds[variation % 5];

  WorldSpec wspec;
  wspec.n_lanes = 2;
  wspec.curviness = kCurviness[geom_idx];
  wspec.with_stop_signs = false;
  wspec.with_lights = false;
  wspec.length_m = 320.0;

  Scenario sc;
  sc.kind = ScenarioKind::StopSign;
  sc.variation = variation;
  sc.world = generate_world(hash_mix(seed, fnv1a("sign") + geom_idx), wspec);
  sc.route = {0};
  sc.success = SuccessCriterion::ReachEnd;
  sc.buffer_s = kBufferS;

  const double start_s = 10.0;
  const double handoff_s = start_s + v * kBufferS;
  const double sign_s = handoff_s + std::max(25.0, v * v / 6.0 + 15.0);
  sc.world.stop_signs.push_back({0, sign_s});
  sc.goal_s = sign_s + 10.0;
  sc.duration = kBufferS + 10.0 + 100.0 / v;

  attach_expert_warmup(sc, start_s, v);
  sc.id = scenario_id(sc.kind, variation, seed);
  return sc;
}

Scenario make_traffic_light(int variation, std::uint64_t seed) {
  static constexpr double kCurviness[4] = {0.0, 0.006, 0.012, 0.018};
  static constexpr double kSpeeds[5] = {3.0, 4.0, 5.0, 6.0, 7.0};
  const int geom_idx = variation / 5;
  const double v = kSpeeds[variation % 5];

  WorldSpec wspec;
  wspec.n_lanes = 2;
  wspec.curviness = kCurviness[geom_idx];
  wspec.with_stop_signs = false;
  wspec.with_lights = false;
  wspec.length_m = 320.0;

  Scenario sc;
  sc.kind = ScenarioKind::TrafficLight;
  sc.variation = variation;
  sc.world = generate_world(hash_mix(seed, fnv1a("light") + geom_idx), wspec);
  sc.route = {0};
  sc.success = SuccessCriterion::ReachEnd;
  sc.buffer_s = kBufferS;

  const double start_s = 10.0;
  const double handoff_s = start_s + v * kBufferS;
  const double light_s = handoff_s + 30.0 + 2.0 * v;
  // Red through the approach, turning green only after a stopped wait.
  const double eta = kBufferS + (light_s - handoff_s) / v;
  const double t_green = eta + 4.0;
  TrafficLight light;
  light.lane_id = 0;
  light.s = light_s;
  light.schedule = {{0.0, LightState::Red}, {t_green, LightState::Green}};
  sc.world.traffic_lights.push_back(std::move(light));

  sc.goal_s = light_s + 10.0;
  sc.duration = t_green + 8.0 + 60.0 / v;

  attach_expert_warmup(sc, start_s, v);
  sc.id = scenario_id(sc.kind, variation, seed);
  return sc;
}

}  // namespace

Scenario make_scenario(ScenarioKind kind, int variation_index,
                       std::uint64_t seed) {
  if (variation_index < 0 || variation_index >= kScenarioVariations)
    throw BadIndex("scenario variation out of range");
  switch (kind) {
    case ScenarioKind::ParkedCarNudge:
      return make_parked_car_nudge(variation_index, seed);
    case ScenarioKind::PerturbRecovery:
      return make_perturb_recovery(variation_index, seed);
    case ScenarioKind::SlowLeadCar:
      return make_slow_lead_car(variation_index, seed);
    case ScenarioKind::StopSign:
      return make_stop_sign(variation_index, seed);
    case ScenarioKind::TrafficLight:
      return make_traffic_light(variation_index, seed);
  }
  throw BadIndex("unknown scenario kind");
}

Scenario ablate(const Scenario& scenario, AblationToggle toggle) {
  Scenario out = scenario;
  switch (toggle) {
    case AblationToggle::RemoveStopSigns:
      out.world.stop_signs.clear();
      break;
    case AblationToggle::RemoveDynamicAgents:
      out.agents.clear();
      break;
  }
  return out;
}

}  // namespace midsim::world
