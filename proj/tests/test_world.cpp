#include <cmath>
#include <set>
#include <sstream>

#include "doctest.h"
#include "midsim/core/error.hpp"
#include "midsim/world/expert.hpp"
#include "midsim/world/generate.hpp"
#include "midsim/world/scenario.hpp"
#include "midsim/world/scenario_io.hpp"
#include "support/oracles.hpp"

using namespace midsim;
using namespace midsim::world;

namespace {

Scenario wrap_world(World w) {
  Scenario sc;
  sc.world = std::move(w);
  sc.route = {0};
  sc.warmup.poses = {Pose(), Pose()};
  sc.warmup.dt = 1.0;
  return sc;
}

std::vector<geom::Vec2> centerline_pts(const World& w) {
  return w.lanes[0].centerline.points();
}

}  // namespace

TEST_CASE("generate_world is deterministic per seed") {
  WorldSpec spec;
  spec.with_lights = true;
  const std::string a = scenario_to_string(wrap_world(generate_world(7, spec)));
  const std::string b = scenario_to_string(wrap_world(generate_world(7, spec)));
  const std::string c = scenario_to_string(wrap_world(generate_world(8, spec)));
  CHECK(a == b);
  CHECK(a != c);
}

TEST_CASE("curviness zero gives straight centerlines") {
  WorldSpec spec;
  spec.curviness = 0.0;
  const World w = generate_world(3, spec);
  CHECK(oracles::fd_max_curvature(centerline_pts(w), 1.0) < 1e-9);
}

TEST_CASE("centerline curvature stays under the requested bound") {
  WorldSpec spec;
  spec.curviness = 0.1;
  spec.length_m = 500.0;
  const World w = generate_world(11, spec);
  // Allow the polyline discretization a little slack over the field bound.
  CHECK(oracles::fd_max_curvature(centerline_pts(w), 1.0) <= 0.1 * 1.02);
}

TEST_CASE("lane centerlines lie inside the road polygon") {
  WorldSpec spec;
  spec.curviness = 0.03;
  const World w = generate_world(5, spec);
  for (const auto& lane : w.lanes) {
    const auto& pts = lane.centerline.points();
    for (std::size_t i = 2; i + 2 < pts.size(); ++i)
      CHECK(point_in_polygon(w.road_polygon, pts[i]));
  }
}

TEST_CASE("expert cruises a straight empty lane at the limit") {
  WorldSpec spec;
  spec.curviness = 0.0;
  spec.with_stop_signs = false;
  World w = generate_world(2, spec);
  const auto& lane = w.lanes[0].centerline;
  const Pose start(lane.position(10.0).x, lane.position(10.0).y,
                   lane.heading(10.0), 8.0);
  const Trajectory traj = scripted_expert(w, {0}, start, 20.0, 0.2);
  for (const auto& p : traj.poses) {
    CHECK(p.speed == doctest::Approx(8.0).epsilon(1e-9));
    double lat = 0.0;
    lane.project(p.position(), &lat);
    CHECK(std::abs(lat) < 0.2);
  }
}

TEST_CASE("expert stops at a stop sign and resumes") {
  WorldSpec spec;
  spec.curviness = 0.0;
  spec.with_stop_signs = false;
  World w = generate_world(2, spec);
  w.stop_signs.push_back({0, 40.0});
  const auto& lane = w.lanes[0].centerline;
  const Pose start(lane.position(10.0).x, lane.position(10.0).y,
                   lane.heading(10.0), 8.0);
  const Trajectory traj = scripted_expert(w, {0}, start, 30.0, 0.2);

  // Find the full stop and check it straddles the line within a meter.
  int stop_idx = -1;
  for (int i = 0; i < traj.size(); ++i)
    if (traj.poses[i].speed < 0.05) {
      stop_idx = i;
      break;
    }
  REQUIRE(stop_idx > 0);
  const double stop_s = lane.project(traj.poses[stop_idx].position());
  CHECK(stop_s > 39.0);
  CHECK(stop_s <= 40.0);

  // Deceleration is monotone from the first braking sample to the stop.
  int brake_start = stop_idx;
  while (brake_start > 0 && traj.poses[brake_start - 1].speed >
                                traj.poses[brake_start].speed - 1e-9)
    --brake_start;
  for (int i = brake_start; i < stop_idx; ++i)
    CHECK(traj.poses[i + 1].speed <= traj.poses[i].speed + 1e-9);

  // Holds the stop for at least a second, then accelerates again.
  int hold = 0;
  int i = stop_idx;
  while (i < traj.size() && traj.poses[i].speed < 0.05) {
    ++hold;
    ++i;
  }
  CHECK(hold * traj.dt >= 1.0);
  CHECK(i < traj.size());  // it moves again afterwards
  CHECK(traj.poses.back().speed > 1.0);
}

TEST_CASE("expert converges behind a slow lead car") {
  WorldSpec spec;
  spec.curviness = 0.0;
  spec.with_stop_signs = false;
  spec.length_m = 500.0;
  World w = generate_world(2, spec);
  const auto& lane = w.lanes[0].centerline;

  DynamicAgent lead;
  lead.id = 1;
  lead.trajectory.dt = 0.5;
  for (int i = 0; i <= 140; ++i) {
    const double s = 60.0 + 3.0 * 0.5 * i;
    lead.trajectory.poses.emplace_back(lane.position(s).x, lane.position(s).y,
                                       lane.heading(s), 3.0);
  }

  const Pose start(lane.position(10.0).x, lane.position(10.0).y,
                   lane.heading(10.0), 8.0);
  const Trajectory traj =
      scripted_expert(w, {0}, start, 40.0, 0.2, {lead}, 0.0);

  // Steady state: ego speed within 0.1 of the lead, gap at least 4 m.
  for (int i = traj.size() - 20; i < traj.size(); ++i) {
    CHECK(traj.poses[i].speed == doctest::Approx(3.0).epsilon(0.04));
    const double s_e = lane.project(traj.poses[i].position());
    const double s_l = lane.project(
        lead.trajectory.sample(traj.time_at(i)).position());
    CHECK(s_l - s_e - lead.box_length / 2.0 - 2.4 >= 4.0);
  }
}

TEST_CASE("expert respects speed limits and the road polygon") {
  for (std::uint64_t seed : {21u, 22u, 23u}) {
    WorldSpec spec;
    spec.curviness = 0.022;
    spec.with_stop_signs = true;
    const World w = generate_world(seed, spec);
    const auto& lane = w.lanes[0].centerline;
    const Pose start(lane.position(10.0).x, lane.position(10.0).y,
                     lane.heading(10.0), spec.speed_limit);
    const Trajectory traj = scripted_expert(w, {0}, start, 35.0, 0.2);
    for (const auto& p : traj.poses) {
      CHECK(p.speed <= spec.speed_limit + 1e-6);
      const double s = lane.project(p.position());
      if (s < 5.0 || s > lane.length() - 5.0) continue;
      // All four box corners stay on the road.
      const geom::Vec2 f = geom::unit(p.theta);
      const geom::Vec2 l = f.perp_left();
      for (double du : {-2.4, 2.4})
        for (double dl : {-1.05, 1.05}) {
          const geom::Vec2 corner = p.position() + f * du + l * dl;
          CHECK(point_in_polygon(w.road_polygon, corner));
        }
    }
  }
}

TEST_CASE("expert throws NoPath for unusable routes") {
  WorldSpec spec;
  const World w = generate_world(2, spec);
  CHECK_THROWS_AS(scripted_expert(w, {}, Pose(), 5.0, 0.2), NoPath);
  CHECK_THROWS_AS(scripted_expert(w, {9}, Pose(), 5.0, 0.2), NoPath);
}

TEST_CASE("parked-car scenarios cover 4 geometries x 5 speeds") {
  std::set<std::pair<int, int>> combos;
  std::set<std::string> serialized;
  for (int i = 0; i < kScenarioVariations; ++i) {
    const Scenario sc = make_scenario(ScenarioKind::ParkedCarNudge, i, 42);
    combos.insert({i / 5, i % 5});
    serialized.insert(scenario_to_string(sc));
    REQUIRE(sc.agents.size() == 1);
    CHECK(sc.agents[0].is_static());
  }
  CHECK(combos.size() == 20);
  CHECK(serialized.size() == 20);
}

TEST_CASE("scenario construction is deterministic") {
  const Scenario a = make_scenario(ScenarioKind::PerturbRecovery, 7, 5);
  const Scenario b = make_scenario(ScenarioKind::PerturbRecovery, 7, 5);
  CHECK(scenario_to_string(a) == scenario_to_string(b));
}

TEST_CASE("slow-lead scenarios always use a strictly slower lead") {
  for (int i = 0; i < kScenarioVariations; ++i) {
    const Scenario sc = make_scenario(ScenarioKind::SlowLeadCar, i, 1);
    REQUIRE(sc.agents.size() == 1);
    CHECK(sc.agents[0].trajectory.poses.front().speed <
          sc.ego_initial_speed - 0.5);
  }
}

TEST_CASE("make_scenario rejects bad variation indices") {
  CHECK_THROWS_AS(make_scenario(ScenarioKind::StopSign, 20, 1), BadIndex);
  CHECK_THROWS_AS(make_scenario(ScenarioKind::StopSign, -1, 1), BadIndex);
}

TEST_CASE("ablation removes exactly the named element class") {
  const Scenario sign_sc = make_scenario(ScenarioKind::StopSign, 3, 9);
  const Scenario no_signs = ablate(sign_sc, AblationToggle::RemoveStopSigns);
  CHECK(no_signs.world.stop_signs.empty());
  CHECK(scenario_to_string(no_signs.world.lanes.empty() ? no_signs : no_signs) !=
        scenario_to_string(sign_sc));
  // Roads unchanged.
  CHECK(no_signs.world.road_polygon.size() == sign_sc.world.road_polygon.size());

  const Scenario lead_sc = make_scenario(ScenarioKind::SlowLeadCar, 3, 9);
  const Scenario no_agents =
      ablate(lead_sc, AblationToggle::RemoveDynamicAgents);
  CHECK(no_agents.agents.empty());

  // Double ablation is idempotent.
  const Scenario twice = ablate(no_agents, AblationToggle::RemoveDynamicAgents);
  CHECK(scenario_to_string(twice) == scenario_to_string(no_agents));
}

TEST_CASE("scenario files round-trip") {
  const Scenario sc = make_scenario(ScenarioKind::TrafficLight, 12, 77);
  const std::string text = scenario_to_string(sc);
  std::istringstream is(text);
  const Scenario back = read_scenario(is);
  CHECK(scenario_to_string(back) == text);
}
