#include "midsim/world/scenario_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "midsim/core/error.hpp"

namespace midsim::world {

namespace {

constexpr const char* kMagic = "midsim-scenario v1";

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_traj(std::ostream& os, const std::string& tag,
                const Trajectory& traj) {
  os << tag << " dt=" << fmt(traj.dt) << " t0=" << fmt(traj.start_time)
     << " n=" << traj.poses.size() << "\n";
  for (const auto& p : traj.poses)
    os << "  " << fmt(p.x) << " " << fmt(p.y) << " " << fmt(p.theta) << " "
       << fmt(p.speed) << "\n";
}

void write_polyline(std::ostream& os, const std::string& tag,
                    const std::vector<Vec2>& pts) {
  os << tag << " n=" << pts.size() << "\n";
  for (const auto& p : pts) os << "  " << fmt(p.x) << " " << fmt(p.y) << "\n";
}

class LineReader {
 public:
  explicit LineReader(std::istream& is) : is_(is) {}

  // Next non-empty line; throws at EOF.
  std::string next() {
    std::string line;
    while (std::getline(is_, line)) {
      if (!line.empty()) return line;
    }
    throw IoError("unexpected end of scenario file");
  }

  bool next_if_any(std::string* line) {
    while (std::getline(is_, *line)) {
      if (!line->empty()) return true;
    }
    return false;
  }

 private:
  std::istream& is_;
};

double parse_kv_double(const std::string& line, const std::string& key) {
  const auto pos = line.find(key + "=");
  if (pos == std::string::npos) throw IoError("missing key " + key);
  return std::strtod(line.c_str() + pos + key.size() + 1, nullptr);
}

long parse_kv_long(const std::string& line, const std::string& key) {
  const auto pos = line.find(key + "=");
  if (pos == std::string::npos) throw IoError("missing key " + key);
  return std::strtol(line.c_str() + pos + key.size() + 1, nullptr, 10);
}

std::string parse_kv_str(const std::string& line, const std::string& key) {
  const auto pos = line.find(key + "=");
  if (pos == std::string::npos) throw IoError("missing key " + key);
  const auto start = pos + key.size() + 1;
  const auto end = line.find(' ', start);
  return line.substr(start, end == std::string::npos ? end : end - start);
}

Trajectory read_traj(LineReader& reader, const std::string& header) {
  Trajectory traj;
  traj.dt = parse_kv_double(header, "dt");
  traj.start_time = parse_kv_double(header, "t0");
  const long n = parse_kv_long(header, "n");
  traj.poses.reserve(n);
  for (long i = 0; i < n; ++i) {
    std::istringstream ss(reader.next());
    double x, y, theta, speed;
    ss >> x >> y >> theta >> speed;
    if (ss.fail()) throw IoError("bad pose line");
    traj.poses.emplace_back(x, y, theta, speed);
  }
  return traj;
}

std::vector<Vec2> read_polyline(LineReader& reader, const std::string& header) {
  const long n = parse_kv_long(header, "n");
  std::vector<Vec2> pts;
  pts.reserve(n);
  for (long i = 0; i < n; ++i) {
    std::istringstream ss(reader.next());
    Vec2 p;
    ss >> p.x >> p.y;
    if (ss.fail()) throw IoError("bad point line");
    pts.push_back(p);
  }
  return pts;
}

}  // namespace

void write_scenario(std::ostream& os, const Scenario& sc) {
  os << kMagic << "\n";
  os << "scenario id=" << sc.id << " kind=" << to_string(sc.kind)
     << " variation=" << sc.variation << " success=" << to_string(sc.success)
     << "\n";
  os << "timing duration=" << fmt(sc.duration) << " buffer=" << fmt(sc.buffer_s)
     << " goal_s=" << fmt(sc.goal_s) << "\n";
  os << "ego x=" << fmt(sc.ego_start.x) << " y=" << fmt(sc.ego_start.y)
     << " theta=" << fmt(sc.ego_start.theta)
     << " speed=" << fmt(sc.ego_start.speed)
     << " initial_speed=" << fmt(sc.ego_initial_speed)
     << " length=" << fmt(sc.ego_length) << " width=" << fmt(sc.ego_width)
     << "\n";
  os << "route";
  for (int id : sc.route) os << " " << id;
  os << "\n";

  os << "world lanes=" << sc.world.lanes.size() << "\n";
  for (const auto& lane : sc.world.lanes) {
    os << "lane id=" << lane.id << " width=" << fmt(lane.width)
       << " speed_limit=" << fmt(lane.speed_limit) << "\n";
    write_polyline(os, "centerline", lane.centerline.points());
  }
  write_polyline(os, "road_polygon", sc.world.road_polygon);
  for (const auto& sign : sc.world.stop_signs)
    os << "stop_sign lane=" << sign.lane_id << " s=" << fmt(sign.s) << "\n";
  for (const auto& light : sc.world.traffic_lights) {
    os << "traffic_light lane=" << light.lane_id << " s=" << fmt(light.s)
       << " phases=" << light.schedule.size() << "\n";
    for (const auto& ph : light.schedule)
      os << "  " << fmt(ph.t) << " " << to_string(ph.state) << "\n";
  }
  for (const auto& cw : sc.world.crosswalks) write_polyline(os, "crosswalk", cw);
  for (const auto& cb : sc.world.curbs) write_polyline(os, "curb", cb);

  for (const auto& agent : sc.agents) {
    os << "agent id=" << agent.id << " length=" << fmt(agent.box_length)
       << " width=" << fmt(agent.box_width)
       << " policy_driven=" << (agent.policy_driven ? 1 : 0) << "\n";
    write_traj(os, "traj", agent.trajectory);
  }
  write_traj(os, "warmup", sc.warmup);
  os << "end\n";
}

Scenario read_scenario(std::istream& is) {
  LineReader reader(is);
  if (reader.next() != kMagic) throw IoError("not a midsim-scenario v1 file");

  Scenario sc;
  std::string line;
  while (true) {
    line = reader.next();
    if (line == "end") break;
    if (line.rfind("scenario ", 0) == 0) {
      sc.id = parse_kv_str(line, "id");
      ScenarioKind kind;
      if (!scenario_kind_from_string(parse_kv_str(line, "kind"), &kind))
        throw IoError("unknown scenario kind");
      sc.kind = kind;
      sc.variation = static_cast<int>(parse_kv_long(line, "variation"));
      const std::string succ = parse_kv_str(line, "success");
      if (succ == "ReachEnd") sc.success = SuccessCriterion::ReachEnd;
      else if (succ == "PassObject") sc.success = SuccessCriterion::PassObject;
      else if (succ == "Recover") sc.success = SuccessCriterion::Recover;
      else if (succ == "FollowWithoutCollision")
        sc.success = SuccessCriterion::FollowWithoutCollision;
      else throw IoError("unknown success criterion");
    } else if (line.rfind("timing ", 0) == 0) {
      sc.duration = parse_kv_double(line, "duration");
      sc.buffer_s = parse_kv_double(line, "buffer");
      sc.goal_s = parse_kv_double(line, "goal_s");
    } else if (line.rfind("ego ", 0) == 0) {
      sc.ego_start = Pose(parse_kv_double(line, "x"), parse_kv_double(line, "y"),
                          parse_kv_double(line, "theta"),
                          parse_kv_double(line, "speed"));
      sc.ego_initial_speed = parse_kv_double(line, "initial_speed");
      sc.ego_length = parse_kv_double(line, "length");
      sc.ego_width = parse_kv_double(line, "width");
    } else if (line.rfind("route", 0) == 0) {
      std::istringstream ss(line.substr(5));
      int id;
      while (ss >> id) sc.route.push_back(id);
    } else if (line.rfind("lane ", 0) == 0) {
      Lane lane;
      lane.id = static_cast<int>(parse_kv_long(line, "id"));
      lane.width = parse_kv_double(line, "width");
      lane.speed_limit = parse_kv_double(line, "speed_limit");
      lane.centerline = ArcPath(read_polyline(reader, reader.next()));
      sc.world.lanes.push_back(std::move(lane));
    } else if (line.rfind("road_polygon", 0) == 0) {
      sc.world.road_polygon = read_polyline(reader, line);
    } else if (line.rfind("stop_sign", 0) == 0) {
      sc.world.stop_signs.push_back(
          {static_cast<int>(parse_kv_long(line, "lane")),
           parse_kv_double(line, "s")});
    } else if (line.rfind("traffic_light", 0) == 0) {
      TrafficLight light;
      light.lane_id = static_cast<int>(parse_kv_long(line, "lane"));
      light.s = parse_kv_double(line, "s");
      const long phases = parse_kv_long(line, "phases");
      for (long i = 0; i < phases; ++i) {
        std::istringstream ss(reader.next());
        LightPhase ph;
        std::string state;
        ss >> ph.t >> state;
        if (state == "Red") ph.state = LightState::Red;
        else if (state == "Yellow") ph.state = LightState::Yellow;
        else if (state == "Green") ph.state = LightState::Green;
        else ph.state = LightState::Unknown;
        light.schedule.push_back(ph);
      }
      sc.world.traffic_lights.push_back(std::move(light));
    } else if (line.rfind("crosswalk", 0) == 0) {
      sc.world.crosswalks.push_back(read_polyline(reader, line));
    } else if (line.rfind("curb", 0) == 0) {
      sc.world.curbs.push_back(read_polyline(reader, line));
    } else if (line.rfind("agent ", 0) == 0) {
      DynamicAgent agent;
      agent.id = static_cast<int>(parse_kv_long(line, "id"));
      agent.box_length = parse_kv_double(line, "length");
      agent.box_width = parse_kv_double(line, "width");
      agent.policy_driven = parse_kv_long(line, "policy_driven") != 0;
      agent.trajectory = read_traj(reader, reader.next());
      sc.agents.push_back(std::move(agent));
    } else if (line.rfind("warmup", 0) == 0) {
      sc.warmup = read_traj(reader, line);
    } else if (line.rfind("world ", 0) == 0) {
      // lane count header; lanes follow individually
    } else {
      throw IoError("unrecognized scenario line: " + line);
    }
  }
  return sc;
}

void save_scenario(const std::string& path, const Scenario& scenario) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open " + path + " for writing");
  write_scenario(os, scenario);
}

Scenario load_scenario(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open " + path);
  return read_scenario(is);
}

std::string scenario_to_string(const Scenario& scenario) {
  std::ostringstream os;
  write_scenario(os, scenario);
  return os.str();
}

}  // namespace midsim::world
