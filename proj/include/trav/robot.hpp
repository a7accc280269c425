#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "trav/geometry.hpp"
#include "trav/lidar.hpp"
#include "trav/point_cloud.hpp"
#include "trav/world.hpp"

namespace trav {

enum class RobotStatus { Moving, Stuck, Tipped };

inline const char* to_string(RobotStatus s) {
  switch (s) {
    case RobotStatus::Moving: return "moving";
    case RobotStatus::Stuck: return "stuck";
    case RobotStatus::Tipped: return "tipped";
  }
  return "moving";
}

inline RobotStatus status_from_string(const std::string& s) {
  if (s == "stuck") return RobotStatus::Stuck;
  if (s == "tipped") return RobotStatus::Tipped;
  return RobotStatus::Moving;
}

struct RobotConfig {
  double speed = 1.0;            // commanded linear speed, m/s
  double wheel_radius = 0.15;    // m
  double clearance = 0.2;        // body center height above terrain, m
  double tip_threshold_deg = 35.0;
  double slip_alpha = 1.5;       // pitch coefficient of the slip model
  double slip_beta = 0.5;        // roughness coefficient
  double imu_noise_sigma = 0.05; // accelerometer noise per axis, m/s^2
  double sensor_height = 0.5;    // LIDAR mount above body center, m
  double dt = 0.05;              // integration step, s
  double max_duration = 180.0;   // episode cap, s
  double scan_period = 0.5;      // seconds between recorded scans
  double terminal_hold = 3.0;    // stuck/tipped dwell recorded at episode end
  Footprint footprint{};
  LidarConfig lidar{};

  static RobotConfig from_json(const nlohmann::json& j) {
    RobotConfig c;
    c.speed = j.value("speed", c.speed);
    c.wheel_radius = j.value("wheel_radius", c.wheel_radius);
    c.clearance = j.value("clearance", c.clearance);
    c.tip_threshold_deg = j.value("tip_threshold_deg", c.tip_threshold_deg);
    c.slip_alpha = j.value("slip_alpha", c.slip_alpha);
    c.slip_beta = j.value("slip_beta", c.slip_beta);
    c.imu_noise_sigma = j.value("imu_noise_sigma", c.imu_noise_sigma);
    c.sensor_height = j.value("sensor_height", c.sensor_height);
    c.dt = j.value("dt", c.dt);
    c.max_duration = j.value("max_duration", c.max_duration);
    c.scan_period = j.value("scan_period", c.scan_period);
    c.terminal_hold = j.value("terminal_hold", c.terminal_hold);
    if (j.contains("footprint")) {
      const auto& f = j.at("footprint");
      c.footprint = Footprint(f.at(0).get<double>(), f.at(1).get<double>(),
                              f.at(2).get<double>());
    }
    if (j.contains("lidar")) {
      const auto& l = j.at("lidar");
      c.lidar.rings = l.value("rings", c.lidar.rings);
      c.lidar.azimuth_steps = l.value("azimuth_steps", c.lidar.azimuth_steps);
      c.lidar.max_range = l.value("max_range", c.lidar.max_range);
      c.lidar.vertical_fov_deg_min =
          l.value("vertical_fov_deg_min", c.lidar.vertical_fov_deg_min);
      c.lidar.vertical_fov_deg_max =
          l.value("vertical_fov_deg_max", c.lidar.vertical_fov_deg_max);
      c.lidar.noise_sigma = l.value("noise_sigma", c.lidar.noise_sigma);
    }
    return c;
  }

  nlohmann::json to_json() const {
    return {{"speed", speed},
            {"wheel_radius", wheel_radius},
            {"clearance", clearance},
            {"tip_threshold_deg", tip_threshold_deg},
            {"slip_alpha", slip_alpha},
            {"slip_beta", slip_beta},
            {"imu_noise_sigma", imu_noise_sigma},
            {"sensor_height", sensor_height},
            {"dt", dt},
            {"max_duration", max_duration},
            {"scan_period", scan_period},
            {"terminal_hold", terminal_hold},
            {"footprint", {footprint.dx, footprint.dy, footprint.dz}},
            {"lidar",
             {{"rings", lidar.rings},
              {"azimuth_steps", lidar.azimuth_steps},
              {"max_range", lidar.max_range},
              {"vertical_fov_deg_min", lidar.vertical_fov_deg_min},
              {"vertical_fov_deg_max", lidar.vertical_fov_deg_max},
              {"noise_sigma", lidar.noise_sigma}}}};
  }
};

/// Why a rollout stopped; domain-edge stops are an artifact of the finite
/// world and are excluded from labeling.
enum class StopCause { None, Obstacle, TerrainStall, Tipped, DomainEdge };

struct RobotState {
  Pose pose;            // body center, clearance above terrain
  double wheel_radius = 0.15;
  double w1 = 0.0;      // left wheel speed, rad/s
  double w2 = 0.0;      // right wheel speed, rad/s
  double linear_velocity = 0.0;
  Vec3 accel{0, 0, 0};  // body-frame specific force, m/s^2
  RobotStatus status = RobotStatus::Moving;
  double time = 0.0;
};

/// Realized-over-commanded speed ratio: 1 on flat smooth ground, below 1
/// uphill and on rough patches, above 1 (capped at 1.2) downhill.
inline double slip_factor(double pitch, double roughness, double alpha = 1.5,
                          double beta = 0.5) {
  const double s = 1.0 - alpha * std::tan(pitch) - beta * roughness;
  return std::min(1.2, std::max(0.0, s));
}

namespace detail_robot {

constexpr double kGravity = 9.80665;

inline double lateral_roll(const World& world, const Pose& pose) {
  const Vec3 fwd = pose.orientation * Vec3::UnitX();
  Vec3 h(fwd.x(), fwd.y(), 0.0);
  const double n = h.norm();
  if (n < 1e-9) return 0.0;
  h /= n;
  // left direction; positive roll = right side dips
  const double slope =
      world.directional_slope(pose.position.x(), pose.position.y(), -h.y(),
                              h.x());
  return std::atan(slope);
}

/// Pose snapped to the terrain: z = h + clearance, roll/pitch aligned with
/// the surface and the given heading.
inline Pose surface_pose(const World& world, double x, double y, double yaw,
                         const RobotConfig& cfg) {
  const double z = world.height_at(x, y) + cfg.clearance;
  Pose flat = Pose::from_xyz_yaw(x, y, z, yaw);
  const double pitch = world.surface_pitch(flat);
  const double roll = lateral_roll(world, flat);
  return Pose::from_position_ypr(Vec3(x, y, z), yaw, pitch, roll);
}

/// 2D separating-axis test between two yaw-oriented rectangles.
inline bool obb_overlap_2d(double ax, double ay, double ayaw, double ahx,
                           double ahy, double bx, double by, double byaw,
                           double bhx, double bhy) {
  const double axes[4][2] = {{std::cos(ayaw), std::sin(ayaw)},
                             {-std::sin(ayaw), std::cos(ayaw)},
                             {std::cos(byaw), std::sin(byaw)},
                             {-std::sin(byaw), std::cos(byaw)}};
  const double dx = bx - ax, dy = by - ay;
  for (const auto& u : axes) {
    const double ra = ahx * std::abs(u[0] * std::cos(ayaw) + u[1] * std::sin(ayaw)) +
                      ahy * std::abs(-u[0] * std::sin(ayaw) + u[1] * std::cos(ayaw));
    const double rb = bhx * std::abs(u[0] * std::cos(byaw) + u[1] * std::sin(byaw)) +
                      bhy * std::abs(-u[0] * std::sin(byaw) + u[1] * std::cos(byaw));
    if (std::abs(u[0] * dx + u[1] * dy) > ra + rb) return false;
  }
  return true;
}

/// True when an obstacle taller than the clearance overlaps the footprint
/// box placed one half-length ahead of the given position.
inline bool blocked_ahead(const World& world, const Vec3& pos, double yaw,
                          const RobotConfig& cfg) {
  const Footprint& fp = cfg.footprint;
  const double cx = pos.x() + std::cos(yaw) * fp.dx * 0.5;
  const double cy = pos.y() + std::sin(yaw) * fp.dx * 0.5;
  for (const Obstacle* o :
       world.obstacles_near(cx, cy, 0.5 * std::hypot(fp.dx, fp.dy) + 0.1)) {
    const double half = 0.5 * world.config().domain_m;
    const double ox = std::min(half, std::max(-half, o->center.x()));
    const double oy = std::min(half, std::max(-half, o->center.y()));
    const double height_above_ground = o->top_z() - world.height_at(ox, oy);
    if (height_above_ground <= cfg.clearance) continue;  // drive over

    bool hit = false;
    if (o->kind == ObstacleKind::Box) {
      hit = obb_overlap_2d(cx, cy, yaw, 0.5 * fp.dx, 0.5 * fp.dy,
                           o->center.x(), o->center.y(), o->yaw,
                           0.5 * o->dims.x(), 0.5 * o->dims.y());
    } else {
      // circle vs rectangle: clamp the center into the footprint frame
      const double c = std::cos(-yaw), s = std::sin(-yaw);
      const double dx = o->center.x() - cx, dy = o->center.y() - cy;
      const double lx = c * dx - s * dy;
      const double ly = s * dx + c * dy;
      const double qx = std::max(0.0, std::abs(lx) - 0.5 * fp.dx);
      const double qy = std::max(0.0, std::abs(ly) - 0.5 * fp.dy);
      hit = std::hypot(qx, qy) <= o->bounding_radius_xy();
    }
    if (hit) return true;
  }
  return false;
}

}  // namespace detail_robot

/// Advances the robot by dt. `imu_rng` drives accelerometer noise; pass
/// nullptr for noise-free stepping. `cause` reports why the robot stopped
/// when the returned status is no longer Moving.
inline RobotState step_robot(const World& world, const RobotState& state,
                             double dt, const RobotConfig& cfg,
                             Rng* imu_rng = nullptr,
                             StopCause* cause = nullptr) {
  if (dt <= 0.0) throw std::invalid_argument("step_robot: dt must be positive");

  RobotState next = state;
  next.time = state.time + dt;
  next.w1 = cfg.speed / cfg.wheel_radius;
  next.w2 = cfg.speed / cfg.wheel_radius;
  next.wheel_radius = cfg.wheel_radius;

  auto gravity_only_accel = [&](const Pose& pose) {
    Vec3 a = pose.orientation.conjugate() *
             Vec3(0, 0, detail_robot::kGravity);
    if (imu_rng && cfg.imu_noise_sigma > 0.0) {
      a.x() += imu_rng->normal(0.0, cfg.imu_noise_sigma);
      a.y() += imu_rng->normal(0.0, cfg.imu_noise_sigma);
      a.z() += imu_rng->normal(0.0, cfg.imu_noise_sigma);
    }
    return a;
  };

  if (state.status != RobotStatus::Moving) {
    next.linear_velocity = 0.0;
    next.accel = gravity_only_accel(state.pose);
    return next;
  }

  const double yaw = state.pose.yaw();
  const double pitch = world.surface_pitch(state.pose);
  const double roll = detail_robot::lateral_roll(world, state.pose);
  const double tip = deg2rad(cfg.tip_threshold_deg);
  if (std::abs(pitch) > tip || std::abs(roll) > tip) {
    next.status = RobotStatus::Tipped;
    next.linear_velocity = 0.0;
    next.accel = gravity_only_accel(state.pose);
    if (cause) *cause = StopCause::Tipped;
    return next;
  }

  const double rough = world.roughness(state.pose.position.x(),
                                       state.pose.position.y(),
                                       cfg.footprint.dx, cfg.footprint.dy);
  const double slip =
      slip_factor(pitch, rough, cfg.slip_alpha, cfg.slip_beta);
  const double v = cfg.speed * slip;
  if (v <= 0.0) {  // terrain stall: immobilized without a discrete obstacle
    next.status = RobotStatus::Stuck;
    next.linear_velocity = 0.0;
    next.accel = gravity_only_accel(state.pose);
    if (cause) *cause = StopCause::TerrainStall;
    return next;
  }

  // advance arc length v*dt along the slope
  const double horiz = v * dt * std::cos(pitch);
  const double nx = state.pose.position.x() + horiz * std::cos(yaw);
  const double ny = state.pose.position.y() + horiz * std::sin(yaw);
  if (!world.in_domain(nx, ny)) {
    next.status = RobotStatus::Stuck;  // domain edge treated as a wall
    next.linear_velocity = 0.0;
    next.accel = gravity_only_accel(state.pose);
    if (cause) *cause = StopCause::DomainEdge;
    return next;
  }
  if (detail_robot::blocked_ahead(world, Vec3(nx, ny, 0.0), yaw, cfg)) {
    next.status = RobotStatus::Stuck;
    next.linear_velocity = 0.0;
    next.accel = gravity_only_accel(state.pose);
    if (cause) *cause = StopCause::Obstacle;
    return next;
  }

  next.pose = detail_robot::surface_pose(world, nx, ny, yaw, cfg);
  next.linear_velocity = v;

  // IMU specific force: finite-difference acceleration minus gravity,
  // expressed in the new body frame.
  const Vec3 dir_old = state.pose.orientation * Vec3::UnitX();
  const Vec3 dir_new = next.pose.orientation * Vec3::UnitX();
  const Vec3 dv = (v * dir_new - state.linear_velocity * dir_old) / dt;
  Vec3 accel_body = next.pose.orientation.conjugate() *
                    (dv + Vec3(0, 0, detail_robot::kGravity));
  if (imu_rng && cfg.imu_noise_sigma > 0.0) {
    accel_body.x() += imu_rng->normal(0.0, cfg.imu_noise_sigma);
    accel_body.y() += imu_rng->normal(0.0, cfg.imu_noise_sigma);
    accel_body.z() += imu_rng->normal(0.0, cfg.imu_noise_sigma);
  }
  next.accel = accel_body;
  return next;
}

struct StepRecord {
  double t = 0.0;
  Pose pose;
  double w1 = 0.0;
  double w2 = 0.0;
  Vec3 accel{0, 0, 0};
  RobotStatus status = RobotStatus::Moving;
};

struct ScanRecord {
  double t = 0.0;
  Pose sensor_pose;  // true sensor pose in world frame
  PointCloud cloud;  // sensor frame
};

/// One straight-drive rollout: per-step records plus periodic scans.
struct Episode {
  int id = 0;
  double dt = 0.05;
  double wheel_radius = 0.15;
  double commanded_speed = 1.0;
  std::vector<StepRecord> records;
  std::vector<ScanRecord> scans;
  RobotStatus final_status = RobotStatus::Moving;
  StopCause stop_cause = StopCause::None;
  double stop_time = 0.0;  // first non-moving time, or duration if none

  double duration() const {
    return records.empty() ? 0.0 : records.back().t;
  }
};

/// Integrates step_robot at fixed dt with constant commanded speed until
/// the robot stops moving or the time cap is reached. A stuck/tipped
/// terminal state is held for cfg.terminal_hold seconds so the trailing
/// label window sees the full stall.
inline Episode run_episode(const World& world, const Pose& init,
                           const RobotConfig& cfg, std::uint64_t seed,
                           int episode_id = 0) {
  if (!world.in_domain(init.position.x(), init.position.y()))
    throw std::invalid_argument("run_episode: init outside domain");

  const double yaw = init.yaw();
  const Pose start = detail_robot::surface_pose(
      world, init.position.x(), init.position.y(), yaw, cfg);
  if (world.inside_obstacle(start.position))
    throw std::invalid_argument("run_episode: init inside an obstacle");

  Rng imu_rng(mix_seed(seed, 1));
  Rng scan_seed_rng(mix_seed(seed, 2));

  Episode ep;
  ep.id = episode_id;
  ep.dt = cfg.dt;
  ep.wheel_radius = cfg.wheel_radius;
  ep.commanded_speed = cfg.speed;

  RobotState state;
  state.pose = start;
  state.wheel_radius = cfg.wheel_radius;
  state.w1 = cfg.speed / cfg.wheel_radius;
  state.w2 = cfg.speed / cfg.wheel_radius;
  state.linear_velocity = cfg.speed;  // cruise entry; settles within a step

  auto record = [&](const RobotState& s) {
    ep.records.push_back({s.time, s.pose, s.w1, s.w2, s.accel, s.status});
  };
  auto scan = [&](const RobotState& s) {
    Pose sensor = s.pose;
    sensor.position += s.pose.orientation * Vec3(0, 0, cfg.sensor_height);
    ep.scans.push_back(
        {s.time, sensor,
         simulate_scan(world, sensor, cfg.lidar, scan_seed_rng.bits())});
  };

  record(state);
  scan(state);

  const auto scan_every =
      std::max<std::size_t>(1, static_cast<std::size_t>(
                                   std::llround(cfg.scan_period / cfg.dt)));
  std::size_t step_index = 0;
  double hold_left = cfg.terminal_hold;
  while (true) {
    StopCause cause = StopCause::None;
    state = step_robot(world, state, cfg.dt, cfg, &imu_rng, &cause);
    ++step_index;
    record(state);
    if (step_index % scan_every == 0 && state.status == RobotStatus::Moving)
      scan(state);

    if (state.status != RobotStatus::Moving) {
      if (ep.final_status == RobotStatus::Moving) {
        ep.final_status = state.status;
        ep.stop_cause = cause;
        ep.stop_time = state.time;
      }
      hold_left -= cfg.dt;
      if (hold_left <= 1e-9) break;
    } else if (state.time >= cfg.max_duration - 1e-9) {
      ep.stop_time = state.time;
      break;
    }
  }
  if (ep.final_status == RobotStatus::Moving) ep.stop_time = ep.duration();
  return ep;
}

inline nlohmann::json pose_to_json(const Pose& p) {
  return {{"position", {p.position.x(), p.position.y(), p.position.z()}},
          {"orientation",
           {p.orientation.x(), p.orientation.y(), p.orientation.z(),
            p.orientation.w()}}};
}

inline Pose pose_from_json(const nlohmann::json& j) {
  Pose p;
  const auto& pos = j.at("position");
  p.position = Vec3(pos.at(0), pos.at(1), pos.at(2));
  const auto& q = j.at("orientation");
  p.orientation = Quat(q.at(3), q.at(0), q.at(1), q.at(2));
  return p;
}

/// JSON-lines episode dump, one record per step.
inline void write_episode_jsonl(const std::string& path, const Episode& ep) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("episode: cannot open " + path);
  nlohmann::json header = {{"episode", ep.id},
                           {"dt", ep.dt},
                           {"wheel_radius", ep.wheel_radius},
                           {"commanded_speed", ep.commanded_speed},
                           {"final_status", to_string(ep.final_status)},
                           {"stop_cause", static_cast<int>(ep.stop_cause)},
                           {"stop_time", ep.stop_time}};
  os << header.dump() << "\n";
  for (const StepRecord& r : ep.records) {
    nlohmann::json j = {{"t", r.t},
                        {"pose", pose_to_json(r.pose)},
                        {"w1", r.w1},
                        {"w2", r.w2},
                        {"accel", {r.accel.x(), r.accel.y(), r.accel.z()}},
                        {"status", to_string(r.status)}};
    os << j.dump() << "\n";
  }
}

/// Reads a JSONL dump; scans are not stored and stay empty.
inline Episode read_episode_jsonl(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("episode: cannot open " + path);
  Episode ep;
  std::string line;
  if (!std::getline(is, line))
    throw std::runtime_error("episode: empty file " + path);
  {
    const auto h = nlohmann::json::parse(line);
    ep.id = h.at("episode");
    ep.dt = h.at("dt");
    ep.wheel_radius = h.at("wheel_radius");
    ep.commanded_speed = h.at("commanded_speed");
    ep.final_status = status_from_string(h.at("final_status"));
    ep.stop_cause = static_cast<StopCause>(h.value("stop_cause", 0));
    ep.stop_time = h.at("stop_time");
  }
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto j = nlohmann::json::parse(line);
    StepRecord r;
    r.t = j.at("t");
    r.pose = pose_from_json(j.at("pose"));
    r.w1 = j.at("w1");
    r.w2 = j.at("w2");
    const auto& a = j.at("accel");
    r.accel = Vec3(a.at(0), a.at(1), a.at(2));
    r.status = status_from_string(j.at("status"));
    ep.records.push_back(r);
  }
  return ep;
}

}  // namespace trav
