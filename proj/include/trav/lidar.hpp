#pragma once

#include <cmath>
#include <cstdint>

#include "trav/geometry.hpp"
#include "trav/point_cloud.hpp"
#include "trav/world.hpp"

namespace trav {

struct LidarConfig {
  int rings = 64;
  int azimuth_steps = 512;
  double max_range = 30.0;
  double vertical_fov_deg_min = -22.5;
  double vertical_fov_deg_max = 22.5;
  double noise_sigma = 0.01;

  void validate() const {
    if (rings < 1 || azimuth_steps < 1 || max_range <= 0.0)
      throw std::invalid_argument("lidar: invalid configuration");
  }
};

namespace detail_lidar {

/// Heightfield intersection by 0.1 m marching plus bisection to 1 mm.
inline bool terrain_hit(const World& world, const Vec3& origin,
                        const Vec3& dir, double tmax, double& t_hit) {
  constexpr double kStep = 0.1;
  constexpr double kTol = 1e-3;
  auto above = [&](double t) {
    const Vec3 p = origin + t * dir;
    if (!world.in_domain(p.x(), p.y())) return 2;   // left the domain
    return p.z() > world.height_at(p.x(), p.y()) ? 1 : 0;
  };
  double t0 = 0.0;
  int s0 = above(0.0);
  if (s0 == 0) return false;  // origin below terrain: no usable return
  for (double t = kStep; t <= tmax + kStep * 0.5; t += kStep) {
    const double tc = std::min(t, tmax);
    const int s = above(tc);
    if (s == 2) return false;
    if (s == 0) {
      double lo = t0, hi = tc;
      while (hi - lo > kTol) {
        const double mid = 0.5 * (lo + hi);
        if (above(mid) == 1)
          lo = mid;
        else
          hi = mid;
      }
      t_hit = 0.5 * (lo + hi);
      return true;
    }
    t0 = tc;
    if (tc >= tmax) break;
  }
  return false;
}

}  // namespace detail_lidar

/// One ray per (ring, azimuth); nearest hit against the heightfield and
/// obstacle primitives within max_range, range perturbed by N(0, sigma^2).
/// Returns hit points in the sensor frame.
inline PointCloud simulate_scan(const World& world, const Pose& sensor_pose,
                                const LidarConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  Rng rng(seed);
  PointCloud out;
  out.points.reserve(static_cast<std::size_t>(cfg.rings) * cfg.azimuth_steps / 4);

  const auto nearby = world.obstacles_near(sensor_pose.position.x(),
                                           sensor_pose.position.y(),
                                           cfg.max_range);

  const double fov_lo = deg2rad(cfg.vertical_fov_deg_min);
  const double fov_hi = deg2rad(cfg.vertical_fov_deg_max);
  for (int ring = 0; ring < cfg.rings; ++ring) {
    const double elev =
        cfg.rings == 1 ? 0.5 * (fov_lo + fov_hi)
                       : fov_lo + (fov_hi - fov_lo) * ring / (cfg.rings - 1);
    const double ce = std::cos(elev), se = std::sin(elev);
    for (int az = 0; az < cfg.azimuth_steps; ++az) {
      const double psi = 2.0 * M_PI * az / cfg.azimuth_steps;
      const Vec3 d_sensor(ce * std::cos(psi), ce * std::sin(psi), se);
      const Vec3 d_world = sensor_pose.orientation * d_sensor;

      double t_best = cfg.max_range;
      bool hit = false;
      double t_terrain;
      if (detail_lidar::terrain_hit(world, sensor_pose.position, d_world,
                                    t_best, t_terrain)) {
        t_best = t_terrain;
        hit = true;
      }
      for (const Obstacle* o : nearby) {
        if (auto t = o->ray_hit(sensor_pose.position, d_world, t_best)) {
          t_best = *t;
          hit = true;
        }
      }
      if (!hit) continue;
      const double range =
          cfg.noise_sigma > 0.0 ? t_best + rng.normal(0.0, cfg.noise_sigma)
                                : t_best;
      out.points.push_back(range * d_sensor);
    }
  }
  return out;
}

}  // namespace trav
