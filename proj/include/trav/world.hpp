#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "trav/geometry.hpp"
#include "trav/rng.hpp"

#include <nlohmann/json.hpp>

namespace trav {

struct WorldConfig {
  double domain_m = 1000.0;       // side length of the square domain, centered at 0
  int octaves = 5;
  double amplitude_m = 2.0;       // requested height amplitude of the base octave
  double max_slope = 0.6;         // hard bound on |grad h| outside obstacles
  double obstacle_density_per_km2 = 50.0;
  double base_wavelength_m = 60.0;
  double ramp_grade = 0.0;        // adds ramp_grade * x to the heightfield
  std::uint64_t seed = 0;

  static WorldConfig from_json(const nlohmann::json& j) {
    WorldConfig c;
    c.domain_m = j.value("domain_m", c.domain_m);
    c.octaves = j.value("octaves", c.octaves);
    c.amplitude_m = j.value("amplitude_m", c.amplitude_m);
    c.max_slope = j.value("max_slope", c.max_slope);
    c.obstacle_density_per_km2 =
        j.value("obstacle_density_per_km2", c.obstacle_density_per_km2);
    c.base_wavelength_m = j.value("base_wavelength_m", c.base_wavelength_m);
    c.ramp_grade = j.value("ramp_grade", c.ramp_grade);
    c.seed = j.value("seed", c.seed);
    return c;
  }

  nlohmann::json to_json() const {
    return {{"domain_m", domain_m},
            {"octaves", octaves},
            {"amplitude_m", amplitude_m},
            {"max_slope", max_slope},
            {"obstacle_density_per_km2", obstacle_density_per_km2},
            {"base_wavelength_m", base_wavelength_m},
            {"ramp_grade", ramp_grade},
            {"seed", seed}};
  }
};

enum class ObstacleKind { Box, Cylinder, Sphere };
enum class ObstacleTag { Rock, Trunk, Wall };

struct Obstacle {
  ObstacleKind kind;
  ObstacleTag tag;
  Vec3 center;       // geometric center in world frame
  double yaw = 0.0;  // boxes only
  Vec3 dims;         // box: full extents; cylinder: (r, r, height); sphere: (r,r,r)

  double bounding_radius_xy() const {
    switch (kind) {
      case ObstacleKind::Box:
        return 0.5 * std::hypot(dims.x(), dims.y());
      case ObstacleKind::Cylinder:
      case ObstacleKind::Sphere:
        return dims.x();
    }
    return 0.0;
  }

  double top_z() const {
    switch (kind) {
      case ObstacleKind::Box:
        return center.z() + 0.5 * dims.z();
      case ObstacleKind::Cylinder:
        return center.z() + 0.5 * dims.z();
      case ObstacleKind::Sphere:
        return center.z() + dims.x();
    }
    return center.z();
  }

  bool contains(const Vec3& p) const {
    switch (kind) {
      case ObstacleKind::Box: {
        const double c = std::cos(-yaw), s = std::sin(-yaw);
        const Vec3 d = p - center;
        const double lx = c * d.x() - s * d.y();
        const double ly = s * d.x() + c * d.y();
        return std::abs(lx) <= 0.5 * dims.x() &&
               std::abs(ly) <= 0.5 * dims.y() &&
               std::abs(d.z()) <= 0.5 * dims.z();
      }
      case ObstacleKind::Cylinder: {
        const Vec3 d = p - center;
        return d.head<2>().norm() <= dims.x() &&
               std::abs(d.z()) <= 0.5 * dims.z();
      }
      case ObstacleKind::Sphere:
        return (p - center).norm() <= dims.x();
    }
    return false;
  }

  /// Nearest ray intersection parameter in (tmin, tmax), if any.
  std::optional<double> ray_hit(const Vec3& origin, const Vec3& dir,
                                double tmax) const {
    constexpr double kTMin = 1e-6;
    switch (kind) {
      case ObstacleKind::Sphere: {
        const Vec3 oc = origin - center;
        const double b = oc.dot(dir);
        const double c = oc.squaredNorm() - dims.x() * dims.x();
        const double disc = b * b - c;
        if (disc < 0.0) return std::nullopt;
        const double sq = std::sqrt(disc);
        for (double t : {-b - sq, -b + sq})
          if (t > kTMin && t < tmax) return t;
        return std::nullopt;
      }
      case ObstacleKind::Cylinder: {
        const double zlo = center.z() - 0.5 * dims.z();
        const double zhi = center.z() + 0.5 * dims.z();
        std::optional<double> best;
        auto consider = [&](double t) {
          if (t > kTMin && t < tmax && (!best || t < *best)) best = t;
        };
        // lateral surface
        const double ox = origin.x() - center.x(), oy = origin.y() - center.y();
        const double a = dir.x() * dir.x() + dir.y() * dir.y();
        if (a > 1e-12) {
          const double b = (ox * dir.x() + oy * dir.y()) / a;
          const double c = (ox * ox + oy * oy - dims.x() * dims.x()) / a;
          const double disc = b * b - c;
          if (disc >= 0.0) {
            const double sq = std::sqrt(disc);
            for (double t : {-b - sq, -b + sq}) {
              const double z = origin.z() + t * dir.z();
              if (z >= zlo && z <= zhi) consider(t);
            }
          }
        }
        // caps
        if (std::abs(dir.z()) > 1e-12) {
          for (double zcap : {zlo, zhi}) {
            const double t = (zcap - origin.z()) / dir.z();
            const double x = origin.x() + t * dir.x() - center.x();
            const double y = origin.y() + t * dir.y() - center.y();
            if (x * x + y * y <= dims.x() * dims.x()) consider(t);
          }
        }
        return best;
      }
      case ObstacleKind::Box: {
        const double c = std::cos(-yaw), s = std::sin(-yaw);
        const Vec3 d = origin - center;
        const Vec3 o(c * d.x() - s * d.y(), s * d.x() + c * d.y(), d.z());
        const Vec3 v(c * dir.x() - s * dir.y(), s * dir.x() + c * dir.y(),
                     dir.z());
        double t0 = kTMin, t1 = tmax;
        for (int a = 0; a < 3; ++a) {
          const double h = 0.5 * dims[a];
          if (std::abs(v[a]) < 1e-12) {
            if (o[a] < -h || o[a] > h) return std::nullopt;
            continue;
          }
          double ta = (-h - o[a]) / v[a];
          double tb = (h - o[a]) / v[a];
          if (ta > tb) std::swap(ta, tb);
          t0 = std::max(t0, ta);
          t1 = std::min(t1, tb);
          if (t0 > t1) return std::nullopt;
        }
        return t0 > kTMin && t0 < tmax ? std::optional<double>(t0)
                                       : std::nullopt;
      }
    }
    return std::nullopt;
  }
};

namespace detail_world {

inline double lattice_value(std::uint64_t seed, int octave, std::int64_t ix,
                            std::int64_t iy) {
  std::uint64_t h = mix_seed(seed, 0x700 + octave);
  h = mix_seed(h, static_cast<std::uint64_t>(ix) * 0x9E3779B97F4A7C15ULL + 1);
  h = mix_seed(h, static_cast<std::uint64_t>(iy) * 0xC2B2AE3D27D4EB4FULL + 2);
  return static_cast<double>(h >> 11) * 0x1.0p-52 - 1.0;  // [-1, 1)
}

inline double fade(double t) { return t * t * (3.0 - 2.0 * t); }

/// Smooth value noise on the unit lattice, range [-1, 1), max gradient
/// magnitude below 3*sqrt(2) per lattice unit (smoothstep slope 1.5 times
/// corner spread 2, per axis).
inline double value_noise(std::uint64_t seed, int octave, double u, double v) {
  const double fu = std::floor(u), fv = std::floor(v);
  const auto iu = static_cast<std::int64_t>(fu);
  const auto iv = static_cast<std::int64_t>(fv);
  const double su = fade(u - fu), sv = fade(v - fv);
  const double v00 = lattice_value(seed, octave, iu, iv);
  const double v10 = lattice_value(seed, octave, iu + 1, iv);
  const double v01 = lattice_value(seed, octave, iu, iv + 1);
  const double v11 = lattice_value(seed, octave, iu + 1, iv + 1);
  const double a = v00 + (v10 - v00) * su;
  const double b = v01 + (v11 - v01) * su;
  return a + (b - a) * sv;
}

}  // namespace detail_world

/// Deterministic analytic world: multi-octave value-noise heightfield plus
/// primitive obstacles resting on the terrain. Fully reproducible from
/// (config, seed).
class World {
 public:
  explicit World(const WorldConfig& config) : cfg_(config) {
    if (cfg_.domain_m <= 0.0)
      throw std::invalid_argument("world: domain size must be positive");
    if (cfg_.octaves < 0 || cfg_.base_wavelength_m <= 0.0)
      throw std::invalid_argument("world: bad noise parameters");
    if (std::abs(cfg_.ramp_grade) > cfg_.max_slope)
      throw std::invalid_argument("world: ramp grade exceeds max slope");

    // Clamp the noise amplitude so the analytic gradient bound (3*sqrt(2)
    // per octave per lattice unit, persistence 0.5 / lacunarity 2 keeps the
    // per-octave slope contribution constant) stays within max_slope.
    amplitude_eff_ = cfg_.amplitude_m;
    if (cfg_.octaves > 0 && cfg_.amplitude_m > 0.0) {
      const double slope_budget = cfg_.max_slope - std::abs(cfg_.ramp_grade);
      const double bound_per_amp =
          3.0 * std::sqrt(2.0) * cfg_.octaves / cfg_.base_wavelength_m;
      amplitude_eff_ = std::min(cfg_.amplitude_m,
                                std::max(0.0, slope_budget) / bound_per_amp);
    }

    spawn_obstacles();
  }

  const WorldConfig& config() const { return cfg_; }
  const std::vector<Obstacle>& obstacles() const { return obstacles_; }
  double effective_amplitude() const { return amplitude_eff_; }

  bool in_domain(double x, double y) const {
    const double h = 0.5 * cfg_.domain_m;
    return x >= -h && x <= h && y >= -h && y <= h;
  }

  double height_at(double x, double y) const {
    if (!in_domain(x, y))
      throw std::out_of_range("world: query outside domain");
    return height_unchecked(x, y);
  }

  /// Terrain inclination along the pose's heading, positive uphill.
  double surface_pitch(const Pose& pose) const {
    const Vec3 fwd = pose.orientation * Vec3::UnitX();
    Vec3 h(fwd.x(), fwd.y(), 0.0);
    const double n = h.norm();
    if (n < 1e-9) return 0.0;
    h /= n;
    return std::atan(directional_slope(pose.position.x(), pose.position.y(),
                                       h.x(), h.y()));
  }

  double directional_slope(double x, double y, double dx, double dy) const {
    constexpr double eps = 0.05;
    const double hf = height_clamped(x + eps * dx, y + eps * dy);
    const double hb = height_clamped(x - eps * dx, y - eps * dy);
    return (hf - hb) / (2.0 * eps);
  }

  /// Std of terrain heights sampled on a grid across the footprint.
  double roughness(double x, double y, double span_x, double span_y) const {
    constexpr int n = 5;
    double sum = 0.0, sumsq = 0.0;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        const double px = x + span_x * (static_cast<double>(i) / (n - 1) - 0.5);
        const double py = y + span_y * (static_cast<double>(j) / (n - 1) - 0.5);
        const double h = height_clamped(px, py);
        sum += h;
        sumsq += h * h;
      }
    }
    const double mean = sum / (n * n);
    return std::sqrt(std::max(0.0, sumsq / (n * n) - mean * mean));
  }

  bool inside_obstacle(const Vec3& p) const {
    for (const Obstacle& o : obstacles_)
      if (o.contains(p)) return true;
    return false;
  }

  /// Obstacles whose xy bounding circle comes within `radius` of (x, y).
  std::vector<const Obstacle*> obstacles_near(double x, double y,
                                              double radius) const {
    std::vector<const Obstacle*> out;
    for (const Obstacle& o : obstacles_) {
      const double d = std::hypot(o.center.x() - x, o.center.y() - y);
      if (d <= radius + o.bounding_radius_xy()) out.push_back(&o);
    }
    return out;
  }

 private:
  double height_unchecked(double x, double y) const {
    double h = cfg_.ramp_grade * x;
    double amp = amplitude_eff_;
    double wav = cfg_.base_wavelength_m;
    for (int o = 0; o < cfg_.octaves; ++o) {
      h += amp * detail_world::value_noise(cfg_.seed, o, x / wav, y / wav);
      amp *= 0.5;
      wav *= 0.5;
    }
    return h;
  }

  double height_clamped(double x, double y) const {
    const double half = 0.5 * cfg_.domain_m;
    x = std::min(half, std::max(-half, x));
    y = std::min(half, std::max(-half, y));
    return height_unchecked(x, y);
  }

  void spawn_obstacles() {
    const double area_km2 = (cfg_.domain_m / 1000.0) * (cfg_.domain_m / 1000.0);
    const auto count = static_cast<std::size_t>(
        std::llround(cfg_.obstacle_density_per_km2 * area_km2));
    Rng rng(mix_seed(cfg_.seed, 0xB51));
    const double half = 0.5 * cfg_.domain_m;
    const double margin = std::min(10.0, 0.05 * cfg_.domain_m);
    obstacles_.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
      Obstacle o;
      const double x = rng.uniform(-half + margin, half - margin);
      const double y = rng.uniform(-half + margin, half - margin);
      const double ground = height_clamped(x, y);
      const int tag = static_cast<int>(rng.below(3));
      switch (tag) {
        case 0: {  // rock: squat box, partially buried
          o.kind = ObstacleKind::Box;
          o.tag = ObstacleTag::Rock;
          const double w = rng.uniform(0.4, 2.0);
          const double d = rng.uniform(0.4, 2.0);
          const double h = rng.uniform(0.4, 1.5);
          o.dims = Vec3(w, d, h);
          o.yaw = rng.uniform(0.0, 2.0 * M_PI);
          o.center = Vec3(x, y, ground + 0.5 * h - 0.1);
          break;
        }
        case 1: {  // trunk: vertical cylinder
          o.kind = ObstacleKind::Cylinder;
          o.tag = ObstacleTag::Trunk;
          const double r = rng.uniform(0.15, 0.5);
          const double h = rng.uniform(2.0, 6.0);
          o.dims = Vec3(r, r, h);
          o.center = Vec3(x, y, ground + 0.5 * h - 0.1);
          break;
        }
        default: {  // wall: long thin box
          o.kind = ObstacleKind::Box;
          o.tag = ObstacleTag::Wall;
          const double len = rng.uniform(3.0, 8.0);
          const double h = rng.uniform(1.0, 2.0);
          o.dims = Vec3(len, 0.3, h);
          o.yaw = rng.uniform(0.0, 2.0 * M_PI);
          o.center = Vec3(x, y, ground + 0.5 * h - 0.1);
          break;
        }
      }
      obstacles_.push_back(o);
    }
  }

  WorldConfig cfg_;
  double amplitude_eff_ = 0.0;
  std::vector<Obstacle> obstacles_;
};

inline World build_world(const WorldConfig& config) { return World(config); }

inline World build_world(WorldConfig config, std::uint64_t seed) {
  config.seed = seed;
  return World(config);
}

}  // namespace trav
