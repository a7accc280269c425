#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "trav/geometry.hpp"
#include "trav/rng.hpp"

namespace trav {

/// Ordered set of 3D points with optional per-point normals and curvature.
/// Channel vectors are either empty or exactly as long as `points`.
struct PointCloud {
  std::vector<Vec3> points;
  std::vector<Vec3> normals;
  std::vector<double> curvature;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  bool has_normals() const { return !normals.empty(); }
  bool has_curvature() const { return !curvature.empty(); }

  void reserve(std::size_t n) {
    points.reserve(n);
    if (has_normals()) normals.reserve(n);
    if (has_curvature()) curvature.reserve(n);
  }

  void push_from(const PointCloud& src, std::size_t i) {
    points.push_back(src.points[i]);
    if (src.has_normals()) normals.push_back(src.normals[i]);
    if (src.has_curvature()) curvature.push_back(src.curvature[i]);
  }

  bool channels_consistent() const {
    return (normals.empty() || normals.size() == points.size()) &&
           (curvature.empty() || curvature.size() == points.size());
  }
};

/// Robot footprint: full side lengths of an oriented box, meters.
struct Footprint {
  double dx = 1.0;
  double dy = 0.67;
  double dz = 1.0;

  Footprint() = default;
  Footprint(double x, double y, double z) : dx(x), dy(y), dz(z) {
    if (dx <= 0.0 || dy <= 0.0 || dz <= 0.0)
      throw std::invalid_argument("footprint extents must be positive");
  }

  Vec3 half() const { return Vec3(dx / 2.0, dy / 2.0, dz / 2.0); }
};

/// Points whose coordinates in the frame of `center` fall inside the box.
inline PointCloud crop_box(const PointCloud& cloud, const Pose& center,
                           const Footprint& footprint) {
  const Vec3 h = footprint.half();
  PointCloud out;
  out.reserve(cloud.size() / 4);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Vec3 local = center.to_local(cloud.points[i]);
    if (std::abs(local.x()) <= h.x() && std::abs(local.y()) <= h.y() &&
        std::abs(local.z()) <= h.z()) {
      out.push_from(cloud, i);
    }
  }
  return out;
}

struct NormalizeResult {
  PointCloud cloud;
  Vec3 centroid;
  double scale = 1.0;
};

/// (p - centroid) / scale with scale = max distance from the centroid
/// (1 when degenerate). Normals and curvature pass through unchanged.
inline NormalizeResult normalize_unit_sphere(const PointCloud& cloud) {
  if (cloud.empty()) throw std::invalid_argument("empty cloud");
  NormalizeResult res;
  Vec3 c = Vec3::Zero();
  for (const Vec3& p : cloud.points) c += p;
  c /= static_cast<double>(cloud.size());
  double scale = 0.0;
  for (const Vec3& p : cloud.points) scale = std::max(scale, (p - c).norm());
  if (scale == 0.0) scale = 1.0;
  res.centroid = c;
  res.scale = scale;
  res.cloud = cloud;
  for (Vec3& p : res.cloud.points) p = (p - c) / scale;
  return res;
}

namespace detail {
struct VoxelKey {
  std::int64_t x, y, z;
  bool operator==(const VoxelKey&) const = default;
};
struct VoxelKeyHash {
  std::size_t operator()(const VoxelKey& k) const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (std::int64_t v : {k.x, k.y, k.z}) {
      h ^= static_cast<std::uint64_t>(v);
      h *= 0x100000001b3ULL;
    }
    return static_cast<std::size_t>(h);
  }
};
inline VoxelKey voxel_of(const Vec3& p, double voxel) {
  return {static_cast<std::int64_t>(std::floor(p.x() / voxel)),
          static_cast<std::int64_t>(std::floor(p.y() / voxel)),
          static_cast<std::int64_t>(std::floor(p.z() / voxel))};
}
}  // namespace detail

/// One point per occupied voxel (grid anchored at the origin, floor
/// indexing); the survivor is the centroid of the voxel's members.
/// Output order follows first occupancy, so results are deterministic.
inline PointCloud voxel_downsample(const PointCloud& cloud, double voxel) {
  if (voxel <= 0.0) throw std::invalid_argument("voxel size must be positive");
  struct Acc {
    Vec3 sum = Vec3::Zero();
    Vec3 nsum = Vec3::Zero();
    double csum = 0.0;
    std::size_t count = 0;
  };
  std::unordered_map<detail::VoxelKey, std::size_t, detail::VoxelKeyHash> index;
  std::vector<Acc> cells;
  index.reserve(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto key = detail::voxel_of(cloud.points[i], voxel);
    auto [it, inserted] = index.try_emplace(key, cells.size());
    if (inserted) cells.emplace_back();
    Acc& a = cells[it->second];
    a.sum += cloud.points[i];
    if (cloud.has_normals()) a.nsum += cloud.normals[i];
    if (cloud.has_curvature()) a.csum += cloud.curvature[i];
    ++a.count;
  }
  PointCloud out;
  out.points.reserve(cells.size());
  for (const Acc& a : cells) {
    const double inv = 1.0 / static_cast<double>(a.count);
    out.points.push_back(a.sum * inv);
    if (cloud.has_normals()) {
      Vec3 n = a.nsum * inv;
      const double len = n.norm();
      out.normals.push_back(len > 1e-12 ? Vec3(n / len) : Vec3(0, 0, 1));
    }
    if (cloud.has_curvature()) out.curvature.push_back(a.csum * inv);
  }
  return out;
}

/// Perturbs every coordinate by an independent N(0, sigma^2) draw.
inline PointCloud add_gaussian_noise(const PointCloud& cloud, double sigma,
                                     std::uint64_t seed) {
  if (sigma < 0.0) throw std::invalid_argument("sigma must be non-negative");
  PointCloud out = cloud;
  if (sigma == 0.0) return out;
  Rng rng(seed);
  for (Vec3& p : out.points) {
    p.x() += rng.normal(0.0, sigma);
    p.y() += rng.normal(0.0, sigma);
    p.z() += rng.normal(0.0, sigma);
  }
  return out;
}

/// Rigid transform of points and normals; curvature is preserved.
inline PointCloud transform_cloud(const PointCloud& cloud, const Pose& pose) {
  if (!pose.unit_orientation())
    throw std::invalid_argument("pose orientation is not a unit quaternion");
  PointCloud out = cloud;
  for (Vec3& p : out.points) p = pose.apply(p);
  for (Vec3& n : out.normals) n = pose.orientation * n;
  return out;
}

/// Exactly n points: seeded subsample without replacement when the cloud is
/// larger, seeded resampling with replacement when smaller.
inline PointCloud resample_fixed(const PointCloud& cloud, std::size_t n,
                                 std::uint64_t seed) {
  if (cloud.empty()) throw std::invalid_argument("empty cloud");
  PointCloud out;
  out.reserve(n);
  Rng rng(seed);
  if (cloud.size() > n) {
    for (std::size_t i : rng.sample_without_replacement(cloud.size(), n))
      out.push_from(cloud, i);
  } else if (cloud.size() < n) {
    for (std::size_t i = 0; i < n; ++i)
      out.push_from(cloud, rng.below(cloud.size()));
  } else {
    out = cloud;
  }
  return out;
}

}  // namespace trav
