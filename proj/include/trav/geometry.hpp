#pragma once

#include <Eigen/Dense>
#include <Eigen/Geometry>
#include <cmath>
#include <stdexcept>

namespace trav {

using Vec3 = Eigen::Vector3d;
using Quat = Eigen::Quaterniond;

/// Rigid pose: position plus unit quaternion.
struct Pose {
  Vec3 position{0.0, 0.0, 0.0};
  Quat orientation{1.0, 0.0, 0.0, 0.0};  // w, x, y, z

  static Pose identity() { return Pose{}; }

  static Pose from_xyz_yaw(double x, double y, double z, double yaw) {
    Pose p;
    p.position = Vec3(x, y, z);
    p.orientation = Quat(Eigen::AngleAxisd(yaw, Vec3::UnitZ()));
    return p;
  }

  /// yaw-pitch-roll (ZYX) composition; pitch positive nose-up.
  static Pose from_position_ypr(const Vec3& pos, double yaw, double pitch,
                                double roll) {
    Pose p;
    p.position = pos;
    p.orientation = Quat(Eigen::AngleAxisd(yaw, Vec3::UnitZ()) *
                         Eigen::AngleAxisd(-pitch, Vec3::UnitY()) *
                         Eigen::AngleAxisd(roll, Vec3::UnitX()));
    return p;
  }

  bool unit_orientation(double tol = 1e-6) const {
    return std::abs(orientation.norm() - 1.0) <= tol;
  }

  Vec3 apply(const Vec3& p) const { return orientation * p + position; }

  Vec3 to_local(const Vec3& p) const {
    return orientation.conjugate() * (p - position);
  }

  /// this ∘ other: apply `other` first, then this.
  Pose compose(const Pose& other) const {
    Pose out;
    out.orientation = (orientation * other.orientation).normalized();
    out.position = orientation * other.position + position;
    return out;
  }

  Pose inverse() const {
    Pose out;
    out.orientation = orientation.conjugate();
    out.position = -(out.orientation * position);
    return out;
  }

  double yaw() const {
    const Vec3 fwd = orientation * Vec3::UnitX();
    return std::atan2(fwd.y(), fwd.x());
  }

  /// Same position, orientation reduced to heading only (gravity-upright).
  Pose yaw_only() const { return from_xyz_yaw(position.x(), position.y(), position.z(), yaw()); }
};

inline double angle_between(const Quat& a, const Quat& b) {
  double d = std::abs(a.normalized().dot(b.normalized()));
  d = std::min(1.0, d);
  return 2.0 * std::acos(d);
}

/// Axis-aligned box.
struct Aabb {
  Vec3 min{0, 0, 0};
  Vec3 max{0, 0, 0};

  Vec3 extent() const { return max - min; }
  Vec3 center() const { return 0.5 * (min + max); }
  bool contains(const Vec3& p) const {
    return p.x() >= min.x() && p.x() <= max.x() && p.y() >= min.y() &&
           p.y() <= max.y() && p.z() >= min.z() && p.z() <= max.z();
  }
};

inline double deg2rad(double d) { return d * M_PI / 180.0; }
inline double rad2deg(double r) { return r * 180.0 / M_PI; }

inline double clamp01(double v) { return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v); }

}  // namespace trav
