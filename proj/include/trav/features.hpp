#pragma once

#include <Eigen/Eigenvalues>
#include <stdexcept>

#include "trav/kdtree.hpp"
#include "trav/point_cloud.hpp"

namespace trav {

/// Per-point normals and curvature from PCA over the k nearest neighbors
/// (self inclusive). Normal = eigenvector of the smallest eigenvalue,
/// sign-flipped so z >= 0; curvature = l0/(l0+l1+l2), which lives in
/// [0, 1/3]. Degenerate neighborhoods (zero covariance) fall back to
/// normal (0,0,1) and curvature 0.
inline PointCloud estimate_features(const PointCloud& cloud, std::size_t k = 16) {
  if (k < 3) throw std::invalid_argument("estimate_features: k must be >= 3");
  if (cloud.size() < k)
    throw std::invalid_argument("estimate_features: fewer points than k");

  KdTree tree(cloud.points);
  PointCloud out = cloud;
  out.normals.assign(cloud.size(), Vec3(0, 0, 1));
  out.curvature.assign(cloud.size(), 0.0);

  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto nn = tree.knn(cloud.points[i], k);
    Vec3 mean = Vec3::Zero();
    for (const auto& h : nn) mean += cloud.points[h.index];
    mean /= static_cast<double>(nn.size());
    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    for (const auto& h : nn) {
      const Vec3 d = cloud.points[h.index] - mean;
      cov += d * d.transpose();
    }
    cov /= static_cast<double>(nn.size());

    const double trace = cov.trace();
    if (trace <= 1e-18) continue;  // convention case

    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(cov);
    Vec3 normal = es.eigenvectors().col(0);  // smallest eigenvalue first
    if (normal.z() < 0.0) normal = -normal;
    const double l0 = std::max(0.0, es.eigenvalues()(0));
    out.normals[i] = normal.normalized();
    out.curvature[i] = std::min(l0 / trace, 1.0 / 3.0);
  }
  return out;
}

}  // namespace trav
