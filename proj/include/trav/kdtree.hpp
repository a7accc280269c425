#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "trav/geometry.hpp"

namespace trav {

/// Static 3D kd-tree over a point array. Ties on distance resolve to the
/// lowest point index so queries are fully deterministic.
class KdTree {
 public:
  explicit KdTree(const std::vector<Vec3>& points) : pts_(points) {
    if (pts_.empty()) throw std::invalid_argument("kdtree: empty point set");
    order_.resize(pts_.size());
    for (std::size_t i = 0; i < order_.size(); ++i) order_[i] = i;
    nodes_.reserve(2 * pts_.size());
    root_ = build(0, order_.size());
  }

  struct Hit {
    std::size_t index = 0;
    double sq_dist = std::numeric_limits<double>::infinity();
  };

  /// Nearest neighbor; returns false if nothing lies within max_dist.
  bool nearest(const Vec3& q, Hit& out,
               double max_dist = std::numeric_limits<double>::infinity()) const {
    Hit best;
    best.sq_dist = max_dist * max_dist;
    bool found = false;
    nearest_rec(root_, q, best, found);
    if (found) out = best;
    return found;
  }

  /// k nearest neighbors, closest first.
  std::vector<Hit> knn(const Vec3& q, std::size_t k) const {
    std::vector<Hit> heap;  // max-heap on (sq_dist, index)
    heap.reserve(k + 1);
    knn_rec(root_, q, k, heap);
    std::sort(heap.begin(), heap.end(), [](const Hit& a, const Hit& b) {
      return a.sq_dist != b.sq_dist ? a.sq_dist < b.sq_dist
                                    : a.index < b.index;
    });
    return heap;
  }

  std::size_t size() const { return pts_.size(); }

 private:
  struct Node {
    Vec3 point;
    std::size_t index;
    int axis;
    std::int32_t left = -1;
    std::int32_t right = -1;
  };

  static bool hit_worse(const Hit& a, const Hit& b) {
    return a.sq_dist != b.sq_dist ? a.sq_dist < b.sq_dist : a.index < b.index;
  }

  std::int32_t build(std::size_t lo, std::size_t hi) {
    if (lo >= hi) return -1;
    Vec3 mn = pts_[order_[lo]], mx = pts_[order_[lo]];
    for (std::size_t i = lo + 1; i < hi; ++i) {
      mn = mn.cwiseMin(pts_[order_[i]]);
      mx = mx.cwiseMax(pts_[order_[i]]);
    }
    const Vec3 ext = mx - mn;
    int axis = 0;
    if (ext.y() > ext.x()) axis = 1;
    if (ext.z() > ext[axis]) axis = 2;
    const std::size_t mid = (lo + hi) / 2;
    std::nth_element(order_.begin() + lo, order_.begin() + mid,
                     order_.begin() + hi, [&](std::size_t a, std::size_t b) {
                       if (pts_[a][axis] != pts_[b][axis])
                         return pts_[a][axis] < pts_[b][axis];
                       return a < b;
                     });
    Node node;
    node.index = order_[mid];
    node.point = pts_[node.index];
    node.axis = axis;
    const std::int32_t id = static_cast<std::int32_t>(nodes_.size());
    nodes_.push_back(node);
    const std::int32_t l = build(lo, mid);
    const std::int32_t r = build(mid + 1, hi);
    nodes_[id].left = l;
    nodes_[id].right = r;
    return id;
  }

  void nearest_rec(std::int32_t id, const Vec3& q, Hit& best,
                   bool& found) const {
    if (id < 0) return;
    const Node& n = nodes_[id];
    const double d2 = (n.point - q).squaredNorm();
    Hit cand{n.index, d2};
    if (d2 < best.sq_dist ||
        (d2 == best.sq_dist && found && hit_worse(cand, best))) {
      best = cand;
      found = true;
    } else if (!found && d2 <= best.sq_dist) {
      best = cand;
      found = true;
    }
    const double delta = q[n.axis] - n.point[n.axis];
    const std::int32_t near = delta < 0.0 ? n.left : n.right;
    const std::int32_t far = delta < 0.0 ? n.right : n.left;
    nearest_rec(near, q, best, found);
    if (delta * delta <= best.sq_dist) nearest_rec(far, q, best, found);
  }

  void knn_rec(std::int32_t id, const Vec3& q, std::size_t k,
               std::vector<Hit>& heap) const {
    if (id < 0) return;
    const Node& n = nodes_[id];
    const Hit cand{n.index, (n.point - q).squaredNorm()};
    auto cmp = [](const Hit& a, const Hit& b) { return hit_worse(a, b); };
    if (heap.size() < k) {
      heap.push_back(cand);
      std::push_heap(heap.begin(), heap.end(), cmp);
    } else if (hit_worse(cand, heap.front())) {
      std::pop_heap(heap.begin(), heap.end(), cmp);
      heap.back() = cand;
      std::push_heap(heap.begin(), heap.end(), cmp);
    }
    const double delta = q[n.axis] - n.point[n.axis];
    const std::int32_t near = delta < 0.0 ? n.left : n.right;
    const std::int32_t far = delta < 0.0 ? n.right : n.left;
    knn_rec(near, q, k, heap);
    if (heap.size() < k || delta * delta <= heap.front().sq_dist)
      knn_rec(far, q, k, heap);
  }

  const std::vector<Vec3>& pts_;
  std::vector<std::size_t> order_;
  std::vector<Node> nodes_;
  std::int32_t root_ = -1;
};

}  // namespace trav
