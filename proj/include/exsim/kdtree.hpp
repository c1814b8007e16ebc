#pragma once

#include <algorithm>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "exsim/geometry.hpp"

namespace exsim {

// Exact KD-tree over 3-D points. Build is O(n log n), queries are exact.
// Tie handling is deterministic: equal coordinates are ordered by index.
class KdTree3 {
 public:
  KdTree3() = default;

  explicit KdTree3(std::vector<Vec3> points) : points_(std::move(points)) {
    order_.resize(points_.size());
    for (int i = 0; i < static_cast<int>(order_.size()); ++i) order_[i] = i;
    nodes_.reserve(points_.size());
    if (!points_.empty()) root_ = build(0, static_cast<int>(points_.size()), 0);
  }

  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }
  const Vec3& point(int i) const { return points_[static_cast<std::size_t>(i)]; }

  // Index of the nearest point and its squared distance.
  std::optional<std::pair<int, double>> nearest(const Vec3& q) const {
    if (points_.empty()) return std::nullopt;
    int best = -1;
    double best_d2 = std::numeric_limits<double>::infinity();
    search_nearest(root_, q, best, best_d2);
    return std::make_pair(best, best_d2);
  }

  // Indices of all points within radius r of q, ascending.
  std::vector<int> radius(const Vec3& q, double r) const {
    std::vector<int> out;
    if (!points_.empty()) search_radius(root_, q, r * r, out);
    std::sort(out.begin(), out.end());
    return out;
  }

 private:
  struct Node {
    int index = -1;   // splitting point
    int axis = 0;
    int left = -1;
    int right = -1;
  };

  int build(int begin, int end, int depth) {
    if (begin >= end) return -1;
    const int axis = depth % 3;
    const int mid = begin + (end - begin) / 2;
    std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                     [&](int a, int b) {
                       const double ca = points_[a][axis], cb = points_[b][axis];
                       if (ca != cb) return ca < cb;
                       return a < b;
                     });
    Node node;
    node.index = order_[mid];
    node.axis = axis;
    const int self = static_cast<int>(nodes_.size());
    nodes_.push_back(node);
    nodes_[self].left = build(begin, mid, depth + 1);
    nodes_[self].right = build(mid + 1, end, depth + 1);
    return self;
  }

  void search_nearest(int node_id, const Vec3& q, int& best, double& best_d2) const {
    if (node_id < 0) return;
    const Node& node = nodes_[node_id];
    const Vec3& p = points_[node.index];
    const double d2 = (p - q).squaredNorm();
    if (d2 < best_d2 || (d2 == best_d2 && node.index < best)) {
      best_d2 = d2;
      best = node.index;
    }
    const double delta = q[node.axis] - p[node.axis];
    const int near = delta < 0.0 ? node.left : node.right;
    const int far = delta < 0.0 ? node.right : node.left;
    search_nearest(near, q, best, best_d2);
    if (delta * delta <= best_d2) search_nearest(far, q, best, best_d2);
  }

  void search_radius(int node_id, const Vec3& q, double r2, std::vector<int>& out) const {
    if (node_id < 0) return;
    const Node& node = nodes_[node_id];
    const Vec3& p = points_[node.index];
    if ((p - q).squaredNorm() <= r2) out.push_back(node.index);
    const double delta = q[node.axis] - p[node.axis];
    const int near = delta < 0.0 ? node.left : node.right;
    const int far = delta < 0.0 ? node.right : node.left;
    search_radius(near, q, r2, out);
    if (delta * delta <= r2) search_radius(far, q, r2, out);
  }

  std::vector<Vec3> points_;
  std::vector<int> order_;
  std::vector<Node> nodes_;
  int root_ = -1;
};

}  // namespace exsim
