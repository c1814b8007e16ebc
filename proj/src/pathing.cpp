#include "exsim/pathing.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <unordered_map>

namespace exsim {

namespace {

struct Neighbor {
  Eigen::Vector3i offset;
  double length;  // in cells
};

const std::vector<Neighbor>& neighbors26() {
  static const std::vector<Neighbor> table = [] {
    std::vector<Neighbor> t;
    for (int dz = -1; dz <= 1; ++dz)
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          if (dx == 0 && dy == 0 && dz == 0) continue;
          t.push_back({{dx, dy, dz}, std::sqrt(double(dx * dx + dy * dy + dz * dz))});
        }
    return t;
  }();
  return table;
}

}  // namespace

PlanGrid::PlanGrid(const VoxelMap& map, int coarsen_factor, double clearance)
    : origin_(map.origin()), map_version_(map.version()) {
  coarsen_factor = std::max(1, coarsen_factor);
  resolution_ = map.resolution() * coarsen_factor;
  for (int a = 0; a < 3; ++a)
    dims_[a] = (map.dims()[a] + coarsen_factor - 1) / coarsen_factor;
  free_.assign(static_cast<std::size_t>(dims_.x()) * dims_.y() * dims_.z(), false);
  for (int z = 0; z < dims_.z(); ++z)
    for (int y = 0; y < dims_.y(); ++y)
      for (int x = 0; x < dims_.x(); ++x) {
        const Eigen::Vector3i idx(x, y, z);
        const Vec3 center = cell_center(idx);
        const Eigen::Vector3i fine = map.cell_of(center);
        if (!map.in_bounds(fine)) continue;
        const TsdfVoxel& v = map.voxel(fine);
        const bool ok = v.weight > map.known_threshold() && v.sdf > clearance;
        free_[static_cast<std::size_t>(linear_index(idx))] = ok;
      }
}

Eigen::Vector3i PlanGrid::cell_of(const Vec3& p) const {
  Eigen::Vector3i idx;
  for (int a = 0; a < 3; ++a)
    idx[a] = static_cast<int>(std::floor((p[a] - origin_[a]) / resolution_));
  return idx;
}

Vec3 PlanGrid::cell_center(const Eigen::Vector3i& idx) const {
  return origin_ + (idx.cast<double>() + Vec3::Constant(0.5)) * resolution_;
}

std::optional<Eigen::Vector3i> PlanGrid::snap_free(const Vec3& p, int max_ring) const {
  const Eigen::Vector3i base = cell_of(p);
  if (free_cell(base)) return base;
  for (int ring = 1; ring <= max_ring; ++ring) {
    for (int dz = -ring; dz <= ring; ++dz)
      for (int dy = -ring; dy <= ring; ++dy)
        for (int dx = -ring; dx <= ring; ++dx) {
          if (std::max({std::abs(dx), std::abs(dy), std::abs(dz)}) != ring) continue;
          const Eigen::Vector3i idx = base + Eigen::Vector3i(dx, dy, dz);
          if (free_cell(idx)) return idx;
        }
  }
  return std::nullopt;
}

std::optional<std::vector<Vec3>> PlanGrid::shortest_path(const Vec3& a, const Vec3& b) const {
  const auto start = snap_free(a);
  const auto goal = snap_free(b);
  if (!start || !goal) return std::nullopt;
  if (*start == *goal) return std::vector<Vec3>{a, b};

  const int n = dims_.x() * dims_.y() * dims_.z();
  std::vector<double> g(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
  std::vector<int> parent(static_cast<std::size_t>(n), -1);
  const int start_id = linear_index(*start);
  const int goal_id = linear_index(*goal);
  const Vec3 goal_center = cell_center(*goal);

  using Entry = std::pair<double, int>;  // (f, cell); ties by cell id
  std::priority_queue<Entry, std::vector<Entry>, std::greater<Entry>> open;
  g[static_cast<std::size_t>(start_id)] = 0.0;
  open.push({(cell_center(*start) - goal_center).norm(), start_id});

  auto coords = [&](int id) {
    return Eigen::Vector3i(id % dims_.x(), (id / dims_.x()) % dims_.y(),
                           id / (dims_.x() * dims_.y()));
  };

  while (!open.empty()) {
    const auto [f, id] = open.top();
    open.pop();
    if (id == goal_id) break;
    const Eigen::Vector3i idx = coords(id);
    const double gi = g[static_cast<std::size_t>(id)];
    if (f - (cell_center(idx) - goal_center).norm() > gi + 1e-12) continue;  // stale entry
    for (const auto& nb : neighbors26()) {
      const Eigen::Vector3i nidx = idx + nb.offset;
      if (!free_cell(nidx)) continue;
      const int nid = linear_index(nidx);
      const double ng = gi + nb.length * resolution_;
      if (ng < g[static_cast<std::size_t>(nid)] - 1e-12) {
        g[static_cast<std::size_t>(nid)] = ng;
        parent[static_cast<std::size_t>(nid)] = id;
        open.push({ng + (cell_center(nidx) - goal_center).norm(), nid});
      }
    }
  }

  if (!std::isfinite(g[static_cast<std::size_t>(goal_id)])) return std::nullopt;
  std::vector<Vec3> path;
  for (int id = goal_id; id != -1; id = parent[static_cast<std::size_t>(id)])
    path.push_back(cell_center(coords(id)));
  std::reverse(path.begin(), path.end());
  path.front() = a;
  path.back() = b;
  return path;
}

std::vector<double> PlanGrid::path_lengths(const Vec3& src, const std::vector<Vec3>& targets) const {
  std::vector<double> out(targets.size(), kUnreachableCost);
  const auto start = snap_free(src);
  if (!start) return out;

  std::unordered_map<int, std::vector<int>> cell_targets;
  std::size_t pending_targets = 0;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const auto cell = snap_free(targets[i]);
    if (cell) {
      cell_targets[linear_index(*cell)].push_back(static_cast<int>(i));
      ++pending_targets;
    }
  }
  if (pending_targets == 0) return out;

  const int n = dims_.x() * dims_.y() * dims_.z();
  std::vector<double> dist(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
  using Entry = std::pair<double, int>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<Entry>> open;
  const int start_id = linear_index(*start);
  dist[static_cast<std::size_t>(start_id)] = 0.0;
  open.push({0.0, start_id});

  auto coords = [&](int id) {
    return Eigen::Vector3i(id % dims_.x(), (id / dims_.x()) % dims_.y(),
                           id / (dims_.x() * dims_.y()));
  };

  while (!open.empty() && pending_targets > 0) {
    const auto [d, id] = open.top();
    open.pop();
    if (d > dist[static_cast<std::size_t>(id)] + 1e-12) continue;
    if (auto it = cell_targets.find(id); it != cell_targets.end()) {
      for (int ti : it->second) out[static_cast<std::size_t>(ti)] = d;
      pending_targets -= it->second.size();
      cell_targets.erase(it);
    }
    const Eigen::Vector3i idx = coords(id);
    for (const auto& nb : neighbors26()) {
      const Eigen::Vector3i nidx = idx + nb.offset;
      if (!free_cell(nidx)) continue;
      const int nid = linear_index(nidx);
      const double ng = d + nb.length * resolution_;
      if (ng < dist[static_cast<std::size_t>(nid)] - 1e-12) {
        dist[static_cast<std::size_t>(nid)] = ng;
        open.push({ng, nid});
      }
    }
  }
  return out;
}

double move_cost(const Pose4& a, const Pose4& b, double v_max, double yaw_rate_max,
                 const PlanGrid& grid) {
  if (v_max <= 0.0 || yaw_rate_max <= 0.0)
    throw std::invalid_argument("move_cost: limits must be positive");
  const std::vector<Vec3> target{b.position};
  const double geodesic = grid.path_lengths(a.position, target)[0];
  if (geodesic >= kUnreachableCost) return kUnreachableCost;
  // Snapping to cell centers can shave a fraction of a cell; the straight
  // line is always a valid lower bound on travel.
  const double length = std::max(geodesic, (b.position - a.position).norm());
  const double translate = length / v_max;
  const double rotate = yaw_distance(a.yaw, b.yaw) / yaw_rate_max;
  return std::max(translate, rotate);
}

}  // namespace exsim
