#include "exsim/voxel_map.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_set>

namespace exsim {

double compute_sdf(const Vec3& camera, const Vec3& surface, const Vec3& voxel_center,
                   double truncation) {
  const Vec3 ray = surface - camera;
  const double ray_len = ray.norm();
  if (ray_len < 1e-12) throw std::invalid_argument("compute_sdf: degenerate ray");
  const Vec3 dir = ray / ray_len;
  const double along = (voxel_center - camera).dot(dir);
  const double raw = ray_len - along;
  return std::min(truncation, std::max(-truncation, raw));
}

double compute_weight(double z, double sdf, double truncation, double resolution,
                      WeightPolicy policy) {
  if (z <= 0.0) throw std::invalid_argument("compute_weight: non-positive depth");
  if (policy == WeightPolicy::Constant) return 1.0;
  const double front = 1.0 / (z * z);
  if (sdf >= -resolution) return front;
  // Behind-surface ramp, linear from full weight at -resolution down to zero
  // at -truncation. Continuous at sdf == -resolution.
  return front * (truncation + sdf) / (truncation - resolution);
}

VoxelState voxel_state(const TsdfVoxel& voxel, double known_threshold) {
  if (known_threshold <= 0.0) throw std::invalid_argument("voxel_state: tau_w must be > 0");
  if (voxel.weight == 0.0) return VoxelState::Unobserved;
  if (voxel.weight <= known_threshold) return VoxelState::Unknown;
  return VoxelState::Known;
}

VoxelMap::VoxelMap(const Vec3& origin, const Eigen::Vector3i& dims, const VoxelMapConfig& config)
    : config_(config), origin_(origin), dims_(dims) {
  if (config_.resolution <= 0.0) throw std::invalid_argument("VoxelMap: resolution must be > 0");
  truncation_ = config_.truncation_scale * config_.resolution;
  if (truncation_ <= config_.resolution)
    throw std::invalid_argument("VoxelMap: truncation must exceed one cell");
  if (config_.known_threshold <= 0.0)
    throw std::invalid_argument("VoxelMap: known threshold must be > 0");
  if (dims_.x() <= 0 || dims_.y() <= 0 || dims_.z() <= 0)
    throw std::invalid_argument("VoxelMap: dims must be positive");
  voxels_.assign(static_cast<std::size_t>(dims_.x()) * dims_.y() * dims_.z(), TsdfVoxel{});
}

VoxelMap VoxelMap::from_bounds(const Aabb& bounds, const VoxelMapConfig& config) {
  const Vec3 extent = bounds.extent();
  Eigen::Vector3i dims;
  for (int a = 0; a < 3; ++a)
    dims[a] = std::max(1, static_cast<int>(std::ceil(extent[a] / config.resolution - 1e-9)));
  return VoxelMap(bounds.min, dims, config);
}

Aabb VoxelMap::bounds() const {
  return Aabb{origin_, origin_ + dims_.cast<double>() * config_.resolution};
}

Eigen::Vector3i VoxelMap::cell_of(const Vec3& p) const {
  Eigen::Vector3i idx;
  for (int a = 0; a < 3; ++a)
    idx[a] = static_cast<int>(std::floor((p[a] - origin_[a]) / config_.resolution));
  return idx;
}

Vec3 VoxelMap::cell_center(const Eigen::Vector3i& idx) const {
  return origin_ + (idx.cast<double>() + Vec3::Constant(0.5).eval()) * config_.resolution;
}

VoxelState VoxelMap::state(const Eigen::Vector3i& idx) const {
  return voxel_state(voxels_[linear_index(idx)], config_.known_threshold);
}

VoxelState VoxelMap::state(std::size_t linear) const {
  return voxel_state(voxels_[linear], config_.known_threshold);
}

IntegrationStats VoxelMap::integrate_frame(Frame& frame) {
  if (frame.integrated()) throw std::logic_error("integrate_frame: frame already integrated");
  IntegrationStats stats = apply_frame(frame.pose, frame.points, Direction::Integrate);
  frame.integrated_with = frame.pose;
  return stats;
}

IntegrationStats VoxelMap::deintegrate_frame(Frame& frame) {
  if (!frame.integrated()) throw std::logic_error("deintegrate_frame: frame not integrated");
  IntegrationStats stats =
      apply_frame(*frame.integrated_with, frame.points, Direction::Deintegrate);
  frame.integrated_with.reset();
  return stats;
}

// Shared ray walk for integration and de-integration. Both directions must
// visit the same voxels with bit-identical sdf/weight values, or the reverse
// update stops being exact; any change here has to keep the two paths
// symmetric.
IntegrationStats VoxelMap::apply_frame(const Pose4& pose, const std::vector<Vec3>& points,
                                       Direction direction) {
  IntegrationStats stats;
  if (points.empty()) return stats;
  ++version_;

  const double res = config_.resolution;
  const double inv_res = 1.0 / res;
  const Eigen::Matrix3d rot = pose.rotation();
  const Vec3 cam = pose.position;
  const Aabb map_box = bounds();

  for (const Vec3& p_cam : points) {
    const double z = p_cam.z();
    if (z <= 0.0) continue;
    const Vec3 surface = cam + rot * p_cam;
    const Vec3 ray = surface - cam;
    const double ray_len = ray.norm();
    if (ray_len < 1e-12) continue;
    const Vec3 dir = ray / ray_len;
    ++stats.rays_cast;

    // Walk from the camera through the surface point plus one truncation
    // band; voxels whose projection falls farther than delta behind the
    // surface are occluded and skipped.
    double t_begin = 0.0;
    double t_end = ray_len + truncation_;
    double box_t0, box_t1;
    if (!ray_box_intersect(cam, dir, map_box, box_t0, box_t1)) continue;
    t_begin = std::max(t_begin, box_t0);
    t_end = std::min(t_end, box_t1);
    if (t_begin >= t_end) continue;

    // Amanatides-Woo voxel stepping.
    const Vec3 start = cam + dir * (t_begin + 1e-12);
    Eigen::Vector3i idx = cell_of(start);
    for (int a = 0; a < 3; ++a) idx[a] = std::clamp(idx[a], 0, dims_[a] - 1);
    Eigen::Vector3i step;
    Vec3 t_max, t_delta;
    for (int a = 0; a < 3; ++a) {
      if (dir[a] > 1e-15) {
        step[a] = 1;
        const double next_boundary = origin_[a] + (idx[a] + 1) * res;
        t_max[a] = (next_boundary - cam[a]) / dir[a];
        t_delta[a] = res / dir[a];
      } else if (dir[a] < -1e-15) {
        step[a] = -1;
        const double next_boundary = origin_[a] + idx[a] * res;
        t_max[a] = (next_boundary - cam[a]) / dir[a];
        t_delta[a] = -res / dir[a];
      } else {
        step[a] = 0;
        t_max[a] = std::numeric_limits<double>::infinity();
        t_delta[a] = std::numeric_limits<double>::infinity();
      }
    }

    double t = t_begin;
    while (t <= t_end) {
      if (in_bounds(idx)) {
        const Vec3 center = cell_center(idx);
        const double along = (center - cam).dot(dir);
        const double raw = ray_len - along;
        if (raw >= -truncation_) {
          const double sdf = std::min(truncation_, raw);
          const double w = compute_weight(z, sdf, truncation_, res, config_.weight_policy);
          // w == 0 exactly at sdf == -delta: contributes nothing and would
          // divide 0/0 on a fresh voxel.
          if (w > 0.0) {
            TsdfVoxel& v = voxels_[linear_index(idx)];
            if (direction == Direction::Integrate) {
              v.sdf = (v.sdf * v.weight + sdf * w) / (v.weight + w);
              v.weight += w;
            } else {
              const double new_weight = v.weight - w;
              if (new_weight <= kWeightFloor) {
                v.sdf = 0.0;
                v.weight = 0.0;
              } else {
                v.sdf = (v.sdf * v.weight - sdf * w) / new_weight;
                v.weight = new_weight;
              }
            }
            ++stats.voxels_touched;
          }
        }
      }
      // Advance to the next cell crossing.
      int axis = 0;
      if (t_max[1] < t_max[axis]) axis = 1;
      if (t_max[2] < t_max[axis]) axis = 2;
      t = t_max[axis];
      idx[axis] += step[axis];
      if (idx[axis] < 0 || idx[axis] >= dims_[axis]) break;
      t_max[axis] += t_delta[axis];
    }
  }
  return stats;
}

std::vector<Vec3> VoxelMap::sample_iso_surface(double spacing) const {
  std::vector<Vec3> out;
  if (spacing <= 0.0) spacing = config_.resolution;
  std::unordered_set<std::uint64_t> taken;
  const double tau = config_.known_threshold;
  const double res = config_.resolution;

  auto is_known = [&](std::size_t lin) {
    return voxels_[lin].weight > tau;
  };
  auto try_emit = [&](const Vec3& p) {
    // Spacing bins keyed on a shifted grid so nearby crossings collapse to
    // one representative (first in scan order wins).
    const auto bx = static_cast<std::int64_t>(std::floor(p.x() / spacing));
    const auto by = static_cast<std::int64_t>(std::floor(p.y() / spacing));
    const auto bz = static_cast<std::int64_t>(std::floor(p.z() / spacing));
    std::uint64_t key = (static_cast<std::uint64_t>(bx & 0x1fffff) << 42) |
                        (static_cast<std::uint64_t>(by & 0x1fffff) << 21) |
                        static_cast<std::uint64_t>(bz & 0x1fffff);
    if (taken.insert(key).second) out.push_back(p);
  };

  const Eigen::Vector3i axes[3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  for (int z = 0; z < dims_.z(); ++z) {
    for (int y = 0; y < dims_.y(); ++y) {
      for (int x = 0; x < dims_.x(); ++x) {
        const Eigen::Vector3i idx(x, y, z);
        const std::size_t lin = linear_index(idx);
        if (!is_known(lin)) continue;
        const double a = voxels_[lin].sdf;
        for (const auto& axis : axes) {
          const Eigen::Vector3i nb = idx + axis;
          if (!in_bounds(nb)) continue;
          const std::size_t nlin = linear_index(nb);
          if (!is_known(nlin)) continue;
          const double b = voxels_[nlin].sdf;
          if (a * b >= 0.0) continue;
          const double t = a / (a - b);
          const Vec3 pa = cell_center(idx);
          try_emit(pa + t * res * axis.cast<double>());
        }
      }
    }
  }
  return out;
}

bool VoxelMap::operator==(const VoxelMap& other) const {
  if (dims_ != other.dims_ || origin_ != other.origin_) return false;
  for (std::size_t i = 0; i < voxels_.size(); ++i) {
    if (voxels_[i].sdf != other.voxels_[i].sdf || voxels_[i].weight != other.voxels_[i].weight)
      return false;
  }
  return true;
}

}  // namespace exsim
