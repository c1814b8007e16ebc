#include "exsim/pruner.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

namespace exsim {

ScpGrid::ScpGrid(const Vec3& origin, const Eigen::Vector3i& dims, double resolution)
    : origin_(origin), dims_(dims), resolution_(resolution) {
  if (resolution <= 0.0) throw std::invalid_argument("ScpGrid: resolution must be > 0");
  counters_.assign(static_cast<std::size_t>(dims_.x()) * dims_.y() * dims_.z(), 0);
}

ScpGrid ScpGrid::from_bounds(const Aabb& bounds, double resolution) {
  const Vec3 extent = bounds.extent();
  Eigen::Vector3i dims;
  for (int a = 0; a < 3; ++a)
    dims[a] = std::max(1, static_cast<int>(std::ceil(extent[a] / resolution - 1e-9)));
  return ScpGrid(bounds.min, dims, resolution);
}

Eigen::Vector3i ScpGrid::cell_of(const Vec3& p) const {
  Eigen::Vector3i idx;
  for (int a = 0; a < 3; ++a)
    idx[a] = static_cast<int>(std::floor((p[a] - origin_[a]) / resolution_));
  return idx;
}

Vec3 ScpGrid::cell_center(int linear) const {
  const int x = linear % dims_.x();
  const int y = (linear / dims_.x()) % dims_.y();
  const int z = linear / (dims_.x() * dims_.y());
  return origin_ + (Vec3(x, y, z) + Vec3::Constant(0.5)) * resolution_;
}

void ScpGrid::reset_cells(std::span<const int> cells, int n_ob) {
  for (int c : cells) counters_[static_cast<std::size_t>(c)] = static_cast<std::int16_t>(n_ob);
}

std::vector<int> covered_cells(const Frame& frame, const ScpGrid& grid, const SensorFov& fov) {
  const double half_h = deg_to_rad(fov.fov_h_deg) / 2.0;
  const double half_v = deg_to_rad(fov.fov_v_deg) / 2.0;
  const double range = fov.max_range;
  const Eigen::Matrix3d rot_wc = frame.pose.rotation();
  const Eigen::Matrix3d rot_cw = rot_wc.transpose();
  const Vec3 cam = frame.pose.position;

  // Nearest point depth per angular bin; bin width chosen so a bin spans
  // about one scp cell at max range.
  const double bin_width = grid.resolution() / range;
  const int bins_h = std::max(1, static_cast<int>(std::ceil(2.0 * half_h / bin_width)));
  const int bins_v = std::max(1, static_cast<int>(std::ceil(2.0 * half_v / bin_width)));
  std::vector<double> nearest(static_cast<std::size_t>(bins_h) * bins_v,
                              std::numeric_limits<double>::infinity());
  auto bin_coords = [&](double az, double el) {
    int bh = static_cast<int>((az + half_h) / (2.0 * half_h) * bins_h);
    int bv = static_cast<int>((el + half_v) / (2.0 * half_v) * bins_v);
    return std::pair<int, int>(std::clamp(bh, 0, bins_h - 1), std::clamp(bv, 0, bins_v - 1));
  };
  for (const Vec3& p : frame.points) {
    const double r = p.norm();
    if (r < 1e-9) continue;
    const auto [bh, bv] = bin_coords(azimuth_of(p), elevation_of(p));
    auto& slot = nearest[static_cast<std::size_t>(bh) * bins_v + bv];
    slot = std::min(slot, r);
  }
  // Nearest recorded depth over the bin and its angular neighbours; keeps
  // the check stable when a direction falls on a bin boundary.
  auto nearest_depth = [&](double az, double el) {
    const auto [bh, bv] = bin_coords(az, el);
    double depth = std::numeric_limits<double>::infinity();
    for (int dh = -1; dh <= 1; ++dh)
      for (int dv = -1; dv <= 1; ++dv) {
        const int h = bh + dh, v = bv + dv;
        if (h < 0 || v < 0 || h >= bins_h || v >= bins_v) continue;
        depth = std::min(depth, nearest[static_cast<std::size_t>(h) * bins_v + v]);
      }
    return depth;
  };

  // Candidate cells: the axis-aligned box of radius max_range around the
  // camera, clipped to the grid.
  Eigen::Vector3i lo = grid.cell_of(cam - Vec3::Constant(range));
  Eigen::Vector3i hi = grid.cell_of(cam + Vec3::Constant(range));
  for (int a = 0; a < 3; ++a) {
    lo[a] = std::max(lo[a], 0);
    hi[a] = std::min(hi[a], grid.dims()[a] - 1);
  }

  std::vector<int> out;
  for (int z = lo.z(); z <= hi.z(); ++z) {
    for (int y = lo.y(); y <= hi.y(); ++y) {
      for (int x = lo.x(); x <= hi.x(); ++x) {
        const Eigen::Vector3i idx(x, y, z);
        const int lin = grid.linear_index(idx);
        const Vec3 center = grid.cell_center(lin);
        const Vec3 p_cam = rot_cw * (center - cam);
        if (p_cam.z() <= 0.0) continue;
        const double r = p_cam.norm();
        if (r > range) continue;
        const double az = azimuth_of(p_cam);
        const double el = elevation_of(p_cam);
        if (std::abs(az) > half_h || std::abs(el) > half_v) continue;
        if (r > nearest_depth(az, el) + grid.resolution()) continue;  // occluded
        out.push_back(lin);
      }
    }
  }
  return out;
}

std::optional<double> cost_effectiveness(const FrameCoverage& coverage) {
  if (coverage.n_new <= 0) return std::nullopt;
  return coverage.cost / static_cast<double>(coverage.n_new);
}

std::vector<int> select_keyframes(std::vector<FrameCoverage*>& frames, ScpGrid& grid,
                                  int tau_gain, int n_ob) {
  std::vector<int> selected;
  if (frames.empty()) return selected;

  // Re-initialize every cell this block references, then run the counted
  // greedy cover.
  for (FrameCoverage* f : frames) {
    grid.reset_cells(f->cells, n_ob);
    f->selected = false;
    f->n_all = static_cast<int>(f->cells.size());
  }

  while (true) {
    FrameCoverage* best = nullptr;
    for (FrameCoverage* f : frames) {
      if (f->selected) continue;
      int covered = 0;
      for (int c : f->cells)
        if (grid.covered(c)) ++covered;
      f->n_covered = covered;
      f->n_new = f->n_all - covered;
      if (f->n_new <= 0) continue;  // zero gain, excluded from the argmin
      if (best == nullptr) {
        best = f;
        continue;
      }
      // alpha_f < alpha_best  <=>  cost_f * n_new_best < cost_best * n_new_f.
      // Frames iterate in ascending id, so strict improvement keeps the
      // lowest id on ties.
      if (f->cost * best->n_new < best->cost * f->n_new) best = f;
    }
    if (best == nullptr || best->n_new <= tau_gain) break;
    best->selected = true;
    selected.push_back(best->frame_id);
    for (int c : best->cells) grid.decrement(c);
  }
  return selected;
}

BlockPartition::BlockPartition(const Aabb& bounds, double edge_length)
    : origin_(bounds.min), edge_(edge_length) {
  if (edge_length <= 0.0) throw std::invalid_argument("BlockPartition: edge must be > 0");
  const Vec3 extent = bounds.extent();
  for (int a = 0; a < 3; ++a)
    dims_[a] = std::max(1, static_cast<int>(std::ceil(extent[a] / edge_length - 1e-9)));
}

int BlockPartition::block_of(const Vec3& p) const {
  Eigen::Vector3i idx;
  for (int a = 0; a < 3; ++a) {
    idx[a] = static_cast<int>(std::floor((p[a] - origin_[a]) / edge_));
    idx[a] = std::clamp(idx[a], 0, dims_[a] - 1);
  }
  return idx.x() + dims_.x() * (idx.y() + dims_.y() * idx.z());
}

Aabb BlockPartition::block_bounds(int id) const {
  const int x = id % dims_.x();
  const int y = (id / dims_.x()) % dims_.y();
  const int z = id / (dims_.x() * dims_.y());
  const Vec3 lo = origin_ + Vec3(x, y, z) * edge_;
  return Aabb{lo, lo + Vec3::Constant(edge_)};
}

bool BlockPartition::is_neighbor(int a, int b) const {
  const auto coords = [&](int id) {
    return Eigen::Vector3i(id % dims_.x(), (id / dims_.x()) % dims_.y(),
                           id / (dims_.x() * dims_.y()));
  };
  const Eigen::Vector3i d = coords(a) - coords(b);
  return std::abs(d.x()) <= 1 && std::abs(d.y()) <= 1 && std::abs(d.z()) <= 1;
}

FramePruner::FramePruner(const Aabb& map_bounds, const PrunerConfig& config)
    : config_(config),
      partition_(map_bounds, config.block_edge),
      grid_(ScpGrid::from_bounds(map_bounds, config.scp_resolution)) {
  blocks_.resize(static_cast<std::size_t>(partition_.block_count()));
  for (int i = 0; i < partition_.block_count(); ++i) {
    blocks_[static_cast<std::size_t>(i)].id = i;
    blocks_[static_cast<std::size_t>(i)].bounds = partition_.block_bounds(i);
  }
}

void FramePruner::add_frame(const Frame& frame) {
  FrameCoverage cov;
  cov.frame_id = frame.id;
  cov.cells = covered_cells(frame, grid_, config_.fov);
  cov.n_all = static_cast<int>(cov.cells.size());
  cov.pose_version = frame.pose_version;
  coverage_[frame.id] = std::move(cov);

  const int block_id = partition_.block_of(frame.pose.position);
  frame_block_[frame.id] = block_id;
  auto& block = blocks_[static_cast<std::size_t>(block_id)];
  block.frame_ids.insert(
      std::upper_bound(block.frame_ids.begin(), block.frame_ids.end(), frame.id), frame.id);
  block.dirty = true;
}

void FramePruner::on_pose_rectified(const Frame& frame) {
  auto it = coverage_.find(frame.id);
  if (it == coverage_.end()) return;
  if (it->second.pose_version == frame.pose_version) return;
  it->second.cells = covered_cells(frame, grid_, config_.fov);
  it->second.n_all = static_cast<int>(it->second.cells.size());
  it->second.pose_version = frame.pose_version;

  const int new_block = partition_.block_of(frame.pose.position);
  const int old_block = frame_block_.at(frame.id);
  blocks_[static_cast<std::size_t>(old_block)].dirty = true;
  if (new_block != old_block) {
    auto& old_ids = blocks_[static_cast<std::size_t>(old_block)].frame_ids;
    old_ids.erase(std::remove(old_ids.begin(), old_ids.end(), frame.id), old_ids.end());
    auto& new_ids = blocks_[static_cast<std::size_t>(new_block)].frame_ids;
    new_ids.insert(std::upper_bound(new_ids.begin(), new_ids.end(), frame.id), frame.id);
    blocks_[static_cast<std::size_t>(new_block)].dirty = true;
    frame_block_[frame.id] = new_block;
  }
}

void FramePruner::solve_block(ScpBlock& block) {
  std::vector<FrameCoverage*> frames;
  frames.reserve(block.frame_ids.size());
  for (int id : block.frame_ids) frames.push_back(&coverage_.at(id));
  const std::vector<int> previous = block.keyframes;
  block.keyframes = select_keyframes(frames, grid_, config_.tau_gain, config_.n_ob);

  // Frames that migrated to another block are governed by that block's solve.
  for (int id : previous)
    if (frame_block_.at(id) == block.id) keyframe_flag_[id] = false;
  int rank = 0;
  for (int id : block.keyframes) {
    keyframe_flag_[id] = true;
    selection_log_.push_back({block.id, id, rank, coverage_.at(id).n_new});
    ++rank;
  }
}

std::vector<int> FramePruner::solve_dirty(std::vector<int>* added, std::vector<int>* removed) {
  std::vector<int> before;
  if (added != nullptr || removed != nullptr) before = all_keyframes();

  std::vector<int> changed;
  for (auto& block : blocks_) {
    if (!block.dirty) continue;
    solve_block(block);
    block.dirty = false;
    changed.push_back(block.id);
  }

  if (added != nullptr || removed != nullptr) {
    std::vector<int> after = all_keyframes();
    if (added != nullptr) {
      added->clear();
      std::set_difference(after.begin(), after.end(), before.begin(), before.end(),
                          std::back_inserter(*added));
    }
    if (removed != nullptr) {
      removed->clear();
      std::set_difference(before.begin(), before.end(), after.begin(), after.end(),
                          std::back_inserter(*removed));
    }
  }
  return changed;
}

bool FramePruner::is_keyframe(int frame_id) const {
  auto it = keyframe_flag_.find(frame_id);
  return it != keyframe_flag_.end() && it->second;
}

std::vector<int> FramePruner::all_keyframes() const {
  std::vector<int> out;
  for (const auto& block : blocks_)
    out.insert(out.end(), block.keyframes.begin(), block.keyframes.end());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace exsim
