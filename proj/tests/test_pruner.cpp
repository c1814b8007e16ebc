#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>

#include "exsim/pruner.hpp"
#include "exsim/rng.hpp"

using namespace exsim;

namespace {

// Independent reference: classic greedy set cover. Each round pick the set
// covering the most uncovered elements (ties to the lowest id); stop when no
// set adds a new element.
std::vector<int> classic_greedy(const std::vector<std::vector<int>>& sets) {
  std::set<int> covered;
  std::vector<bool> used(sets.size(), false);
  std::vector<int> order;
  while (true) {
    int best = -1, best_gain = 0;
    for (int i = 0; i < static_cast<int>(sets.size()); ++i) {
      if (used[static_cast<std::size_t>(i)]) continue;
      int gain = 0;
      for (int e : sets[static_cast<std::size_t>(i)])
        if (!covered.count(e)) ++gain;
      if (gain > best_gain) {
        best_gain = gain;
        best = i;
      }
    }
    if (best < 0) break;
    used[static_cast<std::size_t>(best)] = true;
    order.push_back(best);
    for (int e : sets[static_cast<std::size_t>(best)]) covered.insert(e);
  }
  return order;
}

// Brute force: smallest cover of the universe (for tiny instances only).
std::vector<int> minimal_cover(const std::vector<std::vector<int>>& sets) {
  std::set<int> universe;
  for (const auto& s : sets)
    for (int e : s) universe.insert(e);
  const int n = static_cast<int>(sets.size());
  std::vector<int> best;
  for (int mask = 1; mask < (1 << n); ++mask) {
    std::set<int> covered;
    std::vector<int> chosen;
    for (int i = 0; i < n; ++i)
      if (mask & (1 << i)) {
        chosen.push_back(i);
        for (int e : sets[static_cast<std::size_t>(i)]) covered.insert(e);
      }
    if (covered == universe && (best.empty() || chosen.size() < best.size())) best = chosen;
  }
  return best;
}

// Runs select_keyframes over a synthetic incidence (frame -> cell list).
std::vector<int> run_selection(const std::vector<std::vector<int>>& sets, int tau_gain, int n_ob,
                               int cell_count) {
  ScpGrid grid(Vec3(0, 0, 0), Eigen::Vector3i(cell_count, 1, 1), 1.0);
  std::vector<FrameCoverage> coverage(sets.size());
  std::vector<FrameCoverage*> ptrs;
  for (std::size_t i = 0; i < sets.size(); ++i) {
    coverage[i].frame_id = static_cast<int>(i);
    coverage[i].cells = sets[i];
    ptrs.push_back(&coverage[i]);
  }
  return select_keyframes(ptrs, grid, tau_gain, n_ob);
}

Frame frame_at(int id, const Vec3& position, double yaw) {
  Frame f;
  f.id = id;
  f.pose.position = position;
  f.pose.yaw = yaw;
  return f;
}

}  // namespace

TEST_CASE("covered_cells forms a solid frustum for an empty cloud") {
  ScpGrid grid(Vec3(-5.1, -5.1, -5.1), Eigen::Vector3i(51, 51, 51), 0.2);
  SensorFov fov{80.0, 60.0, 4.5};
  Frame f = frame_at(0, Vec3(0, 0, 0), 0.0);
  const auto cells = covered_cells(f, grid, fov);
  REQUIRE(!cells.empty());

  auto contains_point = [&](const Vec3& p) {
    const int lin = grid.linear_index(grid.cell_of(p));
    return std::find(cells.begin(), cells.end(), lin) != cells.end();
  };
  CHECK(contains_point(Vec3(2.0, 0.0, 0.0)));         // ahead
  CHECK_FALSE(contains_point(Vec3(-1.0, 0.0, 0.0)));  // behind

  // Counting bound: cells fit inside the frustum volume (dilated by a cell).
  const double half_h = deg_to_rad(fov.fov_h_deg) / 2.0;
  const double half_v = deg_to_rad(fov.fov_v_deg) / 2.0;
  const double solid_angle = 2.0 * half_h * 2.0 * std::sin(half_v);
  const double radius = fov.max_range + grid.resolution();
  const double volume = solid_angle * radius * radius * radius / 3.0;
  const double cell_volume = std::pow(grid.resolution(), 3);
  CHECK(static_cast<double>(cells.size()) <= volume / cell_volume * 1.1);
}

TEST_CASE("covered_cells excludes cells occluded by the point cloud") {
  ScpGrid grid(Vec3(-5.1, -5.1, -5.1), Eigen::Vector3i(51, 51, 51), 0.2);
  SensorFov fov{80.0, 60.0, 4.5};
  Frame f = frame_at(0, Vec3(0, 0, 0), 0.0);
  // One obstacle point 2 m ahead (camera frame: z forward).
  f.points.push_back(Vec3(0.0, 0.0, 2.0));
  const auto cells = covered_cells(f, grid, fov);
  const int behind = grid.linear_index(grid.cell_of(Vec3(3.0, 0.0, 0.0)));
  const int in_front = grid.linear_index(grid.cell_of(Vec3(1.0, 0.0, 0.0)));
  CHECK(std::find(cells.begin(), cells.end(), behind) == cells.end());
  CHECK(std::find(cells.begin(), cells.end(), in_front) != cells.end());
}

TEST_CASE("cost_effectiveness") {
  FrameCoverage f;
  f.cost = 1.0;
  f.n_new = 200;
  CHECK(*cost_effectiveness(f) == doctest::Approx(0.005));
  f.n_new = 1;
  CHECK(*cost_effectiveness(f) == doctest::Approx(1.0));
  f.n_new = 0;
  CHECK_FALSE(cost_effectiveness(f).has_value());
}

TEST_CASE("three-frame cover matches the brute-force minimal cover") {
  // F0 covers {a,b}, F1 covers {b,c}, F2 covers {c}.
  const std::vector<std::vector<int>> sets = {{0, 1}, {1, 2}, {2}};
  const auto selected = run_selection(sets, 0, 1, 3);
  CHECK(selected == std::vector<int>{0, 1});
  const auto optimal = minimal_cover(sets);
  CHECK(selected.size() == optimal.size());
}

TEST_CASE("tau_gain threshold semantics") {
  // One frame covering 100 cells passes tau_gain=50; an identical second
  // frame adds nothing and is rejected.
  std::vector<int> all_cells;
  for (int i = 0; i < 100; ++i) all_cells.push_back(i);
  const std::vector<std::vector<int>> sets = {all_cells, all_cells};
  const auto selected = run_selection(sets, 50, 1, 100);
  CHECK(selected == std::vector<int>{0});
}

TEST_CASE("n_ob=2 keeps duplicate frames until the quota is met") {
  const std::vector<std::vector<int>> sets = {{0}, {0}, {0}};
  // Counter starts at 2: the first two identical frames each gain 1, the
  // third sees the cell covered and terminates the loop.
  const auto selected = run_selection(sets, 0, 2, 1);
  CHECK(selected == std::vector<int>{0, 1});
}

TEST_CASE("greedy-oracle equivalence with n_ob=1 tau_gain=0") {
  Rng rng(99);
  for (int trial = 0; trial < 200; ++trial) {
    const int n_sets = rng.uniform_int(1, 20);
    const int n_cells = rng.uniform_int(1, 60);
    std::vector<std::vector<int>> sets(static_cast<std::size_t>(n_sets));
    for (auto& s : sets) {
      const int k = rng.uniform_int(0, std::min(12, n_cells));
      std::set<int> cells;
      for (int i = 0; i < k; ++i) cells.insert(rng.uniform_int(0, n_cells - 1));
      s.assign(cells.begin(), cells.end());
    }
    const auto ours = run_selection(sets, 0, 1, n_cells);
    const auto oracle = classic_greedy(sets);
    CHECK(ours == oracle);
  }
}

TEST_CASE("coverage guarantee at tau_gain=0") {
  Rng rng(311);
  for (int trial = 0; trial < 50; ++trial) {
    const int n_sets = rng.uniform_int(2, 15);
    const int n_cells = 40;
    const int n_ob = rng.uniform_int(1, 3);
    std::vector<std::vector<int>> sets(static_cast<std::size_t>(n_sets));
    for (auto& s : sets) {
      std::set<int> cells;
      const int k = rng.uniform_int(1, 15);
      for (int i = 0; i < k; ++i) cells.insert(rng.uniform_int(0, n_cells - 1));
      s.assign(cells.begin(), cells.end());
    }
    const auto selected = run_selection(sets, 0, n_ob, n_cells);

    // Any cell observed >= n_ob times by the full set must be observed
    // >= n_ob times by the keyframes alone.
    std::map<int, int> full_count, key_count;
    for (const auto& s : sets)
      for (int c : s) ++full_count[c];
    for (int id : selected)
      for (int c : sets[static_cast<std::size_t>(id)]) ++key_count[c];
    for (const auto& [cell, count] : full_count) {
      if (count >= n_ob) CHECK(key_count[cell] >= n_ob);
    }
  }
}

TEST_CASE("raising tau_gain never selects more keyframes") {
  Rng rng(417);
  for (int trial = 0; trial < 30; ++trial) {
    const int n_sets = rng.uniform_int(2, 15);
    const int n_cells = 80;
    std::vector<std::vector<int>> sets(static_cast<std::size_t>(n_sets));
    for (auto& s : sets) {
      std::set<int> cells;
      const int k = rng.uniform_int(1, 40);
      for (int i = 0; i < k; ++i) cells.insert(rng.uniform_int(0, n_cells - 1));
      s.assign(cells.begin(), cells.end());
    }
    std::size_t previous = SIZE_MAX;
    for (int tau : {0, 2, 5, 10, 20}) {
      const auto selected = run_selection(sets, tau, 1, n_cells);
      CHECK(selected.size() <= previous);
      previous = selected.size();
    }
  }
}

TEST_CASE("selection is deterministic across repeated solves") {
  Rng rng(530);
  std::vector<std::vector<int>> sets(12);
  for (auto& s : sets) {
    std::set<int> cells;
    for (int i = 0; i < 20; ++i) cells.insert(rng.uniform_int(0, 99));
    s.assign(cells.begin(), cells.end());
  }
  const auto first = run_selection(sets, 3, 2, 100);
  for (int i = 0; i < 5; ++i) CHECK(run_selection(sets, 3, 2, 100) == first);
}

TEST_CASE("incremental solve touches only blocks with new frames") {
  const Aabb bounds{{0, 0, 0}, {20, 16, 3}};
  PrunerConfig cfg;
  cfg.tau_gain = 0;
  cfg.n_ob = 1;
  FramePruner pruner(bounds, cfg);

  // Two frames in different corners -> different blocks.
  Frame a = frame_at(0, Vec3(1.0, 1.0, 1.5), 0.0);
  Frame b = frame_at(1, Vec3(18.0, 14.0, 1.5), kPi / 2);
  pruner.add_frame(a);
  pruner.add_frame(b);
  auto changed = pruner.solve_dirty();
  CHECK(changed.size() == 2);

  // No new frames: no solver invocation.
  changed = pruner.solve_dirty();
  CHECK(changed.empty());

  // One more frame near `a` dirties only that block.
  Frame c = frame_at(2, Vec3(1.2, 1.0, 1.5), 0.1);
  pruner.add_frame(c);
  changed = pruner.solve_dirty();
  CHECK(changed.size() == 1);
  CHECK(changed[0] == pruner.partition().block_of(c.pose.position));
}

TEST_CASE("incremental solve equals a full per-block re-solve") {
  const Aabb bounds{{0, 0, 0}, {20, 16, 3}};
  PrunerConfig cfg;
  cfg.tau_gain = 5;
  cfg.n_ob = 2;
  Rng rng(640);

  FramePruner incremental(bounds, cfg);
  std::vector<Frame> all_frames;
  for (int batch = 0; batch < 4; ++batch) {
    for (int i = 0; i < 6; ++i) {
      const int id = batch * 6 + i;
      Frame f = frame_at(id, Vec3(rng.uniform(0.5, 19.5), rng.uniform(0.5, 15.5), 1.5),
                         rng.uniform(-kPi, kPi));
      all_frames.push_back(f);
      incremental.add_frame(f);
    }
    incremental.solve_dirty();
  }

  FramePruner fresh(bounds, cfg);
  for (const auto& f : all_frames) fresh.add_frame(f);
  fresh.solve_dirty();

  CHECK(incremental.all_keyframes() == fresh.all_keyframes());
}

TEST_CASE("empty frame list yields an empty keyframe list") {
  const std::vector<std::vector<int>> sets;
  auto selected = run_selection(sets, 0, 1, 1);
  CHECK(selected.empty());
}
