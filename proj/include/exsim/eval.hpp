#pragma once

#include <map>
#include <string>
#include <vector>

#include "exsim/sim.hpp"
#include "exsim/voxel_map.hpp"

namespace exsim {

// Root-mean-square of nearest-neighbor distances from the map's zero-level
// iso-surface samples (at map resolution spacing) to the ground-truth cloud.
// Throws std::invalid_argument when the map has no iso-surface.
double rmse(const VoxelMap& map, const std::vector<Vec3>& ground_truth);

struct RunMetrics {
  bool complete = false;
  double exploration_time = 0.0;
  double flight_distance = 0.0;
  int closure_count = 0;
  int reintegrated_frames = 0;
  int keyframes_selected = 0;
  int total_frames = 0;
  double keyframe_ratio = 0.0;
  double rmse = -1.0;  // filled by callers that hold the ground truth
};

RunMetrics run_metrics(const RunResult& result);

// Relative extra exploration time of the ALC run over the non-ALC run.
double alc_overhead_pct(double time_with_alc, double time_without_alc);

struct AblationCell {
  std::string variant;    // "naive", "reint_noprune", "reint"
  std::string level;      // s1..s4
  std::vector<double> rmse_values;
  std::vector<double> times;
  double rmse_mean = 0.0;
  double rmse_std = 0.0;
  double time_mean = 0.0;
};

struct AblationInput {
  std::string variant;
  std::string level;
  std::string scenario;
  std::uint64_t seed = 0;
  double rmse = 0.0;
  double exploration_time = 0.0;
};

struct AblationReport {
  std::vector<AblationCell> cells;  // variant-major, level-minor order
  std::string csv;                  // RFC-4180 table
  std::string text;                 // human-readable table
};

// Aggregates per-(variant, drift level) statistics over seeds. Throws
// std::invalid_argument when inputs mix scenarios.
AblationReport ablation_report(const std::vector<AblationInput>& inputs);

}  // namespace exsim
