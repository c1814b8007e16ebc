#include "exsim/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>
#include <stdexcept>

#include "exsim/kdtree.hpp"

namespace exsim {

double rmse(const VoxelMap& map, const std::vector<Vec3>& ground_truth) {
  const std::vector<Vec3> samples = map.sample_iso_surface(map.resolution());
  if (samples.empty()) throw std::invalid_argument("rmse: map has no iso-surface");
  if (ground_truth.empty()) throw std::invalid_argument("rmse: empty ground truth");
  const KdTree3 tree(ground_truth);
  double sum = 0.0;
  for (const Vec3& p : samples) sum += tree.nearest(p)->second;
  return std::sqrt(sum / static_cast<double>(samples.size()));
}

RunMetrics run_metrics(const RunResult& result) {
  RunMetrics m;
  m.complete = result.complete;
  m.exploration_time = result.exploration_time;
  m.flight_distance = result.flight_distance;
  m.closure_count = static_cast<int>(result.closures.size());
  m.reintegrated_frames = static_cast<int>(result.reintegrations.size());
  m.keyframes_selected = result.keyframe_count;
  m.total_frames = result.total_frames;
  m.keyframe_ratio = result.total_frames > 0
                         ? static_cast<double>(result.keyframe_count) / result.total_frames
                         : 0.0;
  return m;
}

double alc_overhead_pct(double time_with_alc, double time_without_alc) {
  if (time_without_alc <= 0.0) throw std::invalid_argument("alc_overhead_pct: bad baseline");
  return (time_with_alc - time_without_alc) / time_without_alc * 100.0;
}

AblationReport ablation_report(const std::vector<AblationInput>& inputs) {
  if (inputs.empty()) throw std::invalid_argument("ablation_report: no inputs");
  std::set<std::string> scenarios;
  for (const auto& in : inputs) scenarios.insert(in.scenario);
  if (scenarios.size() != 1)
    throw std::invalid_argument("ablation_report: inputs mix scenarios");

  // Preserve the canonical row order; anything else appends alphabetically.
  std::vector<std::string> variants;
  for (const char* v : {"naive", "reint_noprune", "reint"}) {
    for (const auto& in : inputs)
      if (in.variant == v) {
        variants.push_back(v);
        break;
      }
  }
  for (const auto& in : inputs)
    if (std::find(variants.begin(), variants.end(), in.variant) == variants.end())
      variants.push_back(in.variant);

  std::vector<std::string> levels;
  for (const char* l : {"s1", "s2", "s3", "s4"})
    for (const auto& in : inputs)
      if (in.level == l && std::find(levels.begin(), levels.end(), l) == levels.end())
        levels.push_back(l);

  AblationReport report;
  for (const auto& variant : variants) {
    for (const auto& level : levels) {
      AblationCell cell;
      cell.variant = variant;
      cell.level = level;
      for (const auto& in : inputs) {
        if (in.variant != variant || in.level != level) continue;
        cell.rmse_values.push_back(in.rmse);
        cell.times.push_back(in.exploration_time);
      }
      if (cell.rmse_values.empty()) continue;
      const auto n = static_cast<double>(cell.rmse_values.size());
      for (double v : cell.rmse_values) cell.rmse_mean += v;
      cell.rmse_mean /= n;
      for (double v : cell.rmse_values)
        cell.rmse_std += (v - cell.rmse_mean) * (v - cell.rmse_mean);
      cell.rmse_std = n > 1 ? std::sqrt(cell.rmse_std / (n - 1)) : 0.0;
      for (double v : cell.times) cell.time_mean += v;
      cell.time_mean /= n;
      report.cells.push_back(std::move(cell));
    }
  }

  std::ostringstream csv;
  csv << "variant,level,seeds,rmse_mean,rmse_std,time_mean\r\n";
  char buf[160];
  for (const auto& cell : report.cells) {
    std::snprintf(buf, sizeof(buf), "%s,%s,%zu,%.6f,%.6f,%.3f\r\n", cell.variant.c_str(),
                  cell.level.c_str(), cell.rmse_values.size(), cell.rmse_mean, cell.rmse_std,
                  cell.time_mean);
    csv << buf;
  }
  report.csv = csv.str();

  std::ostringstream text;
  text << "RMSE (m), mean over seeds\n";
  text << "variant        ";
  for (const auto& level : levels) text << "  " << level << "      ";
  text << "\n";
  for (const auto& variant : variants) {
    std::snprintf(buf, sizeof(buf), "%-14s ", variant.c_str());
    text << buf;
    for (const auto& level : levels) {
      const auto it = std::find_if(report.cells.begin(), report.cells.end(), [&](const auto& c) {
        return c.variant == variant && c.level == level;
      });
      if (it == report.cells.end()) {
        text << "  -       ";
      } else {
        std::snprintf(buf, sizeof(buf), "  %.3f   ", it->rmse_mean);
        text << buf;
      }
    }
    text << "\n";
  }
  report.text = text.str();
  return report;
}

}  // namespace exsim
