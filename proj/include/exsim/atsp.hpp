#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace exsim {

// Asymmetric traversal-cost matrix. Row/column 0 is the start state; indices
// 1..n are the visitable entities. Column 0 is zero (open tours never return
// to the start). `labels` maps indices to entity ids.
struct CostMatrix {
  Eigen::MatrixXd costs;
  std::vector<int> labels;

  int size() const { return static_cast<int>(costs.rows()); }
  double at(int from, int to) const { return costs(from, to); }
};

// Open tour over a CostMatrix: starts at index 0 and visits every other
// index exactly once.
struct Tour {
  std::vector<int> order;  // matrix indices, order[0] == 0
  double cost = 0.0;
  std::string solver;  // "held_karp" or "nn_2opt"
};

// Sum of matrix entries along consecutive tour legs. Throws
// std::invalid_argument when the tour's labeling does not match the matrix.
double compute_total_cost(const Tour& tour, const CostMatrix& matrix);

// Open-tour ATSP. Exact Held-Karp dynamic programming for n <= 12 visitable
// nodes, nearest-neighbor construction plus directed 2-opt above that.
// Deterministic for a given matrix.
Tour solve_atsp(const CostMatrix& matrix);

// The two routes individually (exact is exponential in n; callers cap it).
Tour solve_atsp_exact(const CostMatrix& matrix);
Tour solve_atsp_heuristic(const CostMatrix& matrix);

}  // namespace exsim
