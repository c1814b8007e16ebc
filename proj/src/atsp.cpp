#include "exsim/atsp.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace exsim {

namespace {

constexpr int kExactLimit = 12;

Tour held_karp(const CostMatrix& m) {
  const int n = m.size() - 1;  // visitable nodes 1..n
  const int full = 1 << n;
  const double inf = std::numeric_limits<double>::infinity();
  // dp[mask][last]: cheapest path from 0 visiting exactly `mask`, ending at
  // node last+1.
  std::vector<std::vector<double>> dp(static_cast<std::size_t>(full),
                                      std::vector<double>(static_cast<std::size_t>(n), inf));
  std::vector<std::vector<int>> parent(static_cast<std::size_t>(full),
                                       std::vector<int>(static_cast<std::size_t>(n), -1));
  for (int j = 0; j < n; ++j) dp[1u << j][j] = m.at(0, j + 1);

  for (int mask = 1; mask < full; ++mask) {
    for (int last = 0; last < n; ++last) {
      if (!(mask & (1 << last))) continue;
      const double base = dp[static_cast<std::size_t>(mask)][static_cast<std::size_t>(last)];
      if (base == inf) continue;
      for (int next = 0; next < n; ++next) {
        if (mask & (1 << next)) continue;
        const int nmask = mask | (1 << next);
        const double cand = base + m.at(last + 1, next + 1);
        if (cand < dp[static_cast<std::size_t>(nmask)][static_cast<std::size_t>(next)]) {
          dp[static_cast<std::size_t>(nmask)][static_cast<std::size_t>(next)] = cand;
          parent[static_cast<std::size_t>(nmask)][static_cast<std::size_t>(next)] = last;
        }
      }
    }
  }

  int best_last = 0;
  double best = inf;
  for (int j = 0; j < n; ++j) {
    const double c = dp[static_cast<std::size_t>(full - 1)][static_cast<std::size_t>(j)];
    if (c < best) {
      best = c;
      best_last = j;
    }
  }

  std::vector<int> order;
  int mask = full - 1, last = best_last;
  while (last != -1) {
    order.push_back(last + 1);
    const int prev = parent[static_cast<std::size_t>(mask)][static_cast<std::size_t>(last)];
    mask &= ~(1 << last);
    last = prev;
  }
  order.push_back(0);
  std::reverse(order.begin(), order.end());

  Tour tour;
  tour.order = std::move(order);
  tour.cost = best;
  tour.solver = "held_karp";
  return tour;
}

double path_cost(const std::vector<int>& order, const CostMatrix& m) {
  double c = 0.0;
  for (std::size_t i = 0; i + 1 < order.size(); ++i) c += m.at(order[i], order[i + 1]);
  return c;
}

Tour nn_two_opt(const CostMatrix& m) {
  const int n = m.size() - 1;
  std::vector<bool> used(static_cast<std::size_t>(n + 1), false);
  std::vector<int> order{0};
  used[0] = true;
  int current = 0;
  for (int step = 0; step < n; ++step) {
    int best = -1;
    double best_cost = std::numeric_limits<double>::infinity();
    for (int j = 1; j <= n; ++j) {
      if (used[static_cast<std::size_t>(j)]) continue;
      const double c = m.at(current, j);
      if (c < best_cost) {
        best_cost = c;
        best = j;
      }
    }
    order.push_back(best);
    used[static_cast<std::size_t>(best)] = true;
    current = best;
  }

  // Directed 2-opt: reverse order[i..j] (never touching the start), accept
  // strictly improving moves, restart the scan after each acceptance. The
  // reversal changes every inner leg under an asymmetric matrix, so deltas
  // are recomputed from the actual entries.
  double cost = path_cost(order, m);
  bool improved = true;
  while (improved) {
    improved = false;
    for (std::size_t i = 1; i + 1 < order.size() && !improved; ++i) {
      for (std::size_t j = i + 1; j < order.size() && !improved; ++j) {
        double removed = m.at(order[i - 1], order[i]);
        double added = m.at(order[i - 1], order[j]);
        for (std::size_t k = i; k < j; ++k) {
          removed += m.at(order[k], order[k + 1]);
          added += m.at(order[k + 1], order[k]);
        }
        if (j + 1 < order.size()) {
          removed += m.at(order[j], order[j + 1]);
          added += m.at(order[i], order[j + 1]);
        }
        if (added < removed - 1e-12) {
          std::reverse(order.begin() + static_cast<std::ptrdiff_t>(i),
                       order.begin() + static_cast<std::ptrdiff_t>(j) + 1);
          cost += added - removed;
          improved = true;
        }
      }
    }
  }

  Tour tour;
  tour.order = std::move(order);
  tour.cost = path_cost(tour.order, m);  // recompute; incremental drift is possible
  tour.solver = "nn_2opt";
  return tour;
}

}  // namespace

double compute_total_cost(const Tour& tour, const CostMatrix& matrix) {
  const int n = matrix.size();
  if (tour.order.empty() || tour.order.front() != 0)
    throw std::invalid_argument("compute_total_cost: tour must start at index 0");
  if (static_cast<int>(tour.order.size()) != n)
    throw std::invalid_argument("compute_total_cost: tour/matrix size mismatch");
  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  for (int idx : tour.order) {
    if (idx < 0 || idx >= n || seen[static_cast<std::size_t>(idx)])
      throw std::invalid_argument("compute_total_cost: invalid or repeated tour index");
    seen[static_cast<std::size_t>(idx)] = true;
  }
  return path_cost(tour.order, matrix);
}

Tour solve_atsp(const CostMatrix& matrix) {
  const int n = matrix.size() - 1;
  if (n < 1) throw std::invalid_argument("solve_atsp: need at least one visitable node");
  if (n <= kExactLimit) return held_karp(matrix);
  return nn_two_opt(matrix);
}

Tour solve_atsp_exact(const CostMatrix& matrix) {
  if (matrix.size() < 2) throw std::invalid_argument("solve_atsp: need at least one visitable node");
  return held_karp(matrix);
}

Tour solve_atsp_heuristic(const CostMatrix& matrix) {
  if (matrix.size() < 2) throw std::invalid_argument("solve_atsp: need at least one visitable node");
  return nn_two_opt(matrix);
}

}  // namespace exsim
