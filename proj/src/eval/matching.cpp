#include "chan/eval/matching.hpp"

#include <cmath>
#include <limits>

#include "chan/error.hpp"

namespace chan {

std::vector<MatchedPair> max_weight_matching(const WeightMatrix& weights) {
  if (weights.values.size() != weights.rows * weights.cols) {
    throw InvalidArgument("max_weight_matching: value count does not match dimensions");
  }
  for (double w : weights.values) {
    if (!std::isfinite(w) || w < 0) throw InvalidArgument("max_weight_matching: weights must be finite and >= 0");
  }
  const std::size_t n = std::max(weights.rows, weights.cols);
  if (n == 0) return {};

  auto cost = [&](std::size_t i, std::size_t j) -> double {
    return (i < weights.rows && j < weights.cols) ? -weights(i, j) : 0.0;
  };

  // Shortest augmenting path with row/column potentials (1-based, column 0 is
  // the virtual source), O(n^3).
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> owner(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    owner[0] = i;
    std::size_t j0 = 0;
    std::vector<double> min_slack(n + 1, kInf);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      const std::size_t i0 = owner[j0];
      double delta = kInf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < min_slack[j]) {
          min_slack[j] = cur;
          way[j] = j0;
        }
        if (min_slack[j] < delta) {
          delta = min_slack[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[owner[j]] += delta;
          v[j] -= delta;
        } else {
          min_slack[j] -= delta;
        }
      }
      j0 = j1;
    } while (owner[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      owner[j0] = owner[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<std::size_t> row_to_col(n, 0);
  for (std::size_t j = 1; j <= n; ++j) row_to_col[owner[j] - 1] = j - 1;

  std::vector<MatchedPair> pairs;
  for (std::size_t i = 0; i < weights.rows; ++i) {
    const std::size_t j = row_to_col[i];
    if (j < weights.cols && weights(i, j) > 0) pairs.push_back({i, j, weights(i, j)});
  }
  return pairs;
}

double total_weight(const std::vector<MatchedPair>& pairs) {
  double total = 0;
  for (const auto& p : pairs) total += p.weight;
  return total;
}

}  // namespace chan
