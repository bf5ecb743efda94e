#pragma once

#include <cstddef>
#include <vector>

namespace chan {

// Dense row-major [rows x cols] matrix of non-negative edge weights.
struct WeightMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  WeightMatrix() = default;
  WeightMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), values(r * c, 0.0) {}

  double operator()(std::size_t i, std::size_t j) const { return values[i * cols + j]; }
  double& operator()(std::size_t i, std::size_t j) { return values[i * cols + j]; }
};

struct MatchedPair {
  std::size_t row = 0;
  std::size_t col = 0;
  double weight = 0;

  bool operator==(const MatchedPair&) const = default;
};

// Maximum-weight bipartite matching via the Hungarian method on the
// zero-padded square matrix. Zero-weight pairs are omitted from the result,
// which is sorted by row. Throws InvalidArgument on negative or non-finite
// weights.
std::vector<MatchedPair> max_weight_matching(const WeightMatrix& weights);

// Sum of pair weights in row order.
double total_weight(const std::vector<MatchedPair>& pairs);

}  // namespace chan
