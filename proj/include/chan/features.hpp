#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace chan {

// Row-major [shots x dims] matrix of per-shot feature vectors.
struct FeatureMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<float> values;

  FeatureMatrix() = default;
  FeatureMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), values(r * c, 0.0f) {}
  FeatureMatrix(std::size_t r, std::size_t c, std::vector<float> v) : rows(r), cols(c), values(std::move(v)) {}

  std::span<const float> row(std::size_t i) const { return {values.data() + i * cols, cols}; }
  std::span<float> row(std::size_t i) { return {values.data() + i * cols, cols}; }
  float operator()(std::size_t i, std::size_t j) const { return values[i * cols + j]; }
  float& operator()(std::size_t i, std::size_t j) { return values[i * cols + j]; }

  bool operator==(const FeatureMatrix&) const = default;
};

}  // namespace chan
