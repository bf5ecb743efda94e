#pragma once

// Hand-rolled generators shared by the property tests and the acceptance run.

#include <cstdint>
#include <random>
#include <vector>

#include "chan/eval/matching.hpp"
#include "chan/features.hpp"
#include "chan/model/config.hpp"
#include "chan/tensor/tensor.hpp"

namespace chan::testing {

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  std::size_t size(std::size_t lo, std::size_t hi) { return std::uniform_int_distribution<std::size_t>(lo, hi)(rng_); }
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  double normal(double scale = 1.0) { return std::normal_distribution<double>(0.0, scale)(rng_); }
  bool coin(double p = 0.5) { return std::bernoulli_distribution(p)(rng_); }

  std::vector<double> normals(std::size_t n, double scale = 1.0) {
    std::vector<double> v(n);
    for (auto& x : v) x = normal(scale);
    return v;
  }

  template <typename T>
  Tensor<T> tensor(Shape shape, double scale = 1.0, bool requires_grad = false) {
    std::size_t n = 1;
    for (auto d : shape) n *= d;
    std::vector<T> v(n);
    for (auto& x : v) x = static_cast<T>(normal(scale));
    return Tensor<T>(std::move(shape), std::move(v), requires_grad);
  }

  // Small integer entries keep segment costs exactly representable.
  FeatureMatrix integer_features(std::size_t rows, std::size_t cols, int lo, int hi) {
    FeatureMatrix m(rows, cols);
    std::uniform_int_distribution<int> d(lo, hi);
    for (auto& x : m.values) x = static_cast<float>(d(rng_));
    return m;
  }

  FeatureMatrix features(std::size_t rows, std::size_t cols, double scale = 1.0) {
    FeatureMatrix m(rows, cols);
    for (auto& x : m.values) x = static_cast<float>(normal(scale));
    return m;
  }

  // Weights on a 1/8 grid (exact in binary), a quarter of them zero.
  WeightMatrix weights(std::size_t rows, std::size_t cols) {
    WeightMatrix w(rows, cols);
    for (auto& x : w.values) x = coin(0.25) ? 0.0 : static_cast<double>(size(1, 16)) / 8.0;
    return w;
  }

  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

// A model small enough for exhaustive checks.
inline ChanConfig tiny_config(std::size_t input_dim = 8, std::size_t embed_dim = 3, std::uint64_t seed = 3) {
  ChanConfig c;
  c.input_dim = input_dim;
  c.conv_channels = {4, 6};
  c.attention_dim = 4;
  c.fusion_dim = 6;
  c.mlp_hidden = 5;
  c.concept_embed_dim = embed_dim;
  c.seed = seed;
  return c;
}

// A random partition of n shots into segments of length 1..max_len.
inline std::vector<std::size_t> random_change_points(Gen& g, std::size_t n, std::size_t max_len) {
  std::vector<std::size_t> cps;
  std::size_t pos = g.size(1, max_len);
  while (pos < n) {
    cps.push_back(pos);
    pos += g.size(1, max_len);
  }
  return cps;
}

}  // namespace chan::testing
