#pragma once

#include <optional>
#include <span>
#include <vector>

#include "chan/tensor/tensor.hpp"

namespace chan {

// Elementwise arithmetic with numpy-style broadcasting (shapes aligned from
// the trailing axis; an extent of 1 stretches).
template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b);
template <typename T>
Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b);
template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b);

template <typename T>
Tensor<T> scale(const Tensor<T>& x, T factor);

// [m x k] . [k x n] -> [m x n]
template <typename T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b);

// Row-wise affine map y = x W^T + b with x [n x in], W [out x in], b [out].
template <typename T>
Tensor<T> linear(const Tensor<T>& x, const Tensor<T>& weight, const std::optional<Tensor<T>>& bias = std::nullopt);

template <typename T>
Tensor<T> tanh(const Tensor<T>& x);
template <typename T>
Tensor<T> sigmoid(const Tensor<T>& x);

template <typename T>
Tensor<T> reshape(const Tensor<T>& x, Shape shape);

template <typename T>
Tensor<T> concat(const std::vector<Tensor<T>>& parts, std::size_t axis);

// Half-open range [begin, end) along one axis.
template <typename T>
Tensor<T> slice(const Tensor<T>& x, std::size_t axis, std::size_t begin, std::size_t end);

// Splits along an axis into consecutive pieces of the given extents.
template <typename T>
std::vector<Tensor<T>> split(const Tensor<T>& x, std::size_t axis, std::span<const std::size_t> extents);

template <typename T>
Tensor<T> sum(const Tensor<T>& x, std::size_t axis, bool keepdim = false);
template <typename T>
Tensor<T> mean(const Tensor<T>& x, std::size_t axis, bool keepdim = false);
template <typename T>
Tensor<T> sum_all(const Tensor<T>& x);

// Max-shifted softmax along one axis.
template <typename T>
Tensor<T> softmax(const Tensor<T>& x, std::size_t axis);

// Same-length dilated convolution over [time x channels]:
//   out[i, o] = bias[o] + sum_{t=-k..k} sum_c filter[t+k, c, o] * x[i + dilation*t, c]
// with out-of-range taps reading zero. filter is [2k+1 x in x out].
template <typename T>
Tensor<T> conv1d_dilated(const Tensor<T>& x, const Tensor<T>& filter, const std::optional<Tensor<T>>& bias,
                         std::size_t dilation);

// Non-overlapping temporal max pooling on [time x channels]. A trailing
// partial window is pooled as-is; backward routes to the first maximum.
template <typename T>
Tensor<T> max_pool1d(const Tensor<T>& x, std::size_t window);

// Fractionally-strided convolution on [time x in], filter [K x in x out].
// The full output of length (L-1)*stride + K is cropped to target_length,
// dropping floor(excess/2) leading and ceil(excess/2) trailing steps.
template <typename T>
Tensor<T> transposed_conv1d(const Tensor<T>& x, const Tensor<T>& filter, const std::optional<Tensor<T>>& bias,
                            std::size_t stride, std::size_t target_length);

// Mean binary cross-entropy, returned as the non-negative minimised quantity.
// Scores are clamped to [kBceClamp, 1 - kBceClamp] before the log.
inline constexpr double kBceClamp = 1e-7;
template <typename T>
Tensor<T> bce_loss(const Tensor<T>& scores, std::span<const T> labels);

}  // namespace chan
