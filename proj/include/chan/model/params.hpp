#pragma once

#include <string>
#include <vector>

#include "chan/model/config.hpp"
#include "chan/tensor/adam.hpp"
#include "chan/tensor/tensor.hpp"

namespace chan {

template <typename T>
struct ConvParams {
  Tensor<T> filter;  // [K x in x out]
  Tensor<T> bias;    // [out]
};

// Every trainable tensor of the network. The local-attention set is shared by
// all segments of all videos.
//
// Serialisation order (names as returned by named()):
//   block{b}.branch{r}.filter, block{b}.branch{r}.bias   for each block, branch
//   local.proj.weight, local.proj.bias, local.P, local.W1, local.W2, local.b
//   segment.W1, segment.W2, segment.b, segment.v
//   global.W1, global.W2, global.b, global.v
//   deconv{l}.filter, deconv{l}.bias                      for each decoder layer
//   relevance.Wf, relevance.Wc
//   mlp.W1, mlp.b1, mlp.W2, mlp.b2
template <typename T>
struct ChanParams {
  std::vector<std::vector<ConvParams<T>>> blocks;

  Tensor<T> local_proj_weight;  // [d_c x C]
  Tensor<T> local_proj_bias;    // [d_c]
  Tensor<T> local_P;            // [d_c x d_c]
  Tensor<T> local_W1;           // [d_c x d_c]
  Tensor<T> local_W2;           // [d_c x d_c]
  Tensor<T> local_b;            // [d_c]

  Tensor<T> segment_W1;  // [d_c x C]
  Tensor<T> segment_W2;  // [d_c x E]
  Tensor<T> segment_b;   // [d_c]
  Tensor<T> segment_v;   // [1 x d_c]

  Tensor<T> global_W1;  // [d_c x C]
  Tensor<T> global_W2;  // [d_c x C]
  Tensor<T> global_b;   // [d_c]
  Tensor<T> global_v;   // [1 x d_c]

  std::vector<ConvParams<T>> deconvs;

  Tensor<T> relevance_Wf;  // [F x F]
  Tensor<T> relevance_Wc;  // [F x E]

  Tensor<T> mlp_W1;  // [H x F]
  Tensor<T> mlp_b1;  // [H]
  Tensor<T> mlp_W2;  // [1 x H]
  Tensor<T> mlp_b2;  // [1]

  // Zero tensors of the right shapes, all requiring gradients.
  static ChanParams zeros(const ChanConfig& config);
  // Xavier-uniform weights and zero biases, seeded by config.seed.
  static ChanParams xavier(const ChanConfig& config);

  // Handles in serialisation order; they alias the stored tensors.
  std::vector<NamedTensor<T>> named() const;
  std::size_t total_size() const;

  template <typename U>
  ChanParams<U> cast(const ChanConfig& config) const;
};

extern template struct ChanParams<float>;
extern template struct ChanParams<double>;

}  // namespace chan
