#pragma once

#include <span>
#include <vector>

#include "chan/data/dataset.hpp"
#include "chan/features.hpp"
#include "chan/model/config.hpp"
#include "chan/model/params.hpp"
#include "chan/segmentation/kts.hpp"
#include "chan/tensor/tensor.hpp"

namespace chan {

template <typename T>
struct AttentionOutput {
  Tensor<T> output;
  Tensor<T> weights;  // softmax weights; see each producer for the layout
};

// Fixed (non-trainable) embeddings of a two-concept query, each [1 x E].
template <typename T>
struct QueryEmbedding {
  Tensor<T> first;
  Tensor<T> second;
  Tensor<T> mean;  // h_q, the average of the two

  static QueryEmbedding from_vectors(std::span<const float> first, std::span<const float> second);
  static QueryEmbedding from_vocabulary(const ConceptVocabulary& vocab, const Query& query);
};

template <typename T>
Tensor<T> to_tensor(const FeatureMatrix& features);
template <typename T>
Tensor<T> row_tensor(std::span<const float> values);

// Convolutional hierarchical attention network.
//
// Per segment: stacked multi-branch dilated-conv blocks (tanh, max-pool),
// then a fusion of [conv features; local self-attention; query-aware global
// attention], decoded back to the segment's shot count by transposed
// convolutions. Shot features are scored against each query concept and the
// two concept scores are averaged.
template <typename T>
class ChanModel {
 public:
  explicit ChanModel(ChanConfig config);
  ChanModel(ChanConfig config, ChanParams<T> params);

  const ChanConfig& config() const { return config_; }
  const ChanParams<T>& params() const { return params_; }
  ChanParams<T>& params() { return params_; }

  // Every parameter, in serialisation order.
  std::vector<NamedTensor<T>> parameters() const { return params_.named(); }
  // Parameters that receive gradients under the configured ablations.
  std::vector<NamedTensor<T>> trainable_parameters() const;

  // [s x in] -> [ceil(s / pool) x width]
  Tensor<T> conv_block(const Tensor<T>& shots, std::size_t block) const;
  Tensor<T> encode_segment(const Tensor<T>& shots) const;

  // Projects [t x C] to d_c, then per-dimension pairwise attention. Weights
  // are [t x t x d_c], normalised over axis 1.
  AttentionOutput<T> local_self_attention(const Tensor<T>& encoded) const;
  // Attention over the t encoded shots given h_q [1 x E]; output [1 x C],
  // weights [t x 1].
  AttentionOutput<T> segment_query_attention(const Tensor<T>& encoded, const Tensor<T>& query_mean) const;
  // Each of the [T x C] shot features attends over the [m x C] segment
  // summaries; output [T x C], weights [T x m].
  AttentionOutput<T> global_attention(const Tensor<T>& encoded, const Tensor<T>& summaries) const;

  Tensor<T> fuse(const Tensor<T>& encoded, const Tensor<T>& local, const Tensor<T>& global) const;
  // [t x fused] -> [shots x F]
  Tensor<T> decode_segment(const Tensor<T>& fused, std::size_t shots) const;

  // Fused, decoded shot features [n x F] for the whole video.
  Tensor<T> encode_video(const Tensor<T>& features, const SegmentBoundaries& boundaries,
                         const Tensor<T>& query_mean) const;

  // [n x F] shot features, concept embedding [1 x E] -> [n x 1] in (0, 1).
  Tensor<T> concept_scores(const Tensor<T>& shot_features, const Tensor<T>& concept_embedding) const;
  Tensor<T> query_scores(const Tensor<T>& shot_features, const QueryEmbedding<T>& query) const;

  // Query-relevance score per shot, [n x 1].
  Tensor<T> forward(const Tensor<T>& features, const SegmentBoundaries& boundaries, const QueryEmbedding<T>& query) const;
  std::vector<double> score(const FeatureMatrix& features, const SegmentBoundaries& boundaries,
                            const QueryEmbedding<T>& query) const;

 private:
  ChanConfig config_;
  ChanParams<T> params_;
};

extern template class ChanModel<float>;
extern template class ChanModel<double>;

}  // namespace chan
