#include "chan/model/chan_model.hpp"

#include <string>

#include "chan/error.hpp"
#include "chan/tensor/ops.hpp"

namespace chan {

template <typename T>
Tensor<T> to_tensor(const FeatureMatrix& features) {
  return Tensor<T>({features.rows, features.cols}, std::vector<T>(features.values.begin(), features.values.end()));
}

template <typename T>
Tensor<T> row_tensor(std::span<const float> values) {
  return Tensor<T>({1, values.size()}, std::vector<T>(values.begin(), values.end()));
}

template <typename T>
QueryEmbedding<T> QueryEmbedding<T>::from_vectors(std::span<const float> first, std::span<const float> second) {
  if (first.size() != second.size()) {
    throw ShapeError("query_embedding", "[" + std::to_string(first.size()) + "]", "[" + std::to_string(second.size()) + "]");
  }
  QueryEmbedding q{row_tensor<T>(first), row_tensor<T>(second), {}};
  q.mean = scale(add(q.first, q.second), T(0.5));
  return q;
}

template <typename T>
QueryEmbedding<T> QueryEmbedding<T>::from_vocabulary(const ConceptVocabulary& vocab, const Query& query) {
  return from_vectors(vocab.embedding(query.first), vocab.embedding(query.second));
}

template <typename T>
ChanModel<T>::ChanModel(ChanConfig config) : config_(std::move(config)), params_(ChanParams<T>::xavier(config_)) {}

template <typename T>
ChanModel<T>::ChanModel(ChanConfig config, ChanParams<T> params) : config_(std::move(config)), params_(std::move(params)) {
  config_.validate();
  auto expected = ChanParams<T>::zeros(config_).named();
  auto actual = params_.named();
  if (expected.size() != actual.size()) throw InvalidArgument("chan model: parameter count does not match config");
  for (std::size_t i = 0; i < expected.size(); ++i) {
    if (expected[i].tensor.shape() != actual[i].tensor.shape()) {
      throw ShapeError("chan_model", shape_string(expected[i].tensor.shape()), shape_string(actual[i].tensor.shape()),
                       "parameter " + expected[i].name);
    }
  }
}

template <typename T>
std::vector<NamedTensor<T>> ChanModel<T>::trainable_parameters() const {
  std::vector<NamedTensor<T>> out;
  for (auto& p : params_.named()) {
    if (config_.disable_local_attention && p.name.starts_with("local.")) continue;
    // Segment summaries only feed the global stream.
    if (config_.disable_global_attention && (p.name.starts_with("global.") || p.name.starts_with("segment."))) continue;
    out.push_back(std::move(p));
  }
  return out;
}

template <typename T>
Tensor<T> ChanModel<T>::conv_block(const Tensor<T>& shots, std::size_t block) const {
  const auto& branches = params_.blocks.at(block);
  std::vector<Tensor<T>> outputs;
  outputs.reserve(branches.size());
  for (std::size_t r = 0; r < branches.size(); ++r) {
    outputs.push_back(conv1d_dilated(shots, branches[r].filter, std::optional(branches[r].bias), config_.dilations[r]));
  }
  auto joined = outputs.size() == 1 ? outputs.front() : concat(outputs, 1);
  return max_pool1d(tanh(joined), config_.pool_window);
}

template <typename T>
Tensor<T> ChanModel<T>::encode_segment(const Tensor<T>& shots) const {
  Tensor<T> x = shots;
  for (std::size_t b = 0; b < params_.blocks.size(); ++b) x = conv_block(x, b);
  return x;
}

template <typename T>
AttentionOutput<T> ChanModel<T>::local_self_attention(const Tensor<T>& encoded) const {
  const std::size_t t = encoded.dim(0);
  const std::size_t dc = config_.attention_dim;
  const auto& p = params_;
  auto projected = linear(encoded, p.local_proj_weight, std::optional(p.local_proj_bias));
  auto left = reshape(linear(projected, p.local_W1), {t, 1, dc});
  auto right = reshape(linear(projected, p.local_W2, std::optional(p.local_b)), {1, t, dc});
  // alignment[i, j, :] = P tanh(W1 v_i + W2 v_j + b)
  auto hidden = reshape(tanh(add(left, right)), {t * t, dc});
  auto alignment = reshape(linear(hidden, p.local_P), {t, t, dc});
  auto weights = softmax(alignment, 1);
  auto attended = sum(mul(weights, reshape(projected, {1, t, dc})), 1);
  return {attended, weights};
}

template <typename T>
AttentionOutput<T> ChanModel<T>::segment_query_attention(const Tensor<T>& encoded, const Tensor<T>& query_mean) const {
  const auto& p = params_;
  auto shot_term = linear(encoded, p.segment_W1);
  auto query_term = linear(query_mean, p.segment_W2, std::optional(p.segment_b));
  auto energy = linear(tanh(add(shot_term, query_term)), p.segment_v);  // [t x 1]
  auto weights = softmax(energy, 0);
  auto summary = sum(mul(weights, encoded), 0, true);
  return {summary, weights};
}

template <typename T>
AttentionOutput<T> ChanModel<T>::global_attention(const Tensor<T>& encoded, const Tensor<T>& summaries) const {
  const std::size_t t = encoded.dim(0);
  const std::size_t m = summaries.dim(0);
  const std::size_t dc = config_.attention_dim;
  const auto& p = params_;
  auto shot_term = reshape(linear(encoded, p.global_W1), {t, 1, dc});
  auto segment_term = reshape(linear(summaries, p.global_W2, std::optional(p.global_b)), {1, m, dc});
  auto hidden = reshape(tanh(add(shot_term, segment_term)), {t * m, dc});
  auto energy = reshape(linear(hidden, p.global_v), {t, m});
  auto weights = softmax(energy, 1);
  return {matmul(weights, summaries), weights};
}

template <typename T>
Tensor<T> ChanModel<T>::fuse(const Tensor<T>& encoded, const Tensor<T>& local, const Tensor<T>& global) const {
  return concat(std::vector<Tensor<T>>{encoded, local, global}, 1);
}

template <typename T>
Tensor<T> ChanModel<T>::decode_segment(const Tensor<T>& fused, std::size_t shots) const {
  // Lengths before each pooling stage, innermost last.
  std::vector<std::size_t> lengths{shots};
  for (std::size_t b = 0; b < params_.blocks.size(); ++b) {
    lengths.push_back((lengths.back() + config_.pool_window - 1) / config_.pool_window);
  }
  if (fused.dim(0) != lengths.back()) {
    throw ShapeError("decode_segment", shape_string(fused.shape()), "[" + std::to_string(lengths.back()) + "x*]",
                     "pooled length does not match the segment's shot count");
  }
  Tensor<T> x = fused;
  const std::size_t layers = params_.deconvs.size();
  for (std::size_t l = 0; l < layers; ++l) {
    const std::size_t target = lengths[layers - 1 - l];
    const auto& layer = params_.deconvs[l];
    x = tanh(transposed_conv1d(x, layer.filter, std::optional(layer.bias), config_.pool_window, target));
  }
  if (x.dim(0) != shots) throw Error("decode_segment: internal length recovery mismatch");
  return x;
}

template <typename T>
Tensor<T> ChanModel<T>::encode_video(const Tensor<T>& features, const SegmentBoundaries& boundaries,
                                     const Tensor<T>& query_mean) const {
  if (features.rank() != 2 || features.dim(1) != config_.input_dim) {
    throw ShapeError("encode_video", shape_string(features.shape()), "[n x " + std::to_string(config_.input_dim) + "]",
                     "feature width");
  }
  if (boundaries.n_shots != features.dim(0)) {
    throw InvalidArgument("encode_video: boundaries cover " + std::to_string(boundaries.n_shots) + " shots, features have " +
                          std::to_string(features.dim(0)));
  }
  boundaries.validate();
  const auto segments = boundaries.segments();

  std::vector<Tensor<T>> encoded, summaries;
  std::vector<std::size_t> pooled;
  for (auto [begin, end] : segments) {
    auto enc = encode_segment(slice(features, 0, begin, end));
    if (!config_.disable_global_attention) summaries.push_back(segment_query_attention(enc, query_mean).output);
    pooled.push_back(enc.dim(0));
    encoded.push_back(std::move(enc));
  }

  std::vector<Tensor<T>> global_parts;
  if (config_.disable_global_attention) {
    for (auto t : pooled) global_parts.push_back(Tensor<T>::zeros({t, config_.encoded_dim()}));
  } else {
    auto all = encoded.size() == 1 ? encoded.front() : concat(encoded, 0);
    auto stacked = summaries.size() == 1 ? summaries.front() : concat(summaries, 0);
    auto global = global_attention(all, stacked).output;
    global_parts = encoded.size() == 1 ? std::vector<Tensor<T>>{global} : split(global, 0, pooled);
  }

  std::vector<Tensor<T>> decoded;
  for (std::size_t k = 0; k < segments.size(); ++k) {
    auto local = config_.disable_local_attention ? Tensor<T>::zeros({pooled[k], config_.attention_dim})
                                                 : local_self_attention(encoded[k]).output;
    auto fused = fuse(encoded[k], local, global_parts[k]);
    decoded.push_back(decode_segment(fused, segments[k].second - segments[k].first));
  }
  return decoded.size() == 1 ? decoded.front() : concat(decoded, 0);
}

template <typename T>
Tensor<T> ChanModel<T>::concept_scores(const Tensor<T>& shot_features, const Tensor<T>& concept_embedding) const {
  const auto& p = params_;
  if (concept_embedding.rank() != 2 || concept_embedding.dim(0) != 1 ||
      concept_embedding.dim(1) != config_.concept_embed_dim) {
    throw ShapeError("concept_scores", shape_string(concept_embedding.shape()),
                     "[1x" + std::to_string(config_.concept_embed_dim) + "]", "concept embedding");
  }
  auto visual = linear(shot_features, p.relevance_Wf);
  auto textual = linear(concept_embedding, p.relevance_Wc);
  auto joint = mul(visual, textual);
  auto hidden = tanh(linear(joint, p.mlp_W1, std::optional(p.mlp_b1)));
  return sigmoid(linear(hidden, p.mlp_W2, std::optional(p.mlp_b2)));
}

template <typename T>
Tensor<T> ChanModel<T>::query_scores(const Tensor<T>& shot_features, const QueryEmbedding<T>& query) const {
  return scale(add(concept_scores(shot_features, query.first), concept_scores(shot_features, query.second)), T(0.5));
}

template <typename T>
Tensor<T> ChanModel<T>::forward(const Tensor<T>& features, const SegmentBoundaries& boundaries,
                                const QueryEmbedding<T>& query) const {
  return query_scores(encode_video(features, boundaries, query.mean), query);
}

template <typename T>
std::vector<double> ChanModel<T>::score(const FeatureMatrix& features, const SegmentBoundaries& boundaries,
                                        const QueryEmbedding<T>& query) const {
  NoGradGuard no_grad;
  auto s = forward(to_tensor<T>(features), boundaries, query);
  return {s.data().begin(), s.data().end()};
}

template Tensor<float> to_tensor<float>(const FeatureMatrix&);
template Tensor<double> to_tensor<double>(const FeatureMatrix&);
template Tensor<float> row_tensor<float>(std::span<const float>);
template Tensor<double> row_tensor<double>(std::span<const float>);
template struct QueryEmbedding<float>;
template struct QueryEmbedding<double>;
template class ChanModel<float>;
template class ChanModel<double>;

}  // namespace chan
