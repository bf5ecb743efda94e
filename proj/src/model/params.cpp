#include "chan/model/params.hpp"

#include <cmath>
#include <random>

namespace chan {

template <typename T>
ChanParams<T> ChanParams<T>::zeros(const ChanConfig& config) {
  config.validate();
  auto z = [](Shape s) { return Tensor<T>::zeros(std::move(s), true); };
  const std::size_t dc = config.attention_dim;
  const std::size_t c = config.encoded_dim();
  const std::size_t e = config.concept_embed_dim;
  const std::size_t f = config.fusion_dim;
  const std::size_t h = config.mlp_hidden;

  ChanParams p;
  std::size_t in = config.input_dim;
  for (auto width : config.conv_channels) {
    std::vector<ConvParams<T>> branches;
    const std::size_t out = width / config.branches();
    for (auto k : config.kernel_sizes) branches.push_back({z({k, in, out}), z({out})});
    p.blocks.push_back(std::move(branches));
    in = width;
  }
  p.local_proj_weight = z({dc, c});
  p.local_proj_bias = z({dc});
  p.local_P = z({dc, dc});
  p.local_W1 = z({dc, dc});
  p.local_W2 = z({dc, dc});
  p.local_b = z({dc});
  p.segment_W1 = z({dc, c});
  p.segment_W2 = z({dc, e});
  p.segment_b = z({dc});
  p.segment_v = z({1, dc});
  p.global_W1 = z({dc, c});
  p.global_W2 = z({dc, c});
  p.global_b = z({dc});
  p.global_v = z({1, dc});
  for (std::size_t l = 0; l < config.conv_channels.size(); ++l) {
    const std::size_t from = l == 0 ? config.fused_dim() : f;
    p.deconvs.push_back({z({config.deconv_kernel, from, f}), z({f})});
  }
  p.relevance_Wf = z({f, f});
  p.relevance_Wc = z({f, e});
  p.mlp_W1 = z({h, f});
  p.mlp_b1 = z({h});
  p.mlp_W2 = z({1, h});
  p.mlp_b2 = z({1});
  return p;
}

template <typename T>
ChanParams<T> ChanParams<T>::xavier(const ChanConfig& config) {
  auto p = zeros(config);
  std::mt19937_64 rng(config.seed);
  for (auto& [name, tensor] : p.named()) {
    const auto& s = tensor.shape();
    double fan_in = 0, fan_out = 0;
    if (s.size() == 3) {
      fan_in = static_cast<double>(s[0] * s[1]);
      fan_out = static_cast<double>(s[0] * s[2]);
    } else if (s.size() == 2) {
      fan_in = static_cast<double>(s[1]);
      fan_out = static_cast<double>(s[0]);
    } else {
      continue;  // biases start at zero
    }
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (auto& v : tensor.mutable_data()) v = static_cast<T>(dist(rng));
  }
  return p;
}

template <typename T>
std::vector<NamedTensor<T>> ChanParams<T>::named() const {
  std::vector<NamedTensor<T>> out;
  for (std::size_t b = 0; b < blocks.size(); ++b)
    for (std::size_t r = 0; r < blocks[b].size(); ++r) {
      const std::string prefix = "block" + std::to_string(b) + ".branch" + std::to_string(r);
      out.push_back({prefix + ".filter", blocks[b][r].filter});
      out.push_back({prefix + ".bias", blocks[b][r].bias});
    }
  out.push_back({"local.proj.weight", local_proj_weight});
  out.push_back({"local.proj.bias", local_proj_bias});
  out.push_back({"local.P", local_P});
  out.push_back({"local.W1", local_W1});
  out.push_back({"local.W2", local_W2});
  out.push_back({"local.b", local_b});
  out.push_back({"segment.W1", segment_W1});
  out.push_back({"segment.W2", segment_W2});
  out.push_back({"segment.b", segment_b});
  out.push_back({"segment.v", segment_v});
  out.push_back({"global.W1", global_W1});
  out.push_back({"global.W2", global_W2});
  out.push_back({"global.b", global_b});
  out.push_back({"global.v", global_v});
  for (std::size_t l = 0; l < deconvs.size(); ++l) {
    out.push_back({"deconv" + std::to_string(l) + ".filter", deconvs[l].filter});
    out.push_back({"deconv" + std::to_string(l) + ".bias", deconvs[l].bias});
  }
  out.push_back({"relevance.Wf", relevance_Wf});
  out.push_back({"relevance.Wc", relevance_Wc});
  out.push_back({"mlp.W1", mlp_W1});
  out.push_back({"mlp.b1", mlp_b1});
  out.push_back({"mlp.W2", mlp_W2});
  out.push_back({"mlp.b2", mlp_b2});
  return out;
}

template <typename T>
std::size_t ChanParams<T>::total_size() const {
  std::size_t n = 0;
  for (const auto& p : named()) n += p.tensor.size();
  return n;
}

template <typename T>
template <typename U>
ChanParams<U> ChanParams<T>::cast(const ChanConfig& config) const {
  auto out = ChanParams<U>::zeros(config);
  auto src = named();
  auto dst = out.named();
  for (std::size_t i = 0; i < src.size(); ++i) {
    auto from = src[i].tensor.data();
    auto to = dst[i].tensor.mutable_data();
    for (std::size_t k = 0; k < from.size(); ++k) to[k] = static_cast<U>(from[k]);
  }
  return out;
}

template struct ChanParams<float>;
template struct ChanParams<double>;
template ChanParams<float> ChanParams<float>::cast<float>(const ChanConfig&) const;
template ChanParams<double> ChanParams<float>::cast<double>(const ChanConfig&) const;
template ChanParams<float> ChanParams<double>::cast<float>(const ChanConfig&) const;
template ChanParams<double> ChanParams<double>::cast<double>(const ChanConfig&) const;

}  // namespace chan
