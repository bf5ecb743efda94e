#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "json.hpp"

namespace chan {

// Architecture hyperparameters. Defaults are the full-size benchmark model;
// tests and the synthetic benchmark shrink the widths.
struct ChanConfig {
  std::size_t input_dim = 2048;
  // Output channels of each fully-convolutional block, split evenly across the
  // parallel branches.
  std::vector<std::size_t> conv_channels{256, 512};
  // One branch per (kernel size, dilation) pair.
  std::vector<std::size_t> kernel_sizes{3, 5};
  std::vector<std::size_t> dilations{1, 2};
  std::size_t pool_window = 2;
  std::size_t attention_dim = 256;  // d_c
  std::size_t fusion_dim = 512;     // deconv output width and visual-textual space
  std::size_t mlp_hidden = 256;
  std::size_t concept_embed_dim = 300;
  std::size_t deconv_kernel = 4;
  bool disable_local_attention = false;
  bool disable_global_attention = false;
  std::uint64_t seed = 0;

  std::size_t branches() const { return kernel_sizes.size(); }
  std::size_t encoded_dim() const { return conv_channels.back(); }
  std::size_t fused_dim() const { return 2 * encoded_dim() + attention_dim; }
  // Temporal length after all pooling stages.
  std::size_t pooled_length(std::size_t shots) const;

  // Throws InvalidArgument describing the first violated constraint.
  void validate() const;

  bool operator==(const ChanConfig&) const = default;
};

void to_json(nlohmann::json& j, const ChanConfig& c);
void from_json(const nlohmann::json& j, ChanConfig& c);

}  // namespace chan
