#include "chan/model/config.hpp"

#include <string>

#include "chan/error.hpp"

namespace chan {

std::size_t ChanConfig::pooled_length(std::size_t shots) const {
  for (std::size_t b = 0; b < conv_channels.size(); ++b) shots = (shots + pool_window - 1) / pool_window;
  return shots;
}

void ChanConfig::validate() const {
  auto fail = [](const std::string& msg) { throw InvalidArgument("chan config: " + msg); };
  if (input_dim == 0 || attention_dim == 0 || fusion_dim == 0 || mlp_hidden == 0 || concept_embed_dim == 0) {
    fail("all dimensions must be positive");
  }
  if (conv_channels.empty()) fail("need at least one convolutional block");
  if (kernel_sizes.empty() || kernel_sizes.size() != dilations.size()) {
    fail("kernel_sizes and dilations must be non-empty and of equal length");
  }
  for (auto k : kernel_sizes)
    if (k % 2 == 0) fail("kernel size " + std::to_string(k) + " is even");
  for (auto d : dilations)
    if (d == 0) fail("dilation must be >= 1");
  for (auto c : conv_channels)
    if (c == 0 || c % branches() != 0) {
      fail("block width " + std::to_string(c) + " is not a positive multiple of " + std::to_string(branches()) + " branches");
    }
  if (pool_window == 0) fail("pool_window must be >= 1");
  if (deconv_kernel < pool_window) fail("deconv_kernel must be at least pool_window to recover the shot count");
}

void to_json(nlohmann::json& j, const ChanConfig& c) {
  j = {{"input_dim", c.input_dim},
       {"conv_channels", c.conv_channels},
       {"kernel_sizes", c.kernel_sizes},
       {"dilations", c.dilations},
       {"pool_window", c.pool_window},
       {"attention_dim", c.attention_dim},
       {"fusion_dim", c.fusion_dim},
       {"mlp_hidden", c.mlp_hidden},
       {"concept_embed_dim", c.concept_embed_dim},
       {"deconv_kernel", c.deconv_kernel},
       {"disable_local_attention", c.disable_local_attention},
       {"disable_global_attention", c.disable_global_attention},
       {"seed", c.seed}};
}

void from_json(const nlohmann::json& j, ChanConfig& c) {
  ChanConfig d;
  c.input_dim = j.value("input_dim", d.input_dim);
  c.conv_channels = j.value("conv_channels", d.conv_channels);
  c.kernel_sizes = j.value("kernel_sizes", d.kernel_sizes);
  c.dilations = j.value("dilations", d.dilations);
  c.pool_window = j.value("pool_window", d.pool_window);
  c.attention_dim = j.value("attention_dim", d.attention_dim);
  c.fusion_dim = j.value("fusion_dim", d.fusion_dim);
  c.mlp_hidden = j.value("mlp_hidden", d.mlp_hidden);
  c.concept_embed_dim = j.value("concept_embed_dim", d.concept_embed_dim);
  c.deconv_kernel = j.value("deconv_kernel", d.deconv_kernel);
  c.disable_local_attention = j.value("disable_local_attention", d.disable_local_attention);
  c.disable_global_attention = j.value("disable_global_attention", d.disable_global_attention);
  c.seed = j.value("seed", d.seed);
}

}  // namespace chan
