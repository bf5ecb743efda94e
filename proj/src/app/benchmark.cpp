#include "chan/app/benchmark.hpp"

namespace chan {

SynthConfig benchmark_synth_config() {
  SynthConfig c;
  c.n_videos = 4;
  c.shots_per_video = 300;
  c.n_concepts = 20;
  c.n_queries = 20;
  c.feature_dim = 32;
  c.embed_dim = 32;
  c.signal_strength = 4.0;
  c.noise_level = 1.0;
  c.seed = 1;
  return c;
}

RunConfig benchmark_run_config() {
  const auto data = benchmark_synth_config();
  RunConfig rc;
  rc.model.input_dim = data.feature_dim;
  rc.model.conv_channels = {16, 32};
  rc.model.attention_dim = 16;
  rc.model.fusion_dim = 32;
  rc.model.mlp_hidden = 16;
  rc.model.concept_embed_dim = data.embed_dim;
  rc.train.adam.learning_rate = 3e-3;
  rc.train.adam.decay_factor = 1.0;
  rc.train.batch_size = 1;
  rc.train.epochs = 30;
  rc.selection = SelectionPolicy::at_threshold(0.3);
  rc.fold = 0;
  rc.seed = 1;
  return rc;
}

}  // namespace chan
