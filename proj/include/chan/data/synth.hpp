#pragma once

#include <cstdint>

#include "chan/data/dataset.hpp"

namespace chan {

// Generator for datasets with a planted, recoverable concept signal.
//
// Every concept c owns a random unit direction u_c in feature space and a
// random unit embedding f_c. Concepts drift in and out of view independently:
// each follows an on/off chain whose visible runs last mean_run_length shots
// on average, tuned so that concepts_per_shot are visible on average. A shot
// shows at most max_concepts_per_shot of the visible concepts (the longest
// visible first). A shot's feature is
//   sum_{c in shot} signal_strength * u_c + noise_level * N(0, I).
// The reference summary of query (c1, c2) holds the shots carrying c1 or c2,
// ranked by how many of the two they carry and capped at
// ceil(reference_fraction * shots).
struct SynthConfig {
  std::size_t n_videos = 4;
  std::size_t shots_per_video = 300;
  std::size_t n_concepts = 20;
  std::size_t n_queries = 20;
  std::size_t feature_dim = 32;
  std::size_t embed_dim = 32;  // wider than the concept count so embeddings stay separable
  double signal_strength = 4.0;
  double noise_level = 1.0;
  std::size_t max_concepts_per_shot = 3;
  double concepts_per_shot = 1.5;
  double mean_run_length = 12.0;
  double reference_fraction = 1.0;
  std::uint64_t seed = 0;
};

Dataset synth_generate(const SynthConfig& config);

// Default concept names; generated vocabularies take a prefix of this list.
std::span<const std::string_view> default_concept_names();

}  // namespace chan
