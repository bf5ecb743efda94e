#include "chan/data/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <random>
#include <string_view>

#include "chan/error.hpp"

namespace chan {

namespace {

constexpr std::array<std::string_view, 48> kConceptNames = {
    "book",   "street",  "car",    "tree",    "sky",   "food",   "hands",  "chair",    "window", "computer",
    "phone",  "cup",     "table",  "water",   "sign",  "flower", "lady",   "men",      "kids",   "drink",
    "toy",    "shoes",   "hat",    "bag",     "glasses", "door", "desk",   "paper",    "television", "road",
    "grass",  "lamp",    "bike",   "dog",     "plate", "bottle", "clock",  "sun",      "shop",   "market",
    "kitchen", "bed",    "stairs", "train",   "bus",   "garden", "building", "cookies"};

std::vector<float> random_unit(std::size_t dim, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> v(dim);
  double norm = 0;
  do {
    norm = 0;
    for (auto& x : v) {
      x = gauss(rng);
      norm += x * x;
    }
  } while (norm == 0);
  norm = std::sqrt(norm);
  std::vector<float> out(dim);
  for (std::size_t i = 0; i < dim; ++i) out[i] = static_cast<float>(v[i] / norm);
  return out;
}

void check(const SynthConfig& c) {
  auto positive = [](std::size_t v, const char* name) {
    if (v == 0) throw InvalidArgument(std::string("synth_generate: ") + name + " must be positive");
  };
  positive(c.n_videos, "n_videos");
  positive(c.shots_per_video, "shots_per_video");
  positive(c.n_concepts, "n_concepts");
  positive(c.feature_dim, "feature_dim");
  positive(c.embed_dim, "embed_dim");
  if (!(c.signal_strength > 0)) throw InvalidArgument("synth_generate: signal_strength must be positive");
  if (!(c.noise_level >= 0)) throw InvalidArgument("synth_generate: noise_level must be non-negative");
  positive(c.max_concepts_per_shot, "max_concepts_per_shot");
  if (c.max_concepts_per_shot > c.n_concepts) throw InvalidArgument("synth_generate: more concepts per shot than the vocabulary");
  if (!(c.mean_run_length >= 1)) throw InvalidArgument("synth_generate: mean_run_length must be >= 1");
  if (!(c.concepts_per_shot > 0 && c.concepts_per_shot < static_cast<double>(c.n_concepts))) {
    throw InvalidArgument("synth_generate: concepts_per_shot must lie in (0, n_concepts)");
  }
  if (c.n_concepts < 2) throw InvalidArgument("synth_generate: queries need at least 2 concepts");
  if (c.n_queries == 0 || c.n_queries > c.n_concepts * (c.n_concepts - 1) / 2) {
    throw InvalidArgument("synth_generate: cannot draw " + std::to_string(c.n_queries) + " distinct concept pairs from " +
                          std::to_string(c.n_concepts) + " concepts");
  }
  if (!(c.reference_fraction > 0 && c.reference_fraction <= 1)) {
    throw InvalidArgument("synth_generate: reference_fraction must lie in (0, 1]");
  }
}

}  // namespace

std::span<const std::string_view> default_concept_names() { return kConceptNames; }

Dataset synth_generate(const SynthConfig& config) {
  check(config);
  std::mt19937_64 rng(config.seed);
  const std::size_t n_concepts = config.n_concepts;

  std::vector<std::string> names;
  for (std::size_t c = 0; c < n_concepts; ++c) {
    names.emplace_back(c < kConceptNames.size() ? std::string(kConceptNames[c]) : "concept_" + std::to_string(c));
  }
  std::vector<std::vector<float>> directions;
  std::vector<float> embeddings;
  for (std::size_t c = 0; c < n_concepts; ++c) {
    directions.push_back(random_unit(config.feature_dim, rng));
    auto e = random_unit(config.embed_dim, rng);
    embeddings.insert(embeddings.end(), e.begin(), e.end());
  }

  Dataset ds;
  ds.vocabulary = ConceptVocabulary(std::move(names), config.embed_dim, std::move(embeddings));

  std::vector<std::pair<int, int>> pairs;
  for (std::size_t a = 0; a < n_concepts; ++a)
    for (std::size_t b = a + 1; b < n_concepts; ++b) pairs.emplace_back(static_cast<int>(a), static_cast<int>(b));
  std::shuffle(pairs.begin(), pairs.end(), rng);
  for (std::size_t q = 0; q < config.n_queries; ++q) ds.queries.push_back({pairs[q].first, pairs[q].second});

  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  // Two-state chain per concept: leaves view with probability 1/run length,
  // enters with the rate that makes the stationary on-fraction match the
  // requested density.
  const double on_fraction = config.concepts_per_shot / static_cast<double>(n_concepts);
  const double p_leave = 1.0 / config.mean_run_length;
  const double p_enter = std::min(1.0, p_leave * on_fraction / (1.0 - on_fraction));

  for (std::size_t v = 0; v < config.n_videos; ++v) {
    VideoRecord rec;
    rec.id = "video_" + std::to_string(v);
    const std::size_t n = config.shots_per_video;
    rec.features = FeatureMatrix(n, config.feature_dim);
    std::vector<bool> on(n_concepts);
    std::vector<int> visible;  // in order of appearance; the longest visible are shown first
    for (std::size_t c = 0; c < n_concepts; ++c) {
      on[c] = unit(rng) < on_fraction;
      if (on[c]) visible.push_back(static_cast<int>(c));
    }
    for (std::size_t shot = 0; shot < n; ++shot) {
      if (shot > 0) {
        for (std::size_t c = 0; c < n_concepts; ++c) {
          const bool was = on[c];
          on[c] = was ? unit(rng) >= p_leave : unit(rng) < p_enter;
          if (was && !on[c]) visible.erase(std::find(visible.begin(), visible.end(), static_cast<int>(c)));
          if (!was && on[c]) visible.push_back(static_cast<int>(c));
        }
      }
      const auto shown = std::min(visible.size(), config.max_concepts_per_shot);
      std::vector<int> ids(visible.begin(), visible.begin() + static_cast<std::ptrdiff_t>(shown));
      std::sort(ids.begin(), ids.end());
      auto row = rec.features.row(shot);
      for (auto& x : row) x = static_cast<float>(config.noise_level * gauss(rng));
      for (int c : ids)
        for (std::size_t d = 0; d < config.feature_dim; ++d)
          row[d] += static_cast<float>(config.signal_strength * directions[static_cast<std::size_t>(c)][d]);
      rec.annotations.push_back(std::move(ids));
    }

    const auto cap = static_cast<std::size_t>(std::ceil(config.reference_fraction * static_cast<double>(n)));
    for (const auto& q : ds.queries) {
      std::vector<std::pair<int, std::size_t>> ranked;  // (-relevance, shot)
      for (std::size_t s = 0; s < n; ++s) {
        const auto& a = rec.annotations[s];
        const int rel = static_cast<int>(std::count(a.begin(), a.end(), q.first) + std::count(a.begin(), a.end(), q.second));
        if (rel > 0) ranked.emplace_back(-rel, s);
      }
      std::sort(ranked.begin(), ranked.end());
      if (ranked.size() > cap) ranked.resize(cap);
      ShotSummary ref{rec.id, q, {}, {}};
      for (const auto& r : ranked) ref.shots.push_back(r.second);
      std::sort(ref.shots.begin(), ref.shots.end());
      ds.references.push_back(std::move(ref));
    }
    ds.videos.push_back(std::move(rec));
  }
  ds.validate();
  return ds;
}

}  // namespace chan
