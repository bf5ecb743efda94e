#include "chan/app/experiment.hpp"

#include <algorithm>
#include <numeric>
#include <random>

#include <spdlog/spdlog.h>

#include "chan/error.hpp"

namespace chan {

namespace {

template <typename T>
ExperimentResult run_typed(const RunConfig& config, const Dataset& dataset,
                           const std::function<void(const StepRecord&)>& on_step) {
  ExperimentResult out;
  out.config = config;
  out.split = split_protocol(dataset.videos.size(), config.fold);
  out.boundaries = segment_dataset(dataset, config.segmentation);
  for (std::size_t v = 0; v < dataset.videos.size(); ++v) {
    spdlog::debug("video {}: {} shots, {} segments", dataset.videos[v].id, out.boundaries[v].n_shots,
                  out.boundaries[v].segment_count());
  }

  ChanModel<T> model(config.model);
  out.training = fit(model, dataset, out.boundaries, out.split.train, out.split.val, config.train, on_step);
  const std::size_t test[] = {out.split.test};
  out.test_summaries = summarize_videos(model, dataset, out.boundaries, test, config.selection);
  out.test = evaluate_dataset(match_cases(dataset, out.test_summaries));
  out.params = model.params().template cast<float>(config.model);
  return out;
}

}  // namespace

ExperimentResult run_experiment(const RunConfig& config, const Dataset& dataset,
                                const std::function<void(const StepRecord&)>& on_step) {
  const RunConfig resolved = config.resolved();
  resolved.model.validate();
  if (dataset.videos.empty()) throw InvalidArgument("run_experiment: dataset has no videos");
  if (resolved.model.input_dim != dataset.videos.front().features.cols) {
    throw InvalidArgument("run_experiment: model input_dim " + std::to_string(resolved.model.input_dim) +
                          " does not match feature width " + std::to_string(dataset.videos.front().features.cols));
  }
  if (resolved.model.concept_embed_dim != dataset.vocabulary.embed_dim()) {
    throw InvalidArgument("run_experiment: model concept_embed_dim does not match the vocabulary embeddings");
  }
  return resolved.precision == Precision::kFloat64 ? run_typed<double>(resolved, dataset, on_step)
                                                   : run_typed<float>(resolved, dataset, on_step);
}

double random_baseline_f1(const Dataset& dataset, std::span<const std::size_t> videos, std::size_t draws,
                          std::uint64_t seed) {
  if (draws == 0) throw InvalidArgument("random baseline: need at least one draw");
  std::mt19937_64 rng(seed);
  double total = 0;
  for (std::size_t d = 0; d < draws; ++d) {
    std::vector<ShotSummary> candidates;
    for (auto v : videos) {
      const auto& video = dataset.videos.at(v);
      std::vector<std::size_t> all(video.features.rows);
      std::iota(all.begin(), all.end(), std::size_t{0});
      for (const auto& q : dataset.queries) {
        const auto* ref = dataset.find_reference(video.id, q);
        if (!ref) throw InvalidArgument("random baseline: missing reference for " + video.id);
        std::vector<std::size_t> pick;
        std::sample(all.begin(), all.end(), std::back_inserter(pick), ref->shots.size(), rng);
        candidates.push_back({video.id, q, std::move(pick), {}});
      }
    }
    total += evaluate_dataset(match_cases(dataset, candidates)).average.f1;
  }
  return total / static_cast<double>(draws);
}

}  // namespace chan
