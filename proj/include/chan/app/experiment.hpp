#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "chan/app/run_config.hpp"
#include "chan/data/dataset.hpp"
#include "chan/model/params.hpp"

namespace chan {

struct ExperimentResult {
  RunConfig config;  // resolved
  DatasetSplit split;
  std::vector<SegmentBoundaries> boundaries;  // indexed like dataset.videos
  TrainResult training;
  ChanParams<float> params;  // best parameters, rounded to float32 when trained in float64
  std::vector<ShotSummary> test_summaries;
  MetricsTable test;
};

// Segments every video, trains on the fold's training videos with early
// selection on its validation video, and evaluates on its test video.
ExperimentResult run_experiment(const RunConfig& config, const Dataset& dataset,
                                const std::function<void(const StepRecord&)>& on_step = {});

// Mean dataset F1 of uniformly random summaries, each the size of its
// reference, averaged over draws.
double random_baseline_f1(const Dataset& dataset, std::span<const std::size_t> videos, std::size_t draws,
                          std::uint64_t seed);

}  // namespace chan
