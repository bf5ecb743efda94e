#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "chan/data/dataset.hpp"
#include "chan/model/chan_model.hpp"
#include "chan/model/summarize.hpp"
#include "chan/tensor/adam.hpp"
#include "json.hpp"

namespace chan {

// Per-shot supervision for a query.
//   kQueryFraction: fraction of the two query concepts present in the shot (0, 0.5 or 1)
//   kAnyConcept:    1 if either query concept is present, else 0
enum class LabelMode { kQueryFraction, kAnyConcept };

std::vector<double> shot_labels(std::span<const ConceptSet> annotations, const Query& query, LabelMode mode);

struct TrainOptions {
  AdamOptions adam;  // learning rate 1e-4, decayed x0.8 per epoch
  std::size_t batch_size = 5;
  std::size_t epochs = 30;
  // Stop after this many epochs without a validation F1 improvement; 0 disables.
  std::size_t patience = 0;
  LabelMode labels = LabelMode::kQueryFraction;
  SelectionPolicy selection;  // used for validation F1
  std::uint64_t seed = 0;     // batch shuffling
};

void to_json(nlohmann::json& j, const TrainOptions& o);
void from_json(const nlohmann::json& j, TrainOptions& o);

struct StepRecord {
  std::size_t epoch = 0;
  std::size_t step = 0;
  double loss = 0;
  double lr = 0;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double mean_loss = 0;
  double lr = 0;  // rate used during this epoch
  std::optional<double> val_f1;
};

struct TrainResult {
  std::vector<StepRecord> steps;
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;
  std::optional<double> best_val_f1;
};

// Mini-batch BCE training over every (train video, query) pair. With a
// validation video the model ends holding the parameters of the epoch with
// the best validation F1 (earliest on ties); otherwise the final ones.
// boundaries is indexed like dataset.videos.
template <typename T>
TrainResult fit(ChanModel<T>& model, const Dataset& dataset, std::span<const SegmentBoundaries> boundaries,
                std::span<const std::size_t> train_videos, std::optional<std::size_t> val_video,
                const TrainOptions& options, const std::function<void(const StepRecord&)>& on_step = {});

// Mean F1 of the model's summaries over the given videos and all dataset queries.
template <typename T>
MetricsTable evaluate_model(const ChanModel<T>& model, const Dataset& dataset,
                            std::span<const SegmentBoundaries> boundaries, std::span<const std::size_t> videos,
                            const SelectionPolicy& policy);

}  // namespace chan
