#include "chan/model/trainer.hpp"

#include <algorithm>
#include <random>

#include <spdlog/spdlog.h>

#include "chan/error.hpp"
#include "chan/tensor/ops.hpp"

namespace chan {

namespace {

template <typename T>
void copy_values(const ChanParams<T>& from, ChanParams<T>& to) {
  auto src = from.named();
  auto dst = to.named();
  for (std::size_t i = 0; i < src.size(); ++i) {
    auto s = src[i].tensor.data();
    std::copy(s.begin(), s.end(), dst[i].tensor.mutable_data().begin());
  }
}

}  // namespace

std::vector<double> shot_labels(std::span<const ConceptSet> annotations, const Query& query, LabelMode mode) {
  std::vector<double> labels;
  labels.reserve(annotations.size());
  for (const auto& shot : annotations) {
    const bool has_first = std::binary_search(shot.begin(), shot.end(), query.first);
    const bool has_second = std::binary_search(shot.begin(), shot.end(), query.second);
    if (mode == LabelMode::kQueryFraction) {
      labels.push_back((static_cast<double>(has_first) + static_cast<double>(has_second)) / 2.0);
    } else {
      labels.push_back(has_first || has_second ? 1.0 : 0.0);
    }
  }
  return labels;
}

void to_json(nlohmann::json& j, const TrainOptions& o) {
  j = {{"learning_rate", o.adam.learning_rate},
       {"beta1", o.adam.beta1},
       {"beta2", o.adam.beta2},
       {"epsilon", o.adam.epsilon},
       {"decay_factor", o.adam.decay_factor},
       {"batch_size", o.batch_size},
       {"epochs", o.epochs},
       {"patience", o.patience},
       {"labels", o.labels == LabelMode::kQueryFraction ? "query_fraction" : "any_concept"},
       {"selection", o.selection},
       {"seed", o.seed}};
}

void from_json(const nlohmann::json& j, TrainOptions& o) {
  TrainOptions d;
  o.adam.learning_rate = j.value("learning_rate", d.adam.learning_rate);
  o.adam.beta1 = j.value("beta1", d.adam.beta1);
  o.adam.beta2 = j.value("beta2", d.adam.beta2);
  o.adam.epsilon = j.value("epsilon", d.adam.epsilon);
  o.adam.decay_factor = j.value("decay_factor", d.adam.decay_factor);
  o.batch_size = j.value("batch_size", d.batch_size);
  o.epochs = j.value("epochs", d.epochs);
  o.patience = j.value("patience", d.patience);
  const auto labels = j.value("labels", std::string("query_fraction"));
  if (labels == "query_fraction") {
    o.labels = LabelMode::kQueryFraction;
  } else if (labels == "any_concept") {
    o.labels = LabelMode::kAnyConcept;
  } else {
    throw InvalidArgument("train options: unknown label mode '" + labels + "'");
  }
  o.selection = j.contains("selection") ? j.at("selection").get<SelectionPolicy>() : d.selection;
  o.seed = j.value("seed", d.seed);
}

template <typename T>
MetricsTable evaluate_model(const ChanModel<T>& model, const Dataset& dataset,
                            std::span<const SegmentBoundaries> boundaries, std::span<const std::size_t> videos,
                            const SelectionPolicy& policy) {
  const auto summaries = summarize_videos(model, dataset, boundaries, videos, policy);
  const auto cases = match_cases(dataset, summaries);
  return evaluate_dataset(cases);
}

template <typename T>
TrainResult fit(ChanModel<T>& model, const Dataset& dataset, std::span<const SegmentBoundaries> boundaries,
                std::span<const std::size_t> train_videos, std::optional<std::size_t> val_video,
                const TrainOptions& options, const std::function<void(const StepRecord&)>& on_step) {
  if (train_videos.empty() || dataset.queries.empty()) throw InvalidArgument("fit: empty training set");
  if (boundaries.size() != dataset.videos.size()) throw InvalidArgument("fit: need boundaries for every video");
  if (options.batch_size == 0) throw InvalidArgument("fit: batch size must be >= 1");

  struct Example {
    std::size_t video;
    std::size_t query;
  };
  std::vector<Example> examples;
  for (auto v : train_videos)
    for (std::size_t q = 0; q < dataset.queries.size(); ++q) examples.push_back({v, q});

  std::vector<Tensor<T>> features(dataset.videos.size());
  for (auto v : train_videos) features[v] = to_tensor<T>(dataset.videos[v].features);
  std::vector<QueryEmbedding<T>> queries;
  for (const auto& q : dataset.queries) queries.push_back(QueryEmbedding<T>::from_vocabulary(dataset.vocabulary, q));
  std::vector<std::vector<std::vector<T>>> labels(dataset.videos.size());
  for (auto v : train_videos) {
    for (const auto& q : dataset.queries) {
      auto l = shot_labels(dataset.videos[v].annotations, q, options.labels);
      labels[v].emplace_back(l.begin(), l.end());
    }
  }

  Adam<T> adam(model.trainable_parameters(), options.adam);
  std::mt19937_64 rng(options.seed);
  TrainResult result;
  std::optional<ChanParams<T>> best;
  std::size_t since_best = 0;
  std::size_t step = 0;

  for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
    std::shuffle(examples.begin(), examples.end(), rng);
    EpochRecord record{epoch, 0.0, adam.learning_rate(), std::nullopt};
    std::size_t batches = 0;
    for (std::size_t start = 0; start < examples.size(); start += options.batch_size) {
      const std::size_t end = std::min(examples.size(), start + options.batch_size);
      std::optional<Tensor<T>> total;
      for (std::size_t i = start; i < end; ++i) {
        const auto& ex = examples[i];
        auto scores = model.forward(features[ex.video], boundaries[ex.video], queries[ex.query]);
        auto loss = bce_loss(scores, std::span<const T>(labels[ex.video][ex.query]));
        total = total ? add(*total, loss) : loss;
      }
      auto loss = scale(*total, T(1) / static_cast<T>(end - start));
      adam.zero_grad();
      loss.backward();
      adam.step();
      StepRecord s{epoch, step++, static_cast<double>(loss.item()), adam.learning_rate()};
      record.mean_loss += s.loss;
      ++batches;
      result.steps.push_back(s);
      if (on_step) on_step(s);
    }
    record.mean_loss /= static_cast<double>(batches);

    bool stop = false;
    if (val_video) {
      const std::size_t v = *val_video;
      const double f1 = evaluate_model(model, dataset, boundaries, std::span<const std::size_t>(&v, 1), options.selection)
                            .average.f1;
      record.val_f1 = f1;
      if (!result.best_val_f1 || f1 > *result.best_val_f1) {
        result.best_val_f1 = f1;
        result.best_epoch = epoch;
        best = model.params().template cast<T>(model.config());
        since_best = 0;
      } else if (options.patience > 0 && ++since_best >= options.patience) {
        stop = true;
      }
    } else {
      result.best_epoch = epoch;
    }
    spdlog::info("epoch {:>2}  loss {:.5f}  lr {:.3g}{}", epoch, record.mean_loss, record.lr,
                 record.val_f1 ? fmt::format("  val F1 {:.4f}", *record.val_f1) : std::string());
    result.epochs.push_back(record);
    adam.decay();
    if (stop) break;
  }
  if (best) copy_values(*best, model.params());
  return result;
}

template TrainResult fit<float>(ChanModel<float>&, const Dataset&, std::span<const SegmentBoundaries>,
                                std::span<const std::size_t>, std::optional<std::size_t>, const TrainOptions&,
                                const std::function<void(const StepRecord&)>&);
template TrainResult fit<double>(ChanModel<double>&, const Dataset&, std::span<const SegmentBoundaries>,
                                 std::span<const std::size_t>, std::optional<std::size_t>, const TrainOptions&,
                                 const std::function<void(const StepRecord&)>&);
template MetricsTable evaluate_model<float>(const ChanModel<float>&, const Dataset&, std::span<const SegmentBoundaries>,
                                            std::span<const std::size_t>, const SelectionPolicy&);
template MetricsTable evaluate_model<double>(const ChanModel<double>&, const Dataset&, std::span<const SegmentBoundaries>,
                                             std::span<const std::size_t>, const SelectionPolicy&);

}  // namespace chan
