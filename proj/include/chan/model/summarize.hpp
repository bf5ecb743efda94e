#pragma once

#include <span>
#include <vector>

#include "chan/data/dataset.hpp"
#include "chan/eval/metrics.hpp"
#include "chan/model/chan_model.hpp"
#include "json.hpp"

namespace chan {

struct SelectionPolicy {
  enum class Kind { kThreshold, kTopK };
  Kind kind = Kind::kThreshold;
  double threshold = 0.5;
  std::size_t k = 0;

  static SelectionPolicy at_threshold(double t) { return {Kind::kThreshold, t, 0}; }
  static SelectionPolicy top_k(std::size_t k) { return {Kind::kTopK, 0.5, k}; }
};

void to_json(nlohmann::json& j, const SelectionPolicy& p);
void from_json(const nlohmann::json& j, SelectionPolicy& p);

struct SummaryResult {
  std::vector<double> scores;
  std::vector<std::size_t> selected;  // ascending
};

// Threshold: every shot with score >= threshold (possibly none).
// Top-k: the k best scores, ties resolved toward the lower index.
SummaryResult select_summary(std::vector<double> scores, const SelectionPolicy& policy);

template <typename T>
SummaryResult summarize(const ChanModel<T>& model, const VideoRecord& video, const SegmentBoundaries& boundaries,
                        const ConceptVocabulary& vocab, const Query& query, const SelectionPolicy& policy);

// Summaries for every (video, query) pair of the given videos, in video-major order.
template <typename T>
std::vector<ShotSummary> summarize_videos(const ChanModel<T>& model, const Dataset& dataset,
                                          std::span<const SegmentBoundaries> boundaries,
                                          std::span<const std::size_t> videos, const SelectionPolicy& policy);

// Pairs candidate summaries with the dataset's references and annotations.
std::vector<SummaryCase> match_cases(const Dataset& dataset, std::span<const ShotSummary> candidates);

// KTS boundaries for every video of the dataset, indexed like dataset.videos.
std::vector<SegmentBoundaries> segment_dataset(const Dataset& dataset, const KtsOptions& options);

extern template SummaryResult summarize<float>(const ChanModel<float>&, const VideoRecord&, const SegmentBoundaries&,
                                               const ConceptVocabulary&, const Query&, const SelectionPolicy&);
extern template SummaryResult summarize<double>(const ChanModel<double>&, const VideoRecord&, const SegmentBoundaries&,
                                                const ConceptVocabulary&, const Query&, const SelectionPolicy&);

}  // namespace chan
