#include "chan/model/summarize.hpp"

#include <algorithm>
#include <numeric>

#include "chan/error.hpp"

namespace chan {

void to_json(nlohmann::json& j, const SelectionPolicy& p) {
  if (p.kind == SelectionPolicy::Kind::kThreshold) {
    j = {{"policy", "threshold"}, {"threshold", p.threshold}};
  } else {
    j = {{"policy", "top_k"}, {"k", p.k}};
  }
}

void from_json(const nlohmann::json& j, SelectionPolicy& p) {
  const auto kind = j.value("policy", std::string("threshold"));
  if (kind == "threshold") {
    p = SelectionPolicy::at_threshold(j.value("threshold", 0.5));
  } else if (kind == "top_k") {
    p = SelectionPolicy::top_k(j.value("k", std::size_t{0}));
  } else {
    throw InvalidArgument("selection policy: unknown kind '" + kind + "'");
  }
}

SummaryResult select_summary(std::vector<double> scores, const SelectionPolicy& policy) {
  SummaryResult out;
  if (policy.kind == SelectionPolicy::Kind::kThreshold) {
    for (std::size_t i = 0; i < scores.size(); ++i)
      if (scores[i] >= policy.threshold) out.selected.push_back(i);
  } else {
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    const std::size_t k = std::min(policy.k, order.size());
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                      [&](std::size_t a, std::size_t b) { return scores[a] > scores[b] || (scores[a] == scores[b] && a < b); });
    out.selected.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
    std::sort(out.selected.begin(), out.selected.end());
  }
  out.scores = std::move(scores);
  return out;
}

template <typename T>
SummaryResult summarize(const ChanModel<T>& model, const VideoRecord& video, const SegmentBoundaries& boundaries,
                        const ConceptVocabulary& vocab, const Query& query, const SelectionPolicy& policy) {
  auto embedding = QueryEmbedding<T>::from_vocabulary(vocab, query);
  return select_summary(model.score(video.features, boundaries, embedding), policy);
}

template <typename T>
std::vector<ShotSummary> summarize_videos(const ChanModel<T>& model, const Dataset& dataset,
                                          std::span<const SegmentBoundaries> boundaries,
                                          std::span<const std::size_t> videos, const SelectionPolicy& policy) {
  std::vector<ShotSummary> out;
  for (auto v : videos) {
    const auto& video = dataset.videos.at(v);
    for (const auto& q : dataset.queries) {
      auto result = summarize(model, video, boundaries[v], dataset.vocabulary, q, policy);
      out.push_back({video.id, q, std::move(result.selected), std::move(result.scores)});
    }
  }
  return out;
}

std::vector<SummaryCase> match_cases(const Dataset& dataset, std::span<const ShotSummary> candidates) {
  std::vector<SummaryCase> cases;
  for (const auto& c : candidates) {
    const auto* ref = dataset.find_reference(c.video, c.query);
    if (!ref) {
      throw InvalidArgument("no reference summary for video '" + c.video + "' and query " +
                            query_label(dataset.vocabulary, c.query));
    }
    const auto& video = dataset.video(c.video);
    cases.push_back({c.video, query_label(dataset.vocabulary, c.query), c.shots, ref->shots, &video.annotations});
  }
  return cases;
}

std::vector<SegmentBoundaries> segment_dataset(const Dataset& dataset, const KtsOptions& options) {
  std::vector<SegmentBoundaries> out;
  for (const auto& v : dataset.videos) out.push_back(kts_segment(v.features, options));
  return out;
}

template SummaryResult summarize<float>(const ChanModel<float>&, const VideoRecord&, const SegmentBoundaries&,
                                        const ConceptVocabulary&, const Query&, const SelectionPolicy&);
template SummaryResult summarize<double>(const ChanModel<double>&, const VideoRecord&, const SegmentBoundaries&,
                                         const ConceptVocabulary&, const Query&, const SelectionPolicy&);
template std::vector<ShotSummary> summarize_videos<float>(const ChanModel<float>&, const Dataset&,
                                                          std::span<const SegmentBoundaries>,
                                                          std::span<const std::size_t>, const SelectionPolicy&);
template std::vector<ShotSummary> summarize_videos<double>(const ChanModel<double>&, const Dataset&,
                                                           std::span<const SegmentBoundaries>,
                                                           std::span<const std::size_t>, const SelectionPolicy&);

}  // namespace chan
