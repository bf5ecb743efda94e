#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "chan/eval/matching.hpp"

namespace chan {

// Sorted, duplicate-free concept ids attached to one shot.
using ConceptSet = std::vector<int>;

// |a n b| / |a u b|; 0 when both are empty.
double concept_iou(const ConceptSet& a, const ConceptSet& b);

struct Prf {
  double precision = 0;
  double recall = 0;
  double f1 = 0;
};

double f1_score(double precision, double recall);

struct MatchReport {
  std::vector<MatchedPair> matched_pairs;  // row = candidate shot index, col = reference shot index
  double precision = 0;
  double recall = 0;
  double f1 = 0;

  Prf prf() const { return {precision, recall, f1}; }
};

// Concept-IoU weighted bipartite matching between two shot summaries.
// Precision and recall count matched pairs of positive weight.
MatchReport evaluate_summary(std::span<const std::size_t> candidate, std::span<const std::size_t> reference,
                             std::span<const ConceptSet> annotations);

struct SummaryCase {
  std::string video;
  std::string query;
  std::vector<std::size_t> candidate;
  std::vector<std::size_t> reference;
  const std::vector<ConceptSet>* annotations = nullptr;
};

struct VideoMetrics {
  std::string video;
  std::size_t queries = 0;
  Prf mean;
};

struct MetricsTable {
  std::vector<VideoMetrics> videos;  // first-appearance order
  Prf average;                       // unweighted mean over videos

  // Aligned text with Pre/Rec/F1 columns in percent and a final "Avg." row.
  std::string to_text() const;
};

// Averages each metric over the queries of a video, then over videos.
MetricsTable evaluate_dataset(std::span<const SummaryCase> cases);

}  // namespace chan
