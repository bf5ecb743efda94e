#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "chan/features.hpp"

namespace chan {

// A partition of [0, n_shots) into contiguous segments, stored as the
// strictly increasing interior change points.
struct SegmentBoundaries {
  std::vector<std::size_t> change_points;
  std::size_t n_shots = 0;

  std::size_t segment_count() const { return change_points.size() + 1; }
  // Half-open [begin, end) per segment, in temporal order.
  std::vector<std::pair<std::size_t, std::size_t>> segments() const;
  std::vector<std::size_t> lengths() const;

  // Throws InvalidArgument unless the change points tile [0, n_shots).
  void validate() const;

  static SegmentBoundaries single(std::size_t n_shots) { return {{}, n_shots}; }
  static SegmentBoundaries uniform(std::size_t n_shots, std::size_t segment_len);

  bool operator==(const SegmentBoundaries&) const = default;
};

struct KtsOptions {
  std::size_t max_segments = 20;
  std::size_t max_segment_len = 200;
  // Weight of the model-selection term m * (log(n/m) + 1).
  double penalty = 1.0;
};

struct KtsResult {
  SegmentBoundaries boundaries;
  double cost = 0;       // within-segment sum of squared deviations
  double objective = 0;  // cost + penalty term
};

// Linear-kernel KTS: exact dynamic programme over (position, segments used)
// with prefix-sum segment costs, then penalised choice of the segment count.
// Among equal objectives the fewer segments win, then the lexicographically
// smallest change-point list.
KtsResult kts_solve(const FeatureMatrix& features, const KtsOptions& options = {});
SegmentBoundaries kts_segment(const FeatureMatrix& features, const KtsOptions& options = {});

// Exhaustive search over every feasible segmentation, for n <= kBruteForceMaxShots.
inline constexpr std::size_t kBruteForceMaxShots = 14;
KtsResult brute_force_segment(const FeatureMatrix& features, const KtsOptions& options = {});

// Sum over segments of sum_i ||x_i - mean||^2, computed with an explicit mean.
double segmentation_cost(const FeatureMatrix& features, const SegmentBoundaries& boundaries);
double kts_penalty(std::size_t n_shots, std::size_t segments, double weight);

}  // namespace chan
