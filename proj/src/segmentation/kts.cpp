#include "chan/segmentation/kts.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "chan/error.hpp"

namespace chan {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_problem(const FeatureMatrix& features, const KtsOptions& options) {
  const std::size_t n = features.rows;
  if (n == 0) throw InvalidArgument("kts: empty feature sequence");
  if (features.cols == 0) throw InvalidArgument("kts: zero-dimensional features");
  if (options.max_segments == 0 || options.max_segment_len == 0) {
    throw InvalidArgument("kts: max_segments and max_segment_len must be >= 1");
  }
  if (n > options.max_segments * options.max_segment_len) {
    throw InvalidArgument("kts: " + std::to_string(n) + " shots cannot be split into at most " +
                          std::to_string(options.max_segments) + " segments of at most " +
                          std::to_string(options.max_segment_len) + " shots");
  }
}

// Prefix sums giving cost(i, j) = sum ||x||^2 - ||sum x||^2 / (j - i) in O(d).
class PrefixCost {
 public:
  explicit PrefixCost(const FeatureMatrix& x) : n_(x.rows), d_(x.cols), sums_((n_ + 1) * d_, 0.0), norms_(n_ + 1, 0.0) {
    for (std::size_t i = 0; i < n_; ++i) {
      double sq = 0;
      for (std::size_t k = 0; k < d_; ++k) {
        const double v = x(i, k);
        sums_[(i + 1) * d_ + k] = sums_[i * d_ + k] + v;
        sq += v * v;
      }
      norms_[i + 1] = norms_[i] + sq;
    }
  }

  double operator()(std::size_t begin, std::size_t end) const {
    double sq = 0;
    for (std::size_t k = 0; k < d_; ++k) {
      const double s = sums_[end * d_ + k] - sums_[begin * d_ + k];
      sq += s * s;
    }
    const double c = (norms_[end] - norms_[begin]) - sq / static_cast<double>(end - begin);
    return c > 0 ? c : 0.0;
  }

 private:
  std::size_t n_;
  std::size_t d_;
  std::vector<double> sums_;
  std::vector<double> norms_;
};

}  // namespace

std::vector<std::pair<std::size_t, std::size_t>> SegmentBoundaries::segments() const {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  std::size_t begin = 0;
  for (auto cp : change_points) {
    out.emplace_back(begin, cp);
    begin = cp;
  }
  out.emplace_back(begin, n_shots);
  return out;
}

std::vector<std::size_t> SegmentBoundaries::lengths() const {
  std::vector<std::size_t> out;
  for (auto [b, e] : segments()) out.push_back(e - b);
  return out;
}

void SegmentBoundaries::validate() const {
  if (n_shots == 0) throw InvalidArgument("segment boundaries: zero shots");
  std::size_t prev = 0;
  for (auto cp : change_points) {
    if (cp <= prev || cp >= n_shots) {
      throw InvalidArgument("segment boundaries: change point " + std::to_string(cp) +
                            " is not strictly increasing inside (0, " + std::to_string(n_shots) + ")");
    }
    prev = cp;
  }
}

SegmentBoundaries SegmentBoundaries::uniform(std::size_t n_shots, std::size_t segment_len) {
  if (segment_len == 0) throw InvalidArgument("segment boundaries: zero segment length");
  SegmentBoundaries b{{}, n_shots};
  for (std::size_t cp = segment_len; cp < n_shots; cp += segment_len) b.change_points.push_back(cp);
  return b;
}

double kts_penalty(std::size_t n_shots, std::size_t segments, double weight) {
  const double n = static_cast<double>(n_shots);
  const double m = static_cast<double>(segments);
  return weight * m * (std::log(n / m) + 1.0);
}

double segmentation_cost(const FeatureMatrix& features, const SegmentBoundaries& boundaries) {
  double total = 0;
  std::vector<double> mu(features.cols);
  for (auto [begin, end] : boundaries.segments()) {
    std::fill(mu.begin(), mu.end(), 0.0);
    for (std::size_t i = begin; i < end; ++i)
      for (std::size_t k = 0; k < features.cols; ++k) mu[k] += features(i, k);
    for (auto& m : mu) m /= static_cast<double>(end - begin);
    double seg = 0;
    for (std::size_t i = begin; i < end; ++i)
      for (std::size_t k = 0; k < features.cols; ++k) {
        const double diff = features(i, k) - mu[k];
        seg += diff * diff;
      }
    total += seg;
  }
  return total;
}

KtsResult kts_solve(const FeatureMatrix& features, const KtsOptions& options) {
  check_problem(features, options);
  const std::size_t n = features.rows;
  const std::size_t max_len = options.max_segment_len;
  const std::size_t max_m = std::min(options.max_segments, n);
  const PrefixCost cost(features);

  // Segment costs depend only on (begin, end); cache the band end - begin <= max_len.
  const std::size_t band = std::min(max_len, n);
  std::vector<double> seg_cost(n * band, kInf);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t len = 1; len <= band && i + len <= n; ++len) seg_cost[i * band + len - 1] = cost(i, i + len);

  // tail[m][i]: optimal cost of covering [i, n) with exactly m segments.
  std::vector<std::vector<double>> tail(max_m + 1, std::vector<double>(n + 1, kInf));
  tail[0][n] = 0;
  for (std::size_t m = 1; m <= max_m; ++m) {
    for (std::size_t i = n; i-- > 0;) {
      double best = kInf;
      for (std::size_t len = 1; len <= band && i + len <= n; ++len) {
        const double rest = tail[m - 1][i + len];
        if (rest == kInf) continue;
        best = std::min(best, seg_cost[i * band + len - 1] + rest);
      }
      tail[m][i] = best;
    }
  }

  std::size_t chosen = 0;
  double best_objective = kInf;
  for (std::size_t m = 1; m <= max_m; ++m) {
    if (tail[m][0] == kInf) continue;
    const double obj = tail[m][0] + kts_penalty(n, m, options.penalty);
    if (obj < best_objective) {
      best_objective = obj;
      chosen = m;
    }
  }
  if (chosen == 0) throw InvalidArgument("kts: no feasible segmentation");

  // Forward reconstruction taking the earliest optimal change point at each step.
  KtsResult result;
  result.boundaries.n_shots = n;
  std::size_t pos = 0;
  for (std::size_t m = chosen; m > 1; --m) {
    double best = kInf;
    std::size_t best_end = 0;
    for (std::size_t len = 1; len <= band && pos + len < n; ++len) {
      const double rest = tail[m - 1][pos + len];
      if (rest == kInf) continue;
      const double total = seg_cost[pos * band + len - 1] + rest;
      if (total < best) {
        best = total;
        best_end = pos + len;
      }
    }
    result.boundaries.change_points.push_back(best_end);
    pos = best_end;
  }
  result.cost = tail[chosen][0];
  result.objective = best_objective;
  return result;
}

SegmentBoundaries kts_segment(const FeatureMatrix& features, const KtsOptions& options) {
  return kts_solve(features, options).boundaries;
}

KtsResult brute_force_segment(const FeatureMatrix& features, const KtsOptions& options) {
  check_problem(features, options);
  const std::size_t n = features.rows;
  if (n > kBruteForceMaxShots) {
    throw InvalidArgument("brute_force_segment: " + std::to_string(n) + " shots exceeds the exhaustive limit of " +
                          std::to_string(kBruteForceMaxShots));
  }
  bool found = false;
  KtsResult best;
  // Bit k of the mask places a change point at shot k + 1.
  const std::size_t masks = std::size_t{1} << (n - 1);
  for (std::size_t mask = 0; mask < masks; ++mask) {
    SegmentBoundaries b{{}, n};
    for (std::size_t k = 0; k + 1 < n; ++k)
      if (mask & (std::size_t{1} << k)) b.change_points.push_back(k + 1);
    if (b.segment_count() > options.max_segments) continue;
    bool fits = true;
    for (auto len : b.lengths()) fits = fits && len <= options.max_segment_len;
    if (!fits) continue;

    const double c = segmentation_cost(features, b);
    const double obj = c + kts_penalty(n, b.segment_count(), options.penalty);
    bool better = !found || obj < best.objective;
    if (found && obj == best.objective) {
      const auto& cur = best.boundaries.change_points;
      better = b.change_points.size() < cur.size() ||
               (b.change_points.size() == cur.size() && b.change_points < cur);
    }
    if (better) {
      found = true;
      best = {std::move(b), c, obj};
    }
  }
  return best;
}

}  // namespace chan
