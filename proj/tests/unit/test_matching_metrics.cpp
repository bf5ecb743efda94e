#include <algorithm>
#include <numeric>
#include <set>

#include "chan/error.hpp"
#include "chan/eval/matching.hpp"
#include "chan/eval/metrics.hpp"
#include "doctest.h"
#include "support/gen.hpp"

using namespace chan;
using chan::testing::Gen;

namespace {

WeightMatrix matrix(std::size_t r, std::size_t c, std::vector<double> v) {
  WeightMatrix w(r, c);
  w.values = std::move(v);
  return w;
}

// Best total over every injective assignment of the smaller side.
double permutation_optimum(const WeightMatrix& w) {
  const std::size_t n = std::max(w.rows, w.cols);
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  double best = 0;
  do {
    double total = 0;
    for (std::size_t r = 0; r < w.rows; ++r)
      if (perm[r] < w.cols) total += w(r, perm[r]);
    best = std::max(best, total);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

void check_valid_matching(const WeightMatrix& w, const std::vector<MatchedPair>& pairs) {
  std::set<std::size_t> rows, cols;
  for (const auto& p : pairs) {
    CHECK(rows.insert(p.row).second);
    CHECK(cols.insert(p.col).second);
    CHECK(p.weight == w(p.row, p.col));
    CHECK(p.weight > 0);
  }
}

std::vector<ConceptSet> random_annotations(Gen& g, std::size_t n, int concepts) {
  std::vector<ConceptSet> ann(n);
  for (auto& a : ann)
    for (int c = 0; c < concepts; ++c)
      if (g.coin(0.3)) a.push_back(c);
  return ann;
}

}  // namespace

TEST_CASE("concept IoU") {
  CHECK(concept_iou({1, 4}, {1, 4}) == 1.0);
  CHECK(concept_iou({1, 2}, {3}) == 0.0);
  // {car, tree} vs {car, sky}
  const int car = 2, tree = 3, sky = 4;
  CHECK(concept_iou({car, tree}, {car, sky}) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(concept_iou({}, {}) == 0.0);
  CHECK(concept_iou({}, {1}) == 0.0);
}

TEST_CASE("matching hand examples") {
  const auto id = max_weight_matching(matrix(2, 2, {1, 0, 0, 1}));
  CHECK(id == std::vector<MatchedPair>{{0, 0, 1.0}, {1, 1, 1.0}});
  const auto cross = max_weight_matching(matrix(2, 2, {0.9, 0.8, 0.9, 0.1}));
  CHECK(cross == std::vector<MatchedPair>{{0, 1, 0.8}, {1, 0, 0.9}});
  CHECK(total_weight(cross) == doctest::Approx(1.7).epsilon(1e-15));
  CHECK(max_weight_matching(matrix(2, 3, std::vector<double>(6, 0.0))).empty());
}

TEST_CASE("ties resolve the same way every time") {
  const auto w = matrix(3, 3, std::vector<double>(9, 0.5));
  const auto first = max_weight_matching(w);
  CHECK(first.size() == 3);
  for (int i = 0; i < 5; ++i) CHECK(max_weight_matching(w) == first);
}

TEST_CASE("negative or non-finite weights are rejected") {
  CHECK_THROWS_AS((void)max_weight_matching(matrix(1, 2, {0.5, -0.1})), InvalidArgument);
  CHECK_THROWS_AS((void)max_weight_matching(matrix(1, 1, {std::nan("")})), InvalidArgument);
}

TEST_CASE("Hungarian optimum equals the permutation optimum up to 7x7") {
  Gen g(41);
  for (int trial = 0; trial < 200; ++trial) {
    const auto w = g.weights(g.size(1, 7), g.size(1, 7));
    const auto pairs = max_weight_matching(w);
    check_valid_matching(w, pairs);
    CHECK(total_weight(pairs) == permutation_optimum(w));
  }
}

TEST_CASE("matching total is invariant under row and column shuffles") {
  Gen g(42);
  for (int trial = 0; trial < 50; ++trial) {
    const auto w = g.weights(g.size(1, 6), g.size(1, 6));
    std::vector<std::size_t> rp(w.rows), cp(w.cols);
    std::iota(rp.begin(), rp.end(), std::size_t{0});
    std::iota(cp.begin(), cp.end(), std::size_t{0});
    std::shuffle(rp.begin(), rp.end(), g.engine());
    std::shuffle(cp.begin(), cp.end(), g.engine());
    WeightMatrix s(w.rows, w.cols);
    for (std::size_t i = 0; i < w.rows; ++i)
      for (std::size_t j = 0; j < w.cols; ++j) s(i, j) = w(rp[i], cp[j]);
    CHECK(total_weight(max_weight_matching(s)) == total_weight(max_weight_matching(w)));
  }
}

TEST_CASE("summary evaluation") {
  const std::vector<ConceptSet> ann{{0}, {0, 1}, {2}, {1}, {3}, {}};
  SUBCASE("self match is perfect") {
    const std::vector<std::size_t> s{0, 1, 2, 3};
    const auto r = evaluate_summary(s, s, ann);
    CHECK(r.precision == 1.0);
    CHECK(r.recall == 1.0);
    CHECK(r.f1 == 1.0);
  }
  SUBCASE("empty candidate scores zero") {
    const auto r = evaluate_summary({}, std::vector<std::size_t>{0, 1}, ann);
    CHECK(r.precision == 0.0);
    CHECK(r.recall == 0.0);
    CHECK(r.f1 == 0.0);
  }
  SUBCASE("three candidates against two references") {
    // Candidates {0}, {2}, {3}; references {0,1}, {1}. IoU rows: [1/2, 0], [0, 0], [1/2, 1].
    const std::vector<std::size_t> cand{0, 2, 3}, ref{1, 3};
    const auto r = evaluate_summary(cand, ref, ann);
    WeightMatrix w(3, 2);
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 2; ++j) w(i, j) = concept_iou(ann[cand[i]], ann[ref[j]]);
    CHECK(total_weight(max_weight_matching(w)) == permutation_optimum(w));
    CHECK(permutation_optimum(w) == 1.5);
    CHECK(r.matched_pairs.size() == 2);
    CHECK(r.precision == doctest::Approx(2.0 / 3.0));
    CHECK(r.recall == 1.0);
    CHECK(r.f1 == doctest::Approx(0.8));
  }
  SUBCASE("unannotated shots never match") {
    const auto r = evaluate_summary(std::vector<std::size_t>{5}, std::vector<std::size_t>{5}, ann);
    CHECK(r.f1 == 0.0);
  }
  CHECK_THROWS_AS((void)evaluate_summary(std::vector<std::size_t>{9}, {}, ann), InvalidArgument);
}

TEST_CASE("precision, recall and F1 stay in range") {
  Gen g(43);
  for (int trial = 0; trial < 100; ++trial) {
    const auto n = g.size(1, 25);
    const auto ann = random_annotations(g, n, 6);
    std::vector<std::size_t> cand, ref;
    for (std::size_t i = 0; i < n; ++i) {
      if (g.coin()) cand.push_back(i);
      if (g.coin()) ref.push_back(i);
    }
    const auto r = evaluate_summary(cand, ref, ann);
    CHECK(r.precision >= 0);
    CHECK(r.precision <= 1);
    CHECK(r.recall >= 0);
    CHECK(r.recall <= 1);
    CHECK(r.f1 <= std::max(r.precision, r.recall) + 1e-15);
    if (r.precision + r.recall > 0) CHECK(r.f1 == doctest::Approx(2 * r.precision * r.recall / (r.precision + r.recall)));
  }
}

TEST_CASE("dataset table averages queries per video, then videos") {
  Gen g(44);
  const auto a0 = random_annotations(g, 20, 5);
  const auto a1 = random_annotations(g, 15, 5);
  std::vector<SummaryCase> cases;
  std::vector<double> f1_v0, f1_v1;
  for (int q = 0; q < 4; ++q) {
    for (int v = 0; v < 2; ++v) {
      const auto& ann = v == 0 ? a0 : a1;
      SummaryCase c{v == 0 ? "video_a" : "video_b", "q" + std::to_string(q), {}, {}, &ann};
      for (std::size_t i = 0; i < ann.size(); ++i) {
        if (g.coin()) c.candidate.push_back(i);
        if (g.coin()) c.reference.push_back(i);
      }
      (v == 0 ? f1_v0 : f1_v1).push_back(evaluate_summary(c.candidate, c.reference, ann).f1);
      cases.push_back(std::move(c));
    }
  }
  const auto table = evaluate_dataset(cases);
  REQUIRE(table.videos.size() == 2);
  CHECK(table.videos[0].video == "video_a");
  CHECK(table.videos[0].queries == 4);
  const double m0 = std::accumulate(f1_v0.begin(), f1_v0.end(), 0.0) / 4;
  const double m1 = std::accumulate(f1_v1.begin(), f1_v1.end(), 0.0) / 4;
  CHECK(table.videos[0].mean.f1 == doctest::Approx(m0).epsilon(1e-14));
  CHECK(table.videos[1].mean.f1 == doctest::Approx(m1).epsilon(1e-14));
  CHECK(table.average.f1 == doctest::Approx((m0 + m1) / 2).epsilon(1e-14));

  SUBCASE("a single case reduces to the summary score") {
    const auto one = evaluate_dataset(std::span<const SummaryCase>(cases.data(), 1));
    CHECK(one.average.f1 == f1_v0[0]);
  }
  SUBCASE("text layout has Pre/Rec/F1 columns, one row per video and an Avg. row") {
    const auto text = table.to_text();
    CHECK(text.find("Pre") != std::string::npos);
    CHECK(text.find("Rec") != std::string::npos);
    CHECK(text.find("F1") != std::string::npos);
    CHECK(text.find("video_a") < text.find("video_b"));
    CHECK(text.find("video_b") < text.find("Avg."));
    CHECK(std::count(text.begin(), text.end(), '\n') == 6);
  }
}
