#include "chan/eval/metrics.hpp"

#include <algorithm>
#include <iterator>
#include <map>

#include <fmt/format.h>

#include "chan/error.hpp"

namespace chan {

double concept_iou(const ConceptSet& a, const ConceptSet& b) {
  if (a.empty() && b.empty()) return 0.0;
  std::size_t common = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      ++common;
      ++ia;
      ++ib;
    }
  }
  const std::size_t unite = a.size() + b.size() - common;
  return static_cast<double>(common) / static_cast<double>(unite);
}

double f1_score(double precision, double recall) {
  return precision + recall > 0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
}

MatchReport evaluate_summary(std::span<const std::size_t> candidate, std::span<const std::size_t> reference,
                             std::span<const ConceptSet> annotations) {
  for (auto idx : candidate)
    if (idx >= annotations.size()) throw InvalidArgument("evaluate_summary: candidate shot " + std::to_string(idx) + " out of range");
  for (auto idx : reference)
    if (idx >= annotations.size()) throw InvalidArgument("evaluate_summary: reference shot " + std::to_string(idx) + " out of range");

  WeightMatrix w(candidate.size(), reference.size());
  for (std::size_t i = 0; i < candidate.size(); ++i)
    for (std::size_t j = 0; j < reference.size(); ++j) w(i, j) = concept_iou(annotations[candidate[i]], annotations[reference[j]]);

  MatchReport report;
  for (const auto& p : max_weight_matching(w)) {
    report.matched_pairs.push_back({candidate[p.row], reference[p.col], p.weight});
  }
  const double matched = static_cast<double>(report.matched_pairs.size());
  report.precision = candidate.empty() ? 0.0 : matched / static_cast<double>(candidate.size());
  report.recall = reference.empty() ? 0.0 : matched / static_cast<double>(reference.size());
  report.f1 = f1_score(report.precision, report.recall);
  return report;
}

MetricsTable evaluate_dataset(std::span<const SummaryCase> cases) {
  MetricsTable table;
  std::map<std::string, std::size_t> slot;
  std::vector<Prf> sums;
  for (const auto& c : cases) {
    if (!c.annotations) throw InvalidArgument("evaluate_dataset: case for video '" + c.video + "' has no annotations");
    auto [it, inserted] = slot.emplace(c.video, table.videos.size());
    if (inserted) {
      table.videos.push_back({c.video, 0, {}});
      sums.push_back({});
    }
    const auto report = evaluate_summary(c.candidate, c.reference, *c.annotations);
    auto& s = sums[it->second];
    s.precision += report.precision;
    s.recall += report.recall;
    s.f1 += report.f1;
    ++table.videos[it->second].queries;
  }
  for (std::size_t v = 0; v < table.videos.size(); ++v) {
    auto& row = table.videos[v];
    const double q = static_cast<double>(row.queries);
    row.mean = {sums[v].precision / q, sums[v].recall / q, sums[v].f1 / q};
    table.average.precision += row.mean.precision;
    table.average.recall += row.mean.recall;
    table.average.f1 += row.mean.f1;
  }
  if (!table.videos.empty()) {
    const double nv = static_cast<double>(table.videos.size());
    table.average.precision /= nv;
    table.average.recall /= nv;
    table.average.f1 /= nv;
  }
  return table;
}

std::string MetricsTable::to_text() const {
  std::size_t width = 4;
  for (const auto& v : videos) width = std::max(width, v.video.size());
  std::string out = fmt::format("{:<{}} | {:>6} {:>6} {:>6}\n", "", width, "Pre", "Rec", "F1");
  out += std::string(width, '-') + "-+-" + std::string(20, '-') + "\n";
  auto line = [&](const std::string& name, const Prf& m) {
    return fmt::format("{:<{}} | {:>6.2f} {:>6.2f} {:>6.2f}\n", name, width, 100 * m.precision, 100 * m.recall, 100 * m.f1);
  };
  for (const auto& v : videos) out += line(v.video, v.mean);
  out += std::string(width, '-') + "-+-" + std::string(20, '-') + "\n";
  out += line("Avg.", average);
  return out;
}

}  // namespace chan
