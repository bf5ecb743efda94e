#include "chan/tensor/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace chan {

GradcheckReport gradient_check(const std::function<Tensor<double>()>& loss_fn,
                               const std::vector<NamedTensor<double>>& params, const GradcheckOptions& options,
                               std::string label) {
  GradcheckReport report;
  report.label = std::move(label);
  report.tolerance = options.tolerance;

  for (const auto& p : params) p.tensor.node()->grad.clear();
  loss_fn().backward();

  std::mt19937_64 rng(options.seed);
  for (const auto& p : params) {
    GradcheckEntry entry;
    entry.name = p.name;
    const std::size_t n = p.tensor.size();
    std::vector<double> analytic(n, 0.0);
    if (p.tensor.has_grad()) std::copy(p.tensor.grad().begin(), p.tensor.grad().end(), analytic.begin());

    std::vector<std::size_t> coords(n);
    std::iota(coords.begin(), coords.end(), std::size_t{0});
    if (n > options.max_coords_per_param) {
      std::shuffle(coords.begin(), coords.end(), rng);
      coords.resize(options.max_coords_per_param);
      std::sort(coords.begin(), coords.end());
    }

    auto values = p.tensor.node()->data.data();
    NoGradGuard no_grad;
    for (auto c : coords) {
      const double original = values[c];
      values[c] = original + options.step;
      const double plus = loss_fn().item();
      values[c] = original - options.step;
      const double minus = loss_fn().item();
      values[c] = original;
      const double numeric = (plus - minus) / (2.0 * options.step);
      const double abs_err = std::abs(analytic[c] - numeric);
      const double rel_err = abs_err / std::max({std::abs(analytic[c]), std::abs(numeric), options.abs_floor});
      if (rel_err > entry.max_rel_error) {
        entry.max_rel_error = rel_err;
        entry.worst_coord = c;
      }
      entry.max_abs_error = std::max(entry.max_abs_error, abs_err);
      ++entry.coords_checked;
    }
    report.max_rel_error = std::max(report.max_rel_error, entry.max_rel_error);
    report.entries.push_back(std::move(entry));
  }
  report.passed = report.max_rel_error < options.tolerance;
  return report;
}

}  // namespace chan
