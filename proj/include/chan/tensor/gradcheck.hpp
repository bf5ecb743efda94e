#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "chan/tensor/adam.hpp"
#include "chan/tensor/tensor.hpp"

namespace chan {

struct GradcheckOptions {
  double tolerance = 1e-4;
  double step = 1e-5;
  // Relative error is |analytic - numeric| / max(|analytic|, |numeric|, abs_floor),
  // so coordinates whose true gradient is ~0 are judged on absolute error.
  double abs_floor = 1e-6;
  // Larger tensors are checked on a seeded random subset of coordinates.
  std::size_t max_coords_per_param = 48;
  std::uint64_t seed = 7;
};

struct GradcheckEntry {
  std::string name;
  std::size_t coords_checked = 0;
  double max_rel_error = 0;
  double max_abs_error = 0;
  std::size_t worst_coord = 0;
};

struct GradcheckReport {
  std::string label;
  std::vector<GradcheckEntry> entries;
  double max_rel_error = 0;
  double tolerance = 0;
  bool passed = false;
};

// Central-difference check of every parameter of a scalar loss closure.
// Failures are reported, never thrown. 64-bit only: single precision cannot
// resolve a 1e-5 step.
GradcheckReport gradient_check(const std::function<Tensor<double>()>& loss_fn,
                               const std::vector<NamedTensor<double>>& params, const GradcheckOptions& options = {},
                               std::string label = {});

}  // namespace chan
