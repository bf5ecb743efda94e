#pragma once

#include <cstdint>
#include <vector>

#include "chan/tensor/gradcheck.hpp"
#include "json.hpp"

namespace chan {

// Finite-difference checks of every differentiable op on seeded random
// inputs, followed by the full model on a tiny two-segment video
// (input width 8, d_c 4, 2 segments x 6 shots), in 64-bit precision.
std::vector<GradcheckReport> run_gradcheck_suite(std::uint64_t seed = 7, const GradcheckOptions& options = {});

bool all_passed(const std::vector<GradcheckReport>& reports);

nlohmann::json to_json(const std::vector<GradcheckReport>& reports);

}  // namespace chan
