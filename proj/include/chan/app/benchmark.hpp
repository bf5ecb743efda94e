#pragma once

#include "chan/app/run_config.hpp"
#include "chan/data/synth.hpp"

namespace chan {

// The desk-scale synthetic benchmark: 4 videos x 300 shots, 20 concepts,
// 20 queries, signal/noise 4. Fold 0 tests on video_0.
SynthConfig benchmark_synth_config();

// Small CHAN sized for the benchmark data. Training departs from the
// full-size schedule (batch 1, lr 3e-3, no decay): with two training videos
// the full-size schedule takes 8 small steps per epoch and barely moves.
// Summaries keep shots scoring >= 0.3; a shot carrying one of the two query
// concepts has a Bayes-optimal score of 0.5, which a 0.5 cut would drop half
// the time.
RunConfig benchmark_run_config();

}  // namespace chan
