#pragma once

#include <cstdint>
#include <string>

#include "chan/model/config.hpp"
#include "chan/model/summarize.hpp"
#include "chan/model/trainer.hpp"
#include "chan/segmentation/kts.hpp"
#include "json.hpp"

namespace chan {

enum class Precision { kFloat32, kFloat64 };

// Everything a training run depends on. Saved next to every artifact it
// produces, so the run can be repeated from the saved copy alone.
struct RunConfig {
  ChanConfig model;  // includes the two ablation switches
  TrainOptions train;
  SelectionPolicy selection;  // summary selection, also used for validation
  KtsOptions segmentation;
  std::size_t fold = 0;
  // Master seed: the model initialisation uses seed, batch shuffling seed + 1.
  std::uint64_t seed = 0;
  Precision precision = Precision::kFloat32;
  std::string dataset;
  std::string out_dir;

  // Copies seed and selection into the nested model and training options.
  RunConfig resolved() const;
};

void to_json(nlohmann::json& j, const RunConfig& c);
void from_json(const nlohmann::json& j, RunConfig& c);
void to_json(nlohmann::json& j, const KtsOptions& o);
void from_json(const nlohmann::json& j, KtsOptions& o);

// Merges patch into base recursively (objects merge, other values replace).
nlohmann::json merge_json(nlohmann::json base, const nlohmann::json& patch);

}  // namespace chan
