#include "chan/app/run_config.hpp"

#include <algorithm>

#include "chan/error.hpp"

namespace chan {

RunConfig RunConfig::resolved() const {
  RunConfig r = *this;
  r.model.seed = seed;
  r.train.seed = seed + 1;
  r.train.selection = selection;
  return r;
}

void to_json(nlohmann::json& j, const KtsOptions& o) {
  j = {{"max_segments", o.max_segments}, {"max_segment_len", o.max_segment_len}, {"penalty", o.penalty}};
}

void from_json(const nlohmann::json& j, KtsOptions& o) {
  KtsOptions d;
  o.max_segments = j.value("max_segments", d.max_segments);
  o.max_segment_len = j.value("max_segment_len", d.max_segment_len);
  o.penalty = j.value("penalty", d.penalty);
}

void to_json(nlohmann::json& j, const RunConfig& c) {
  nlohmann::json train = c.train;
  train.erase("selection");
  train.erase("seed");
  nlohmann::json model = c.model;
  model.erase("seed");
  j = {{"model", model},
       {"train", train},
       {"selection", c.selection},
       {"segmentation", c.segmentation},
       {"fold", c.fold},
       {"seed", c.seed},
       {"precision", c.precision == Precision::kFloat32 ? "float32" : "float64"},
       {"dataset", c.dataset},
       {"out_dir", c.out_dir}};
}

void from_json(const nlohmann::json& j, RunConfig& c) {
  static const char* kKeys[] = {"model", "train", "selection", "segmentation", "fold",
                                "seed",  "precision", "dataset", "out_dir"};
  for (const auto& [key, _] : j.items()) {
    if (std::find(std::begin(kKeys), std::end(kKeys), key) == std::end(kKeys)) {
      throw InvalidArgument("run config: unknown key '" + key + "'");
    }
  }
  RunConfig d;
  c.model = j.contains("model") ? j.at("model").get<ChanConfig>() : d.model;
  c.train = j.contains("train") ? j.at("train").get<TrainOptions>() : d.train;
  c.selection = j.contains("selection") ? j.at("selection").get<SelectionPolicy>() : d.selection;
  c.segmentation = j.contains("segmentation") ? j.at("segmentation").get<KtsOptions>() : d.segmentation;
  c.fold = j.value("fold", d.fold);
  c.seed = j.value("seed", d.seed);
  const auto precision = j.value("precision", std::string("float32"));
  if (precision == "float32") {
    c.precision = Precision::kFloat32;
  } else if (precision == "float64") {
    c.precision = Precision::kFloat64;
  } else {
    throw InvalidArgument("run config: precision must be float32 or float64");
  }
  c.dataset = j.value("dataset", d.dataset);
  c.out_dir = j.value("out_dir", d.out_dir);
}

nlohmann::json merge_json(nlohmann::json base, const nlohmann::json& patch) {
  if (!base.is_object() || !patch.is_object()) return patch;
  for (const auto& [key, value] : patch.items()) {
    base[key] = base.contains(key) ? merge_json(base[key], value) : value;
  }
  return base;
}

}  // namespace chan
