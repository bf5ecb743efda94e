#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "chan/app/run_config.hpp"
#include "chan/data/synth.hpp"
#include "json.hpp"

namespace chan {

void to_json(nlohmann::json& j, const SynthConfig& c);
void from_json(const nlohmann::json& j, SynthConfig& c);

// Each command returns the JSON document the CLI prints (or writes to --out).

nlohmann::json cmd_gen_data(const SynthConfig& config, const std::filesystem::path& out_dir);

nlohmann::json cmd_segment(const std::filesystem::path& features, const KtsOptions& options);

// Writes into config.out_dir:
//   run_config.json, model.json + model.bin, train_log.jsonl,
//   test_summaries.json, metrics.json
nlohmann::json cmd_train(const RunConfig& config);

struct SummarizeRequest {
  std::filesystem::path checkpoint;
  std::filesystem::path dataset;
  std::optional<std::string> video;  // all videos when empty
  std::optional<std::string> query;  // "a+b"; all dataset queries when empty
  std::optional<SelectionPolicy> selection;  // defaults to the checkpoint's run config
  std::optional<KtsOptions> segmentation;    // likewise
};

// Returns a summaries document (same schema as references.json).
nlohmann::json cmd_summarize(const SummarizeRequest& request);

// Scores a summaries file against the dataset's references (or an explicit
// references file) using the dataset's annotations.
nlohmann::json cmd_evaluate(const std::filesystem::path& summaries, const std::filesystem::path& dataset,
                            const std::optional<std::filesystem::path>& references = std::nullopt);

nlohmann::json cmd_gradcheck(std::uint64_t seed);

nlohmann::json to_json(const MetricsTable& table);

// Parses "a+b" against the vocabulary.
Query parse_query(const ConceptVocabulary& vocab, const std::string& label);

}  // namespace chan
