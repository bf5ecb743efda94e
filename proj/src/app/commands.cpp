#include "chan/app/commands.hpp"

#include <fstream>

#include <spdlog/spdlog.h>

#include "chan/app/experiment.hpp"
#include "chan/app/gradcheck_suite.hpp"
#include "chan/data/feature_file.hpp"
#include "chan/error.hpp"
#include "chan/model/checkpoint.hpp"

namespace chan {

namespace fs = std::filesystem;

namespace {

void write_json_file(const fs::path& path, const nlohmann::json& doc) {
  std::ofstream out(path);
  if (!out) throw FormatError(FormatError::Kind::kIo, "cannot write " + path.string());
  out << doc.dump(2) << '\n';
}

nlohmann::json prf_json(const Prf& p) { return {{"precision", p.precision}, {"recall", p.recall}, {"f1", p.f1}}; }

template <typename T>
nlohmann::json summarize_typed(const Checkpoint<float>& ck, const Dataset& ds, const SummarizeRequest& req,
                               const SelectionPolicy& policy, const KtsOptions& kts) {
  ChanModel<T> model(ck.config, ck.params.template cast<T>(ck.config));
  std::vector<Query> queries = ds.queries;
  if (req.query) queries = {parse_query(ds.vocabulary, *req.query)};
  std::vector<ShotSummary> out;
  for (const auto& video : ds.videos) {
    if (req.video && video.id != *req.video) continue;
    const auto boundaries = kts_segment(video.features, kts);
    for (const auto& q : queries) {
      auto r = summarize(model, video, boundaries, ds.vocabulary, q, policy);
      out.push_back({video.id, q, std::move(r.selected), std::move(r.scores)});
    }
  }
  if (req.video && out.empty()) throw InvalidArgument("summarize: unknown video '" + *req.video + "'");
  nlohmann::json list = nlohmann::json::array();
  for (const auto& s : out) {
    list.push_back({{"video", s.video},
                    {"query", {ds.vocabulary.name(s.query.first), ds.vocabulary.name(s.query.second)}},
                    {"shots", s.shots},
                    {"scores", s.scores}});
  }
  return {{"version", kDatasetFormatVersion}, {"summaries", list}};
}

}  // namespace

void to_json(nlohmann::json& j, const SynthConfig& c) {
  j = {{"n_videos", c.n_videos},
       {"shots_per_video", c.shots_per_video},
       {"n_concepts", c.n_concepts},
       {"n_queries", c.n_queries},
       {"feature_dim", c.feature_dim},
       {"embed_dim", c.embed_dim},
       {"signal_strength", c.signal_strength},
       {"noise_level", c.noise_level},
       {"max_concepts_per_shot", c.max_concepts_per_shot},
       {"concepts_per_shot", c.concepts_per_shot},
       {"mean_run_length", c.mean_run_length},
       {"reference_fraction", c.reference_fraction},
       {"seed", c.seed}};
}

void from_json(const nlohmann::json& j, SynthConfig& c) {
  SynthConfig d;
  c.n_videos = j.value("n_videos", d.n_videos);
  c.shots_per_video = j.value("shots_per_video", d.shots_per_video);
  c.n_concepts = j.value("n_concepts", d.n_concepts);
  c.n_queries = j.value("n_queries", d.n_queries);
  c.feature_dim = j.value("feature_dim", d.feature_dim);
  c.embed_dim = j.value("embed_dim", d.embed_dim);
  c.signal_strength = j.value("signal_strength", d.signal_strength);
  c.noise_level = j.value("noise_level", d.noise_level);
  c.max_concepts_per_shot = j.value("max_concepts_per_shot", d.max_concepts_per_shot);
  c.concepts_per_shot = j.value("concepts_per_shot", d.concepts_per_shot);
  c.mean_run_length = j.value("mean_run_length", d.mean_run_length);
  c.reference_fraction = j.value("reference_fraction", d.reference_fraction);
  c.seed = j.value("seed", d.seed);
}

nlohmann::json to_json(const MetricsTable& table) {
  nlohmann::json videos = nlohmann::json::array();
  for (const auto& v : table.videos) {
    auto row = prf_json(v.mean);
    row["video"] = v.video;
    row["queries"] = v.queries;
    videos.push_back(row);
  }
  return {{"videos", videos}, {"average", prf_json(table.average)}, {"table", table.to_text()}};
}

Query parse_query(const ConceptVocabulary& vocab, const std::string& label) {
  const auto plus = label.find('+');
  if (plus == std::string::npos) throw InvalidArgument("query must look like 'concept+concept', got '" + label + "'");
  return {vocab.id(label.substr(0, plus)), vocab.id(label.substr(plus + 1))};
}

nlohmann::json cmd_gen_data(const SynthConfig& config, const fs::path& out_dir) {
  const auto ds = synth_generate(config);
  save_dataset(out_dir, ds);
  write_json_file(out_dir / "synth_config.json", config);
  std::size_t shots = 0;
  for (const auto& v : ds.videos) shots += v.features.rows;
  spdlog::info("wrote {} videos ({} shots) to {}", ds.videos.size(), shots, out_dir.string());
  return {{"dataset", out_dir.string()},
          {"videos", ds.videos.size()},
          {"shots", shots},
          {"concepts", ds.vocabulary.size()},
          {"queries", ds.queries.size()},
          {"config", config}};
}

nlohmann::json cmd_segment(const fs::path& features, const KtsOptions& options) {
  const auto x = load_features(features);
  const auto r = kts_solve(x, options);
  nlohmann::json segments = nlohmann::json::array();
  for (auto [b, e] : r.boundaries.segments()) segments.push_back({b, e});
  return {{"n_shots", r.boundaries.n_shots},
          {"change_points", r.boundaries.change_points},
          {"segments", segments},
          {"cost", r.cost},
          {"objective", r.objective},
          {"options", options}};
}

nlohmann::json cmd_train(const RunConfig& config) {
  if (config.dataset.empty()) throw InvalidArgument("train: no dataset given");
  if (config.out_dir.empty()) throw InvalidArgument("train: no output directory given");
  const fs::path out_dir = config.out_dir;
  fs::create_directories(out_dir);
  const auto ds = load_dataset(config.dataset);

  std::ofstream log(out_dir / "train_log.jsonl");
  if (!log) throw FormatError(FormatError::Kind::kIo, "cannot write training log");
  auto result = run_experiment(config, ds, [&](const StepRecord& s) {
    log << nlohmann::json{{"epoch", s.epoch}, {"step", s.step}, {"loss", s.loss}, {"lr", s.lr}}.dump() << '\n';
  });
  log.close();

  const nlohmann::json run = result.config;
  write_json_file(out_dir / "run_config.json", run);
  save_checkpoint(out_dir / "model.json", result.config.model, result.params, result.config.seed, run);
  save_summaries(out_dir / "test_summaries.json", result.test_summaries, ds.vocabulary);

  nlohmann::json epochs = nlohmann::json::array();
  for (const auto& e : result.training.epochs) {
    nlohmann::json row = {{"epoch", e.epoch}, {"mean_loss", e.mean_loss}, {"lr", e.lr}};
    if (e.val_f1) row["val_f1"] = *e.val_f1;
    epochs.push_back(row);
  }
  nlohmann::json doc = {{"checkpoint", (out_dir / "model.json").string()},
                        {"log", (out_dir / "train_log.jsonl").string()},
                        {"split",
                         {{"train", nlohmann::json::array()},
                          {"val", ds.videos[result.split.val].id},
                          {"test", ds.videos[result.split.test].id}}},
                        {"best_epoch", result.training.best_epoch},
                        {"epochs", epochs},
                        {"test", to_json(result.test)}};
  for (auto v : result.split.train) doc["split"]["train"].push_back(ds.videos[v].id);
  if (result.training.best_val_f1) doc["best_val_f1"] = *result.training.best_val_f1;
  write_json_file(out_dir / "metrics.json", doc);
  return doc;
}

nlohmann::json cmd_summarize(const SummarizeRequest& request) {
  const auto ck = load_checkpoint<float>(request.checkpoint);
  const auto ds = load_dataset(request.dataset);
  RunConfig run;
  if (!ck.run.empty()) run = ck.run.get<RunConfig>();
  const auto policy = request.selection.value_or(run.selection);
  const auto kts = request.segmentation.value_or(run.segmentation);
  return run.precision == Precision::kFloat64 ? summarize_typed<double>(ck, ds, request, policy, kts)
                                              : summarize_typed<float>(ck, ds, request, policy, kts);
}

nlohmann::json cmd_evaluate(const fs::path& summaries, const fs::path& dataset, const std::optional<fs::path>& references) {
  auto ds = load_dataset(dataset);
  if (references) ds.references = load_summaries(*references, ds.vocabulary);
  const auto candidates = load_summaries(summaries, ds.vocabulary);
  return to_json(evaluate_dataset(match_cases(ds, candidates)));
}

nlohmann::json cmd_gradcheck(std::uint64_t seed) { return to_json(run_gradcheck_suite(seed)); }

}  // namespace chan
