// chan: command-line front end for data generation, segmentation, training,
// summarisation, evaluation and gradient checking.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "chan/app/commands.hpp"
#include "chan/error.hpp"
#include "json.hpp"

namespace {

using nlohmann::json;

json read_config(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw chan::FormatError(chan::FormatError::Kind::kIo, "cannot read config " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw chan::FormatError(chan::FormatError::Kind::kSchema, path + ": " + e.what());
  }
}

void emit(const json& doc, const std::string& out) {
  if (out.empty()) {
    std::cout << doc.dump(2) << '\n';
    return;
  }
  std::ofstream file(out);
  if (!file) throw chan::FormatError(chan::FormatError::Kind::kIo, "cannot write " + out);
  file << doc.dump(2) << '\n';
}

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("chan");
  logger->set_pattern("[%H:%M:%S] [%^%l%$] %v");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::info);
  if (const char* env = std::getenv("CHAN_LOG_LEVEL")) {
    const std::string level = env;
    if (level == "error" || level == "warn" || level == "info" || level == "debug") {
      spdlog::set_level(spdlog::level::from_str(level));
    } else {
      spdlog::warn("ignoring CHAN_LOG_LEVEL='{}' (expected error, warn, info or debug)", level);
    }
  }
}

// Sets patch[path...] = value when the option was given on the command line.
template <typename V>
void override_if(json& patch, const CLI::Option* opt, std::initializer_list<const char*> path, const V& value) {
  if (opt->count() == 0) return;
  json* node = &patch;
  for (const char* key : path) node = &(*node)[key];
  *node = value;
}

int fail(int code, const std::string& kind, const std::string& message) {
  std::cerr << json{{"error", {{"kind", kind}, {"message", message}}}}.dump() << '\n';
  return code;
}

const char* format_kind(chan::FormatError::Kind k) {
  switch (k) {
    case chan::FormatError::Kind::kBadMagic: return "bad_magic";
    case chan::FormatError::Kind::kBadVersion: return "bad_version";
    case chan::FormatError::Kind::kTruncated: return "truncated";
    case chan::FormatError::Kind::kNonFinite: return "non_finite";
    case chan::FormatError::Kind::kSchema: return "schema";
    case chan::FormatError::Kind::kIo: return "io";
  }
  return "format";
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"Query-focused video summarisation with a convolutional hierarchical attention network"};
  app.require_subcommand(1);
  app.footer("Environment: CHAN_LOG_LEVEL=error|warn|info|debug (logs go to stderr).");

  std::string config_path, out;
  std::uint64_t seed = 0;

  // gen-data
  auto* gen = app.add_subcommand("gen-data", "Write a synthetic dataset directory");
  std::string data_dir;
  chan::SynthConfig synth;
  gen->add_option("--dir", data_dir, "Output dataset directory")->required();
  gen->add_option("--config", config_path, "JSON file with generator settings");
  gen->add_option("--out", out, "Write the JSON report here instead of stdout");
  auto* g_seed = gen->add_option("--seed", seed, "Random seed");
  auto* g_videos = gen->add_option("--videos", synth.n_videos, "Number of videos");
  auto* g_shots = gen->add_option("--shots", synth.shots_per_video, "Shots per video");
  auto* g_concepts = gen->add_option("--concepts", synth.n_concepts, "Vocabulary size");
  auto* g_queries = gen->add_option("--queries", synth.n_queries, "Number of queries");
  auto* g_fdim = gen->add_option("--feature-dim", synth.feature_dim, "Shot feature width");
  auto* g_edim = gen->add_option("--embed-dim", synth.embed_dim, "Concept embedding width");
  auto* g_signal = gen->add_option("--signal", synth.signal_strength, "Planted signal strength");
  auto* g_noise = gen->add_option("--noise", synth.noise_level, "Gaussian noise level");
  auto* g_ref = gen->add_option("--reference-fraction", synth.reference_fraction,
                                "Cap reference summaries at this fraction of the video");

  // segment
  auto* seg = app.add_subcommand("segment", "Kernel temporal segmentation of a feature file");
  std::string features_path;
  chan::KtsOptions kts;
  seg->add_option("features", features_path, "Feature file (CHF1)")->required()->check(CLI::ExistingFile);
  seg->add_option("--config", config_path, "JSON file with segmentation settings");
  seg->add_option("--out", out, "Write the JSON result here instead of stdout");
  auto* s_max = seg->add_option("--max-segments", kts.max_segments, "Maximum number of segments");
  auto* s_len = seg->add_option("--max-segment-len", kts.max_segment_len, "Maximum shots per segment");
  auto* s_pen = seg->add_option("--penalty", kts.penalty, "Weight of the segment-count penalty");

  // train
  auto* train = app.add_subcommand("train", "Train on one fold and evaluate on its test video");
  chan::RunConfig rc;
  std::vector<std::size_t> channels;
  std::string precision, labels;
  double threshold = 0.5;
  std::size_t top_k = 0;
  bool no_local = false, no_global = false;
  train->add_option("--config", config_path, "JSON run config; flags override it");
  train->add_option("--out", out, "Write the JSON report here instead of stdout");
  auto* t_data = train->add_option("--dataset", rc.dataset, "Dataset directory");
  auto* t_dir = train->add_option("--out-dir", rc.out_dir, "Directory for checkpoint, log and metrics");
  auto* t_fold = train->add_option("--fold", rc.fold, "Split fold");
  auto* t_seed = train->add_option("--seed", seed, "Master seed");
  auto* t_prec = train->add_option("--precision", precision, "float32 or float64")->check(CLI::IsMember({"float32", "float64"}));
  auto* t_epochs = train->add_option("--epochs", rc.train.epochs, "Training epochs");
  auto* t_lr = train->add_option("--lr", rc.train.adam.learning_rate, "Initial learning rate");
  auto* t_decay = train->add_option("--lr-decay", rc.train.adam.decay_factor, "Learning-rate factor per epoch");
  auto* t_batch = train->add_option("--batch-size", rc.train.batch_size, "(video, query) pairs per batch");
  auto* t_pat = train->add_option("--patience", rc.train.patience, "Early-stopping patience in epochs (0 = off)");
  auto* t_labels = train->add_option("--labels", labels, "query_fraction or any_concept")
                       ->check(CLI::IsMember({"query_fraction", "any_concept"}));
  auto* t_thr = train->add_option("--threshold", threshold, "Select shots scoring at least this");
  auto* t_topk = train->add_option("--top-k", top_k, "Select the k best shots instead of thresholding");
  auto* t_nol = train->add_flag("--no-local-attention", no_local, "Ablate local self-attention");
  auto* t_nog = train->add_flag("--no-global-attention", no_global, "Ablate query-aware global attention");
  auto* t_in = train->add_option("--input-dim", rc.model.input_dim, "Shot feature width");
  auto* t_ch = train->add_option("--conv-channels", channels, "Output width of each conv block");
  auto* t_dc = train->add_option("--attention-dim", rc.model.attention_dim, "Attention width d_c");
  auto* t_fu = train->add_option("--fusion-dim", rc.model.fusion_dim, "Fused visual-textual width");
  auto* t_mlp = train->add_option("--mlp-hidden", rc.model.mlp_hidden, "Hidden units of the scoring MLP");
  auto* t_emb = train->add_option("--embed-dim", rc.model.concept_embed_dim, "Concept embedding width");
  auto* t_kmax = train->add_option("--max-segments", rc.segmentation.max_segments, "KTS maximum segments");
  auto* t_klen = train->add_option("--max-segment-len", rc.segmentation.max_segment_len, "KTS maximum segment length");
  auto* t_kpen = train->add_option("--kts-penalty", rc.segmentation.penalty, "KTS penalty weight");

  // summarize
  auto* sum = app.add_subcommand("summarize", "Score shots and select summaries with a trained checkpoint");
  chan::SummarizeRequest sreq;
  std::string s_video, s_query;
  double s_threshold = 0.5;
  std::size_t s_topk = 0;
  sum->add_option("--checkpoint", sreq.checkpoint, "Checkpoint manifest (model.json)")->required()->check(CLI::ExistingFile);
  sum->add_option("--dataset", sreq.dataset, "Dataset directory")->required()->check(CLI::ExistingDirectory);
  sum->add_option("--video", s_video, "Only this video");
  sum->add_option("--query", s_query, "Only this query, written concept+concept");
  auto* u_thr = sum->add_option("--threshold", s_threshold, "Select shots scoring at least this");
  auto* u_topk = sum->add_option("--top-k", s_topk, "Select the k best shots");
  sum->add_option("--out", out, "Write the summaries here instead of stdout");

  // evaluate
  auto* eval = app.add_subcommand("evaluate", "Semantic P/R/F1 of summaries against references");
  std::string e_summaries, e_dataset, e_refs;
  bool e_text = false;
  eval->add_option("summaries", e_summaries, "Summaries JSON")->required()->check(CLI::ExistingFile);
  eval->add_option("--dataset", e_dataset, "Dataset directory (annotations, references)")
      ->required()
      ->check(CLI::ExistingDirectory);
  eval->add_option("--references", e_refs, "Reference summaries overriding the dataset's")->check(CLI::ExistingFile);
  eval->add_flag("--text", e_text, "Also print the aligned table to stderr");
  eval->add_option("--out", out, "Write the JSON metrics here instead of stdout");

  // gradcheck
  auto* grad = app.add_subcommand("gradcheck", "Finite-difference check of every op and the full model");
  auto* gc_seed = grad->add_option("--seed", seed, "Random seed");
  grad->add_option("--out", out, "Write the JSON report here instead of stdout");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      json patch;
      override_if(patch, g_seed, {"seed"}, seed);
      override_if(patch, g_videos, {"n_videos"}, synth.n_videos);
      override_if(patch, g_shots, {"shots_per_video"}, synth.shots_per_video);
      override_if(patch, g_concepts, {"n_concepts"}, synth.n_concepts);
      override_if(patch, g_queries, {"n_queries"}, synth.n_queries);
      override_if(patch, g_fdim, {"feature_dim"}, synth.feature_dim);
      override_if(patch, g_edim, {"embed_dim"}, synth.embed_dim);
      override_if(patch, g_signal, {"signal_strength"}, synth.signal_strength);
      override_if(patch, g_noise, {"noise_level"}, synth.noise_level);
      override_if(patch, g_ref, {"reference_fraction"}, synth.reference_fraction);
      const auto config = chan::merge_json(read_config(config_path), patch).get<chan::SynthConfig>();
      emit(chan::cmd_gen_data(config, data_dir), out);
    } else if (seg->parsed()) {
      json patch;
      override_if(patch, s_max, {"max_segments"}, kts.max_segments);
      override_if(patch, s_len, {"max_segment_len"}, kts.max_segment_len);
      override_if(patch, s_pen, {"penalty"}, kts.penalty);
      const auto options = chan::merge_json(read_config(config_path), patch).get<chan::KtsOptions>();
      emit(chan::cmd_segment(features_path, options), out);
    } else if (train->parsed()) {
      json patch;
      override_if(patch, t_data, {"dataset"}, rc.dataset);
      override_if(patch, t_dir, {"out_dir"}, rc.out_dir);
      override_if(patch, t_fold, {"fold"}, rc.fold);
      override_if(patch, t_seed, {"seed"}, seed);
      override_if(patch, t_prec, {"precision"}, precision);
      override_if(patch, t_epochs, {"train", "epochs"}, rc.train.epochs);
      override_if(patch, t_lr, {"train", "learning_rate"}, rc.train.adam.learning_rate);
      override_if(patch, t_decay, {"train", "decay_factor"}, rc.train.adam.decay_factor);
      override_if(patch, t_batch, {"train", "batch_size"}, rc.train.batch_size);
      override_if(patch, t_pat, {"train", "patience"}, rc.train.patience);
      override_if(patch, t_labels, {"train", "labels"}, labels);
      if (t_topk->count()) {
        patch["selection"] = chan::SelectionPolicy::top_k(top_k);
      } else if (t_thr->count()) {
        patch["selection"] = chan::SelectionPolicy::at_threshold(threshold);
      }
      override_if(patch, t_nol, {"model", "disable_local_attention"}, no_local);
      override_if(patch, t_nog, {"model", "disable_global_attention"}, no_global);
      override_if(patch, t_in, {"model", "input_dim"}, rc.model.input_dim);
      override_if(patch, t_ch, {"model", "conv_channels"}, channels);
      override_if(patch, t_dc, {"model", "attention_dim"}, rc.model.attention_dim);
      override_if(patch, t_fu, {"model", "fusion_dim"}, rc.model.fusion_dim);
      override_if(patch, t_mlp, {"model", "mlp_hidden"}, rc.model.mlp_hidden);
      override_if(patch, t_emb, {"model", "concept_embed_dim"}, rc.model.concept_embed_dim);
      override_if(patch, t_kmax, {"segmentation", "max_segments"}, rc.segmentation.max_segments);
      override_if(patch, t_klen, {"segmentation", "max_segment_len"}, rc.segmentation.max_segment_len);
      override_if(patch, t_kpen, {"segmentation", "penalty"}, rc.segmentation.penalty);
      const auto config = chan::merge_json(read_config(config_path), patch).get<chan::RunConfig>();
      emit(chan::cmd_train(config), out);
    } else if (sum->parsed()) {
      if (!s_video.empty()) sreq.video = s_video;
      if (!s_query.empty()) sreq.query = s_query;
      if (u_topk->count()) {
        sreq.selection = chan::SelectionPolicy::top_k(s_topk);
      } else if (u_thr->count()) {
        sreq.selection = chan::SelectionPolicy::at_threshold(s_threshold);
      }
      emit(chan::cmd_summarize(sreq), out);
    } else if (eval->parsed()) {
      std::optional<std::filesystem::path> refs;
      if (!e_refs.empty()) refs = e_refs;
      const auto doc = chan::cmd_evaluate(e_summaries, e_dataset, refs);
      if (e_text) std::cerr << doc.at("table").get<std::string>();
      emit(doc, out);
    } else if (grad->parsed()) {
      const auto report = chan::cmd_gradcheck(gc_seed->count() ? seed : 7);
      emit(report, out);
      if (!report.at("passed").get<bool>()) return 1;
    }
  } catch (const chan::FormatError& e) {
    return fail(3, format_kind(e.kind()), e.what());
  } catch (const chan::ShapeError& e) {
    return fail(3, "shape", e.what());
  } catch (const chan::InvalidArgument& e) {
    return fail(3, "invalid_argument", e.what());
  } catch (const json::exception& e) {
    return fail(3, "config", e.what());
  } catch (const std::exception& e) {
    return fail(1, "internal", e.what());
  }
  return 0;
}
