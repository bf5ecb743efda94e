#include <unistd.h>

#include <filesystem>
#include <fstream>

#include "chan/app/commands.hpp"
#include "chan/app/run_config.hpp"
#include "chan/error.hpp"
#include "doctest.h"
#include "support/gen.hpp"

using namespace chan;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("chan_app_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

nlohmann::json read_json(const fs::path& p) {
  std::ifstream in(p);
  return nlohmann::json::parse(in);
}

SynthConfig tiny_synth() {
  SynthConfig c;
  c.n_videos = 4;
  c.shots_per_video = 30;
  c.n_concepts = 5;
  c.n_queries = 3;
  c.feature_dim = 8;
  c.embed_dim = 3;
  c.seed = 12;
  return c;
}

}  // namespace

TEST_CASE("run config round-trips through JSON") {
  RunConfig c;
  c.model = chan::testing::tiny_config();
  c.model.disable_local_attention = true;
  c.train.epochs = 4;
  c.train.adam.learning_rate = 0.002;
  c.selection = SelectionPolicy::top_k(3);
  c.segmentation.max_segments = 9;
  c.fold = 2;
  c.seed = 77;
  c.precision = Precision::kFloat64;
  c.dataset = "data";
  c.out_dir = "runs/a";
  const nlohmann::json j = c;
  const auto back = j.get<RunConfig>();
  CHECK(nlohmann::json(back) == j);
  CHECK(back.model.disable_local_attention);
  CHECK(back.precision == Precision::kFloat64);
  CHECK(back.segmentation.max_segments == 9);

  const auto r = back.resolved();
  CHECK(r.model.seed == 77);
  CHECK(r.train.seed == 78);
  CHECK(r.train.selection.kind == SelectionPolicy::Kind::kTopK);
}

TEST_CASE("run config rejects unknown keys and bad precision") {
  const nlohmann::json unknown = {{"epochs", 3}}, half = {{"precision", "half"}};
  CHECK_THROWS_AS((void)unknown.get<RunConfig>(), InvalidArgument);
  CHECK_THROWS_AS((void)half.get<RunConfig>(), InvalidArgument);
  CHECK_NOTHROW((void)nlohmann::json::object().get<RunConfig>());
}

TEST_CASE("merge_json merges objects and replaces leaves") {
  const nlohmann::json base = {{"train", {{"epochs", 30}, {"batch_size", 5}}}, {"seed", 1}};
  const nlohmann::json patch = {{"train", {{"epochs", 2}}}, {"fold", 3}};
  const auto m = merge_json(base, patch);
  CHECK(m["train"]["epochs"] == 2);
  CHECK(m["train"]["batch_size"] == 5);
  CHECK(m["seed"] == 1);
  CHECK(m["fold"] == 3);
  CHECK(merge_json(base, 5) == 5);
}

TEST_CASE("synth config JSON round trip") {
  const auto c = tiny_synth();
  const nlohmann::json j = c;
  CHECK(nlohmann::json(j.get<SynthConfig>()) == j);
}

TEST_CASE("gen-data, train, summarize and evaluate chain together") {
  TempDir dir("pipeline");
  const auto data = dir.path / "data";
  const auto gen = cmd_gen_data(tiny_synth(), data);
  CHECK(fs::exists(data / "synth_config.json"));
  CHECK(gen.is_object());

  const auto seg = cmd_segment(data / "video_0.chf", KtsOptions{});
  CHECK(seg["n_shots"] == 30);

  RunConfig rc;
  rc.model = chan::testing::tiny_config(8, 3, 5);
  rc.train.epochs = 2;
  rc.fold = 1;
  rc.seed = 5;
  rc.dataset = data.string();
  rc.out_dir = (dir.path / "run").string();
  const auto report = cmd_train(rc);
  for (const char* f : {"run_config.json", "model.json", "train_log.jsonl", "test_summaries.json", "metrics.json"})
    CHECK(fs::exists(dir.path / "run" / f));
  CHECK(report["epochs"].size() == 2);
  CHECK(report["split"]["test"] == "video_1");
  CHECK(report["split"]["val"] == "video_2");
  CHECK(read_json(dir.path / "run" / "metrics.json") == report);

  // The saved run config reproduces the run.
  const auto saved = read_json(dir.path / "run" / "run_config.json").get<RunConfig>();
  CHECK(saved.seed == 5);
  CHECK(saved.train.epochs == 2);

  SummarizeRequest req;
  req.checkpoint = dir.path / "run" / "model.json";
  req.dataset = data;
  req.video = "video_1";
  const auto summaries = cmd_summarize(req);
  REQUIRE(summaries["summaries"].size() == 3);
  for (const auto& s : summaries["summaries"]) CHECK(s["video"] == "video_1");
  {
    std::ofstream out(dir.path / "summaries.json");
    out << summaries.dump();
  }
  const auto metrics = cmd_evaluate(dir.path / "summaries.json", data);
  REQUIRE(metrics["videos"].size() == 1);
  // Same checkpoint, same selection: matches the test metrics written by train.
  CHECK(metrics["average"]["f1"].get<double>() == doctest::Approx(report["test"]["average"]["f1"].get<double>()).epsilon(1e-9));

  SUBCASE("a query outside the vocabulary is rejected") {
    req.query = "unicorn+car";
    CHECK_THROWS_AS((void)cmd_summarize(req), InvalidArgument);
  }
  SUBCASE("a malformed query label is rejected") {
    req.query = "nonsense";
    CHECK_THROWS_AS((void)cmd_summarize(req), InvalidArgument);
  }
}

TEST_CASE("train refuses to run without a dataset or output directory") {
  RunConfig rc;
  CHECK_THROWS_AS((void)cmd_train(rc), InvalidArgument);
  rc.dataset = "somewhere";
  CHECK_THROWS_AS((void)cmd_train(rc), InvalidArgument);
}

TEST_CASE("gradcheck command reports every check as passed") {
  const auto doc = cmd_gradcheck(3);
  CHECK(doc["passed"] == true);
  CHECK(doc["checks"].size() > 10);
}
