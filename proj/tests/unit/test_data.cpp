#include <Eigen/Dense>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <set>

#include "chan/app/benchmark.hpp"
#include "chan/data/dataset.hpp"
#include "chan/data/feature_file.hpp"
#include "chan/data/synth.hpp"
#include "chan/error.hpp"
#include "doctest.h"
#include "support/gen.hpp"

using namespace chan;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("chan_test_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

void put_u32(std::vector<std::uint8_t>& b, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) b.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_f32(std::vector<std::uint8_t>& b, float f) {
  std::uint32_t u;
  std::memcpy(&u, &f, 4);
  put_u32(b, u);
}

FormatError::Kind decode_error(const std::vector<std::uint8_t>& bytes) {
  try {
    (void)decode_features(bytes);
  } catch (const FormatError& e) {
    return e.kind();
  }
  FAIL("decode accepted malformed bytes");
  return FormatError::Kind::kIo;
}

double auc(const std::vector<double>& score, const std::vector<bool>& positive) {
  double hits = 0, pos = 0, neg = 0;
  for (std::size_t i = 0; i < score.size(); ++i) {
    if (!positive[i]) continue;
    for (std::size_t j = 0; j < score.size(); ++j) {
      if (positive[j]) continue;
      hits += score[i] > score[j] ? 1.0 : score[i] == score[j] ? 0.5 : 0.0;
    }
  }
  for (bool p : positive) (p ? pos : neg) += 1;
  return hits / (pos * neg);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

SynthConfig small_synth() {
  SynthConfig c;
  c.n_videos = 3;
  c.shots_per_video = 40;
  c.n_concepts = 6;
  c.n_queries = 5;
  c.feature_dim = 8;
  c.embed_dim = 4;
  c.seed = 5;
  return c;
}

}  // namespace

TEST_CASE("handwritten feature file parses to a 3x2 matrix") {
  std::vector<std::uint8_t> bytes{'C', 'H', 'F', '1'};
  put_u32(bytes, 3);
  put_u32(bytes, 2);
  for (float f : {1.0f, -2.0f, 0.5f, 4.0f, 1e-3f, -7.25f}) put_f32(bytes, f);
  const auto m = decode_features(bytes);
  CHECK(m.rows == 3);
  CHECK(m.cols == 2);
  CHECK(m.values == std::vector<float>{1.0f, -2.0f, 0.5f, 4.0f, 1e-3f, -7.25f});
  CHECK(m(2, 1) == -7.25f);
  CHECK(encode_features(m) == bytes);
}

TEST_CASE("feature files round-trip bit for bit") {
  TempDir dir("features");
  chan::testing::Gen g(51);
  const auto m = g.features(17, 5);
  save_features(dir.path / "x.chf", m);
  CHECK(load_features(dir.path / "x.chf") == m);
}

TEST_CASE("malformed feature files raise distinct errors") {
  std::vector<std::uint8_t> good{'C', 'H', 'F', '1'};
  put_u32(good, 2);
  put_u32(good, 2);
  for (float f : {1.0f, 2.0f, 3.0f, 4.0f}) put_f32(good, f);

  auto bad_magic = good;
  bad_magic[0] = 'X';
  CHECK(decode_error(bad_magic) == FormatError::Kind::kBadMagic);
  CHECK(decode_error({'C', 'H'}) == FormatError::Kind::kBadMagic);

  auto bad_version = good;
  bad_version[3] = '2';
  CHECK(decode_error(bad_version) == FormatError::Kind::kBadVersion);

  auto trailing = good;
  trailing.push_back(0);
  CHECK(decode_error(trailing) == FormatError::Kind::kSchema);

  auto truncated = good;
  truncated.resize(truncated.size() - 1);
  CHECK(decode_error(truncated) == FormatError::Kind::kTruncated);
  CHECK(decode_error({'C', 'H', 'F', '1', 2, 0}) == FormatError::Kind::kTruncated);

  auto nan = good;
  std::vector<std::uint8_t> tail;
  put_f32(tail, std::nanf(""));
  std::copy(tail.begin(), tail.end(), nan.end() - 4);
  CHECK(decode_error(nan) == FormatError::Kind::kNonFinite);

  try {
    (void)decode_features(truncated);
  } catch (const FormatError& e) {
    CHECK(std::string(e.what()).find("truncated payload") != std::string::npos);
  }
}

TEST_CASE("split protocol") {
  std::set<std::size_t> tests;
  for (std::size_t fold = 0; fold < 4; ++fold) {
    const auto s = split_protocol(4, fold);
    std::set<std::size_t> all(s.train.begin(), s.train.end());
    CHECK(s.train.size() == 2);
    CHECK(all.insert(s.val).second);
    CHECK(all.insert(s.test).second);
    CHECK(all == std::set<std::size_t>{0, 1, 2, 3});
    tests.insert(s.test);
  }
  CHECK(tests.size() == 4);
  CHECK(split_protocol(4, 0).test != split_protocol(4, 1).test);
  CHECK_THROWS_AS((void)split_protocol(4, 4), InvalidArgument);
  CHECK_THROWS_AS((void)split_protocol(2, 0), InvalidArgument);
}

TEST_CASE("generator without noise gives identical features to identical concept sets") {
  auto c = small_synth();
  c.noise_level = 0;
  const auto ds = synth_generate(c);
  for (const auto& v : ds.videos)
    for (std::size_t i = 0; i < v.features.rows; ++i)
      for (std::size_t j = i + 1; j < v.features.rows; ++j)
        if (v.annotations[i] == v.annotations[j]) CHECK(std::equal(v.features.row(i).begin(), v.features.row(i).end(), v.features.row(j).begin()));
}

TEST_CASE("generator annotations and references follow the contract") {
  const auto c = small_synth();
  const auto ds = synth_generate(c);
  CHECK_NOTHROW(ds.validate());
  CHECK(ds.queries.size() == c.n_queries);
  for (const auto& q : ds.queries) CHECK(q.first != q.second);
  for (const auto& v : ds.videos) {
    for (const auto& a : v.annotations) CHECK(a.size() <= 3);
    for (const auto& q : ds.queries) {
      const auto* ref = ds.find_reference(v.id, q);
      REQUIRE(ref);
      for (std::size_t s = 0; s < v.annotations.size(); ++s) {
        const auto& a = v.annotations[s];
        const bool relevant = std::count(a.begin(), a.end(), q.first) || std::count(a.begin(), a.end(), q.second);
        CHECK(relevant == std::binary_search(ref->shots.begin(), ref->shots.end(), s));
      }
    }
  }
}

TEST_CASE("generator rejects infeasible settings") {
  auto c = small_synth();
  c.n_queries = 16;  // only 15 distinct pairs of 6 concepts
  CHECK_THROWS_AS((void)synth_generate(c), InvalidArgument);
  c = small_synth();
  c.signal_strength = 0;
  CHECK_THROWS_AS((void)synth_generate(c), InvalidArgument);
  c = small_synth();
  c.max_concepts_per_shot = 7;
  CHECK_THROWS_AS((void)synth_generate(c), InvalidArgument);
}

TEST_CASE("same seed writes identical dataset bytes; output passes the loader") {
  TempDir a("synth_a"), b("synth_b");
  save_dataset(a.path, synth_generate(small_synth()));
  save_dataset(b.path, synth_generate(small_synth()));
  for (const auto& entry : fs::directory_iterator(a.path)) {
    CAPTURE(entry.path().filename().string());
    CHECK(slurp(entry.path()) == slurp(b.path / entry.path().filename()));
  }
  const auto loaded = load_dataset(a.path);
  const auto original = synth_generate(small_synth());
  CHECK(loaded.videos.size() == original.videos.size());
  CHECK(loaded.videos[1].features == original.videos[1].features);
  CHECK(loaded.videos[1].annotations == original.videos[1].annotations);
  CHECK(loaded.references.size() == original.references.size());
  CHECK(loaded.queries == original.queries);
}

TEST_CASE("loader rejects dangling cross references") {
  TempDir dir("dangling");
  save_dataset(dir.path, synth_generate(small_synth()));
  const auto refs = dir.path / "references.json";
  const std::string original = slurp(refs);

  SUBCASE("reference shot out of range") {
    auto j = nlohmann::json::parse(original);
    j["summaries"][0]["shots"].push_back(9999);
    std::ofstream(refs) << j.dump();
    CHECK_THROWS_AS((void)load_dataset(dir.path), FormatError);
  }
  SUBCASE("query concept missing from the vocabulary") {
    auto j = nlohmann::json::parse(original);
    j["summaries"][0]["query"][0] = "unicorn";
    std::ofstream(refs) << j.dump();
    CHECK_THROWS_AS((void)load_dataset(dir.path), FormatError);
  }
  SUBCASE("missing version field") {
    auto j = nlohmann::json::parse(original);
    j.erase("version");
    std::ofstream(refs) << j.dump();
    CHECK_THROWS_AS((void)load_dataset(dir.path), FormatError);
  }
}

TEST_CASE("embedding lookup is a pure map") {
  const auto ds = synth_generate(small_synth());
  const auto& v = ds.vocabulary;
  for (const auto& name : v.names()) {
    const auto a = v.embedding(v.id(name));
    const auto b = v.embedding(v.id(std::string(name)));
    CHECK(std::equal(a.begin(), a.end(), b.begin(), b.end()));
  }
  CHECK_THROWS_AS((void)v.id("unicorn"), InvalidArgument);
}

TEST_CASE("a least-squares probe recovers concept presence on the benchmark data") {
  const auto ds = synth_generate(benchmark_synth_config());
  const std::size_t d = ds.videos[0].features.cols;
  const std::size_t n_concepts = ds.vocabulary.size();
  // Fit on video 1-3, score video 0.
  std::size_t rows = 0;
  for (std::size_t v = 1; v < ds.videos.size(); ++v) rows += ds.videos[v].features.rows;
  Eigen::MatrixXd x(rows, d + 1);
  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(rows, n_concepts);
  std::size_t r = 0;
  for (std::size_t v = 1; v < ds.videos.size(); ++v) {
    const auto& vid = ds.videos[v];
    for (std::size_t s = 0; s < vid.features.rows; ++s, ++r) {
      for (std::size_t k = 0; k < d; ++k) x(r, k) = vid.features(s, k);
      x(r, d) = 1.0;
      for (int c : vid.annotations[s]) y(r, c) = 1.0;
    }
  }
  const Eigen::MatrixXd w = x.colPivHouseholderQr().solve(y);
  const auto& test = ds.videos[0];
  double total = 0;
  std::size_t counted = 0;
  for (std::size_t c = 0; c < n_concepts; ++c) {
    std::vector<double> score;
    std::vector<bool> present;
    for (std::size_t s = 0; s < test.features.rows; ++s) {
      double z = w(d, c);
      for (std::size_t k = 0; k < d; ++k) z += test.features(s, k) * w(k, c);
      score.push_back(z);
      present.push_back(std::binary_search(test.annotations[s].begin(), test.annotations[s].end(), static_cast<int>(c)));
    }
    const auto pos = std::count(present.begin(), present.end(), true);
    if (pos == 0 || pos == static_cast<long>(present.size())) continue;
    total += auc(score, present);
    ++counted;
  }
  REQUIRE(counted > 0);
  CHECK(total / static_cast<double>(counted) > 0.95);
}
