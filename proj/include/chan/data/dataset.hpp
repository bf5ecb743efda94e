#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "chan/eval/metrics.hpp"
#include "chan/features.hpp"

namespace chan {

inline constexpr int kDatasetFormatVersion = 1;
inline constexpr double kShotSeconds = 5.0;

// Named concepts with one fixed embedding each.
class ConceptVocabulary {
 public:
  ConceptVocabulary() = default;
  ConceptVocabulary(std::vector<std::string> names, std::size_t embed_dim, std::vector<float> embeddings);

  std::size_t size() const { return names_.size(); }
  std::size_t embed_dim() const { return embed_dim_; }
  const std::vector<std::string>& names() const { return names_; }
  const std::string& name(int id) const;
  // Throws InvalidArgument for an unknown concept name.
  int id(const std::string& name) const;
  std::optional<int> find(const std::string& name) const;
  std::span<const float> embedding(int id) const;

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, int> index_;
  std::size_t embed_dim_ = 0;
  std::vector<float> embeddings_;
};

// Unordered pair of concepts. Stored as given; compare with same_query().
struct Query {
  int first = 0;
  int second = 0;

  bool operator==(const Query&) const = default;
};

bool same_query(const Query& a, const Query& b);
std::string query_label(const ConceptVocabulary& vocab, const Query& q);

struct VideoRecord {
  std::string id;
  FeatureMatrix features;
  std::vector<ConceptSet> annotations;  // one set per shot
};

struct ShotSummary {
  std::string video;
  Query query;
  std::vector<std::size_t> shots;  // ascending
  std::vector<double> scores;      // optional per-shot scores
};

struct Dataset {
  ConceptVocabulary vocabulary;
  std::vector<Query> queries;
  std::vector<VideoRecord> videos;
  std::vector<ShotSummary> references;

  const VideoRecord& video(const std::string& id) const;
  std::size_t video_index(const std::string& id) const;
  const ShotSummary* find_reference(const std::string& video, const Query& q) const;

  // Checks every cross reference; throws FormatError(kSchema) on the first dangling one.
  void validate() const;
};

// Directory layout:
//   manifest.json              vocabulary, embeddings, queries, video list
//   <video>.chf                shot features (see feature_file.hpp)
//   <video>.annotations.json   per-shot concept names
//   references.json            reference summaries, one per (video, query)
Dataset load_dataset(const std::filesystem::path& dir);
void save_dataset(const std::filesystem::path& dir, const Dataset& dataset);

// Summary files share the references.json schema.
std::vector<ShotSummary> load_summaries(const std::filesystem::path& path, const ConceptVocabulary& vocab);
void save_summaries(const std::filesystem::path& path, std::span<const ShotSummary> summaries,
                    const ConceptVocabulary& vocab);

// Reads whitespace-separated "word v1 v2 ..." lines (GloVe text format),
// keeping only the requested words, in the requested order.
std::vector<float> load_text_embeddings(const std::filesystem::path& path, std::span<const std::string> words,
                                        std::size_t& dim);

struct DatasetSplit {
  std::vector<std::size_t> train;
  std::size_t val = 0;
  std::size_t test = 0;
};

// Rotating protocol over n >= 3 videos: fold f tests on video f, validates on
// video (f + 1) mod n, and trains on the rest.
DatasetSplit split_protocol(std::size_t n_videos, std::size_t fold);

}  // namespace chan
