#include "chan/data/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "chan/data/feature_file.hpp"
#include "chan/error.hpp"
#include "json.hpp"

namespace chan {

using nlohmann::json;

namespace {

[[noreturn]] void schema_error(const std::string& what) { throw FormatError(FormatError::Kind::kSchema, what); }

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError(FormatError::Kind::kIo, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    schema_error(path.string() + ": " + e.what());
  }
}

void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw FormatError(FormatError::Kind::kIo, "cannot write " + path.string());
  out << j.dump(1) << "\n";
}

void require_version(const json& j, const std::string& what) {
  if (!j.is_object() || !j.contains("version")) schema_error(what + ": missing mandatory \"version\" field");
  if (!j["version"].is_number_integer() || j["version"].get<int>() != kDatasetFormatVersion) {
    throw FormatError(FormatError::Kind::kBadVersion, what + ": unsupported version " + j["version"].dump());
  }
}

template <typename Fn>
auto schema_guard(const std::string& what, Fn&& fn) {
  try {
    return fn();
  } catch (const json::exception& e) {
    schema_error(what + ": " + e.what());
  }
}

Query parse_query(const json& j, const ConceptVocabulary& vocab, const std::string& where) {
  if (!j.is_array() || j.size() != 2) schema_error(where + ": query must be a pair of concept names");
  auto lookup = [&](const json& name) {
    auto id = vocab.find(name.get<std::string>());
    if (!id) schema_error(where + ": query concept '" + name.get<std::string>() + "' is not in the vocabulary");
    return *id;
  };
  return {lookup(j[0]), lookup(j[1])};
}

json query_json(const ConceptVocabulary& vocab, const Query& q) { return json::array({vocab.name(q.first), vocab.name(q.second)}); }

ConceptSet to_concept_set(std::vector<int> ids) {
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

}  // namespace

ConceptVocabulary::ConceptVocabulary(std::vector<std::string> names, std::size_t embed_dim, std::vector<float> embeddings)
    : names_(std::move(names)), embed_dim_(embed_dim), embeddings_(std::move(embeddings)) {
  if (embeddings_.size() != names_.size() * embed_dim_) {
    throw InvalidArgument("vocabulary: embedding table size does not match " + std::to_string(names_.size()) + " x " +
                          std::to_string(embed_dim_));
  }
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (!index_.emplace(names_[i], static_cast<int>(i)).second) {
      throw InvalidArgument("vocabulary: duplicate concept '" + names_[i] + "'");
    }
  }
}

const std::string& ConceptVocabulary::name(int id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= names_.size()) {
    throw InvalidArgument("vocabulary: unknown concept id " + std::to_string(id));
  }
  return names_[static_cast<std::size_t>(id)];
}

std::optional<int> ConceptVocabulary::find(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

int ConceptVocabulary::id(const std::string& name) const {
  auto found = find(name);
  if (!found) throw InvalidArgument("vocabulary: unknown concept '" + name + "'");
  return *found;
}

std::span<const float> ConceptVocabulary::embedding(int id) const {
  name(id);  // range check
  return {embeddings_.data() + static_cast<std::size_t>(id) * embed_dim_, embed_dim_};
}

bool same_query(const Query& a, const Query& b) {
  return (a.first == b.first && a.second == b.second) || (a.first == b.second && a.second == b.first);
}

std::string query_label(const ConceptVocabulary& vocab, const Query& q) {
  return vocab.name(q.first) + "+" + vocab.name(q.second);
}

const VideoRecord& Dataset::video(const std::string& id) const { return videos[video_index(id)]; }

std::size_t Dataset::video_index(const std::string& id) const {
  for (std::size_t i = 0; i < videos.size(); ++i)
    if (videos[i].id == id) return i;
  throw InvalidArgument("dataset: unknown video '" + id + "'");
}

const ShotSummary* Dataset::find_reference(const std::string& video_id, const Query& q) const {
  for (const auto& r : references)
    if (r.video == video_id && same_query(r.query, q)) return &r;
  return nullptr;
}

void Dataset::validate() const {
  const auto n_concepts = static_cast<int>(vocabulary.size());
  auto check_concept = [&](int id, const std::string& where) {
    if (id < 0 || id >= n_concepts) schema_error(where + ": concept id " + std::to_string(id) + " outside the vocabulary");
  };
  for (const auto& q : queries) {
    check_concept(q.first, "query");
    check_concept(q.second, "query");
  }
  std::set<std::string> ids;
  for (const auto& v : videos) {
    if (!ids.insert(v.id).second) schema_error("dataset: duplicate video id '" + v.id + "'");
    if (v.annotations.size() != v.features.rows) {
      schema_error("video '" + v.id + "': " + std::to_string(v.annotations.size()) + " annotations for " +
                   std::to_string(v.features.rows) + " shots");
    }
    for (float x : v.features.values)
      if (!std::isfinite(x)) schema_error("video '" + v.id + "': non-finite feature value");
    for (const auto& s : v.annotations)
      for (int c : s) check_concept(c, "video '" + v.id + "' annotation");
  }
  for (const auto& r : references) {
    if (!ids.count(r.video)) schema_error("reference: unknown video '" + r.video + "'");
    check_concept(r.query.first, "reference query");
    check_concept(r.query.second, "reference query");
    const auto n = video(r.video).features.rows;
    for (auto s : r.shots)
      if (s >= n) schema_error("reference for '" + r.video + "': shot " + std::to_string(s) + " out of range");
  }
}

std::vector<float> load_text_embeddings(const std::filesystem::path& path, std::span<const std::string> words,
                                        std::size_t& dim) {
  std::ifstream in(path);
  if (!in) throw FormatError(FormatError::Kind::kIo, "cannot open " + path.string());
  std::unordered_map<std::string, std::vector<float>> found;
  std::set<std::string> wanted(words.begin(), words.end());
  std::string line;
  dim = 0;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string word;
    if (!(ls >> word) || !wanted.count(word)) continue;
    std::vector<float> vec;
    float v;
    while (ls >> v) vec.push_back(v);
    if (dim == 0) dim = vec.size();
    if (vec.size() != dim) schema_error(path.string() + ": inconsistent embedding width for '" + word + "'");
    found.emplace(word, std::move(vec));
  }
  std::vector<float> table;
  for (const auto& w : words) {
    auto it = found.find(w);
    if (it == found.end()) schema_error(path.string() + ": no embedding for concept '" + w + "'");
    table.insert(table.end(), it->second.begin(), it->second.end());
  }
  return table;
}

std::vector<ShotSummary> load_summaries(const std::filesystem::path& path, const ConceptVocabulary& vocab) {
  const json j = read_json(path);
  require_version(j, path.string());
  return schema_guard(path.string(), [&] {
    std::vector<ShotSummary> out;
    for (const auto& s : j.at("summaries")) {
      ShotSummary summary;
      summary.video = s.at("video").get<std::string>();
      summary.query = parse_query(s.at("query"), vocab, path.string());
      summary.shots = s.at("shots").get<std::vector<std::size_t>>();
      if (s.contains("scores")) summary.scores = s.at("scores").get<std::vector<double>>();
      out.push_back(std::move(summary));
    }
    return out;
  });
}

void save_summaries(const std::filesystem::path& path, std::span<const ShotSummary> summaries,
                    const ConceptVocabulary& vocab) {
  json list = json::array();
  for (const auto& s : summaries) {
    json item = {{"video", s.video}, {"query", query_json(vocab, s.query)}, {"shots", s.shots}};
    if (!s.scores.empty()) item["scores"] = s.scores;
    list.push_back(std::move(item));
  }
  write_json(path, {{"version", kDatasetFormatVersion}, {"summaries", std::move(list)}});
}

Dataset load_dataset(const std::filesystem::path& dir) {
  const auto manifest_path = dir / "manifest.json";
  const json m = read_json(manifest_path);
  require_version(m, manifest_path.string());
  Dataset ds;
  schema_guard(manifest_path.string(), [&] {
    auto names = m.at("vocabulary").get<std::vector<std::string>>();
    std::size_t dim = 0;
    std::vector<float> table;
    if (m.contains("embeddings")) {
      const auto& e = m.at("embeddings");
      for (const auto& name : names) {
        if (!e.contains(name)) schema_error(manifest_path.string() + ": no embedding for concept '" + name + "'");
        auto vec = e.at(name).get<std::vector<float>>();
        if (dim == 0) dim = vec.size();
        if (vec.size() != dim || dim == 0) schema_error(manifest_path.string() + ": inconsistent embedding width");
        table.insert(table.end(), vec.begin(), vec.end());
      }
    } else if (m.contains("embeddings_file")) {
      table = load_text_embeddings(dir / m.at("embeddings_file").get<std::string>(), names, dim);
    } else {
      schema_error(manifest_path.string() + ": needs \"embeddings\" or \"embeddings_file\"");
    }
    try {
      ds.vocabulary = ConceptVocabulary(std::move(names), dim, std::move(table));
    } catch (const InvalidArgument& e) {
      schema_error(manifest_path.string() + ": " + e.what());
    }

    for (const auto& q : m.at("queries")) ds.queries.push_back(parse_query(q, ds.vocabulary, manifest_path.string()));

    for (const auto& v : m.at("videos")) {
      VideoRecord rec;
      rec.id = v.at("id").get<std::string>();
      rec.features = load_features(dir / v.at("features").get<std::string>());
      const auto ann_path = dir / v.at("annotations").get<std::string>();
      const json ann = read_json(ann_path);
      require_version(ann, ann_path.string());
      for (const auto& shot : ann.at("shots")) {
        std::vector<int> ids;
        for (const auto& name : shot) {
          auto id = ds.vocabulary.find(name.get<std::string>());
          if (!id) schema_error(ann_path.string() + ": concept '" + name.get<std::string>() + "' is not in the vocabulary");
          ids.push_back(*id);
        }
        rec.annotations.push_back(to_concept_set(std::move(ids)));
      }
      ds.videos.push_back(std::move(rec));
    }
    ds.references = load_summaries(dir / m.at("references").get<std::string>(), ds.vocabulary);
    return 0;
  });
  ds.validate();
  return ds;
}

void save_dataset(const std::filesystem::path& dir, const Dataset& ds) {
  ds.validate();
  std::filesystem::create_directories(dir);
  json embeddings = json::object();
  for (std::size_t c = 0; c < ds.vocabulary.size(); ++c) {
    auto e = ds.vocabulary.embedding(static_cast<int>(c));
    embeddings[ds.vocabulary.name(static_cast<int>(c))] = std::vector<float>(e.begin(), e.end());
  }
  json queries = json::array();
  for (const auto& q : ds.queries) queries.push_back(query_json(ds.vocabulary, q));
  json videos = json::array();
  for (const auto& v : ds.videos) {
    const std::string features = v.id + ".chf";
    const std::string annotations = v.id + ".annotations.json";
    save_features(dir / features, v.features);
    json shots = json::array();
    for (const auto& s : v.annotations) {
      json names = json::array();
      for (int c : s) names.push_back(ds.vocabulary.name(c));
      shots.push_back(std::move(names));
    }
    write_json(dir / annotations, {{"version", kDatasetFormatVersion}, {"video", v.id}, {"shots", std::move(shots)}});
    videos.push_back({{"id", v.id}, {"features", features}, {"annotations", annotations}});
  }
  save_summaries(dir / "references.json", ds.references, ds.vocabulary);
  write_json(dir / "manifest.json", {{"format", "chan-dataset"},
                                     {"version", kDatasetFormatVersion},
                                     {"shot_seconds", kShotSeconds},
                                     {"vocabulary", ds.vocabulary.names()},
                                     {"embeddings", std::move(embeddings)},
                                     {"queries", std::move(queries)},
                                     {"videos", std::move(videos)},
                                     {"references", "references.json"}});
}

DatasetSplit split_protocol(std::size_t n_videos, std::size_t fold) {
  if (n_videos < 3) throw InvalidArgument("split_protocol: need at least 3 videos, got " + std::to_string(n_videos));
  if (fold >= n_videos) {
    throw InvalidArgument("split_protocol: fold " + std::to_string(fold) + " out of range for " + std::to_string(n_videos) +
                          " videos");
  }
  DatasetSplit split;
  split.test = fold;
  split.val = (fold + 1) % n_videos;
  for (std::size_t v = 0; v < n_videos; ++v)
    if (v != split.test && v != split.val) split.train.push_back(v);
  return split;
}

}  // namespace chan
