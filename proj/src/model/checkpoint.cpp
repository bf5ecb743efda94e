#include "chan/model/checkpoint.hpp"

#include <fstream>

#include "chan/data/feature_file.hpp"
#include "chan/error.hpp"

namespace chan {

namespace fs = std::filesystem;

template <typename T>
void save_checkpoint(const fs::path& manifest_path, const ChanConfig& config, const ChanParams<T>& params,
                     std::uint64_t seed, const nlohmann::json& run) {
  auto blob_path = manifest_path;
  blob_path.replace_extension(".bin");

  nlohmann::json entries = nlohmann::json::array();
  std::vector<std::uint8_t> blob;
  std::size_t offset = 0;
  for (const auto& p : params.named()) {
    const auto values = p.tensor.data();
    entries.push_back({{"name", p.name}, {"shape", p.tensor.shape()}, {"offset", offset}, {"count", values.size()}});
    for (auto v : values) append_f32_le(blob, static_cast<float>(v));
    offset += values.size();
  }
  nlohmann::json manifest = {{"format", "chan-checkpoint"},
                             {"version", kCheckpointVersion},
                             {"dtype", "float32-le"},
                             {"seed", seed},
                             {"config", config},
                             {"run", run},
                             {"blob", blob_path.filename().string()},
                             {"parameters", entries}};
  write_file_bytes(blob_path, blob);
  std::ofstream out(manifest_path);
  if (!out) throw FormatError(FormatError::Kind::kIo, "cannot write " + manifest_path.string());
  out << manifest.dump(2) << '\n';
}

template <typename T>
Checkpoint<T> load_checkpoint(const fs::path& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw FormatError(FormatError::Kind::kIo, "cannot read " + manifest_path.string());
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(FormatError::Kind::kSchema, manifest_path.string() + ": " + e.what());
  }
  const auto schema = [&](const std::string& msg) { return FormatError(FormatError::Kind::kSchema, "checkpoint: " + msg); };
  if (manifest.value("format", "") != "chan-checkpoint") throw schema("not a chan checkpoint");
  if (manifest.value("version", 0) != kCheckpointVersion) {
    throw FormatError(FormatError::Kind::kBadVersion, "checkpoint: unsupported version");
  }
  if (manifest.value("dtype", "") != "float32-le") throw schema("unsupported dtype");

  Checkpoint<T> ck;
  try {
    ck.config = manifest.at("config").get<ChanConfig>();
    ck.seed = manifest.at("seed").get<std::uint64_t>();
    ck.run = manifest.value("run", nlohmann::json::object());
  } catch (const nlohmann::json::exception& e) {
    throw schema(e.what());
  }
  ck.config.validate();
  ck.params = ChanParams<T>::zeros(ck.config);

  const auto blob = read_file_bytes(manifest_path.parent_path() / manifest.at("blob").get<std::string>());
  const auto& entries = manifest.at("parameters");
  auto named = ck.params.named();
  if (entries.size() != named.size()) throw schema("parameter count does not match config");
  std::size_t total = 0;
  for (std::size_t i = 0; i < named.size(); ++i) {
    const auto& e = entries[i];
    if (e.at("name").get<std::string>() != named[i].name) throw schema("expected parameter " + named[i].name);
    if (e.at("shape").get<Shape>() != named[i].tensor.shape()) throw schema("shape mismatch for " + named[i].name);
    const auto offset = e.at("offset").get<std::size_t>();
    const auto count = e.at("count").get<std::size_t>();
    if (count != named[i].tensor.size()) throw schema("count mismatch for " + named[i].name);
    if ((offset + count) * 4 > blob.size()) {
      throw FormatError(FormatError::Kind::kTruncated, "checkpoint blob too short for " + named[i].name);
    }
    auto dst = named[i].tensor.mutable_data();
    for (std::size_t k = 0; k < count; ++k) dst[k] = static_cast<T>(read_f32_le(blob.data() + 4 * (offset + k)));
    total += count;
  }
  if (total * 4 != blob.size()) throw schema("blob has trailing bytes");
  return ck;
}

template void save_checkpoint<float>(const fs::path&, const ChanConfig&, const ChanParams<float>&, std::uint64_t,
                                     const nlohmann::json&);
template void save_checkpoint<double>(const fs::path&, const ChanConfig&, const ChanParams<double>&, std::uint64_t,
                                      const nlohmann::json&);
template Checkpoint<float> load_checkpoint<float>(const fs::path&);
template Checkpoint<double> load_checkpoint<double>(const fs::path&);

}  // namespace chan
