#pragma once

#include <cstdint>
#include <filesystem>

#include "chan/model/config.hpp"
#include "chan/model/params.hpp"
#include "json.hpp"

namespace chan {

// A checkpoint is two files: a JSON manifest and a flat blob of little-endian
// float32 values holding every parameter in ChanParams::named() order. The
// manifest records where each parameter starts in the blob.
//
//   { "format": "chan-checkpoint", "version": 1, "dtype": "float32-le",
//     "seed": 7, "config": {...}, "run": {...}, "blob": "model.bin",
//     "parameters": [{"name": "block0.branch0.filter", "shape": [3, 32, 8],
//                     "offset": 0, "count": 768}, ...] }
//
// "blob" is relative to the manifest's directory. "run" is optional metadata.
inline constexpr int kCheckpointVersion = 1;

template <typename T>
struct Checkpoint {
  ChanConfig config;
  ChanParams<T> params;
  std::uint64_t seed = 0;
  nlohmann::json run;
};

// Writes manifest_path and the blob beside it (same stem, ".bin").
template <typename T>
void save_checkpoint(const std::filesystem::path& manifest_path, const ChanConfig& config, const ChanParams<T>& params,
                     std::uint64_t seed, const nlohmann::json& run = nlohmann::json::object());

// Throws FormatError on a malformed manifest, mismatched shapes or a short blob.
template <typename T>
Checkpoint<T> load_checkpoint(const std::filesystem::path& manifest_path);

}  // namespace chan
