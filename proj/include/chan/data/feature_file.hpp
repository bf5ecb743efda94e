#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "chan/features.hpp"

namespace chan {

// Binary shot-feature file:
//   bytes 0..3   magic "CHF1"
//   bytes 4..7   n (uint32, little-endian)  number of shots
//   bytes 8..11  d (uint32, little-endian)  feature dimension
//   then n*d little-endian IEEE-754 float32 values, row-major by shot.
inline constexpr char kFeatureMagic[4] = {'C', 'H', 'F', '1'};
inline constexpr std::size_t kFeatureHeaderBytes = 12;

std::vector<std::uint8_t> encode_features(const FeatureMatrix& features);
// Throws FormatError (kBadMagic, kTruncated, kNonFinite) on malformed input.
FeatureMatrix decode_features(std::span<const std::uint8_t> bytes);

FeatureMatrix load_features(const std::filesystem::path& path);
void save_features(const std::filesystem::path& path, const FeatureMatrix& features);

// Little-endian float32 helpers shared with the checkpoint blob.
void append_f32_le(std::vector<std::uint8_t>& out, float value);
float read_f32_le(const std::uint8_t* bytes);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace chan
