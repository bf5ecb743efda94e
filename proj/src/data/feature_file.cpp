#include "chan/data/feature_file.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "chan/error.hpp"

namespace chan {

namespace {

void append_u32_le(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t read_u32_le(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

}  // namespace

void append_f32_le(std::vector<std::uint8_t>& out, float value) {
  append_u32_le(out, std::bit_cast<std::uint32_t>(value));
}

float read_f32_le(const std::uint8_t* bytes) { return std::bit_cast<float>(read_u32_le(bytes)); }

std::vector<std::uint8_t> encode_features(const FeatureMatrix& features) {
  if (features.values.size() != features.rows * features.cols) {
    throw InvalidArgument("encode_features: value count does not match dimensions");
  }
  std::vector<std::uint8_t> out;
  out.reserve(kFeatureHeaderBytes + 4 * features.values.size());
  out.insert(out.end(), std::begin(kFeatureMagic), std::end(kFeatureMagic));
  append_u32_le(out, static_cast<std::uint32_t>(features.rows));
  append_u32_le(out, static_cast<std::uint32_t>(features.cols));
  for (float v : features.values) append_f32_le(out, v);
  return out;
}

FeatureMatrix decode_features(std::span<const std::uint8_t> bytes) {
  if (bytes.size() >= 4 && std::memcmp(bytes.data(), kFeatureMagic, 3) == 0 && bytes[3] != kFeatureMagic[3]) {
    throw FormatError(FormatError::Kind::kBadVersion,
                      std::string("feature file: unsupported version '") + static_cast<char>(bytes[3]) + "'");
  }
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kFeatureMagic, 4) != 0) {
    throw FormatError(FormatError::Kind::kBadMagic, "feature file: bad magic (expected \"CHF1\")");
  }
  if (bytes.size() < kFeatureHeaderBytes) {
    throw FormatError(FormatError::Kind::kTruncated, "feature file: truncated header");
  }
  const std::size_t n = read_u32_le(bytes.data() + 4);
  const std::size_t d = read_u32_le(bytes.data() + 8);
  const std::size_t expected = kFeatureHeaderBytes + 4 * n * d;
  if (bytes.size() < expected) {
    throw FormatError(FormatError::Kind::kTruncated, "feature file: truncated payload (" + std::to_string(bytes.size()) +
                                                         " bytes, header promises " + std::to_string(expected) + ")");
  }
  if (bytes.size() > expected) {
    throw FormatError(FormatError::Kind::kSchema, "feature file: " + std::to_string(bytes.size() - expected) +
                                                      " trailing bytes after payload");
  }
  FeatureMatrix m(n, d);
  const std::uint8_t* p = bytes.data() + kFeatureHeaderBytes;
  for (std::size_t i = 0; i < n * d; ++i, p += 4) {
    const float v = read_f32_le(p);
    if (!std::isfinite(v)) {
      throw FormatError(FormatError::Kind::kNonFinite, "feature file: non-finite value at shot " + std::to_string(i / d) +
                                                           ", dim " + std::to_string(i % d));
    }
    m.values[i] = v;
  }
  return m;
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(FormatError::Kind::kIo, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError(FormatError::Kind::kIo, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw FormatError(FormatError::Kind::kIo, "short write to " + path.string());
}

FeatureMatrix load_features(const std::filesystem::path& path) { return decode_features(read_file_bytes(path)); }

void save_features(const std::filesystem::path& path, const FeatureMatrix& features) {
  write_file_bytes(path, encode_features(features));
}

}  // namespace chan
