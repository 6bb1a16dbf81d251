#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "miggt/encoding.hpp"
#include "miggt/error.hpp"
#include "miggt/matrix.hpp"

namespace miggt::io {

// Binary feature matrix, little-endian:
//   "MMFT" | version u32 | rows u64 | cols u64 | element u8 | rows*cols values, row-major
inline constexpr char kFeatureMagic[4] = {'M', 'M', 'F', 'T'};
inline constexpr std::uint32_t kFeatureVersion = 1;
inline constexpr std::size_t kFeatureHeaderBytes = 25;

enum class ElementType : std::uint8_t { kFloat32 = 1, kFloat64 = 2 };

class FeatureHeaderError : public FormatError {
 public:
  using FormatError::FormatError;
};

class TruncatedFileError : public FormatError {
 public:
  using FormatError::FormatError;
};

namespace detail {

template <typename T>
void put_le(std::vector<char>& buf, T value) {
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t,
                               std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint8_t>>;
  const U bits = std::bit_cast<U>(value);
  for (std::size_t i = 0; i < sizeof(T); ++i) buf.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

template <typename T>
T get_le(const unsigned char* p) {
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t,
                               std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint8_t>>;
  U bits = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) bits |= static_cast<U>(p[i]) << (8 * i);
  return std::bit_cast<T>(bits);
}

inline std::vector<unsigned char> read_all(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace detail

inline void write_feature_matrix(const std::string& path, const Matrix& m,
                                 ElementType type = ElementType::kFloat32) {
  std::vector<char> buf(kFeatureMagic, kFeatureMagic + 4);
  detail::put_le<std::uint32_t>(buf, kFeatureVersion);
  detail::put_le<std::uint64_t>(buf, m.rows());
  detail::put_le<std::uint64_t>(buf, m.cols());
  detail::put_le<std::uint8_t>(buf, static_cast<std::uint8_t>(type));
  for (const double v : m.data()) {
    if (type == ElementType::kFloat32) {
      detail::put_le<float>(buf, static_cast<float>(v));
    } else {
      detail::put_le<double>(buf, v);
    }
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

inline Matrix read_feature_matrix(const std::string& path) {
  const auto bytes = detail::read_all(path);
  if (bytes.size() < kFeatureHeaderBytes) {
    throw TruncatedFileError(path + ": file shorter than the feature header");
  }
  if (std::memcmp(bytes.data(), kFeatureMagic, 4) != 0) {
    throw FeatureHeaderError(path + ": bad magic, expected MMFT");
  }
  const auto version = detail::get_le<std::uint32_t>(bytes.data() + 4);
  if (version != kFeatureVersion) {
    throw FeatureHeaderError(path + ": unsupported version " + std::to_string(version));
  }
  const auto rows = detail::get_le<std::uint64_t>(bytes.data() + 8);
  const auto cols = detail::get_le<std::uint64_t>(bytes.data() + 16);
  const auto code = bytes[24];
  std::size_t width = 0;
  if (code == static_cast<std::uint8_t>(ElementType::kFloat32)) width = 4;
  else if (code == static_cast<std::uint8_t>(ElementType::kFloat64)) width = 8;
  else throw FeatureHeaderError(path + ": unknown element code " + std::to_string(code));
  if (cols != 0 && rows > (bytes.size() / width) / cols) {
    throw TruncatedFileError(path + ": payload holds fewer than " + std::to_string(rows) + "x" +
                             std::to_string(cols) + " values");
  }
  const std::size_t expected = kFeatureHeaderBytes + rows * cols * width;
  if (bytes.size() < expected) {
    throw TruncatedFileError(path + ": payload has " + std::to_string(bytes.size() - kFeatureHeaderBytes) +
                             " bytes, expected " + std::to_string(expected - kFeatureHeaderBytes));
  }
  if (bytes.size() > expected) throw FeatureHeaderError(path + ": trailing bytes after payload");
  Matrix m(rows, cols);
  const unsigned char* p = bytes.data() + kFeatureHeaderBytes;
  for (auto& v : m.data()) {
    v = width == 4 ? static_cast<double>(detail::get_le<float>(p)) : detail::get_le<double>(p);
    p += width;
  }
  return m;
}

/// Vertices covered by a feature file: rows land at [offset, offset + count).
struct VertexRange {
  std::size_t offset = 0;
  std::size_t count = 0;
  std::size_t total = 0;  // |N|
};

/// Reads a feature file into an |N| x dim store. File row r goes to vertex
/// offset + row_to_local[r] (or offset + r without a mapping); a negative
/// entry drops the row. Uncovered vertices are zero with has_feature false.
inline FeatureStore load_features(const std::string& path, const ModalityId& modality,
                                  std::size_t expected_dim, const VertexRange& range,
                                  const std::vector<std::ptrdiff_t>* row_to_local = nullptr) {
  const Matrix file = read_feature_matrix(path);
  if (file.cols() != expected_dim) {
    throw DimensionError(path + ": declared dim " + std::to_string(expected_dim) +
                         " but file has " + std::to_string(file.cols()) + " columns");
  }
  if (range.offset + range.count > range.total) throw RangeError(path + ": vertex range exceeds |N|");
  if (row_to_local && row_to_local->size() != file.rows()) {
    throw DimensionError(path + ": row mapping has " + std::to_string(row_to_local->size()) +
                         " entries for " + std::to_string(file.rows()) + " rows");
  }
  if (!row_to_local && file.rows() != range.count) {
    throw DimensionError(path + ": file has " + std::to_string(file.rows()) + " rows, range covers " +
                         std::to_string(range.count));
  }
  FeatureStore store{modality, Matrix(range.total, expected_dim),
                     std::vector<bool>(range.total, false)};
  for (std::size_t r = 0; r < file.rows(); ++r) {
    const std::ptrdiff_t local = row_to_local ? (*row_to_local)[r] : static_cast<std::ptrdiff_t>(r);
    if (local < 0) continue;
    if (static_cast<std::size_t>(local) >= range.count) throw RangeError(path + ": row maps outside range");
    const std::size_t v = range.offset + static_cast<std::size_t>(local);
    std::copy(file.row(r).begin(), file.row(r).end(), store.rows.row(v).begin());
    store.has_feature[v] = true;
  }
  return store;
}

}  // namespace miggt::io
