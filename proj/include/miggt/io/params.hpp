#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "miggt/error.hpp"
#include "miggt/io/features.hpp"
#include "miggt/matrix.hpp"
#include "miggt/model.hpp"

namespace miggt::io {

// Parameter file, little-endian:
//   "MMPS" | version u32 | count u32 | count x (name_len u32 | name | rows u64 | cols u64 | f64 values)
inline constexpr char kParamMagic[4] = {'M', 'M', 'P', 'S'};
inline constexpr std::uint32_t kParamVersion = 1;

using NamedTensors = std::vector<std::pair<std::string, Matrix>>;

inline void save_parameters(const std::string& path, const std::vector<Parameter>& params) {
  std::vector<char> buf(kParamMagic, kParamMagic + 4);
  detail::put_le<std::uint32_t>(buf, kParamVersion);
  detail::put_le<std::uint32_t>(buf, static_cast<std::uint32_t>(params.size()));
  for (const auto& p : params) {
    detail::put_le<std::uint32_t>(buf, static_cast<std::uint32_t>(p.name.size()));
    buf.insert(buf.end(), p.name.begin(), p.name.end());
    detail::put_le<std::uint64_t>(buf, p.value.rows());
    detail::put_le<std::uint64_t>(buf, p.value.cols());
    for (const double v : p.value.data()) detail::put_le<double>(buf, v);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

inline NamedTensors load_parameters(const std::string& path) {
  const auto bytes = detail::read_all(path);
  std::size_t pos = 0;
  auto need = [&](std::size_t n) {
    if (bytes.size() - pos < n) throw TruncatedFileError(path + ": truncated parameter file");
  };
  need(12);
  if (std::memcmp(bytes.data(), kParamMagic, 4) != 0) throw FormatError(path + ": bad magic, expected MMPS");
  if (detail::get_le<std::uint32_t>(bytes.data() + 4) != kParamVersion)
    throw FormatError(path + ": unsupported parameter file version");
  const auto count = detail::get_le<std::uint32_t>(bytes.data() + 8);
  pos = 12;
  NamedTensors out;
  for (std::uint32_t i = 0; i < count; ++i) {
    need(4);
    const auto len = detail::get_le<std::uint32_t>(bytes.data() + pos);
    pos += 4;
    need(len + 16);
    std::string name(reinterpret_cast<const char*>(bytes.data() + pos), len);
    pos += len;
    const auto rows = detail::get_le<std::uint64_t>(bytes.data() + pos);
    const auto cols = detail::get_le<std::uint64_t>(bytes.data() + pos + 8);
    pos += 16;
    if (cols != 0 && rows > (bytes.size() - pos) / 8 / cols) throw TruncatedFileError(path + ": truncated tensor");
    need(rows * cols * 8);
    Matrix m(rows, cols);
    for (auto& v : m.data()) {
      v = detail::get_le<double>(bytes.data() + pos);
      pos += 8;
    }
    out.emplace_back(std::move(name), std::move(m));
  }
  if (pos != bytes.size()) throw FormatError(path + ": trailing bytes after parameters");
  return out;
}

/// Copies loaded tensors into the model; names and shapes must match exactly.
inline void apply_parameters(Model& model, const NamedTensors& tensors) {
  if (tensors.size() != model.params().all().size()) {
    throw Error("parameter file has " + std::to_string(tensors.size()) + " tensors, model has " +
                std::to_string(model.params().all().size()));
  }
  for (const auto& [name, value] : tensors) {
    auto& p = model.params().get(name);
    if (!p.value.same_shape(value)) {
      throw DimensionError("parameter '" + name + "' has shape " + shape_string(value) +
                           ", model expects " + shape_string(p.value));
    }
    p.value = value;
  }
}

}  // namespace miggt::io
