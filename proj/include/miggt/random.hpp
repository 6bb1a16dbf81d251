#pragma once

#include <cstdint>
#include <random>

namespace miggt {

using Rng = std::mt19937_64;

/// Independent consumers of randomness. Each gets its own stream derived from
/// the master seed so that skipping one consumer never shifts another.
enum class Stream : std::uint64_t {
  kInit = 1,
  kShuffle = 2,
  kNegative = 3,
  kSgtSample = 4,
  kTurNeighbor = 5,
  kEval = 6,
  kSplit = 7,
  kSynthetic = 8,
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0) {
  return splitmix64(splitmix64(splitmix64(master) ^ a) ^ (b * 0xd1342543de82ef95ULL));
}

inline Rng make_stream(std::uint64_t master, Stream stream, std::uint64_t extra = 0) {
  return Rng(derive_seed(master, static_cast<std::uint64_t>(stream), extra));
}

/// Uniform index in [0, n). n must be positive.
inline std::size_t uniform_index(Rng& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

}  // namespace miggt
