#pragma once

#include <cstdint>
#include <random>

namespace cepbp {

using Rng = std::mt19937_64;

// splitmix64 finalizer; decorrelates (seed, stream) pairs.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline Rng make_rng(std::uint64_t seed, std::uint64_t stream) {
  return Rng(mix_seed(seed, stream));
}

// Uniform double in [0, 1) from the top 53 bits. Used instead of
// std::uniform_real_distribution so streams are identical across standard
// library implementations.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Well-known stream ids.
namespace streams {
inline constexpr std::uint64_t kMessageInit = 1;
inline constexpr std::uint64_t kSplit = 2;
inline constexpr std::uint64_t kFoldIn = 3;
inline constexpr std::uint64_t kGibbsWorkerBase = 1000;
}  // namespace streams

}  // namespace cepbp
