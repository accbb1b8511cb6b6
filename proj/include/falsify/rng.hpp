#pragma once

#include <cstdint>
#include <random>

namespace falsify {

using Rng = std::mt19937_64;

/// Independent random streams split off a run's root seed.
enum class Stream : std::uint64_t {
  Bins = 1,
  Policy = 2,
  Simulation = 3,
  Baseline = 4,
  Init = 5,
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed for `stream`, optionally specialised per episode.
inline std::uint64_t derive_seed(std::uint64_t root, Stream stream, std::uint64_t index = 0) {
  return splitmix64(splitmix64(root ^ splitmix64(static_cast<std::uint64_t>(stream))) + index);
}

inline Rng make_rng(std::uint64_t root, Stream stream, std::uint64_t index = 0) {
  return Rng(derive_seed(root, stream, index));
}

}  // namespace falsify
