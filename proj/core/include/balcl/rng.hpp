#pragma once

#include <cstdint>
#include <random>

namespace balcl {

// 64-bit avalanche mixer (splitmix64 finalizer). Used for hashing and for
// deriving independent substreams from a single user-facing seed.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t seed) { return Rng(mix64(seed)); }

// Deterministic substream: same (seed, tag) always yields the same stream.
inline Rng subrng(std::uint64_t seed, std::uint64_t tag) {
  return Rng(mix64(mix64(seed) ^ mix64(tag)));
}

}  // namespace balcl
