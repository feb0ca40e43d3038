#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace flowrecon {

/// All randomness in the library flows through this engine. mt19937_64 has a
/// standard-mandated output sequence, so a fixed seed reproduces runs across
/// platforms as long as we avoid std::uniform_*_distribution (whose mapping
/// from engine output to values is implementation-defined).
using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t seed) { return Rng{seed}; }

/// Unbiased draw from [0, bound) via rejection sampling. bound must be >= 1.
inline std::uint64_t next_below(Rng& rng, std::uint64_t bound) {
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  std::uint64_t value = rng();
  while (value >= limit) {
    value = rng();
  }
  return value % bound;
}

/// Uniform double in [0, 1) using the top 53 bits of one engine output.
inline double next_unit(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// FNV-1a, used to derive stable per-(task, workflow) noise seeds.
inline std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t hash = 14695981039346656037ull;
  for (const char c : text) {
    hash ^= static_cast<unsigned char>(c);
    hash *= 1099511628211ull;
  }
  return hash;
}

}  // namespace flowrecon
