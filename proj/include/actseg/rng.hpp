#pragma once

#include <cstdint>
#include <initializer_list>

namespace actseg {

/// splitmix64 finalizer. Stable across platforms; used to derive independent
/// child seeds from a master seed so any experiment cell can be re-run in
/// isolation.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(splitmix64(seed) ^ stream);
}

/// Folds a list of stream ids into one child seed, left to right.
inline std::uint64_t mix_seed(std::uint64_t seed,
                              std::initializer_list<std::uint64_t> streams) {
  std::uint64_t s = seed;
  for (std::uint64_t v : streams) s = mix_seed(s, v);
  return s;
}

}  // namespace actseg
