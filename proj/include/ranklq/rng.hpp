#pragma once

#include <cstdint>
#include <random>

namespace ranklq {

using Engine = std::mt19937_64;

inline constexpr std::uint64_t kDefaultSeed = 20240917ULL;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed for an independent stream identified by (master, a, b, c). Streams are keyed by
/// position (replicate index, column index, ...) so results never depend on scheduling.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0) {
  std::uint64_t h = splitmix64(master);
  h = splitmix64(h ^ a);
  h = splitmix64(h ^ (b + 0x632be59bd9b4e019ULL));
  h = splitmix64(h ^ (c + 0x8cb92ba72f3d8dd7ULL));
  return h;
}

inline Engine make_stream(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0) {
  return Engine(derive_seed(master, a, b, c));
}

}  // namespace ranklq
