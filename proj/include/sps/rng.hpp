#pragma once

#include <cstdint>
#include <random>

namespace sps {

using Engine = std::mt19937_64;

/// SplitMix64 finalizer; a bijective 64-bit mixer.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed of an independent stream identified by (master, index, lane). Trials use
/// index = trial number; lanes separate data generation from sign draws.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index, std::uint64_t lane = 0) {
  return mix64(mix64(mix64(master) ^ index) + lane * 0xd1b54a32d192ed03ULL);
}

inline Engine make_engine(std::uint64_t seed) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(mix64(seed)), static_cast<std::uint32_t>(mix64(seed) >> 32)};
  return Engine(seq);
}

}  // namespace sps
