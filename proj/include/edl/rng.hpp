#pragma once

#include <cstdint>
#include <random>

namespace edl {

using Rng = std::mt19937_64;

// Stream ids for fanning one master seed out to independent generators.
// Keeping the mapping fixed makes every run reproducible from a single seed.
enum class SeedStream : std::uint64_t {
  dataset = 1,
  model_init = 2,
  shuffle = 3,
  noise = 4,
  oracle = 5,
};

// SplitMix64 finalizer; decorrelates master ^ stream without a warm-up.
inline std::uint64_t derive_seed(std::uint64_t master, SeedStream stream) {
  std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(stream);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline Rng make_rng(std::uint64_t master, SeedStream stream) {
  return Rng(derive_seed(master, stream));
}

}  // namespace edl
