#pragma once

#include <cstdint>
#include <random>
#include <span>

#include "acbench/mdp.hpp"

namespace acbench {

using Rng = std::mt19937_64;

// Bit-exact across standard libraries, unlike std::uniform_real_distribution.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Inverse-CDF draw; falls back to the last positive entry on round-off.
inline int categorical(std::span<const double> probs, Rng& rng) {
  const double u = uniform01(rng);
  double acc = 0.0;
  int last = 0;
  for (int i = 0; i < static_cast<int>(probs.size()); ++i) {
    if (probs[i] <= 0.0) continue;
    acc += probs[i];
    last = i;
    if (u < acc) return i;
  }
  return last;
}

inline int sample_next_state(std::span<const Outcome> row, Rng& rng) {
  const double u = uniform01(rng);
  double acc = 0.0;
  for (const Outcome& o : row) {
    acc += o.prob;
    if (u < acc) return o.next_state;
  }
  return row.back().next_state;
}

/// Derives an independent stream seed from a base seed and a tag.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t tag) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (tag + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace acbench
