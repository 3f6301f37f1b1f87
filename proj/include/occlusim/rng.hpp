#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace occlusim {

using Rng = std::mt19937_64;

/// Seed of a named substream ("scene", "agent", "noise", "kmeans", ...) of a run seed.
std::uint64_t substream_seed(std::uint64_t seed, std::string_view name);

inline Rng make_rng(std::uint64_t seed, std::string_view name) {
  return Rng(substream_seed(seed, name));
}

inline double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

}  // namespace occlusim
