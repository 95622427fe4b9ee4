#pragma once

#include <cstdint>

#include <boost/random/mersenne_twister.hpp>

namespace pulsequota {

using Engine = boost::random::mt19937_64;

/// SplitMix64 finalizer: a bijective 64-bit mix.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Child seed for stream `stream` of a master seed.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) noexcept {
  return splitmix64(master ^ splitmix64(stream));
}

/// Master seed for entry `index` of a parameter sweep. Entry 0 keeps the
/// base seed so a one-value sweep replays the base run.
constexpr std::uint64_t sweep_seed(std::uint64_t master, std::uint64_t index) noexcept {
  return index == 0 ? master : derive_seed(master, index | (1ULL << 63));
}

/// Independent engine for one path. Depends only on (seed, path_id).
inline Engine path_engine(std::uint64_t seed, std::uint64_t path_id) {
  return Engine(derive_seed(seed, path_id));
}

}  // namespace pulsequota
