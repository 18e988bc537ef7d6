#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace rdpg {

using Engine = std::mt19937_64;

/// Mixes a master seed with a path of indices into a 64-bit stream key.
/// Distinct paths give statistically independent engines, so replicate r of
/// grid cell g can be generated as make_stream(seed, {g, r}) in any order.
std::uint64_t derive_seed(std::uint64_t seed,
                          std::initializer_list<std::uint64_t> path);

inline Engine make_stream(std::uint64_t seed,
                          std::initializer_list<std::uint64_t> path = {}) {
  return Engine(derive_seed(seed, path));
}

}  // namespace rdpg
