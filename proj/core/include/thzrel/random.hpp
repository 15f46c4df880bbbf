#pragma once

#include <cstdint>
#include <random>

namespace thzrel {

using Engine = std::mt19937_64;

/// Independent engine for (seed, stream). Distinct streams of one seed drive
/// distinct random inputs so that changing one input never shifts another.
inline Engine make_engine(std::uint64_t seed, std::uint64_t stream = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    0x7468'7a72u};
  return Engine(seq);
}

}  // namespace thzrel
