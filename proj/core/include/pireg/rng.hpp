#pragma once

#include <cstdint>
#include <random>

namespace pireg {

// Independent deterministic RNG streams. Every consumer derives its own
// stream from (base seed, tags), so adding workers or reordering execution
// never changes the numbers any single consumer sees.
inline std::mt19937_64 rng_stream(std::uint64_t base, std::uint64_t tag1,
                                  std::uint64_t tag2 = 0,
                                  std::uint64_t tag3 = 0) {
  std::seed_seq seq{
      static_cast<std::uint32_t>(base), static_cast<std::uint32_t>(base >> 32),
      static_cast<std::uint32_t>(tag1), static_cast<std::uint32_t>(tag1 >> 32),
      static_cast<std::uint32_t>(tag2), static_cast<std::uint32_t>(tag2 >> 32),
      static_cast<std::uint32_t>(tag3), static_cast<std::uint32_t>(tag3 >> 32)};
  return std::mt19937_64(seq);
}

// Stream tags, kept in one place so collisions are visible.
enum : std::uint64_t {
  kStreamInitialCondition = 1,
  kStreamNoise = 2,
  kStreamSampleLocations = 3,
  kStreamTrialPoints = 4,
  kStreamHyperSearch = 5,
  kStreamVarietySamples = 6,
  kStreamSplitShuffle = 7,
};

}  // namespace pireg
