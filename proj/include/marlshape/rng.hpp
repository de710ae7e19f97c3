#pragma once

#include <cstdint>
#include <random>

namespace marlshape {

// Top 53 bits of a draw mapped to [0, 1). Used instead of
// std::uniform_real_distribution so the draw sequence is pinned by us,
// not by the standard library implementation.
inline double uniform_unit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// splitmix64 finalizer.
inline std::uint64_t mix_seed(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Derives an independent named stream from a run seed. Streams with the
// same (seed, stream_id) are identical; distinct ids decorrelate.
inline std::mt19937_64 make_stream(std::uint64_t run_seed, std::uint64_t stream_id) {
  return std::mt19937_64(mix_seed(mix_seed(run_seed) ^ mix_seed(0x51ed2701 + stream_id)));
}

}  // namespace marlshape
