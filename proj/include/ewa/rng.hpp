#pragma once

#include <cstdint>
#include <random>

namespace ewa::rng {

using Engine = std::mt19937_64;

// splitmix64 finalizer; good avalanche, cheap.
inline std::uint64_t mix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Derives an independent stream seed from a master seed and up to three
// path components (scenario, replication, purpose).  Replications seeded
// this way are order-independent: shuffling execution order cannot change
// any stream.
inline std::uint64_t derive(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0,
                            std::uint64_t c = 0) {
  std::uint64_t h = mix(master);
  h = mix(h ^ a);
  h = mix(h ^ b);
  h = mix(h ^ c);
  return h;
}

inline Engine make_engine(std::uint64_t seed) { return Engine(seed); }

}  // namespace ewa::rng
