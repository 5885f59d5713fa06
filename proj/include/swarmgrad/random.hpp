#pragma once

#include <cstdint>
#include <random>

namespace swarmgrad {

using Rng = std::mt19937_64;

/// Uniform draw in [0, 1) built from the top 53 bits of the engine output.
/// Unlike std::uniform_real_distribution this is identical across standard
/// library implementations, which keeps reports byte-reproducible.
inline double uniform01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(Rng& rng, double low, double high) {
    return low + (high - low) * uniform01(rng);
}

/// Derives an independent stream seed from a base seed and a salt.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t salt) {
    // splitmix64 finalizer
    std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (salt + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

} // namespace swarmgrad
