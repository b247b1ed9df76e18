#pragma once

#include <cstdint>
#include <random>

namespace transitcast {

using Rng = std::mt19937_64;

// SplitMix64 finalizer (Steele, Lea & Flood). Used as the seed-mixing
// function everywhere a stream is split per cycle, tree or sample.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// seed XOR mix(index): the child seed depends only on (seed, index), so
// results do not depend on which thread handles which index.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept {
    return seed ^ splitmix64(index);
}

// Uniform draw on the open interval (0, 1).
inline double open_uniform(Rng& rng) {
    for (;;) {
        const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        if (u > 0.0) return u;
    }
}

}  // namespace transitcast
