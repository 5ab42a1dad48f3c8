#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace gclab {

/// Engine used for every stochastic step (generation, shuffling, init,
/// dropout, noise features).
using Rng = std::mt19937_64;

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Order-sensitive combination of seed components: h = mix64(h ^ part) folded
/// left over the parts, starting from h = mix64(first).
constexpr std::uint64_t derive_seed(std::initializer_list<std::uint64_t> parts) {
    std::uint64_t h = 0x6A09E667F3BCC908ULL;
    for (std::uint64_t p : parts) h = mix64(h ^ p);
    return h;
}

/// Stream tags keep derived seeds for different purposes apart.
enum class SeedStream : std::uint64_t {
    Graph = 1,
    Split = 2,
    Noise = 3,
    Init = 4,
    Shuffle = 5,
    Dropout = 6,
};

inline Rng make_rng(std::initializer_list<std::uint64_t> parts) { return Rng(derive_seed(parts)); }

/// Uniform real in [0, 1) with 53 bits of precision; the same on every
/// standard library for a given engine state.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace gclab
