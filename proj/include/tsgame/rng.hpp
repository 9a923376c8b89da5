#pragma once

#include <cstdint>
#include <random>

namespace tsgame {

using Rng = std::mt19937_64;

enum class StreamPurpose : std::uint64_t {
    Noise = 1,
    Sampling = 2,
    Spec = 3,
};

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Independent stream for (seed, path, player, purpose); order-independent.
inline Rng make_stream(std::uint64_t seed, std::uint64_t path, std::uint64_t player, StreamPurpose purpose) {
    std::uint64_t h = splitmix64(seed);
    h = splitmix64(h ^ path);
    h = splitmix64(h ^ (player + 0x1000));
    h = splitmix64(h ^ static_cast<std::uint64_t>(purpose));
    std::seed_seq seq{static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32)};
    return Rng(seq);
}

}  // namespace tsgame
