#ifndef SEGKIT_RNG_HPP
#define SEGKIT_RNG_HPP

#include <cstdint>
#include <random>
#include <string_view>

namespace segkit {

using Rng = std::mt19937_64;

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/**
 * Derive an independent substream seed from a parent seed and a sequence of
 * indices. Used everywhere work is split across restarts, trees, individuals
 * or regions, so results never depend on the order in which that work runs.
 */
constexpr std::uint64_t derive_seed(std::uint64_t seed) noexcept { return seed; }

template<typename... Rest>
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index, Rest... rest) noexcept {
    return derive_seed(mix64(seed ^ mix64(index + 0x632be59bd9b4e019ULL)), static_cast<std::uint64_t>(rest)...);
}

/// FNV-1a, 64 bit. Stable across platforms, used to turn region keys into seeds.
constexpr std::uint64_t stable_hash(std::string_view text) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : text) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Uniform double in [0, 1) with 53 random bits.
inline double uniform01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform index in [0, n). n must be positive.
inline std::size_t uniform_index(Rng& rng, std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

} // namespace segkit

#endif
