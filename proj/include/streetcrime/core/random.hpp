#pragma once

#include <cstdint>
#include <string_view>

namespace streetcrime {

// SplitMix64 finalizer (Steele, Lea, Flood 2014). Constants:
//   increment 0x9E3779B97F4A7C15, multipliers 0xBF58476D1CE4E5B9 and
//   0x94D049BB133111EB, shifts 30/27/31.
constexpr std::uint64_t splitmix64_mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// 64-bit FNV-1a, used to turn string keys (community ids) into seed material.
constexpr std::uint64_t fnv1a64(std::string_view s) noexcept {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

// Derives an independent stream seed from a base seed and a key. The result
// depends only on (seed, key), never on the order in which keys are visited.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t key) noexcept {
    return splitmix64_mix(splitmix64_mix(seed + 0x9E3779B97F4A7C15ULL) ^ key);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::string_view key) noexcept {
    return derive_seed(seed, fnv1a64(key));
}

// SplitMix64 generator. Satisfies UniformRandomBitGenerator, but callers that
// need cross-platform reproducibility should use uniform_below/uniform01
// rather than std:: distributions, whose output is implementation-defined.
class SplitMix64 {
public:
    using result_type = std::uint64_t;

    explicit constexpr SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return ~result_type{0}; }

    constexpr result_type operator()() noexcept {
        state_ += 0x9E3779B97F4A7C15ULL;
        return splitmix64_mix(state_);
    }

    // Uniform integer in [0, bound) by rejection; bound must be > 0.
    constexpr std::uint64_t uniform_below(std::uint64_t bound) noexcept {
        const std::uint64_t limit = max() - max() % bound;
        std::uint64_t r;
        do {
            r = (*this)();
        } while (r >= limit);
        return r % bound;
    }

    // Uniform double in [0, 1) with 53 random bits.
    constexpr double uniform01() noexcept {
        return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
    }

private:
    std::uint64_t state_;
};

} // namespace streetcrime
