#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace gpcover {

/// Deterministic 64-bit generator (splitmix64). Hand-rolled instead of
/// std::mt19937 so that streams can be derived by name and results are
/// bit-identical across standard library implementations.
class SplitMix64 {
public:
    using result_type = std::uint64_t;

    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~0ull; }

    result_type operator()() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

private:
    std::uint64_t state_;
};

/// Uniform double in [0,1) with 53 random bits.
inline double uniform01(SplitMix64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Standard normal via Box-Muller. One draw per call (the sine twin is
/// discarded) so consumers never share hidden state.
inline double standard_normal(SplitMix64& rng) {
    const double u1 = 1.0 - uniform01(rng);  // (0,1], keeps log finite
    const double u2 = uniform01(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
}

/// Derives an independent named substream from a master seed. Streams are
/// keyed by a purpose string plus two indices (e.g. agent, iteration) so
/// adding a new consumer never shifts the draws of an existing one.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view purpose,
                                 std::uint64_t a = 0, std::uint64_t b = 0) {
    std::uint64_t h = 0xCBF29CE484222325ull;  // FNV offset basis
    auto mix = [&h](std::uint64_t v) {
        h ^= v;
        h *= 0x100000001B3ull;  // FNV prime
        h ^= h >> 29;
        h *= 0xBF58476D1CE4E5B9ull;
        h ^= h >> 32;
    };
    mix(master);
    for (char c : purpose) mix(static_cast<unsigned char>(c));
    mix(a + 1);
    mix(b + 1);
    return h;
}

}  // namespace gpcover
