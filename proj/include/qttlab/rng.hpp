#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace qttlab {

using Rng = std::mt19937_64;

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept
{
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// 64-bit FNV-1a.
constexpr std::uint64_t hash_label(std::string_view label) noexcept
{
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (char c : label) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001B3ULL;
    }
    return h;
}

// Child seed for (component label, run index) under a master seed:
//   mix64(mix64(master ^ fnv1a(label)) + index)
// Adding a component never perturbs the stream of another one.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::string_view label,
                                    std::uint64_t index = 0) noexcept
{
    return mix64(mix64(master ^ hash_label(label)) + index);
}

inline Rng make_rng(std::uint64_t seed)
{
    return Rng(seed);
}

}  // namespace qttlab
