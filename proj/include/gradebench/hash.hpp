#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace gradebench {

// FNV-1a, 64-bit. Used for text digests, embedding cache keys and the seeded
// mock generator; deterministic across platforms, unlike std::hash.
constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

constexpr std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed = kFnvOffset) {
    std::uint64_t h = seed;
    for (unsigned char c : data) {
        h ^= c;
        h *= kFnvPrime;
    }
    return h;
}

// splitmix64 finalizer; turns correlated FNV outputs into well-mixed words.
constexpr std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Uniform draw in [0, 1) with 53 bits of the mixed word.
constexpr double unit_from_hash(std::uint64_t h) {
    return static_cast<double>(mix64(h) >> 11) * 0x1.0p-53;
}

std::string hex64(std::uint64_t value);

}  // namespace gradebench
