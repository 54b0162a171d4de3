#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace tmixad {

// splitmix64, used to derive independent sub-seeds from one user seed so that
// changing e.g. the epoch count never perturbs unrelated random draws.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t index = 0) {
    return mix64(mix64(base ^ 0x6a09e667f3bcc909ULL) + mix64(stream) + index);
}

// Uniform in [0, 1). Hand rolled so results do not depend on the standard
// library's distribution implementations.
inline double uniform01(std::mt19937_64& gen) {
    return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

// Uniform integer in [0, n). Modulo bias is negligible for n far below 2^64
// and determinism matters more here than perfect uniformity.
inline std::size_t uniform_index(std::mt19937_64& gen, std::size_t n) {
    return static_cast<std::size_t>(gen() % n);
}

// Standard normal via Box-Muller, two generator draws per call.
inline double normal01(std::mt19937_64& gen) {
    double u1 = uniform01(gen);
    double u2 = uniform01(gen);
    if (u1 <= 0.0) u1 = 0x1.0p-53;  // log(0) guard, probability 2^-53
    const double two_pi = 6.283185307179586476925286766559;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
}

// In-place Fisher-Yates with explicit draws, stable across platforms.
inline void shuffle_indices(std::vector<int>& idx, std::mt19937_64& gen) {
    for (std::size_t i = idx.size(); i > 1; --i) {
        std::size_t j = uniform_index(gen, i);
        std::swap(idx[i - 1], idx[j]);
    }
}

}  // namespace tmixad
