#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace wsmn {

// Portable draws on top of mt19937_64 (the std distributions are
// implementation-defined, which would break cross-platform determinism).
using Rng = std::mt19937_64;

inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline double uniform(Rng& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
    // rejection sampling to avoid modulo bias
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t v;
    do v = rng();
    while (v >= limit);
    return v % n;
}

inline double standard_normal(Rng& rng) {
    double u1 = uniform01(rng);
    while (u1 <= 0) u1 = uniform01(rng);
    double u2 = uniform01(rng);
    return std::sqrt(-2 * std::log(u1)) * std::cos(2 * M_PI * u2);
}

template <class It> void shuffle(It first, It last, Rng& rng) {
    for (auto n = last - first; n > 1; --n) {
        auto j = static_cast<decltype(n)>(uniform_index(rng, static_cast<std::uint64_t>(n)));
        std::swap(first[n - 1], first[j]);
    }
}

} // namespace wsmn
