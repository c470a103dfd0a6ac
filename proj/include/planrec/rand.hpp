#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace planrec {

using Rng = std::mt19937_64;

// Uniform double in [0,1). Bypasses std::uniform_real_distribution so draws
// are identical across standard-library versions.
inline double uniform_unit(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform index in [0,n). n must be > 0.
inline std::size_t uniform_index(Rng& rng, std::size_t n) {
    return static_cast<std::size_t>(
        (static_cast<unsigned __int128>(rng()) * n) >> 64);
}

// Fisher-Yates with our own index draws, same rationale as above.
template <typename T>
void shuffle(std::vector<T>& v, Rng& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        std::size_t j = uniform_index(rng, i);
        std::swap(v[i - 1], v[j]);
    }
}

// splitmix64 step, for deriving independent stream seeds from a base seed.
inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
    std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Weighted draw proportional to non-negative weights; total must be > 0.
inline std::size_t sample_weighted(Rng& rng, const std::vector<double>& w,
                                   double total) {
    double r = uniform_unit(rng) * total;
    double acc = 0.0;
    std::size_t last = 0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (w[i] <= 0.0) continue;
        acc += w[i];
        last = i;
        if (r < acc) return i;
    }
    return last;  // guard against rounding at the upper edge
}

}  // namespace planrec
