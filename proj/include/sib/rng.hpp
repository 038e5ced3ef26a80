#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace sib {

// All randomness in the library flows through these helpers instead of
// std::*_distribution, whose output is implementation-defined. This keeps
// seeded runs bit-identical across standard libraries.
using Rng = std::mt19937_64;

// Uniform double in (0, 1). Never returns 0, so log(u) is always finite.
inline double rng_uniform(Rng& rng) {
    return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

// Uniform double in [lo, hi).
inline double rng_uniform(Rng& rng, double lo, double hi) {
    return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
}

// Uniform integer in [0, n). n must be > 0.
inline std::uint64_t rng_index(Rng& rng, std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(rng()) * n) >> 64);
}

// Standard Gumbel(0,1) sample, used by the Gumbel-Softmax relaxation.
inline double rng_gumbel(Rng& rng) {
    double u = rng_uniform(rng);
    return -std::log(-std::log(u));
}

// Deterministic in-place Fisher-Yates shuffle driven by rng_index.
template <typename Vec>
void rng_shuffle(Rng& rng, Vec& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(rng_index(rng, i));
        std::swap(v[i - 1], v[j]);
    }
}

// Stream derivation for independent substreams from one run seed
// (splitmix64 finalizer).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

}  // namespace sib
