#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

#include "swarm/mat.hpp"

namespace swarm {

// splitmix64 finalizer; good avalanche, cheap.
inline uint64_t mix64(uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Derives an independent stream key from a root seed and up to three tags.
/// All randomness in the library flows through this so that every component
/// owns a replayable stream keyed by (seed, purpose, step, index).
inline uint64_t derive_seed(uint64_t seed, uint64_t a, uint64_t b = 0, uint64_t c = 0) {
    uint64_t s = mix64(seed ^ 0x5851f42d4c957f2dULL);
    s = mix64(s ^ a);
    s = mix64(s ^ b);
    s = mix64(s ^ c);
    return s;
}

/// Small counter-style PRNG (splitmix64 sequence). Deterministic across
/// platforms; gaussian draws use an explicit Box-Muller so outputs do not
/// depend on the standard library's distribution implementation.
struct Rng {
    uint64_t state;

    explicit Rng(uint64_t seed) : state(mix64(seed ^ 0xda3e39cb94b95bdbULL)) {}

    uint64_t next_u64() {
        state += 0x9e3779b97f4a7c15ULL;
        uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n). n must be positive.
    int uniform_int(int n) {
        if (n <= 0) throw ArgumentError("uniform_int: n must be positive");
        return static_cast<int>((static_cast<unsigned __int128>(next_u64()) *
                                 static_cast<unsigned __int128>(n)) >> 64);
    }

    /// Standard normal via Box-Muller (cosine branch, no caching).
    double gaussian() {
        double u1 = uniform();
        double u2 = uniform();
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    void fill_gaussian(Mat& m, double scale = 1.0) {
        for (double& x : m.v) x = scale * gaussian();
    }

    Mat gaussian_mat(int rows, int cols, double scale = 1.0) {
        Mat m(rows, cols);
        fill_gaussian(m, scale);
        return m;
    }
};

} // namespace swarm
