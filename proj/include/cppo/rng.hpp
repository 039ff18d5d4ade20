#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace cppo {

// Seeded RNG with explicitly-coded distributions so that a fixed seed
// reproduces the same stream regardless of standard-library version.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : gen_(seed) {}

    // Uniform in [0, 1).
    double uniform() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n).
    std::uint64_t uniform_int(std::uint64_t n) {
        // modulo bias is negligible for the small n used here
        return gen_() % n;
    }

    // Standard normal via Box-Muller (no cached spare, keeps the stream simple).
    double normal() {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    std::uint64_t next_u64() { return gen_(); }

    // Independent child stream, for per-sampler / per-env seeding.
    Rng fork(std::uint64_t stream) {
        return Rng(gen_() ^ (0x9e3779b97f4a7c15ull * (stream + 1)));
    }

private:
    std::mt19937_64 gen_;
};

} // namespace cppo
