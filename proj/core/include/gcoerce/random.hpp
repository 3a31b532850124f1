#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace gcoerce {

// Deterministic draws on top of mt19937_64. The standard distributions are
// not pinned across library implementations, so everything that feeds a
// reproducible artifact goes through these helpers instead.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1) with 53 significant bits.
    double uniform01() { return (engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Uniform integer in [lo, hi] by rejection; exact for spans < 2^63.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
        const std::uint64_t limit = std::uint64_t(-1) - std::uint64_t(-1) % span;
        std::uint64_t v;
        do {
            v = engine_();
        } while (v >= limit);
        return lo + static_cast<std::int64_t>(v % span);
    }

    // Box-Muller; one value per call keeps the draw sequence obvious.
    double gaussian(double mean, double stddev) {
        double u1 = uniform01();
        while (u1 <= 0.0) u1 = uniform01();
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        return mean + stddev * r * std::cos(2.0 * M_PI * u2);
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace gcoerce
