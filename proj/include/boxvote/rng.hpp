#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace boxvote {

// Seeded generator with explicit variate transforms. std::uniform_real_distribution
// and friends are implementation-defined, so results would not reproduce across
// standard libraries; mt19937_64 itself is fully specified.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t raw() { return engine_(); }

    // Uniform in [0, 1) with 53-bit resolution.
    double uniform01() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) {
        return lo + (hi - lo) * uniform01();
    }

    // Uniform integer in [0, n). n must be positive.
    std::uint64_t uniform_index(std::uint64_t n) {
        const auto i = static_cast<std::uint64_t>(uniform01() * static_cast<double>(n));
        return i < n ? i : n - 1;
    }

    // Box-Muller; consumes exactly two uniforms per call.
    double normal(double mean, double sigma) {
        const double u1 = 1.0 - uniform01();  // (0, 1], keeps log finite
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        return mean + sigma * r * std::cos(2.0 * M_PI * u2);
    }

    // Independent stream for a sub-task (e.g. one scene of a batch).
    static std::uint64_t derive(std::uint64_t seed, std::uint64_t index) {
        // splitmix64 step over seed ^ index
        std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace boxvote
