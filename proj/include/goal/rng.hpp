#pragma once

// Random streams with a fixed, documented algorithm so generated datasets are
// reproducible across standard libraries: std::mt19937_64 for bits (its output
// sequence is fixed by the standard), 53-bit uniforms, and the Marsaglia
// polar method for normals. std::*_distribution is avoided because its
// algorithms are implementation-defined.

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace goal {

inline constexpr std::string_view kRngAlgorithm = "mt19937_64+polar-normal/v1";

/// splitmix64 finalizer; used to derive child seeds.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seed for replication r of an experiment seeded with `seed`.
inline std::uint64_t child_seed(std::uint64_t seed, std::uint64_t replication) {
    return seed ^ mix64(replication);
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double factor = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * factor;
        has_spare_ = true;
        return u * factor;
    }

    bool bernoulli(double prob) { return uniform() < prob; }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace goal
