#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace vinpaint {

/// Deterministic random source. mt19937_64 has a pinned algorithm in the
/// standard, and the value transforms below avoid std::*_distribution
/// (whose output is implementation-defined), so streams are identical
/// across platforms and compilers for a given seed.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed), seed_(seed) {}

    std::uint64_t next_u64() { return eng_(); }

    /// Uniform in [0, 1).
    double uniform() {
        return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Integer in [lo, hi] inclusive.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        return lo + static_cast<std::int64_t>(uniform() * static_cast<double>(hi - lo + 1));
    }

    /// Standard normal via Box-Muller (cached second value).
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    std::uint64_t seed() const { return seed_; }

    /// Derive an independent deterministic stream for substream `stream`
    /// (per-step, per-clip, per-frame). Depends only on the original seed,
    /// not on how much of this stream has been consumed.
    Rng fork(std::uint64_t stream) const {
        // splitmix64 finalizer over (seed ^ stream)
        std::uint64_t z = seed_ ^ (stream + 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        z ^= z >> 31;
        return Rng(z);
    }

private:
    std::mt19937_64 eng_;
    std::uint64_t seed_ = 0;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace vinpaint
