#pragma once

#include <cmath>
#include <complex>
#include <cstdint>

namespace wpt {

/// Deterministic, implementation-independent random stream (splitmix64).
/// Standard-library distributions are avoided so that identical seeds give
/// identical draws on every compiler.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1).
    double uniform() { return (next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform in (0, 1] (safe as a log argument).
    double uniform_pos() { return ((next_u64() >> 11) + 1) * 0x1.0p-53; }

    /// Standard normal, Box-Muller with one cached deviate.
    double normal() {
        if (has_cached_) {
            has_cached_ = false;
            return cached_;
        }
        const double r = std::sqrt(-2.0 * std::log(uniform_pos()));
        const double phi = 2.0 * M_PI * uniform();
        cached_ = r * std::sin(phi);
        has_cached_ = true;
        return r * std::cos(phi);
    }

    /// Circularly symmetric complex normal with E|z|^2 = 1.
    std::complex<double> cnormal() {
        const double re = normal();
        const double im = normal();
        return {re * M_SQRT1_2, im * M_SQRT1_2};
    }

    /// Uniform phase in [0, 2*pi).
    double phase() { return 2.0 * M_PI * uniform(); }

    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

  private:
    std::uint64_t state_;
    double cached_ = 0.0;
    bool has_cached_ = false;
};

/// Derives an independent sub-stream seed from a master seed, so every
/// scenario component and sweep point gets its own reproducible stream.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
    Rng mix(master ^ (0x632be59bd9b4e019ULL * (stream + 1)));
    return mix.next_u64();
}

}  // namespace wpt
