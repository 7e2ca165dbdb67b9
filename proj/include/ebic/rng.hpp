#pragma once

#include <cassert>
#include <cmath>
#include <cstdint>
#include <random>

namespace ebic {

// Deterministic random source. The engine (mt19937_64) is bit-exact per the
// C++ standard; the draws below are hand-rolled so that streams never depend
// on library-specific distribution internals. Identical seeds therefore give
// identical runs on any conforming toolchain.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    // Unbiased integer in [0, bound). bound must be positive.
    std::uint64_t below(std::uint64_t bound) {
        assert(bound > 0);
        const std::uint64_t threshold = (0 - bound) % bound;
        for (;;) {
            const std::uint64_t r = engine_();
            if (r >= threshold) return r % bound;
        }
    }

    std::size_t index(std::size_t bound) {
        return static_cast<std::size_t>(below(static_cast<std::uint64_t>(bound)));
    }

    // Uniform double in [0, 1), 53 bits of resolution.
    double real() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    // Uniform double in [lo, hi).
    double real(double lo, double hi) { return lo + (hi - lo) * real(); }

    bool chance(double p) { return real() < p; }

    // Box-Muller; the spare half of each pair is cached.
    double normal(double mean = 0.0, double sd = 1.0) {
        if (have_spare_) {
            have_spare_ = false;
            return mean + sd * spare_;
        }
        double u1;
        do {
            u1 = real();
        } while (u1 <= 0.0);
        const double u2 = real();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * kPi * u2;
        spare_ = radius * std::sin(angle);
        have_spare_ = true;
        return mean + sd * radius * std::cos(angle);
    }

    // Stable per-task seed derivation (splitmix64 finalizer), used to give
    // every dataset of a suite its own independent stream.
    static std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
        std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (index + 1);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

private:
    static constexpr double kPi = 3.141592653589793238462643383279502884;

    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace ebic
