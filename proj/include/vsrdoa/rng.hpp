#pragma once

// Deterministic random streams. The core generator is splitmix64 (Steele,
// Lea, Flood 2014): a counter-based mixer with a 64-bit state, so streams
// for independent trials can be derived by simple seed arithmetic without
// any shared state. Gaussian variates come from Box-Muller on the 53-bit
// uniform output; results are bit-reproducible for a fixed seed.

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>

namespace vsrdoa {

class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

private:
    std::uint64_t state_;
};

class GaussianRng {
public:
    explicit GaussianRng(std::uint64_t seed) : core_(seed) {}

    /// Uniform in [0, 1), 53 significant bits.
    double uniform01() { return static_cast<double>(core_.next() >> 11) * 0x1.0p-53; }

    /// Standard normal, Box-Muller with the sine mate cached.
    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = 1.0 - uniform01(); // (0, 1], keeps the log finite
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double phi = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(phi);
        have_spare_ = true;
        return r * std::cos(phi);
    }

    /// Circularly symmetric complex Gaussian with E[|z|^2] = variance.
    std::complex<double> complex_gaussian(double variance) {
        const double s = std::sqrt(variance * 0.5);
        const double re = gaussian();
        const double im = gaussian();
        return {s * re, s * im};
    }

private:
    SplitMix64 core_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

/// Stream seed for one Monte Carlo trial: base XOR trial index. Trials are
/// order-independent because each one owns its own generator.
inline std::uint64_t trial_seed(std::uint64_t base_seed, std::uint64_t trial_index) {
    return base_seed ^ trial_index;
}

} // namespace vsrdoa
