#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>

namespace cfmimo {

/// splitmix64 mixing step; used for deriving independent sub-seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seed for one Monte Carlo trial: master seed xor-mixed with the trial index
/// so trials are independent and order-insensitive.
inline std::uint64_t trial_seed(std::uint64_t master, std::uint64_t trial_index) {
    return master ^ splitmix64(trial_index + 0x51ed2701ULL);
}

// Random draws are built from raw mt19937_64 output only. The std <random>
// distributions are implementation-defined, which would break bit-level
// reproducibility of generated scenes across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform in [0, 1) with 53 bits of randomness.
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform in (0, 1]; safe as a log argument.
    double uniform01_open_left() { return 1.0 - uniform01(); }

    bool bernoulli(double p) { return uniform01() < p; }

    /// Standard real normal via Box-Muller.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u = uniform01_open_left();
        const double v = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u));
        spare_ = r * std::sin(2.0 * kPi * v);
        have_spare_ = true;
        return r * std::cos(2.0 * kPi * v);
    }

    /// Circularly symmetric complex normal, unit variance (E|x|^2 = 1).
    std::complex<double> cnormal() {
        const double u = uniform01_open_left();
        const double v = uniform01();
        const double r = std::sqrt(-std::log(u));
        return {r * std::cos(2.0 * kPi * v), r * std::sin(2.0 * kPi * v)};
    }

    /// Uniform point in the disc of given radius centered at the origin.
    std::pair<double, double> disc_point(double radius) {
        const double r = radius * std::sqrt(uniform01());
        const double phi = 2.0 * kPi * uniform01();
        return {r * std::cos(phi), r * std::sin(phi)};
    }

    std::uint64_t raw() { return engine_(); }

private:
    static constexpr double kPi = 3.14159265358979323846;
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace cfmimo
