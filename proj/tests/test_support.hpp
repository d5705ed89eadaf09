#pragma once

// Shared helpers for the test suite. The numeric oracles here are kept
// deliberately independent of the library's own quadrature and estimator
// code paths: plain Simpson grids and direct Monte Carlo only.

#include <cmath>
#include <complex>
#include <functional>
#include <vector>

#include "cfmimo/rng.hpp"

namespace testsup {

using Complex = std::complex<double>;

/// Composite Simpson rule on [a, b] with n panels (n even).
inline double simpson(const std::function<double(double)>& f, double a, double b, int n) {
    if (n % 2) ++n;
    const double h = (b - a) / n;
    double acc = f(a) + f(b);
    for (int i = 1; i < n; ++i) acc += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return acc * h / 3.0;
}

/// 2D tensor Simpson over [ax,bx] x [ay,by].
inline double simpson2d(const std::function<double(double, double)>& f, double ax, double bx,
                        double ay, double by, int n) {
    return simpson(
        [&](double x) {
            return simpson([&, x](double y) { return f(x, y); }, ay, by, n);
        },
        ax, bx, n);
}

/// Brute-force posterior mean and variance of the spike-and-slab complex
/// scalar channel r = theta + CN(0, xi), theta ~ (1-lam) delta0 + lam CN(0, beta),
/// by 2D Simpson integration over the complex plane.
struct PosteriorOracle {
    Complex mean;
    double var;
};

inline PosteriorOracle posterior_oracle(Complex r, double lam, double beta, double xi,
                                        int n = 600) {
    const double spread = 6.0 * std::sqrt(beta) + 2.0 * std::abs(r);
    auto slab_density = [beta](double x, double y) {
        return std::exp(-(x * x + y * y) / beta) / (3.14159265358979323846 * beta);
    };
    auto like = [r, xi](double x, double y) {
        const double dx = r.real() - x, dy = r.imag() - y;
        return std::exp(-(dx * dx + dy * dy) / xi) / (3.14159265358979323846 * xi);
    };
    const double z_slab =
        simpson2d([&](double x, double y) { return like(x, y) * slab_density(x, y); }, -spread,
                  spread, -spread, spread, n);
    const double mx =
        simpson2d([&](double x, double y) { return x * like(x, y) * slab_density(x, y); },
                  -spread, spread, -spread, spread, n);
    const double my =
        simpson2d([&](double x, double y) { return y * like(x, y) * slab_density(x, y); },
                  -spread, spread, -spread, spread, n);
    const double m2 =
        simpson2d(
            [&](double x, double y) { return (x * x + y * y) * like(x, y) * slab_density(x, y); },
            -spread, spread, -spread, spread, n);

    const double spike_like = std::exp(-std::norm(r) / xi) / (3.14159265358979323846 * xi);
    const double z_total = (1.0 - lam) * spike_like + lam * z_slab;

    PosteriorOracle out;
    out.mean = Complex{lam * mx / z_total, lam * my / z_total};
    out.var = lam * m2 / z_total - std::norm(out.mean);
    return out;
}

/// Running mean and standard error.
struct Welford {
    long n = 0;
    double mean = 0.0;
    double m2 = 0.0;
    void add(double x) {
        ++n;
        const double d = x - mean;
        mean += d / n;
        m2 += d * (x - mean);
    }
    double variance() const { return n > 1 ? m2 / (n - 1) : 0.0; }
    double stderr_est() const { return n > 1 ? std::sqrt(variance() / n) : 0.0; }
};

}  // namespace testsup
