#include <catch_amalgamated.hpp>
#include <cmath>
#include <complex>

#include "cfmimo/denoiser.hpp"
#include "cfmimo/rng.hpp"
#include "test_support.hpp"

using namespace cfmimo;

namespace {
/// Wirtinger derivative of the posterior mean by central differences.
Complex fd_wirtinger(Complex r, const DenoiserParams& dp, double h = 1e-5) {
    const Complex dx =
        (denoise_mean(r + Complex{h, 0.0}, dp) - denoise_mean(r - Complex{h, 0.0}, dp)) /
        (2.0 * h);
    const Complex dy =
        (denoise_mean(r + Complex{0.0, h}, dp) - denoise_mean(r - Complex{0.0, h}, dp)) /
        (2.0 * h);
    return 0.5 * (dx - Complex{0.0, 1.0} * dy);
}
}  // namespace

TEST_CASE("denoiser degenerate activity probabilities") {
    const Complex r{0.8, -0.4};
    DenoiserParams wiener{1.0, 2.0, 0.5};
    CHECK(std::abs(denoise_mean(r, wiener) - 2.0 / 2.5 * r) < 1e-14);
    CHECK(denoise_var(r, wiener) == Catch::Approx(2.0 * 0.5 / 2.5).epsilon(1e-12));
    // Wiener posterior variance does not depend on the observation
    CHECK(denoise_var(Complex{5.0, 1.0}, wiener) ==
          Catch::Approx(denoise_var(Complex{0.0, 0.0}, wiener)).epsilon(1e-12));

    DenoiserParams off{0.0, 2.0, 0.5};
    CHECK(std::abs(denoise_mean(r, off)) == 0.0);
    CHECK(denoise_var(r, off) == 0.0);
}

TEST_CASE("denoiser mean matches a brute-force posterior oracle") {
    const DenoiserParams dp{0.1, 1.0, 0.1};
    const Complex r{1.0, 0.0};
    const auto oracle = testsup::posterior_oracle(r, dp.lam, dp.beta, dp.xi, 700);
    const Complex mean = denoise_mean(r, dp);
    CHECK(std::abs(mean - oracle.mean) < 1e-6);

    const DenoiserParams dp2{0.3, 2.5, 0.6};
    const Complex r2{-0.7, 1.1};
    const auto oracle2 = testsup::posterior_oracle(r2, dp2.lam, dp2.beta, dp2.xi, 700);
    CHECK(std::abs(denoise_mean(r2, dp2) - oracle2.mean) < 1e-6);
    CHECK(denoise_var(r2, dp2) == Catch::Approx(oracle2.var).epsilon(1e-5));
}

TEST_CASE("denoiser variance equals xi times the mean derivative") {
    const DenoiserParams dp{0.2, 2.0, 0.3};
    const Complex r{0.5, 0.0};
    const Complex d = fd_wirtinger(r, dp);
    CHECK(std::abs(d.imag()) < 1e-7);
    CHECK(denoise_var(r, dp) == Catch::Approx(dp.xi * d.real()).epsilon(1e-5));

    Rng rng(11);
    for (int k = 0; k < 50; ++k) {
        DenoiserParams rp{0.05 + 0.4 * rng.uniform01(), 0.2 + 3.0 * rng.uniform01(),
                          0.05 + 1.0 * rng.uniform01()};
        const Complex rr = 2.0 * rng.cnormal();
        const Complex dd = fd_wirtinger(rr, rp);
        const double var = denoise_var(rr, rp);
        CHECK(std::abs(var - rp.xi * dd.real()) <
              1e-4 * std::max(1e-8, std::abs(var)) + 1e-10);
    }
}

TEST_CASE("denoiser is phase equivariant and variance is bounded") {
    Rng rng(23);
    for (int k = 0; k < 200; ++k) {
        const DenoiserParams dp{0.3 * rng.uniform01() + 0.01, 0.5 + 2.0 * rng.uniform01(),
                                0.05 + 0.5 * rng.uniform01()};
        const Complex r = 3.0 * rng.cnormal();
        const double phi = 2.0 * 3.14159265358979323846 * rng.uniform01();
        const Complex rot{std::cos(phi), std::sin(phi)};
        CHECK(std::abs(denoise_mean(rot * r, dp) - rot * denoise_mean(r, dp)) < 1e-12);
        CHECK(denoise_var(rot * r, dp) == Catch::Approx(denoise_var(r, dp)).margin(1e-12));
        const double v = denoise_var(r, dp);
        CHECK(v >= 0.0);
        CHECK(v <= dp.beta + 1e-12);
    }
}

TEST_CASE("denoiser guards against overflow in the activity exponent") {
    const DenoiserParams dp{1e-8, 1.0, 1e-6};
    // enormous |r|^2 drives the exponent far negative; G must clamp to 1
    const Complex big{1e6, 0.0};
    CHECK(activity_posterior(std::norm(big), dp) == Catch::Approx(1.0));
    // zero observation with tiny lambda drives it far positive; G -> 0
    CHECK(activity_posterior(0.0, dp) < 1e-7);
    CHECK(std::isfinite(denoise_var(big, dp)));
}
