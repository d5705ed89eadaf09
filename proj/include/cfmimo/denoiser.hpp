#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>

#include "cfmimo/types.hpp"

namespace cfmimo {

/// Scalar Bernoulli-Gaussian channel: theta is 0 with probability 1-lam and
/// CN(0, beta) with probability lam; the observation is theta + CN(0, xi).
struct DenoiserParams {
    double lam;   // activity probability
    double beta;  // prior variance of the active component
    double xi;    // observation noise variance

    void validate() const {
        if (!(lam >= 0.0) || !(lam <= 1.0)) throw std::domain_error("lam must lie in [0, 1]");
        if (!(beta > 0.0)) throw std::domain_error("beta must be positive");
        if (!(xi > 0.0)) throw std::domain_error("xi must be positive");
    }
};

/// Posterior activity probability G(|r|^2; xi, lam, beta). Evaluated in
/// log space; the exponent is clamped at +-700 before exponentiation.
inline double activity_posterior(double r_abs2, const DenoiserParams& dp) {
    if (dp.lam <= 0.0) return 0.0;
    if (dp.lam >= 1.0) return 1.0;
    const double log_odds = std::log((1.0 - dp.lam) / dp.lam) + std::log1p(dp.beta / dp.xi) -
                            dp.beta * r_abs2 / (dp.xi * (dp.beta + dp.xi));
    const double e = std::clamp(log_odds, -700.0, 700.0);
    return 1.0 / (1.0 + std::exp(e));
}

/// Posterior mean: G * beta/(beta+xi) * r.
inline Complex denoise_mean(Complex r, const DenoiserParams& dp) {
    dp.validate();
    const double g = activity_posterior(std::norm(r), dp);
    return g * (dp.beta / (dp.beta + dp.xi)) * r;
}

/// Posterior variance; also equals xi times the input derivative of the
/// posterior mean.
inline double denoise_var(Complex r, const DenoiserParams& dp) {
    dp.validate();
    if (dp.lam <= 0.0) return 0.0;
    const double u = std::norm(r);
    const double g = activity_posterior(u, dp);
    const double denom = (dp.beta + dp.xi) * (dp.beta + dp.xi);
    return dp.beta * g *
           ((dp.beta * (dp.xi + u) + dp.xi * dp.xi) / denom - g * dp.beta * u / denom);
}

}  // namespace cfmimo
