#pragma once

#include <cmath>
#include <stdexcept>

#include "cfmimo/quadrature.hpp"

namespace cfmimo {

/// omega(a, b) = integral over t in (0, inf) of t e^{-bt} / (1 + a e^{-t}).
/// Requires a >= 0, b > 0.
inline double omega(double a, double b, double tol = 1e-11) {
    if (!(a >= 0.0) || !(b > 0.0)) throw std::domain_error("omega: requires a >= 0, b > 0");
    auto integrand = [a, b](double t) {
        return t * std::exp(-b * t) / (1.0 + a * std::exp(-t));
    };
    return quad(integrand, 0.0, kInf, tol);
}

/// omega2(a, b, c, d) = integral of t e^{-bt} (1 - c e^{-dt}) / (1 + a e^{-t})^2.
/// Requires a >= 0, b > 0, d >= 0; c may be any real (the factor stays bounded
/// for d >= 0, and negative c is what the mismatched-noise MSE needs).
inline double omega2(double a, double b, double c, double d, double tol = 1e-11) {
    if (!(a >= 0.0) || !(b > 0.0) || !(d >= 0.0))
        throw std::domain_error("omega2: requires a >= 0, b > 0, d >= 0");
    auto integrand = [a, b, c, d](double t) {
        const double g = 1.0 + a * std::exp(-t);
        return t * std::exp(-b * t) * (1.0 - c * std::exp(-d * t)) / (g * g);
    };
    return quad(integrand, 0.0, kInf, tol);
}

}  // namespace cfmimo
