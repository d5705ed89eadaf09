#pragma once

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace cfmimo {

/// Thrown when the adaptive rule cannot reach the requested tolerance.
/// Carries the best available estimate so callers can degrade gracefully.
class QuadratureError : public std::runtime_error {
public:
    QuadratureError(const std::string& what, double best, double err)
        : std::runtime_error(what), best_estimate(best), error_estimate(err) {}
    double best_estimate;
    double error_estimate;
};

namespace detail {
// Adaptive Gauss-Kronrod 15 on a finite interval. Accepts when the estimated
// error is below tol in the absolute-or-relative sense.
template <typename F>
double quad_finite(F&& f, double a, double b, double tol) {
    using Rule = boost::math::quadrature::gauss_kronrod<double, 15>;
    double error = 0.0;
    double l1 = 0.0;
    const double value = Rule::integrate(f, a, b, /*max_depth=*/18, tol, &error, &l1);
    const double scale = std::max(1.0, l1);
    if (!(error <= tol * scale) || !std::isfinite(value)) {
        throw QuadratureError("quadrature did not converge on finite interval", value, error);
    }
    return value;
}

// Double-exponential rule for (a, inf); the abscissa spacing adapts to the
// integrand's decay, so no rate hint is needed.
template <typename F>
double quad_semi_infinite(F&& f, double a, double tol) {
    thread_local boost::math::quadrature::exp_sinh<double> rule;
    double error = 0.0;
    double l1 = 0.0;
    double value;
    // The rule probes astronomically large abscissas; polynomial factors can
    // overflow to inf before the exponential factor underflows, yielding NaN
    // where the true value is 0. All supported integrands decay
    // exponentially, so anything non-finite that far out is treated as zero.
    auto shifted = [&f, a](double t) {
        const double v = f(a + t);
        if (!std::isfinite(v) && t > 1e100) return 0.0;
        return v;
    };
    try {
        value = rule.integrate(shifted, tol, &error, &l1);
    } catch (const std::exception& e) {
        throw QuadratureError(std::string("semi-infinite quadrature failed: ") + e.what(), 0.0,
                              std::numeric_limits<double>::infinity());
    }
    const double scale = std::max(1.0, l1);
    if (!(error <= 100.0 * tol * scale) || !std::isfinite(value)) {
        throw QuadratureError("quadrature did not converge on semi-infinite interval", value,
                              error);
    }
    return value;
}
}  // namespace detail

/// Integral of f over (a, b) to tolerance tol (absolute, or relative to the
/// L1 mass of the integrand, whichever is looser). b may be +infinity.
template <typename F>
double quad(F&& f, double a, double b, double tol = 1e-10) {
    if (!(tol > 0.0)) throw std::invalid_argument("quad: tol must be positive");
    if (std::isinf(b)) return detail::quad_semi_infinite(f, a, tol);
    if (!(a < b)) throw std::invalid_argument("quad: requires a < b");
    return detail::quad_finite(f, a, b, tol);
}

inline constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace cfmimo
