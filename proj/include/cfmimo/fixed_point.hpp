#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cfmimo {

struct FixedPointConfig {
    int max_iters = 500;
    double rel_tol = 1e-9;
    double damping = 0.7;  // in (0, 1]; 1 is undamped
    double init = 1.0;     // starting point, must be > 0

    void validate() const {
        if (max_iters <= 0) throw std::invalid_argument("max_iters must be positive");
        if (!(rel_tol > 0.0)) throw std::invalid_argument("rel_tol must be positive");
        if (!(damping > 0.0) || !(damping <= 1.0))
            throw std::invalid_argument("damping must lie in (0, 1]");
        if (!(init > 0.0)) throw std::invalid_argument("init must be positive");
    }
};

struct FixedPointResult {
    double value = 0.0;
    double residual = 0.0;  // |value - map(value)| / value at exit
    int iters = 0;
    std::vector<double> trace;  // iterate sequence including the start point
};

class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& what, std::vector<double> trace_in)
        : std::runtime_error(what), trace(std::move(trace_in)) {}
    std::vector<double> trace;
};

/// Damped fixed-point iteration x <- (1-d)x + d*map(x) on (0, inf).
/// Stops when the relative update |dx|/x falls below rel_tol.
inline FixedPointResult solve_fixed_point(const std::function<double(double)>& map,
                                          const FixedPointConfig& cfg = {}) {
    cfg.validate();
    double x = cfg.init;
    std::vector<double> trace{x};
    for (int it = 1; it <= cfg.max_iters; ++it) {
        const double fx = map(x);
        if (!std::isfinite(fx)) {
            throw SolverError("fixed-point map produced a non-finite value", std::move(trace));
        }
        const double x_next = (1.0 - cfg.damping) * x + cfg.damping * fx;
        trace.push_back(x_next);
        const double denom = std::max(std::abs(x_next), 1e-300);
        if (std::abs(x_next - x) / denom <= cfg.rel_tol) {
            const double res = std::abs(x_next - map(x_next)) / std::max(std::abs(x_next), 1e-300);
            return {x_next, res, it, std::move(trace)};
        }
        x = x_next;
    }
    throw SolverError("fixed-point iteration did not converge within max_iters", std::move(trace));
}

}  // namespace cfmimo
