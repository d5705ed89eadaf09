#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>

#include "cfmimo/channel.hpp"
#include "cfmimo/denoiser.hpp"
#include "cfmimo/fixed_point.hpp"
#include "cfmimo/quadrature.hpp"
#include "cfmimo/special_integrals.hpp"
#include "cfmimo/types.hpp"

namespace cfmimo {

enum class NoiseSolver { Property1, StateEvolution };

/// Solved effective noise levels of the decoupled scalar channel.
struct EffectiveNoise {
    double sigma_eff_sq = 0.0;
    double sigma_peff_sq = 0.0;
    NoiseSolver method = NoiseSolver::Property1;
    double residual = 0.0;
    int iters = 0;
    // Set when independent initializations land on different fixed points;
    // alt_sigma_eff_sq carries the second candidate.
    bool ambiguous = false;
    std::optional<double> alt_sigma_eff_sq;
};

/// Posterior-mean estimator of the unit-variance Bernoulli-Gaussian scalar
/// channel at postulated noise level eta_p.
inline Complex scalar_pmmse(Complex z, double lam, double eta_p) {
    if (!(eta_p > 0.0)) throw std::domain_error("scalar_pmmse: eta_p must be positive");
    return denoise_mean(z, DenoiserParams{lam, 1.0, eta_p});
}

/// MSE of scalar_pmmse when the true noise level equals the postulated one.
inline double mse_matched(double lam, double eta_p) {
    if (!(lam > 0.0) || !(lam < 1.0)) throw std::domain_error("mse_matched: lam must lie in (0,1)");
    if (!(eta_p > 0.0)) throw std::domain_error("mse_matched: eta_p must be positive");
    const double a = (1.0 + eta_p) * (1.0 - lam) / (lam * eta_p);
    return lam * (1.0 - eta_p * eta_p / (1.0 + eta_p) * omega(a, eta_p));
}

/// MSE of scalar_pmmse built for noise eta_p while the channel actually runs
/// at noise eta. Reduces to mse_matched when eta == eta_p.
inline double mse_mismatched(double lam, double eta_p, double eta) {
    if (!(lam > 0.0) || !(lam < 1.0))
        throw std::domain_error("mse_mismatched: lam must lie in (0,1)");
    if (!(eta_p > 0.0) || !(eta > 0.0))
        throw std::domain_error("mse_mismatched: noise levels must be positive");
    const double a_bar = (1.0 + eta_p) * (1.0 - lam) / (lam * eta_p);
    const double b_bar = eta_p * (1.0 + eta_p) / (1.0 + eta);
    const double c_bar = (1.0 + eta) * (1.0 - lam) / (lam * eta);
    const double d_bar = b_bar / eta;
    // The cross-term integral carries a plus sign on the c_bar factor; see
    // the matched-case reduction tests. Passing -c_bar realizes
    // (1 + c_bar e^{-d t}) through the (1 - c e^{-d t}) kernel.
    const double cross = omega2(a_bar, b_bar, -c_bar, d_bar);
    return lam * (1.0 -
                  2.0 * eta_p * eta_p * (1.0 + eta_p) / ((1.0 + eta) * (1.0 + eta)) *
                      omega(a_bar, b_bar) +
                  eta_p * eta_p / (1.0 + eta) * cross);
}

/// Asymptotic MSE of matched MMSE estimation of the effective channel at a
/// given decoupled noise level, as a direct double integral over the
/// distance law and the auxiliary variable t. Kept free of the omega
/// integrals so the two noise solvers stay numerically independent.
inline double theory_mse(double sigma_eff_sq, double lam, const BetaDist& dist,
                         double tol = 1e-10) {
    if (!(sigma_eff_sq > 0.0)) throw std::domain_error("theory_mse: sigma_eff_sq must be positive");
    if (lam == 0.0) return 0.0;
    if (!(lam > 0.0) || !(lam < 1.0)) throw std::domain_error("theory_mse: lam must lie in (0,1)");
    const double s2 = sigma_eff_sq;
    // Inner integral of f(sigma_eff, beta, t) over t with the density factor
    // removed; the integrand decays like e^{-t s2/beta}.
    auto inner = [lam, s2, tol](double beta) {
        auto f = [lam, s2, beta](double t) {
            const double shrink = beta / s2 + 1.0;
            const double mix = lam / (beta + s2) + (1.0 - lam) * std::exp(-t) / s2;
            return lam * t * std::exp(-t * s2 / beta) / (shrink * shrink * mix);
        };
        return quad(f, 0.0, kInf, tol);
    };
    const double recovered = dist.expect(inner, tol);
    return lam * (dist.mean() - recovered);
}

namespace detail {
/// Common driver: damped fixed point of s -> sigma0^2 + gamma * mse(s).
inline FixedPointResult solve_noise_map(const std::function<double(double)>& mse_of_s,
                                        double noise_var, double gamma, double init,
                                        double rel_tol) {
    FixedPointConfig cfg;
    cfg.max_iters = 1000;
    cfg.rel_tol = rel_tol;
    cfg.damping = 0.7;
    cfg.init = init;
    return solve_fixed_point(
        [&](double s) { return noise_var + gamma * mse_of_s(s); }, cfg);
}
}  // namespace detail

/// Effective noise by the coupled equations: sigma_peff^2 solves its own
/// matched equation, then sigma_eff^2 solves the mismatched one given it.
/// Expectations over beta run through the distance-space quadrature of dist.
inline EffectiveNoise solve_property1(double lam, double gamma, double noise_var,
                                      const BetaDist& dist, double rel_tol = 1e-8) {
    if (!(gamma > 0.0)) throw std::domain_error("solve_property1: gamma must be positive");
    if (!(noise_var > 0.0)) throw std::domain_error("solve_property1: noise_var must be positive");
    EffectiveNoise out;
    out.method = NoiseSolver::Property1;
    if (lam == 0.0) {
        out.sigma_eff_sq = out.sigma_peff_sq = noise_var;
        return out;
    }

    auto matched_mse = [&](double s) {
        return dist.expect([&](double beta) { return beta * mse_matched(lam, s / beta); });
    };
    const auto peff = detail::solve_noise_map(matched_mse, noise_var, gamma, noise_var, rel_tol);

    const double sp = peff.value;
    auto mismatched_mse = [&](double s) {
        return dist.expect(
            [&](double beta) { return beta * mse_mismatched(lam, sp / beta, s / beta); });
    };
    const auto eff = detail::solve_noise_map(mismatched_mse, noise_var, gamma, sp, rel_tol);

    out.sigma_peff_sq = sp;
    out.sigma_eff_sq = eff.value;
    out.residual = std::max(peff.residual, eff.residual);
    out.iters = peff.iters + eff.iters;
    return out;
}

/// Effective noise from the converged state evolution: the single matched
/// equation s = sigma0^2 + gamma * theory_mse(s). Run from both a low and a
/// high starting point; disagreement beyond tolerance is reported as an
/// ambiguity instead of silently picking one solution.
inline EffectiveNoise solve_state_evolution(double lam, double gamma, double noise_var,
                                            const BetaDist& dist, double rel_tol = 1e-8) {
    if (!(gamma > 0.0)) throw std::domain_error("solve_state_evolution: gamma must be positive");
    if (!(noise_var > 0.0))
        throw std::domain_error("solve_state_evolution: noise_var must be positive");
    EffectiveNoise out;
    out.method = NoiseSolver::StateEvolution;
    if (lam == 0.0) {
        out.sigma_eff_sq = out.sigma_peff_sq = noise_var;
        return out;
    }

    auto mse = [&](double s) { return theory_mse(s, lam, dist); };
    const double high_init = noise_var + gamma * lam * dist.mean();
    const auto low = detail::solve_noise_map(mse, noise_var, gamma, noise_var, rel_tol);
    const auto high = detail::solve_noise_map(mse, noise_var, gamma, high_init, rel_tol);

    out.sigma_eff_sq = low.value;
    out.sigma_peff_sq = low.value;  // matched posterior case
    out.residual = std::max(low.residual, high.residual);
    out.iters = low.iters + high.iters;
    if (std::abs(high.value - low.value) > 1e-3 * std::abs(low.value)) {
        out.ambiguous = true;
        out.alt_sigma_eff_sq = high.value;
    }
    return out;
}

}  // namespace cfmimo
