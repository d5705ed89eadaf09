#pragma once

#include <Eigen/Cholesky>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "cfmimo/channel.hpp"
#include "cfmimo/fixed_point.hpp"
#include "cfmimo/types.hpp"

namespace cfmimo {

struct OracleResult {
    CVec theta_hat;  // full length N, exactly zero off the support
    double mse = 0.0;
    int support_size = 0;
};

class SingularSystemError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {
/// LDLT of Phi_s^H Phi_s + noise_var Lambda_s^{-1} with a diagonal-based
/// conditioning guard.
inline Eigen::LDLT<CMat> oracle_factor(const CMat& phi_s, const Vec& beta_s, double noise_var) {
    const int k = static_cast<int>(phi_s.cols());
    CMat gram = phi_s.adjoint() * phi_s;
    for (int i = 0; i < k; ++i) {
        if (!(beta_s(i) > 0.0))
            throw std::invalid_argument("oracle: support variances must be positive");
        gram(i, i) += noise_var / beta_s(i);
    }
    Eigen::LDLT<CMat> ldlt(gram);
    if (ldlt.info() != Eigen::Success)
        throw SingularSystemError("oracle system factorization failed");
    const Vec d = ldlt.vectorD().real();
    const double dmax = d.maxCoeff();
    const double dmin = d.minCoeff();
    if (!(dmin > 0.0) || dmax / dmin > 1e12)
        throw SingularSystemError("oracle system numerically singular");
    return ldlt;
}
}  // namespace detail

/// Known-support MMSE estimate. support holds 0/1 flags over all N users;
/// phi is the full pilot matrix and beta the per-user variances for this AP.
inline OracleResult oracle_estimate(const CVec& y, const CMat& phi, const Vec& beta,
                                    const std::vector<int>& support, double noise_var) {
    const int N = static_cast<int>(phi.cols());
    if (static_cast<int>(support.size()) != N || beta.size() != N)
        throw std::invalid_argument("oracle_estimate: size mismatch");
    std::vector<int> idx;
    for (int i = 0; i < N; ++i)
        if (support[i]) idx.push_back(i);

    OracleResult out;
    out.theta_hat = CVec::Zero(N);
    out.support_size = static_cast<int>(idx.size());
    if (idx.empty()) return out;

    const int k = out.support_size;
    CMat phi_s(phi.rows(), k);
    Vec beta_s(k);
    for (int c = 0; c < k; ++c) {
        phi_s.col(c) = phi.col(idx[c]);
        beta_s(c) = beta(idx[c]);
    }
    const auto ldlt = detail::oracle_factor(phi_s, beta_s, noise_var);
    const CVec sol = ldlt.solve(phi_s.adjoint() * y);
    for (int c = 0; c < k; ++c) out.theta_hat(idx[c]) = sol(c);
    return out;
}

/// Exact conditional MSE of the oracle estimate:
/// (1/N) tr((Phi_s^H Phi_s / sigma0^2 + Lambda_s^{-1})^{-1}).
inline double oracle_mse_exact(const CMat& phi, const Vec& beta, const std::vector<int>& support,
                               double noise_var, int num_users) {
    const int N = static_cast<int>(phi.cols());
    if (static_cast<int>(support.size()) != N || beta.size() != N)
        throw std::invalid_argument("oracle_mse_exact: size mismatch");
    std::vector<int> idx;
    for (int i = 0; i < N; ++i)
        if (support[i]) idx.push_back(i);
    if (idx.empty()) return 0.0;

    const int k = static_cast<int>(idx.size());
    CMat phi_s(phi.rows(), k);
    Vec beta_s(k);
    for (int c = 0; c < k; ++c) {
        phi_s.col(c) = phi.col(idx[c]);
        beta_s(c) = beta(idx[c]);
    }
    const auto ldlt = detail::oracle_factor(phi_s, beta_s, noise_var);
    // tr((A/sigma0^2)^{-1}) with A the factored matrix.
    const CMat inv = ldlt.solve(CMat::Identity(k, k));
    return noise_var * inv.real().trace() / static_cast<double>(num_users);
}

/// Large-system MSE of oracle estimation: the unique root of
/// E{beta / (beta + s)} = (s - sigma0^2) / (lam gamma s) on (sigma0^2, inf)
/// gives MSE = (s - sigma0^2) / gamma. The left side decreases and the right
/// side increases in s, so the root is bracketed and bisected.
struct OracleAsymptotic {
    double varsigma = 0.0;
    double mse = 0.0;
};

inline OracleAsymptotic oracle_mse_asymptotic(double lam, double gamma, double noise_var,
                                              const BetaDist& dist) {
    if (!(lam * gamma > 0.0))
        throw std::domain_error("oracle_mse_asymptotic: lam * gamma must be positive");
    if (!(noise_var > 0.0))
        throw std::domain_error("oracle_mse_asymptotic: noise_var must be positive");

    auto gap = [&](double s) {
        const double lhs = dist.expect([s](double b) { return b / (b + s); });
        const double rhs = (s - noise_var) / (lam * gamma * s);
        return lhs - rhs;  // positive at s -> sigma0^2+, negative past the root
    };

    double lo = noise_var * (1.0 + 1e-12);
    double hi = noise_var + lam * gamma * dist.mean() + noise_var;
    int grow = 0;
    while (gap(hi) > 0.0) {
        hi *= 2.0;
        if (++grow > 200) throw SolverError("oracle asymptotic root not bracketed", {});
    }
    if (!(gap(lo) > 0.0)) throw SolverError("oracle asymptotic root not bracketed", {});

    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (gap(mid) > 0.0)
            lo = mid;
        else
            hi = mid;
        if ((hi - lo) / hi < 1e-13) break;
    }
    OracleAsymptotic out;
    out.varsigma = 0.5 * (lo + hi);
    out.mse = (out.varsigma - noise_var) / gamma;
    return out;
}

}  // namespace cfmimo
