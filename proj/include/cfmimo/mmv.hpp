#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "cfmimo/cb_amp.hpp"
#include "cfmimo/detection.hpp"
#include "cfmimo/types.hpp"

namespace cfmimo {

/// Joint estimation across all M APs. Each AP column runs the single-AP
/// recursion (pilot-side variances, Onsager correction, decoupled
/// observations) on its own state; the columns are coupled only through the
/// rowwise posterior, which shares one activity variable per user across all
/// APs. At M = 1 every quantity collapses to the single-AP recursion exactly.
struct MmvState {
    CMat theta_hat;  // N x M
    CMat residual;   // L x M, y - p at the last iteration
    CMat r_hat;      // N x M decoupled observations
    Mat tau_cols;    // N x M per-user, per-AP decoupled noise variance
    Vec tau_rows;    // per-user row average of tau_cols
    double tau = 0.0;  // scalar summary: mean of tau_rows
    int iter = 0;
};

struct MmvResult {
    MmvState state;
    std::vector<double> tau_history;   // mean tau per iteration
    std::vector<CMat> theta_trace;     // per-iteration estimates when traced
    int iters = 0;
    bool converged = false;
};

/// Rowwise posterior mean at a common noise level tau, i.e. the vector
/// denoiser used by the centralized estimator.
inline CVec mmv_denoise_row(const CVec& z_row, const Vec& beta_row, double lam, double tau) {
    if (!(tau > 0.0)) throw std::domain_error("mmv_denoise_row: tau must be positive");
    return centralized_mmse(z_row, beta_row, tau, lam);
}

namespace detail {
/// Activity posterior of one user row when each AP column carries its own
/// decoupled noise level. With equal noise levels this is the centralized
/// rule's posterior; at M = 1 it is the scalar activity posterior.
inline double row_activity_posterior_het(const CVec& r_row, const Vec& beta_row,
                                         const Vec& tau_row, double lam) {
    if (lam <= 0.0) return 0.0;
    if (lam >= 1.0) return 1.0;
    const int M = static_cast<int>(r_row.size());
    double score = 0.0;
    for (int m = 0; m < M; ++m) {
        const double b = beta_row(m), t = tau_row(m);
        score += b * std::norm(r_row(m)) / (t * (b + t)) - std::log1p(b / t);
    }
    const double e = std::clamp(std::log((1.0 - lam) / lam) - score, -700.0, 700.0);
    return 1.0 / (1.0 + std::exp(e));
}
}  // namespace detail

/// Joint AMP over the full received matrix Y (L x M).
inline MmvResult mmv_amp(const CMat& y, const CMat& phi, const Mat& beta, double lam,
                         double noise_var, const AmpOptions& opt = {}) {
    const int L = static_cast<int>(phi.rows());
    const int N = static_cast<int>(phi.cols());
    const int M = static_cast<int>(y.cols());
    if (y.rows() != L) throw std::invalid_argument("mmv_amp: Y rows must equal pilot rows");
    if (beta.rows() != N || beta.cols() != M)
        throw std::invalid_argument("mmv_amp: beta must be users x APs");
    if (!(noise_var > 0.0)) throw std::invalid_argument("mmv_amp: noise_var must be positive");
    if (!(lam >= 0.0) || !(lam <= 1.0)) throw std::invalid_argument("mmv_amp: bad lambda");

    const Mat phi_abs2 = phi.cwiseAbs2();

    CMat theta = CMat::Zero(N, M);
    Mat kappa = lam * beta;
    Mat z_prev = Mat::Ones(L, M);
    CMat p_prev = y;

    MmvResult result;
    MmvState st;
    Mat z(L, M), tau(N, M);
    CMat p(L, M), r_hat(N, M);
    for (int t = 1; t <= opt.max_iters; ++t) {
        for (int m = 0; m < M; ++m) {
            z.col(m) = phi_abs2 * kappa.col(m);
            p.col(m) = phi * theta.col(m) -
                       ((z.col(m).array() / (noise_var + z_prev.col(m).array()))
                            .matrix()
                            .asDiagonal() *
                        (y.col(m) - p_prev.col(m)));
            const Vec inv_nz = (noise_var + z.col(m).array()).inverse().matrix();
            tau.col(m) = (phi_abs2.transpose() * inv_nz).array().inverse().matrix();
            const CVec scaled = inv_nz.asDiagonal() * (y.col(m) - p.col(m));
            r_hat.col(m) = theta.col(m) + tau.col(m).asDiagonal() * (phi.adjoint() * scaled);
        }

        CMat theta_next(N, M);
        for (int i = 0; i < N; ++i) {
            const CVec r_row = r_hat.row(i).transpose();
            const Vec beta_row = beta.row(i).transpose();
            const Vec tau_row = tau.row(i).transpose();
            const double pa =
                detail::row_activity_posterior_het(r_row, beta_row, tau_row, lam);
            for (int m = 0; m < M; ++m) {
                const double w = beta_row(m) / (beta_row(m) + tau_row(m));
                const double v = beta_row(m) * tau_row(m) / (beta_row(m) + tau_row(m));
                theta_next(i, m) = pa * w * r_row(m);
                kappa(i, m) = pa * v + pa * (1.0 - pa) * w * w * std::norm(r_row(m));
            }
        }

        if (!theta_next.allFinite() || !tau.allFinite()) throw AmpDivergenceError(t);

        const double change = (theta_next - theta).norm();
        const double scale = std::max(theta_next.norm(), 1e-300);
        theta = std::move(theta_next);

        st.theta_hat = theta;
        st.residual = y - p;
        st.r_hat = r_hat;
        st.tau_cols = tau;
        st.tau_rows = tau.rowwise().mean();
        st.tau = st.tau_rows.mean();
        st.iter = t;
        result.tau_history.push_back(st.tau);
        if (opt.keep_trace) result.theta_trace.push_back(theta);
        result.iters = t;
        if (change / scale <= opt.stop_tol) {
            result.converged = true;
            break;
        }
        z_prev = z;
        p_prev = p;
    }
    result.state = std::move(st);
    return result;
}

}  // namespace cfmimo
