#pragma once

#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "cfmimo/denoiser.hpp"
#include "cfmimo/types.hpp"

namespace cfmimo {

/// Per-iteration quantities of one CB-AMP run.
struct AmpState {
    CVec theta_hat;  // current estimate, length N
    Vec kappa_hat;   // per-user estimated variance, length N, >= 0
    Vec z;           // per-pilot variance aggregate, length L, >= 0
    CVec p;          // corrected residual prediction, length L
    CVec r_hat;      // decoupled pseudo-observations, length N
    Vec tau;         // per-user decoupled noise variance, length N, >= 0
    int iter = 0;

    double mean_tau() const { return tau.size() ? tau.mean() : 0.0; }
};

struct AmpOptions {
    int max_iters = 200;
    double stop_tol = 1e-6;  // relative change of theta_hat
    bool keep_trace = true;  // false keeps only the final state
};

struct AmpResult {
    std::vector<AmpState> trace;  // all iterations, or just the last one
    int iters = 0;
    bool converged = false;

    const AmpState& final_state() const {
        if (trace.empty()) throw std::logic_error("empty AMP trace");
        return trace.back();
    }
};

class AmpDivergenceError : public std::runtime_error {
public:
    AmpDivergenceError(int iter_in)
        : std::runtime_error("CB-AMP diverged (non-finite values) at iteration " +
                             std::to_string(iter_in)),
          iteration(iter_in) {}
    int iteration;
};

inline double empirical_mse(const CVec& theta_true, const CVec& theta_hat) {
    if (theta_true.size() != theta_hat.size())
        throw std::invalid_argument("empirical_mse: length mismatch");
    if (theta_true.size() == 0) return 0.0;
    return (theta_true - theta_hat).squaredNorm() / static_cast<double>(theta_true.size());
}

/// One CB-AMP run for a single AP.
///
/// Initialization: theta_hat = 0 (prior mean), kappa_hat_i = lam * beta_i
/// (prior variance of the effective channel), z = ones, p = y. Each
/// iteration updates the pilot-side variances z, the corrected prediction p
/// with its Onsager term, the decoupled observations (r_hat, tau), and then
/// applies the Bernoulli-Gaussian posterior per user. Runs undamped; a
/// non-finite value raises AmpDivergenceError instead of silently damping.
inline AmpResult amp_iterate(const CVec& y, const CMat& phi, const Vec& beta_col, double lam,
                             double noise_var, const AmpOptions& opt = {}) {
    const int L = static_cast<int>(phi.rows());
    const int N = static_cast<int>(phi.cols());
    if (y.size() != L) throw std::invalid_argument("amp_iterate: y length must equal pilot rows");
    if (beta_col.size() != N) throw std::invalid_argument("amp_iterate: beta length mismatch");
    if (!(noise_var > 0.0)) throw std::invalid_argument("amp_iterate: noise_var must be positive");
    if (!(lam >= 0.0) || !(lam <= 1.0)) throw std::invalid_argument("amp_iterate: bad lambda");

    const Mat phi_abs2 = phi.cwiseAbs2();

    AmpState st;
    st.theta_hat = CVec::Zero(N);
    st.kappa_hat = lam * beta_col;
    st.z = Vec::Ones(L);
    st.p = y;
    st.r_hat = CVec::Zero(N);
    st.tau = Vec::Zero(N);
    st.iter = 0;

    AmpResult result;
    if (opt.keep_trace) result.trace.push_back(st);

    Vec z_prev = st.z;
    CVec p_prev = st.p;

    for (int t = 1; t <= opt.max_iters; ++t) {
        const Vec z = phi_abs2 * st.kappa_hat;
        const CVec p = (phi * st.theta_hat).eval() -
                       ((z.array() / (noise_var + z_prev.array())).matrix().asDiagonal() *
                        (y - p_prev));

        const Vec inv_nz = (noise_var + z.array()).inverse().matrix();
        const Vec tau = (phi_abs2.transpose() * inv_nz).array().inverse().matrix();
        const CVec scaled_res = inv_nz.asDiagonal() * (y - p);
        const CVec r_hat = st.theta_hat + tau.asDiagonal() * (phi.adjoint() * scaled_res);

        CVec theta_next(N);
        Vec kappa_next(N);
        for (int i = 0; i < N; ++i) {
            const DenoiserParams dp{lam, beta_col(i), tau(i)};
            theta_next(i) = denoise_mean(r_hat(i), dp);
            kappa_next(i) = denoise_var(r_hat(i), dp);
        }

        if (!theta_next.allFinite() || !tau.allFinite() || !z.allFinite())
            throw AmpDivergenceError(t);

        const double change = (theta_next - st.theta_hat).norm();
        const double scale = std::max(theta_next.norm(), 1e-300);

        st.theta_hat = std::move(theta_next);
        st.kappa_hat = std::move(kappa_next);
        st.z = z;
        st.p = p;
        st.r_hat = r_hat;
        st.tau = tau;
        st.iter = t;
        if (opt.keep_trace)
            result.trace.push_back(st);
        else if (t == opt.max_iters)
            result.trace = {st};

        result.iters = t;
        if (change / scale <= opt.stop_tol) {
            result.converged = true;
            if (!opt.keep_trace) result.trace = {st};
            break;
        }
        z_prev = st.z;
        p_prev = st.p;
    }
    if (!opt.keep_trace && result.trace.empty()) result.trace = {st};
    return result;
}

/// CSV dump of the iteration summary: iter, mean tau, empirical MSE.
inline void amp_trace_csv(const AmpResult& result, const CVec& theta_true, std::ostream& os) {
    os << "iter,mean_tau,empirical_mse\n";
    for (const auto& st : result.trace) {
        os << st.iter << ',' << st.mean_tau() << ',' << empirical_mse(theta_true, st.theta_hat)
           << '\n';
    }
}

}  // namespace cfmimo
