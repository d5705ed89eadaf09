#pragma once

#include <algorithm>
#include <boost/math/distributions/binomial.hpp>
#include <cmath>
#include <stdexcept>

#include "cfmimo/channel.hpp"
#include "cfmimo/types.hpp"

namespace cfmimo {

/// Single-AP likelihood ratio test on the decoupled statistic |z|^2.
struct LrtResult {
    double threshold = 0.0;  // l' at the mean beta when averaged over a distribution
    double p_false_alarm = 0.0;
    double p_miss = 0.0;
    double p_err = 0.0;
};

/// Decision threshold on |z|^2 for a user with large-scale coefficient beta.
inline double lrt_threshold(double sigma_eff_sq, double lam, double beta) {
    if (!(sigma_eff_sq > 0.0) || !(beta > 0.0) || !(lam > 0.0) || !(lam < 1.0))
        throw std::domain_error("lrt_threshold: bad arguments");
    return sigma_eff_sq * (beta + sigma_eff_sq) / beta *
           std::log((1.0 - lam) * (beta + sigma_eff_sq) / (lam * sigma_eff_sq));
}

/// 1 iff |z|^2 exceeds the threshold; ties decide inactive.
inline bool lrt_decide(Complex z, double sigma_eff_sq, double lam, double beta) {
    return std::norm(z) > lrt_threshold(sigma_eff_sq, lam, beta);
}

/// Error probabilities of the single-AP test averaged over the beta law:
/// P_F = E{e^{-l'/sigma^2}}, P_M = 1 - E{e^{-l'/(beta+sigma^2)}}.
inline LrtResult lrt_error_probs(double sigma_eff_sq, double lam, const BetaDist& dist) {
    if (!(lam > 0.0) || !(lam <= 0.5))
        throw std::domain_error("lrt_error_probs: lam must lie in (0, 0.5]");
    LrtResult out;
    out.threshold = lrt_threshold(sigma_eff_sq, lam, dist.mean());
    out.p_false_alarm = dist.expect([&](double beta) {
        return std::exp(-lrt_threshold(sigma_eff_sq, lam, beta) / sigma_eff_sq);
    });
    out.p_miss = 1.0 - dist.expect([&](double beta) {
        return std::exp(-lrt_threshold(sigma_eff_sq, lam, beta) / (beta + sigma_eff_sq));
    });
    out.p_err = (1.0 - lam) * out.p_false_alarm + lam * out.p_miss;
    return out;
}

/// Centralized statistic for one user across all M APs.
struct CentralizedStats {
    double varsigma = 0.0;  // energy statistic
    double kappa = 0.0;     // threshold
    bool decision = false;  // active iff varsigma > kappa
};

inline CentralizedStats centralized_stats(const CVec& z, const Vec& beta, double sigma_eff_sq) {
    const int M = static_cast<int>(z.size());
    if (beta.size() != M || M < 1) throw std::invalid_argument("centralized_stats: size mismatch");
    if (!(sigma_eff_sq > 0.0))
        throw std::domain_error("centralized_stats: sigma_eff_sq must be positive");
    CentralizedStats out;
    double vs = 0.0, kp = 0.0;
    for (int j = 0; j < M; ++j) {
        vs += std::norm(z(j)) * beta(j) / (beta(j) + sigma_eff_sq);
        kp += std::log1p(beta(j) / sigma_eff_sq);
    }
    out.varsigma = vs / (M * sigma_eff_sq);
    out.kappa = kp / M;
    out.decision = out.varsigma > out.kappa;
    return out;
}

/// Vector MMSE estimate of a user's effective channels across APs: columnwise
/// Wiener shrinkage scaled by the activity posterior of the whole row.
inline CVec centralized_mmse(const CVec& z, const Vec& beta, double sigma_eff_sq, double lam) {
    const int M = static_cast<int>(z.size());
    if (beta.size() != M || M < 1) throw std::invalid_argument("centralized_mmse: size mismatch");
    if (!(lam > 0.0) || !(lam <= 1.0)) throw std::domain_error("centralized_mmse: bad lambda");
    const auto st = centralized_stats(z, beta, sigma_eff_sq);
    double scale = 1.0;
    if (lam < 1.0) {
        const double e = std::clamp(-static_cast<double>(M) * (st.varsigma - st.kappa) +
                                        std::log((1.0 - lam) / lam),
                                    -700.0, 700.0);
        scale = 1.0 / (1.0 + std::exp(e));
    }
    CVec out(M);
    for (int j = 0; j < M; ++j) out(j) = scale * beta(j) / (beta(j) + sigma_eff_sq) * z(j);
    return out;
}

/// Chair-Varshney fusion of M per-AP binary decisions with common local
/// reliabilities (P_F, P_M): decide active iff the active-vote count
/// exceeds rho.
struct FusionParams {
    double chi = 0.0;
    double rho = 0.0;
    int num_aps = 0;
    double p_f_local = 0.0;
    double p_m_local = 0.0;
};

inline FusionParams fusion_params(double p_f_local, double p_m_local, double lam, int num_aps) {
    if (!(p_f_local > 0.0) || !(p_f_local < 1.0) || !(p_m_local > 0.0) || !(p_m_local < 1.0))
        throw std::domain_error("fusion_params: local probabilities must lie in (0, 1)");
    if (!(lam > 0.0) || !(lam < 1.0)) throw std::domain_error("fusion_params: bad lambda");
    if (num_aps < 1) throw std::invalid_argument("fusion_params: need at least one AP");
    FusionParams fp;
    fp.num_aps = num_aps;
    fp.p_f_local = p_f_local;
    fp.p_m_local = p_m_local;
    fp.chi = std::log((1.0 - p_m_local) * (1.0 - p_f_local) / (p_m_local * p_f_local));
    fp.rho = (std::log((1.0 - lam) / lam) -
              num_aps * std::log(p_m_local / (1.0 - p_f_local))) /
             fp.chi;
    return fp;
}

inline bool fusion_decide(int active_votes, const FusionParams& fp) {
    return static_cast<double>(active_votes) > fp.rho;
}

struct FusionErrorProbs {
    double p_false_alarm = 0.0;
    double p_miss = 0.0;
    double p_err = 0.0;
};

/// System-level error probabilities of the fusion rule via binomial tails.
inline FusionErrorProbs fusion_error_probs(const FusionParams& fp, double lam) {
    const int M = fp.num_aps;
    const double k = std::floor(fp.rho);
    auto upper_tail = [M](double p, double kk) {
        if (kk < 0.0) return 1.0;  // threshold below the vote range: always alarm
        if (kk >= M) return 0.0;
        boost::math::binomial_distribution<double> bin(M, p);
        return 1.0 - boost::math::cdf(bin, kk);
    };
    FusionErrorProbs out;
    out.p_false_alarm = upper_tail(fp.p_f_local, k);
    out.p_miss = 1.0 - upper_tail(1.0 - fp.p_m_local, k);
    out.p_err = (1.0 - lam) * out.p_false_alarm + lam * out.p_miss;
    return out;
}

}  // namespace cfmimo
