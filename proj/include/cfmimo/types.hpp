#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace cfmimo {

using Vec = Eigen::VectorXd;
using CVec = Eigen::VectorXcd;
using Mat = Eigen::MatrixXd;
using CMat = Eigen::MatrixXcd;
using Complex = std::complex<double>;

/// Generative configuration of one cell-free network instance.
///
/// Noise is stored as a variance. The CLI-facing SNR convention maps
/// SNR(dB) to noise_var = d0^{-alpha} * 10^{-SNR/10}, i.e. SNR is the
/// received SNR of a user at (or inside) the reference distance, so that
/// the operating points stay meaningful for raw distance-based pathloss.
struct SystemParams {
    int num_users = 4000;      // N
    int num_pilots = 300;      // L
    int num_aps = 10;          // M
    double activity_prob = 0.1;  // lambda, must be < 0.5
    double radius = 500.0;       // disc radius, meters
    double pathloss_exp = 2.5;   // alpha
    double ref_dist = 50.0;      // d0, meters
    double noise_var = 5.65685424949238e-8;  // sigma0^2 (30 dB at reference distance)
    std::uint64_t seed = 1;

    double gamma() const { return static_cast<double>(num_users) / num_pilots; }

    void validate() const {
        if (num_users <= 0) throw std::invalid_argument("num_users must be positive");
        if (num_pilots <= 0) throw std::invalid_argument("num_pilots must be positive");
        if (num_aps <= 0) throw std::invalid_argument("num_aps must be positive");
        // The degenerate edges 0 and 1 are admitted here so all-inactive and
        // all-active scenes stay constructible; the lambda < 0.5 constraint
        // of the detection analysis is enforced by the config layer and by
        // the detection operations themselves.
        if (!(activity_prob >= 0.0) || !(activity_prob <= 1.0))
            throw std::invalid_argument("activity_prob must lie in [0, 1]");
        if (!(radius > 0.0)) throw std::invalid_argument("radius must be positive");
        if (!(pathloss_exp > 0.0)) throw std::invalid_argument("pathloss_exp must be positive");
        if (!(ref_dist > 0.0) || !(ref_dist < 2.0 * radius))
            throw std::invalid_argument("ref_dist must satisfy 0 < d0 < 2R");
        if (!(noise_var > 0.0)) throw std::invalid_argument("noise_var must be positive");
        const double g = gamma();
        if (!std::isfinite(g) || !(g > 0.0)) throw std::invalid_argument("gamma must be finite and positive");
    }
};

/// noise_var for a given SNR in dB under the reference-distance convention.
inline double noise_var_for_snr(double snr_db, double ref_dist, double pathloss_exp) {
    return std::pow(ref_dist, -pathloss_exp) * std::pow(10.0, -snr_db / 10.0);
}

inline double snr_db_for_noise_var(double noise_var, double ref_dist, double pathloss_exp) {
    return -10.0 * std::log10(noise_var * std::pow(ref_dist, pathloss_exp));
}

/// Paper-style operating point at full scale (N=4000, L=300, M=10).
inline SystemParams paper_scale_params() { return SystemParams{}; }

/// Same gamma and geometry at desk scale (N=1000, L=75).
inline SystemParams desk_scale_params() {
    SystemParams p;
    p.num_users = 1000;
    p.num_pilots = 75;
    return p;
}

}  // namespace cfmimo
