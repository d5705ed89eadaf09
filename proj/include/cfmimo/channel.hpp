#pragma once

#include <cmath>
#include <fstream>
#include <stdexcept>
#include <utility>
#include <vector>

#include <json.hpp>

#include "cfmimo/quadrature.hpp"
#include "cfmimo/rng.hpp"
#include "cfmimo/types.hpp"

namespace cfmimo {

/// Distance-based pathloss min(d^{-alpha}, d0^{-alpha}).
inline double large_scale_fading(double d, double alpha, double d0) {
    if (!(d > 0.0)) throw std::domain_error("large_scale_fading: distance must be positive");
    return std::min(std::pow(d, -alpha), std::pow(d0, -alpha));
}

/// Density of the distance between two independent uniform points in a disc
/// of radius R. Zero outside (0, 2R).
inline double distance_pdf(double d, double R) {
    if (!(R > 0.0)) throw std::domain_error("distance_pdf: R must be positive");
    if (!(d > 0.0) || !(d < 2.0 * R)) return 0.0;
    const double x = d / (2.0 * R);
    const double kPi = 3.14159265358979323846;
    return 4.0 * d / (kPi * R * R) * (std::acos(x) - x * std::sqrt(1.0 - x * x));
}

/// CDF of the same distance law, by quadrature.
inline double distance_cdf(double d, double R, double tol = 1e-12) {
    if (d <= 0.0) return 0.0;
    if (d >= 2.0 * R) return 1.0;
    return quad([R](double t) { return distance_pdf(t, R); }, 0.0, d, tol);
}

/// Distribution of the large-scale coefficient beta. The pathloss clamp turns
/// the continuous distance law into a continuous density on
/// ((2R)^{-alpha}, d0^{-alpha}) plus a point mass at d0^{-alpha} of weight
/// P(d < d0). A degenerate point-mass-only variant is provided for tests and
/// closed-form checks.
class BetaDist {
public:
    static BetaDist from_geometry(double R, double alpha, double d0) {
        BetaDist dist;
        dist.geometric_ = true;
        dist.R_ = R;
        dist.alpha_ = alpha;
        dist.d0_ = d0;
        dist.beta_min_ = std::pow(2.0 * R, -alpha);
        dist.beta_max_ = std::pow(d0, -alpha);
        dist.point_mass_ = distance_cdf(d0, R);
        dist.mean_ = dist.expect([](double b) { return b; });
        return dist;
    }

    static BetaDist point_mass_at(double b0) {
        if (!(b0 > 0.0)) throw std::domain_error("BetaDist: point mass must be positive");
        BetaDist dist;
        dist.geometric_ = false;
        dist.beta_min_ = dist.beta_max_ = b0;
        dist.point_mass_ = 1.0;
        dist.mean_ = b0;
        return dist;
    }

    double beta_min() const { return beta_min_; }
    double beta_max() const { return beta_max_; }
    double point_mass() const { return point_mass_; }
    double mean() const { return mean_; }

    /// Continuous part of the density, by change of variables beta = d^{-alpha}.
    double density(double beta) const {
        if (!geometric_) return 0.0;
        if (!(beta > beta_min_) || !(beta < beta_max_)) return 0.0;
        const double d = std::pow(beta, -1.0 / alpha_);
        const double jac = d / (alpha_ * beta);  // |dd/dbeta| = beta^{-1/alpha - 1} / alpha
        return distance_pdf(d, R_) * jac;
    }

    /// Density sampled on a uniform grid over the continuous support.
    std::vector<std::pair<double, double>> table(int n) const {
        std::vector<std::pair<double, double>> out;
        out.reserve(n);
        for (int i = 0; i < n; ++i) {
            const double b = beta_min_ + (beta_max_ - beta_min_) * (i + 0.5) / n;
            out.emplace_back(b, density(b));
        }
        return out;
    }

    /// E{f(beta)}. The continuous part is integrated in distance space, where
    /// the law is smooth and bounded; the clamp region contributes exactly
    /// point_mass * f(beta_max).
    template <typename F>
    double expect(F&& f, double tol = 1e-10) const {
        if (!geometric_) return f(beta_max_);
        const double cont = quad(
            [&](double d) { return f(std::pow(d, -alpha_)) * distance_pdf(d, R_); }, d0_,
            2.0 * R_, tol);
        return cont + point_mass_ * f(beta_max_);
    }

    double sample(Rng& rng) const {
        if (!geometric_) return beta_max_;
        const auto [x1, y1] = rng.disc_point(R_);
        const auto [x2, y2] = rng.disc_point(R_);
        const double d = std::hypot(x1 - x2, y1 - y2);
        return large_scale_fading(std::max(d, 1e-9), alpha_, d0_);
    }

private:
    bool geometric_ = false;
    double R_ = 0.0, alpha_ = 0.0, d0_ = 0.0;
    double beta_min_ = 0.0, beta_max_ = 0.0;
    double point_mass_ = 0.0;
    double mean_ = 0.0;
};

inline BetaDist beta_pdf_numeric(const SystemParams& p) {
    p.validate();
    return BetaDist::from_geometry(p.radius, p.pathloss_exp, p.ref_dist);
}

/// One realized network instance. Matrices indexed users x APs except the
/// pilot matrix (pilots x users) and noise (pilots x APs).
struct NetworkScene {
    SystemParams params;
    std::vector<std::pair<double, double>> ap_positions;    // M
    std::vector<std::pair<double, double>> user_positions;  // N
    Mat beta;          // N x M, beta_ij for user i, AP j
    std::vector<int> activity;  // N, 0/1
    CMat small_scale;  // N x M
    CMat pilot;        // L x N, entries CN(0, 1/L)
    CMat noise;        // L x M, entries CN(0, sigma0^2)

    /// Effective channel column for AP j: a_i sqrt(beta_ij) h_ij.
    CVec theta_column(int j) const {
        check_ap(j);
        CVec theta(params.num_users);
        for (int i = 0; i < params.num_users; ++i) {
            theta(i) = activity[i] ? std::sqrt(beta(i, j)) * small_scale(i, j) : Complex{0.0, 0.0};
        }
        return theta;
    }

    Vec beta_column(int j) const {
        check_ap(j);
        return beta.col(j);
    }

    void check_ap(int j) const {
        if (j < 0 || j >= params.num_aps) throw std::out_of_range("AP index out of range");
    }
};

/// Draws a full scene from the seed: positions uniform on the disc, i.i.d.
/// Bernoulli activity, unit complex Gaussian small-scale fading, complex
/// Gaussian pilots with entry variance 1/L. Degenerate user-AP collisions
/// (closer than 0.1 m) are resampled.
inline NetworkScene generate_scene(const SystemParams& p) {
    p.validate();
    NetworkScene scene;
    scene.params = p;
    Rng rng(p.seed);

    const int N = p.num_users, L = p.num_pilots, M = p.num_aps;
    scene.ap_positions.reserve(M);
    for (int j = 0; j < M; ++j) scene.ap_positions.push_back(rng.disc_point(p.radius));

    scene.user_positions.reserve(N);
    scene.beta.resize(N, M);
    for (int i = 0; i < N; ++i) {
        std::pair<double, double> pos;
        bool ok = false;
        while (!ok) {
            pos = rng.disc_point(p.radius);
            ok = true;
            for (int j = 0; j < M; ++j) {
                const double d = std::hypot(pos.first - scene.ap_positions[j].first,
                                            pos.second - scene.ap_positions[j].second);
                if (d < 0.1) {
                    ok = false;
                    break;
                }
            }
        }
        scene.user_positions.push_back(pos);
        for (int j = 0; j < M; ++j) {
            const double d = std::hypot(pos.first - scene.ap_positions[j].first,
                                        pos.second - scene.ap_positions[j].second);
            scene.beta(i, j) = large_scale_fading(d, p.pathloss_exp, p.ref_dist);
        }
    }

    scene.activity.resize(N);
    for (int i = 0; i < N; ++i) scene.activity[i] = rng.bernoulli(p.activity_prob) ? 1 : 0;

    scene.small_scale.resize(N, M);
    for (int j = 0; j < M; ++j)
        for (int i = 0; i < N; ++i) scene.small_scale(i, j) = rng.cnormal();

    const double pilot_scale = 1.0 / std::sqrt(static_cast<double>(L));
    scene.pilot.resize(L, N);
    for (int i = 0; i < N; ++i)
        for (int l = 0; l < L; ++l) scene.pilot(l, i) = pilot_scale * rng.cnormal();

    const double noise_scale = std::sqrt(p.noise_var);
    scene.noise.resize(L, M);
    for (int j = 0; j < M; ++j)
        for (int l = 0; l < L; ++l) scene.noise(l, j) = noise_scale * rng.cnormal();

    return scene;
}

/// Received pilot vector at AP j: y = Phi theta_j + n_j.
inline CVec synthesize_received(const NetworkScene& scene, int j) {
    scene.check_ap(j);
    return scene.pilot * scene.theta_column(j) + scene.noise.col(j);
}

namespace detail {
inline nlohmann::json positions_to_json(const std::vector<std::pair<double, double>>& pts) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& [x, y] : pts) arr.push_back({x, y});
    return arr;
}
}  // namespace detail

/// Replay dump: positions, beta, activity and the generating seed/params.
/// Small-scale fading, pilots and noise are reproducible from the seed.
inline void save_scene(const NetworkScene& s, const std::string& path) {
    nlohmann::json j;
    j["format"] = "cfmimo-scene-v1";
    j["params"] = {{"num_users", s.params.num_users},   {"num_pilots", s.params.num_pilots},
                   {"num_aps", s.params.num_aps},       {"activity_prob", s.params.activity_prob},
                   {"radius", s.params.radius},         {"pathloss_exp", s.params.pathloss_exp},
                   {"ref_dist", s.params.ref_dist},     {"noise_var", s.params.noise_var},
                   {"seed", s.params.seed}};
    j["ap_positions"] = detail::positions_to_json(s.ap_positions);
    j["user_positions"] = detail::positions_to_json(s.user_positions);
    j["activity"] = s.activity;
    nlohmann::json beta = nlohmann::json::array();
    for (int i = 0; i < s.beta.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (int m = 0; m < s.beta.cols(); ++m) row.push_back(s.beta(i, m));
        beta.push_back(std::move(row));
    }
    j["beta"] = std::move(beta);
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_scene: cannot open " + path);
    out << j.dump();
}

/// Rebuilds the scene from the stored seed and verifies the stored fields
/// against the regenerated ones, guaranteeing a faithful replay.
inline NetworkScene load_scene(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_scene: cannot open " + path);
    nlohmann::json j;
    in >> j;
    if (j.value("format", "") != std::string("cfmimo-scene-v1"))
        throw std::runtime_error("load_scene: unknown format");
    SystemParams p;
    const auto& jp = j.at("params");
    p.num_users = jp.at("num_users").get<int>();
    p.num_pilots = jp.at("num_pilots").get<int>();
    p.num_aps = jp.at("num_aps").get<int>();
    p.activity_prob = jp.at("activity_prob").get<double>();
    p.radius = jp.at("radius").get<double>();
    p.pathloss_exp = jp.at("pathloss_exp").get<double>();
    p.ref_dist = jp.at("ref_dist").get<double>();
    p.noise_var = jp.at("noise_var").get<double>();
    p.seed = jp.at("seed").get<std::uint64_t>();

    NetworkScene scene = generate_scene(p);
    const auto& act = j.at("activity");
    for (int i = 0; i < p.num_users; ++i) {
        if (scene.activity[i] != act.at(i).get<int>())
            throw std::runtime_error("load_scene: stored activity does not match replay");
    }
    const auto& beta = j.at("beta");
    for (int i = 0; i < p.num_users; ++i)
        for (int m = 0; m < p.num_aps; ++m)
            if (scene.beta(i, m) != beta.at(i).at(m).get<double>())
                throw std::runtime_error("load_scene: stored beta does not match replay");
    return scene;
}

}  // namespace cfmimo
