#include <catch_amalgamated.hpp>
#include <cmath>

#include "cfmimo/channel.hpp"
#include "cfmimo/decoupling.hpp"
#include "cfmimo/denoiser.hpp"
#include "cfmimo/detection.hpp"
#include "cfmimo/rng.hpp"
#include "test_support.hpp"

using namespace cfmimo;

TEST_CASE("lrt_threshold values and positivity") {
    CHECK(lrt_threshold(1.0, 0.5, 1.0) == Catch::Approx(2.0 * std::log(2.0)).epsilon(1e-12));
    for (double lam : {0.05, 0.1, 0.2, 0.49}) {
        for (double beta : {1e-7, 1e-5, 1.0}) {
            CHECK(lrt_threshold(3e-7, lam, beta) > 0.0);
        }
    }
    CHECK_THROWS_AS(lrt_threshold(0.0, 0.1, 1.0), std::domain_error);
}

TEST_CASE("lrt_threshold asymptotic growth") {
    // at lam just under 0.5 and beta >> sigma^2 the threshold behaves like
    // sigma^2 log(beta/sigma^2)
    const double lam = 0.4999, s2 = 1.0;
    for (double beta : {1e4, 1e6, 1e8}) {
        const double ratio = lrt_threshold(s2, lam, beta) / (s2 * std::log(beta / s2));
        CHECK(ratio == Catch::Approx(1.0).epsilon(0.01));
    }
}

TEST_CASE("lrt_decide equals the likelihood-ratio sign test") {
    const double s2 = 0.3, lam = 0.2;
    CHECK(!lrt_decide(Complex{0.0, 0.0}, s2, lam, 1.0));
    const double lp = lrt_threshold(s2, lam, 1.0);
    CHECK(lrt_decide(Complex{std::sqrt(2.0 * lp), 0.0}, s2, lam, 1.0));

    Rng rng(606);
    for (int k = 0; k < 100000; ++k) {
        const double beta = 0.1 + 3.0 * rng.uniform01();
        const Complex z = 2.0 * rng.cnormal();
        const double ratio = s2 / (beta + s2) *
                             std::exp(beta * std::norm(z) / (s2 * (beta + s2)));
        const bool by_ratio = ratio > (1.0 - lam) / lam;
        CHECK(by_ratio == lrt_decide(z, s2, lam, beta));
    }
}

TEST_CASE("lrt error probabilities at a point mass") {
    const BetaDist unit = BetaDist::point_mass_at(1.0);
    const auto res = lrt_error_probs(1.0, 0.5, unit);
    CHECK(res.p_false_alarm == Catch::Approx(0.25).epsilon(1e-12));
    CHECK(res.p_miss == Catch::Approx(0.5).epsilon(1e-12));
    CHECK(res.p_err == Catch::Approx(0.375).epsilon(1e-12));
    CHECK(res.p_err == Catch::Approx((1.0 - 0.5) * res.p_false_alarm + 0.5 * res.p_miss));

    // noiseless limit: both error types vanish
    const auto clean = lrt_error_probs(1e-12, 0.2, unit);
    CHECK(clean.p_false_alarm < 1e-9);
    CHECK(clean.p_miss < 1e-9);
}

TEST_CASE("lrt error probabilities match the decoupled-channel Monte Carlo") {
    const SystemParams p = paper_scale_params();
    const BetaDist dist = beta_pdf_numeric(p);
    const double s2 = 4.0e-7, lam = 0.1;
    const auto theory = lrt_error_probs(s2, lam, dist);

    Rng rng(7272);
    long fa = 0, miss = 0, inactive = 0, active = 0;
    for (long k = 0; k < 1'000'000; ++k) {
        const double beta = dist.sample(rng);
        const bool is_active = rng.bernoulli(lam);
        const Complex theta =
            is_active ? std::sqrt(beta) * rng.cnormal() : Complex{0.0, 0.0};
        const Complex z = theta + std::sqrt(s2) * rng.cnormal();
        const bool hit = lrt_decide(z, s2, lam, beta);
        if (is_active) {
            ++active;
            miss += !hit;
        } else {
            ++inactive;
            fa += hit;
        }
    }
    const double pf = static_cast<double>(fa) / inactive;
    const double pm = static_cast<double>(miss) / active;
    const double se_f = std::sqrt(theory.p_false_alarm * (1 - theory.p_false_alarm) / inactive);
    const double se_m = std::sqrt(theory.p_miss * (1 - theory.p_miss) / active);
    CHECK(std::abs(pf - theory.p_false_alarm) <= 3.5 * se_f);
    CHECK(std::abs(pm - theory.p_miss) <= 3.5 * se_m);

    // P_F + P_M < 1 across the admissible activity grid
    for (double l : {0.01, 0.1, 0.2, 0.3, 0.4, 0.49}) {
        const auto r = lrt_error_probs(s2, l, dist);
        CHECK(r.p_false_alarm + r.p_miss < 1.0);
    }
}

TEST_CASE("centralized statistic: trivial decision and the kappa sandwich") {
    const int M = 8;
    Vec beta(M);
    for (int j = 0; j < M; ++j) beta(j) = 1e-6 * (j + 1);
    const double s2 = 3e-7;
    const auto st0 = centralized_stats(CVec::Zero(M), beta, s2);
    CHECK(st0.varsigma == 0.0);
    CHECK(st0.kappa > 0.0);
    CHECK(!st0.decision);

    // equal-beta case written out explicitly
    const double b = 2.5e-6;
    const auto st_eq = centralized_stats(CVec::Zero(4), Vec::Constant(4, b), s2);
    const double rho0 = b / (b + s2);
    const double rho1 = b / s2;
    CHECK(rho0 < st_eq.kappa);
    CHECK(st_eq.kappa < rho1);

    Rng rng(99);
    for (int k = 0; k < 10000; ++k) {
        const int m = 1 + static_cast<int>(rng.uniform01() * 16);
        Vec bv(m);
        for (int j = 0; j < m; ++j) bv(j) = std::pow(10.0, -7.0 + 3.0 * rng.uniform01());
        double lo = 0.0, hi = 0.0;
        for (int j = 0; j < m; ++j) {
            lo += bv(j) / (bv(j) + s2) / m;
            hi += bv(j) / s2 / m;
        }
        const auto st = centralized_stats(CVec::Zero(m), bv, s2);
        CHECK(lo < st.kappa);
        CHECK(st.kappa < hi);
    }
}

TEST_CASE("centralized M=1 matches the flat-prior scalar test") {
    Rng rng(3131);
    const double s2 = 2e-7;
    for (int k = 0; k < 20000; ++k) {
        const double beta = std::pow(10.0, -7.0 + 3.0 * rng.uniform01());
        const Complex z = std::sqrt(s2 + beta) * rng.cnormal();
        CVec zv(1);
        zv(0) = z;
        const bool cent = centralized_stats(zv, Vec::Constant(1, beta), s2).decision;
        // lam = 0.5 removes the prior term from the scalar threshold
        CHECK(cent == lrt_decide(z, s2, 0.5, beta));
    }
}

TEST_CASE("centralized MMSE estimate reductions") {
    const double s2 = 0.2, lam = 0.3;
    Rng rng(414);

    // M = 1 equals the scalar posterior mean
    for (int k = 0; k < 300; ++k) {
        const double beta = 0.2 + 2.0 * rng.uniform01();
        CVec z(1);
        z(0) = 2.0 * rng.cnormal();
        const CVec est = centralized_mmse(z, Vec::Constant(1, beta), s2, lam);
        const Complex ref = denoise_mean(z(0), DenoiserParams{lam, beta, s2});
        CHECK(std::abs(est(0) - ref) < 1e-10 * std::max(1.0, std::abs(ref)));
    }

    // lam = 1 is plain Wiener shrinkage
    CVec z(3);
    z << Complex{1.0, 0.5}, Complex{-0.3, 0.2}, Complex{0.0, -1.0};
    Vec beta(3);
    beta << 0.5, 1.0, 2.0;
    const CVec wiener = centralized_mmse(z, beta, s2, 1.0);
    for (int j = 0; j < 3; ++j)
        CHECK(std::abs(wiener(j) - beta(j) / (beta(j) + s2) * z(j)) < 1e-14);

    // strong observations across many APs: the activity factor saturates
    const int M = 64;
    CVec zbig(M);
    Vec bb = Vec::Constant(M, 1.0);
    for (int j = 0; j < M; ++j) zbig(j) = rng.cnormal() * 2.0;
    const CVec est = centralized_mmse(zbig, bb, 0.05, 0.2);
    for (int j = 0; j < M; ++j) {
        const Complex wiener_j = 1.0 / 1.05 * zbig(j);
        CHECK(std::abs(est(j) - wiener_j) < 1e-6 * std::abs(wiener_j));
    }
}

TEST_CASE("fusion parameters: worked example and symmetry") {
    const auto fp = fusion_params(0.25, 0.5, 0.5, 1);
    CHECK(fp.chi == Catch::Approx(std::log(3.0)).epsilon(1e-12));
    CHECK(fp.rho == Catch::Approx(std::log(1.5) / std::log(3.0)).epsilon(1e-12));
    // any single active vote clears rho ~ 0.369
    CHECK(fusion_decide(1, fp));
    CHECK(!fusion_decide(0, fp));

    for (int M : {2, 5, 16}) {
        const auto sym = fusion_params(0.2, 0.2, 0.5, M);
        CHECK(sym.rho == Catch::Approx(M / 2.0).epsilon(1e-12));
    }

    Rng rng(515);
    for (int k = 0; k < 2000; ++k) {
        const double pf = rng.uniform01() * 0.98 + 0.01;
        const double pm = rng.uniform01() * (0.98 - pf) + 0.01;
        if (pf + pm >= 1.0) continue;
        CHECK(fusion_params(pf, pm, 0.3, 4).chi > 0.0);
    }
    CHECK_THROWS_AS(fusion_params(0.0, 0.5, 0.3, 4), std::domain_error);
    CHECK_THROWS_AS(fusion_params(0.5, 1.0, 0.3, 4), std::domain_error);
}

TEST_CASE("fusion error probabilities: single AP and vanishing local errors") {
    const auto fp = fusion_params(0.25, 0.5, 0.5, 1);
    const auto probs = fusion_error_probs(fp, 0.5);
    CHECK(probs.p_false_alarm == Catch::Approx(0.25).epsilon(1e-12));
    CHECK(probs.p_miss == Catch::Approx(0.5).epsilon(1e-12));
    CHECK(probs.p_err == Catch::Approx(0.375).epsilon(1e-12));

    const auto good = fusion_error_probs(fusion_params(1e-9, 1e-9, 0.2, 8), 0.2);
    CHECK(good.p_err < 1e-8);
}

TEST_CASE("fusion error probabilities match exhaustive enumeration at M=16") {
    const int M = 16;
    const double pf = 0.3, pm = 0.3, lam = 0.5;
    const auto fp = fusion_params(pf, pm, lam, M);
    const auto probs = fusion_error_probs(fp, lam);

    double p_fa = 0.0, p_md = 0.0;
    for (unsigned mask = 0; mask < (1u << M); ++mask) {
        const int votes = __builtin_popcount(mask);
        // weight of this vote pattern under inactive (vote=1 w.p. pf)
        const double w0 = std::pow(pf, votes) * std::pow(1.0 - pf, M - votes);
        const double w1 = std::pow(1.0 - pm, votes) * std::pow(pm, M - votes);
        if (fusion_decide(votes, fp))
            p_fa += w0;
        else
            p_md += w1;
    }
    CHECK(probs.p_false_alarm == Catch::Approx(p_fa).epsilon(1e-10));
    CHECK(probs.p_miss == Catch::Approx(p_md).epsilon(1e-10));
}

TEST_CASE("fusion improves with the number of APs") {
    // majority-vote regime (symmetric reliabilities, odd M): both error
    // types shrink and stay below their single-AP values
    double prev_f = 1.0, prev_m = 1.0;
    const auto base = fusion_error_probs(fusion_params(0.2, 0.2, 0.5, 1), 0.5);
    for (int M : {1, 5, 17, 65}) {
        const auto probs = fusion_error_probs(fusion_params(0.2, 0.2, 0.5, M), 0.5);
        CHECK(probs.p_false_alarm <= base.p_false_alarm + 1e-15);
        CHECK(probs.p_miss <= base.p_miss + 1e-15);
        CHECK(probs.p_false_alarm <= prev_f + 1e-15);
        CHECK(probs.p_miss <= prev_m + 1e-15);
        prev_f = probs.p_false_alarm;
        prev_m = probs.p_miss;
    }

    // desk operating point: the total error probability keeps dropping even
    // though the vote threshold trades false alarms against misses
    const BetaDist dist = beta_pdf_numeric(paper_scale_params());
    const double nv = noise_var_for_snr(30.0, 50.0, 2.5);
    const auto noise = solve_state_evolution(0.1, 4000.0 / 300.0, nv, dist);
    const auto local = lrt_error_probs(noise.sigma_eff_sq, 0.1, dist);
    double prev_e = 1.0;
    for (int M : {1, 4, 16, 64}) {
        const auto probs = fusion_error_probs(fusion_params(local.p_false_alarm, local.p_miss,
                                                            0.1, M),
                                              0.1);
        CHECK(probs.p_err < prev_e);
        prev_e = probs.p_err;
    }
}

TEST_CASE("centralized detection error collapses as APs multiply") {
    const SystemParams base = paper_scale_params();
    const BetaDist dist = beta_pdf_numeric(base);
    const double nv = noise_var_for_snr(30.0, 50.0, 2.5);
    const auto noise = solve_state_evolution(0.1, base.gamma(), nv, dist);
    const double s2 = noise.sigma_eff_sq;
    const double lam = 0.1;

    auto mc_perr = [&](int M, std::uint64_t seed) {
        Rng rng(seed);
        long err = 0;
        const long users = 200000;
        CVec z(M);
        Vec beta(M);
        for (long k = 0; k < users; ++k) {
            const bool active = rng.bernoulli(lam);
            for (int j = 0; j < M; ++j) {
                beta(j) = dist.sample(rng);
                const Complex theta =
                    active ? std::sqrt(beta(j)) * rng.cnormal() : Complex{0.0, 0.0};
                z(j) = theta + std::sqrt(s2) * rng.cnormal();
            }
            const bool hit = centralized_stats(z, beta, s2).decision;
            err += (hit != active);
        }
        return static_cast<double>(err) / users;
    };

    const double p2 = mc_perr(2, 818);
    const double p32 = mc_perr(32, 819);
    CHECK(p32 * 10.0 < p2);
}
