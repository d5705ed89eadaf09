#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "cfmimo/cb_amp.hpp"
#include "cfmimo/channel.hpp"
#include "cfmimo/decoupling.hpp"
#include "cfmimo/detection.hpp"
#include "cfmimo/mmv.hpp"
#include "cfmimo/oracle.hpp"
#include "cfmimo/rng.hpp"
#include "cfmimo/types.hpp"

namespace cfmimo {

enum class Method {
    OracleExact,
    OracleAsym,
    SmvTheory,
    SmvCbamp,
    MmvAmp,
    LrtTheory,
    LrtEmp,
    CentSmv,
    CentMmv,
    DistFusion,
};

enum class SweepVar { Pilots, Snr, NumAps };

inline const char* to_string(Method m) {
    switch (m) {
        case Method::OracleExact: return "OracleExact";
        case Method::OracleAsym: return "OracleAsym";
        case Method::SmvTheory: return "SmvTheory";
        case Method::SmvCbamp: return "SmvCbamp";
        case Method::MmvAmp: return "MmvAmp";
        case Method::LrtTheory: return "LrtTheory";
        case Method::LrtEmp: return "LrtEmp";
        case Method::CentSmv: return "CentSmv";
        case Method::CentMmv: return "CentMmv";
        case Method::DistFusion: return "DistFusion";
    }
    return "?";
}

inline const char* to_string(SweepVar v) {
    switch (v) {
        case SweepVar::Pilots: return "pilots";
        case SweepVar::Snr: return "snr";
        case SweepVar::NumAps: return "num_aps";
    }
    return "?";
}

inline bool is_theory_method(Method m) {
    return m == Method::OracleAsym || m == Method::SmvTheory || m == Method::LrtTheory;
}

struct SweepSpec {
    SystemParams base;
    SweepVar var = SweepVar::Pilots;
    std::vector<double> values;
    int trials = 50;
    std::vector<Method> methods;
    int threads = 1;

    void validate() const {
        base.validate();
        if (trials < 1) throw std::invalid_argument("sweep: trials must be >= 1");
        if (values.empty()) throw std::invalid_argument("sweep: values must be nonempty");
        for (std::size_t i = 1; i < values.size(); ++i)
            if (!(values[i] > values[i - 1]))
                throw std::invalid_argument("sweep: values must be strictly increasing");
        if (methods.empty()) throw std::invalid_argument("sweep: methods must be nonempty");
    }
};

struct ResultRow {
    Method method;
    SweepVar var;
    double sweep_value = 0.0;
    double metric = 0.0;
    double stderr_est = 0.0;
    int trials = 0;
    std::uint64_t seed = 0;
};

/// Static partition of [0, n) over worker threads; results land in
/// caller-owned slots so the aggregation order never depends on scheduling.
inline void parallel_for(int n, int threads, const std::function<void(int)>& body) {
    threads = std::max(1, std::min(threads, n));
    if (threads == 1) {
        for (int i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    std::exception_ptr first_error;
    std::mutex err_mutex;
    for (int w = 0; w < threads; ++w) {
        pool.emplace_back([&, w]() {
            try {
                for (int i = w; i < n; i += threads) body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

namespace detail {

inline SystemParams apply_sweep_value(const SystemParams& base, SweepVar var, double value) {
    SystemParams p = base;
    switch (var) {
        case SweepVar::Pilots: p.num_pilots = static_cast<int>(std::lround(value)); break;
        case SweepVar::Snr: p.noise_var = noise_var_for_snr(value, p.ref_dist, p.pathloss_exp); break;
        case SweepVar::NumAps: p.num_aps = static_cast<int>(std::lround(value)); break;
    }
    return p;
}

/// Detection bookkeeping for one scene: error counts against the truth.
struct ErrorCount {
    long errors = 0;
    long total = 0;
    double rate() const { return total ? static_cast<double>(errors) / total : 0.0; }
};

/// Per-AP CB-AMP over a whole scene; returns final states per AP.
inline std::vector<AmpState> run_smv_all_aps(const NetworkScene& scene) {
    AmpOptions opt;
    opt.keep_trace = false;
    std::vector<AmpState> finals;
    finals.reserve(scene.params.num_aps);
    for (int j = 0; j < scene.params.num_aps; ++j) {
        const CVec y = synthesize_received(scene, j);
        auto res = amp_iterate(y, scene.pilot, scene.beta_column(j), scene.params.activity_prob,
                               scene.params.noise_var, opt);
        finals.push_back(res.final_state());
    }
    return finals;
}

/// One empirical trial for a method; returns the trial metric.
inline double run_empirical_trial(Method method, const SystemParams& params,
                                  const BetaDist& dist, std::uint64_t seed) {
    SystemParams p = params;
    p.seed = seed;
    // MSE-style methods only need one AP per scene; detection methods use all.
    if (method == Method::OracleExact || method == Method::SmvCbamp) p.num_aps = 1;
    const NetworkScene scene = generate_scene(p);
    const double lam = p.activity_prob;

    switch (method) {
        case Method::OracleExact: {
            return oracle_mse_exact(scene.pilot, scene.beta_column(0), scene.activity, p.noise_var,
                                    p.num_users);
        }
        case Method::SmvCbamp: {
            const auto finals = run_smv_all_aps(scene);
            double acc = 0.0;
            for (int j = 0; j < p.num_aps; ++j)
                acc += empirical_mse(scene.theta_column(j), finals[j].theta_hat);
            return acc / p.num_aps;
        }
        case Method::MmvAmp: {
            CMat y(p.num_pilots, p.num_aps);
            for (int j = 0; j < p.num_aps; ++j) y.col(j) = synthesize_received(scene, j);
            AmpOptions opt;
            auto res = mmv_amp(y, scene.pilot, scene.beta, lam, p.noise_var, opt);
            double acc = 0.0;
            for (int j = 0; j < p.num_aps; ++j)
                acc += empirical_mse(scene.theta_column(j), res.state.theta_hat.col(j));
            return acc / p.num_aps;
        }
        case Method::LrtEmp: {
            const auto finals = run_smv_all_aps(scene);
            ErrorCount ec;
            for (int j = 0; j < p.num_aps; ++j) {
                const auto& st = finals[j];
                for (int i = 0; i < p.num_users; ++i) {
                    const bool hit =
                        lrt_decide(st.r_hat(i), st.tau(i), lam, scene.beta(i, j));
                    ec.errors += (hit != (scene.activity[i] != 0));
                    ++ec.total;
                }
            }
            return ec.rate();
        }
        case Method::CentSmv: {
            const auto finals = run_smv_all_aps(scene);
            double tau_bar = 0.0;
            for (const auto& st : finals) tau_bar += st.mean_tau();
            tau_bar /= finals.size();
            ErrorCount ec;
            CVec z_row(p.num_aps);
            for (int i = 0; i < p.num_users; ++i) {
                for (int j = 0; j < p.num_aps; ++j) z_row(j) = finals[j].r_hat(i);
                const Vec beta_row = scene.beta.row(i).transpose();
                const bool hit = centralized_stats(z_row, beta_row, tau_bar).decision;
                ec.errors += (hit != (scene.activity[i] != 0));
                ++ec.total;
            }
            return ec.rate();
        }
        case Method::CentMmv: {
            CMat y(p.num_pilots, p.num_aps);
            for (int j = 0; j < p.num_aps; ++j) y.col(j) = synthesize_received(scene, j);
            auto res = mmv_amp(y, scene.pilot, scene.beta, lam, p.noise_var);
            ErrorCount ec;
            for (int i = 0; i < p.num_users; ++i) {
                const CVec z_row = res.state.r_hat.row(i).transpose();
                const Vec beta_row = scene.beta.row(i).transpose();
                const bool hit =
                    centralized_stats(z_row, beta_row, res.state.tau_rows(i)).decision;
                ec.errors += (hit != (scene.activity[i] != 0));
                ++ec.total;
            }
            return ec.rate();
        }
        case Method::DistFusion: {
            const auto finals = run_smv_all_aps(scene);
            double tau_bar = 0.0;
            for (const auto& st : finals) tau_bar += st.mean_tau();
            tau_bar /= finals.size();
            const LrtResult local = lrt_error_probs(tau_bar, lam, dist);
            const auto fp = fusion_params(local.p_false_alarm, local.p_miss, lam, p.num_aps);
            ErrorCount ec;
            for (int i = 0; i < p.num_users; ++i) {
                int votes = 0;
                for (int j = 0; j < p.num_aps; ++j) {
                    votes += lrt_decide(finals[j].r_hat(i), finals[j].tau(i), lam,
                                        scene.beta(i, j));
                }
                const bool hit = fusion_decide(votes, fp);
                ec.errors += (hit != (scene.activity[i] != 0));
                ++ec.total;
            }
            return ec.rate();
        }
        default:
            throw std::logic_error("run_empirical_trial: not an empirical method");
    }
}

inline double evaluate_theory(Method method, const SystemParams& p, const BetaDist& dist) {
    switch (method) {
        case Method::OracleAsym:
            return oracle_mse_asymptotic(p.activity_prob, p.gamma(), p.noise_var, dist).mse;
        case Method::SmvTheory: {
            const auto noise = solve_state_evolution(p.activity_prob, p.gamma(), p.noise_var, dist);
            return theory_mse(noise.sigma_eff_sq, p.activity_prob, dist);
        }
        case Method::LrtTheory: {
            const auto noise = solve_state_evolution(p.activity_prob, p.gamma(), p.noise_var, dist);
            return lrt_error_probs(noise.sigma_eff_sq, p.activity_prob, dist).p_err;
        }
        default:
            throw std::logic_error("evaluate_theory: not a theory method");
    }
}

}  // namespace detail

/// Runs every (method, value) cell of the sweep. Theory methods are evaluated
/// once per value; empirical methods average over independently seeded
/// trials. Fully deterministic for a given spec, including under threading.
inline std::vector<ResultRow> run_sweep(const SweepSpec& spec) {
    spec.validate();
    const BetaDist dist = beta_pdf_numeric(spec.base);
    std::vector<ResultRow> rows;

    for (std::size_t mi = 0; mi < spec.methods.size(); ++mi) {
        const Method method = spec.methods[mi];
        for (std::size_t vi = 0; vi < spec.values.size(); ++vi) {
            const double value = spec.values[vi];
            const SystemParams p = detail::apply_sweep_value(spec.base, spec.var, value);
            const std::uint64_t cell_seed =
                splitmix64(spec.base.seed ^ splitmix64((mi << 20) + vi + 1));

            ResultRow row;
            row.method = method;
            row.var = spec.var;
            row.sweep_value = value;
            row.seed = cell_seed;
            try {
                if (is_theory_method(method)) {
                    row.metric = detail::evaluate_theory(method, p, dist);
                    row.stderr_est = 0.0;
                    row.trials = 1;
                } else {
                    std::vector<double> metrics(spec.trials);
                    parallel_for(spec.trials, spec.threads, [&](int t) {
                        metrics[t] =
                            detail::run_empirical_trial(method, p, dist, trial_seed(cell_seed, t));
                    });
                    double mean = 0.0;
                    for (double m : metrics) mean += m;
                    mean /= spec.trials;
                    double var_acc = 0.0;
                    for (double m : metrics) var_acc += (m - mean) * (m - mean);
                    row.metric = mean;
                    row.stderr_est = spec.trials > 1
                                         ? std::sqrt(var_acc / (spec.trials - 1.0) / spec.trials)
                                         : 0.0;
                    row.trials = spec.trials;
                }
            } catch (const std::exception& e) {
                throw std::runtime_error(std::string("sweep cell failed (method=") +
                                         to_string(method) + ", value=" + std::to_string(value) +
                                         "): " + e.what());
            }
            rows.push_back(row);
        }
    }
    return rows;
}

/// Detection error rates split by hypothesis.
struct DetectionRates {
    double p_false_alarm = 0.0;
    double p_miss = 0.0;
    double p_err = 0.0;
    long inactive_count = 0;
    long active_count = 0;
};

namespace detail {
struct HypCounts {
    long fa = 0, miss = 0, inactive = 0, active = 0;
};

inline DetectionRates finalize_rates(const std::vector<HypCounts>& counts, double lam) {
    HypCounts total;
    for (const auto& c : counts) {
        total.fa += c.fa;
        total.miss += c.miss;
        total.inactive += c.inactive;
        total.active += c.active;
    }
    DetectionRates out;
    out.inactive_count = total.inactive;
    out.active_count = total.active;
    out.p_false_alarm = total.inactive ? static_cast<double>(total.fa) / total.inactive : 0.0;
    out.p_miss = total.active ? static_cast<double>(total.miss) / total.active : 0.0;
    out.p_err = (1.0 - lam) * out.p_false_alarm + lam * out.p_miss;
    return out;
}
}  // namespace detail

/// Empirical single-AP LRT rates: CB-AMP per AP, per-user decisions with the
/// converged per-user tau as the decoupled noise level.
inline DetectionRates lrt_empirical_rates(const SystemParams& params, int trials, int threads) {
    std::vector<detail::HypCounts> counts(trials);
    parallel_for(trials, threads, [&](int t) {
        SystemParams p = params;
        p.seed = trial_seed(params.seed, t);
        const NetworkScene scene = generate_scene(p);
        const auto finals = detail::run_smv_all_aps(scene);
        auto& c = counts[t];
        for (int j = 0; j < p.num_aps; ++j) {
            for (int i = 0; i < p.num_users; ++i) {
                const bool hit = lrt_decide(finals[j].r_hat(i), finals[j].tau(i),
                                            p.activity_prob, scene.beta(i, j));
                if (scene.activity[i]) {
                    ++c.active;
                    c.miss += !hit;
                } else {
                    ++c.inactive;
                    c.fa += hit;
                }
            }
        }
    });
    return detail::finalize_rates(counts, params.activity_prob);
}

/// Empirical cooperative detection rates from per-AP CB-AMP runs (or one
/// joint MMV run) followed by the centralized rule or the fusion vote.
enum class CoopScheme { CentralizedSmv, CentralizedMmv, Distributed };

inline DetectionRates coop_empirical_rates(const SystemParams& params, CoopScheme scheme,
                                           const BetaDist& dist, int trials, int threads) {
    std::vector<detail::HypCounts> counts(trials);
    parallel_for(trials, threads, [&](int t) {
        SystemParams p = params;
        p.seed = trial_seed(params.seed, t);
        const NetworkScene scene = generate_scene(p);
        auto& c = counts[t];
        const double lam = p.activity_prob;

        auto tally = [&](int i, bool hit) {
            if (scene.activity[i]) {
                ++c.active;
                c.miss += !hit;
            } else {
                ++c.inactive;
                c.fa += hit;
            }
        };

        if (scheme == CoopScheme::CentralizedMmv) {
            CMat y(p.num_pilots, p.num_aps);
            for (int j = 0; j < p.num_aps; ++j) y.col(j) = synthesize_received(scene, j);
            auto res = mmv_amp(y, scene.pilot, scene.beta, lam, p.noise_var);
            for (int i = 0; i < p.num_users; ++i) {
                const CVec z_row = res.state.r_hat.row(i).transpose();
                const Vec beta_row = scene.beta.row(i).transpose();
                tally(i, centralized_stats(z_row, beta_row, res.state.tau_rows(i)).decision);
            }
            return;
        }

        const auto finals = detail::run_smv_all_aps(scene);
        double tau_bar = 0.0;
        for (const auto& st : finals) tau_bar += st.mean_tau();
        tau_bar /= finals.size();

        if (scheme == CoopScheme::CentralizedSmv) {
            CVec z_row(p.num_aps);
            for (int i = 0; i < p.num_users; ++i) {
                for (int j = 0; j < p.num_aps; ++j) z_row(j) = finals[j].r_hat(i);
                const Vec beta_row = scene.beta.row(i).transpose();
                tally(i, centralized_stats(z_row, beta_row, tau_bar).decision);
            }
        } else {
            const LrtResult local = lrt_error_probs(tau_bar, lam, dist);
            const auto fp = fusion_params(local.p_false_alarm, local.p_miss, lam, p.num_aps);
            for (int i = 0; i < p.num_users; ++i) {
                int votes = 0;
                for (int j = 0; j < p.num_aps; ++j)
                    votes +=
                        lrt_decide(finals[j].r_hat(i), finals[j].tau(i), lam, scene.beta(i, j));
                tally(i, fusion_decide(votes, fp));
            }
        }
    });
    return detail::finalize_rates(counts, params.activity_prob);
}

/// Theory-side centralized rates: Monte Carlo over the decoupled vector
/// channel with geometry-sampled beta vectors and the solved noise level.
inline DetectionRates centralized_theory_rates(double lam, double sigma_eff_sq,
                                               const BetaDist& dist, int num_aps, long num_users,
                                               std::uint64_t seed, int threads = 1) {
    const int blocks = 16;
    std::vector<detail::HypCounts> counts(blocks);
    const long per_block = (num_users + blocks - 1) / blocks;
    parallel_for(blocks, threads, [&](int blk) {
        Rng rng(trial_seed(seed, blk));
        auto& c = counts[blk];
        CVec z(num_aps);
        Vec beta(num_aps);
        for (long k = 0; k < per_block; ++k) {
            const bool active = rng.bernoulli(lam);
            for (int j = 0; j < num_aps; ++j) {
                beta(j) = dist.sample(rng);
                const Complex theta =
                    active ? std::sqrt(beta(j)) * rng.cnormal() : Complex{0.0, 0.0};
                z(j) = theta + std::sqrt(sigma_eff_sq) * rng.cnormal();
            }
            const bool hit = centralized_stats(z, beta, sigma_eff_sq).decision;
            if (active) {
                ++c.active;
                c.miss += !hit;
            } else {
                ++c.inactive;
                c.fa += hit;
            }
        }
    });
    return detail::finalize_rates(counts, lam);
}

/// Theory-side distributed rates: closed-form binomial tails on top of the
/// single-AP error probabilities.
inline DetectionRates distributed_theory_rates(double lam, double sigma_eff_sq,
                                               const BetaDist& dist, int num_aps) {
    const auto local = lrt_error_probs(sigma_eff_sq, lam, dist);
    const auto fp = fusion_params(local.p_false_alarm, local.p_miss, lam, num_aps);
    const auto probs = fusion_error_probs(fp, lam);
    DetectionRates out;
    out.p_false_alarm = probs.p_false_alarm;
    out.p_miss = probs.p_miss;
    out.p_err = probs.p_err;
    return out;
}

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline void emit_csv(const std::vector<ResultRow>& rows, std::ostream& os) {
    os << "method,sweep_var,sweep_value,metric,stderr,trials,seed\n";
    for (const auto& r : rows) {
        os << to_string(r.method) << ',' << to_string(r.var) << ','
           << format_double(r.sweep_value) << ',' << format_double(r.metric) << ','
           << format_double(r.stderr_est) << ',' << r.trials << ',' << r.seed << '\n';
    }
}

inline void emit_csv(const std::vector<ResultRow>& rows, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("emit_csv: cannot open " + path);
    emit_csv(rows, out);
}

/// Parses a CSV produced by emit_csv; used for round-trip checks.
inline std::vector<ResultRow> parse_csv(std::istream& is) {
    std::vector<ResultRow> rows;
    std::string line;
    if (!std::getline(is, line)) return rows;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string field;
        ResultRow r;
        std::getline(ss, field, ',');
        bool found = false;
        for (int m = 0; m <= static_cast<int>(Method::DistFusion); ++m) {
            if (field == to_string(static_cast<Method>(m))) {
                r.method = static_cast<Method>(m);
                found = true;
            }
        }
        if (!found) throw std::runtime_error("parse_csv: unknown method " + field);
        std::getline(ss, field, ',');
        for (int v = 0; v <= static_cast<int>(SweepVar::NumAps); ++v)
            if (field == to_string(static_cast<SweepVar>(v))) r.var = static_cast<SweepVar>(v);
        std::getline(ss, field, ',');
        r.sweep_value = std::stod(field);
        std::getline(ss, field, ',');
        r.metric = std::stod(field);
        std::getline(ss, field, ',');
        r.stderr_est = std::stod(field);
        std::getline(ss, field, ',');
        r.trials = std::stoi(field);
        std::getline(ss, field, ',');
        r.seed = std::stoull(field);
        rows.push_back(r);
    }
    return rows;
}

}  // namespace cfmimo
