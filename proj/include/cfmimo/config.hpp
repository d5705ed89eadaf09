#pragma once

#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "cfmimo/types.hpp"

namespace cfmimo {

/// Parsed simulation configuration: system parameters plus harness knobs.
struct SimConfig {
    SystemParams params;
    int trials = 50;
};

namespace detail {
inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw std::invalid_argument("config key '" + key + "': expected a number, got '" + value +
                                    "'");
    }
}

inline long long parse_int(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const long long v = std::stoll(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw std::invalid_argument("config key '" + key + "': expected an integer, got '" +
                                    value + "'");
    }
}
}  // namespace detail

/// Applies one key=value assignment. Unknown keys are rejected with a
/// diagnostic naming the key. snr_db is translated into noise_var using the
/// reference-distance convention, so order it after ref_dist/pathloss_exp
/// when both appear.
inline void apply_config_entry(SimConfig& cfg, const std::string& key, const std::string& value) {
    auto& p = cfg.params;
    if (key == "num_users")
        p.num_users = static_cast<int>(detail::parse_int(key, value));
    else if (key == "num_pilots")
        p.num_pilots = static_cast<int>(detail::parse_int(key, value));
    else if (key == "num_aps")
        p.num_aps = static_cast<int>(detail::parse_int(key, value));
    else if (key == "activity_prob")
        p.activity_prob = detail::parse_double(key, value);
    else if (key == "radius")
        p.radius = detail::parse_double(key, value);
    else if (key == "pathloss_exp")
        p.pathloss_exp = detail::parse_double(key, value);
    else if (key == "ref_dist")
        p.ref_dist = detail::parse_double(key, value);
    else if (key == "noise_var")
        p.noise_var = detail::parse_double(key, value);
    else if (key == "snr_db")
        p.noise_var = noise_var_for_snr(detail::parse_double(key, value), p.ref_dist,
                                        p.pathloss_exp);
    else if (key == "seed")
        p.seed = static_cast<std::uint64_t>(detail::parse_int(key, value));
    else if (key == "trials")
        cfg.trials = static_cast<int>(detail::parse_int(key, value));
    else
        throw std::invalid_argument("unknown config key '" + key +
                                    "' (expected one of: num_users, num_pilots, num_aps, "
                                    "activity_prob, radius, pathloss_exp, ref_dist, noise_var, "
                                    "snr_db, seed, trials)");
}

/// Parses flat key=value text ('#' starts a comment), then applies overrides
/// in order on top of the file values, then validates.
inline SimConfig parse_config(std::istream& in,
                              const std::vector<std::pair<std::string, std::string>>& overrides =
                                  {},
                              const SimConfig& defaults = {}) {
    SimConfig cfg = defaults;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(line_no) +
                                        ": expected key=value");
        apply_config_entry(cfg, detail::trim(line.substr(0, eq)),
                           detail::trim(line.substr(eq + 1)));
    }
    for (const auto& [k, v] : overrides) apply_config_entry(cfg, k, v);
    try {
        cfg.params.validate();
    } catch (const std::exception& e) {
        throw std::invalid_argument(std::string("invalid configuration: ") + e.what());
    }
    if (!(cfg.params.activity_prob > 0.0) || !(cfg.params.activity_prob < 0.5))
        throw std::invalid_argument(
            "config key 'activity_prob': must lie in (0, 0.5); the detection analysis "
            "requires lambda < 0.5");
    if (cfg.trials < 1) throw std::invalid_argument("config key 'trials': must be >= 1");
    return cfg;
}

inline SimConfig parse_config_file(
    const std::string& path,
    const std::vector<std::pair<std::string, std::string>>& overrides = {},
    const SimConfig& defaults = {}) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file " + path);
    return parse_config(in, overrides, defaults);
}

inline std::string serialize_config(const SimConfig& cfg) {
    std::ostringstream os;
    const auto& p = cfg.params;
    char buf[64];
    auto num = [&buf](double v) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        return std::string(buf);
    };
    os << "num_users = " << p.num_users << "\n";
    os << "num_pilots = " << p.num_pilots << "\n";
    os << "num_aps = " << p.num_aps << "\n";
    os << "activity_prob = " << num(p.activity_prob) << "\n";
    os << "radius = " << num(p.radius) << "\n";
    os << "pathloss_exp = " << num(p.pathloss_exp) << "\n";
    os << "ref_dist = " << num(p.ref_dist) << "\n";
    os << "noise_var = " << num(p.noise_var) << "\n";
    os << "seed = " << p.seed << "\n";
    os << "trials = " << cfg.trials << "\n";
    return os.str();
}

}  // namespace cfmimo
