#pragma once

#include <cctype>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "gpcover/common.hpp"
#include "gpcover/sim.hpp"

namespace gpcover {

/// Everything a command needs: the scenario plus output and experiment
/// knobs. Command-line flags override individual fields after loading.
struct CliConfig {
    ScenarioConfig scenario;
    std::string out_dir = "out";
    std::vector<std::size_t> snapshots;
    std::size_t trials = 10;
    double epsilon = 0.3;
    double alpha = 0.4;
    /// Ridge scale gamma_0; zero means "use the scenario noise variance".
    double gamma0 = 0.0;
    std::vector<std::size_t> t_list = {50, 200, 800};
    /// FNV-1a of the raw config file bytes, echoed into every CSV.
    std::uint64_t config_hash = 0;
};

namespace detail {

inline std::string trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

inline std::vector<std::string> split_list(const std::string& value, char sep) {
    std::vector<std::string> parts;
    std::string item;
    std::istringstream in(value);
    while (std::getline(in, item, sep)) {
        item = trim(item);
        if (!item.empty()) parts.push_back(item);
    }
    return parts;
}

inline double parse_real(const std::string& value, const std::string& key) {
    const char* s = value.c_str();
    char* end = nullptr;
    const double v = std::strtod(s, &end);
    if (end == s || *end != '\0') {
        throw ConfigError(key + ": cannot parse '" + value + "' as a real");
    }
    return v;
}

inline std::uint64_t parse_u64(const std::string& value, const std::string& key) {
    const char* s = value.c_str();
    char* end = nullptr;
    const unsigned long long v = std::strtoull(s, &end, 10);
    if (end == s || *end != '\0' || value[0] == '-') {
        throw ConfigError(key + ": cannot parse '" + value + "' as an unsigned integer");
    }
    return static_cast<std::uint64_t>(v);
}

inline std::size_t parse_index(const std::string& value, const std::string& key) {
    return static_cast<std::size_t>(parse_u64(value, key));
}

inline std::vector<std::size_t> parse_index_list(const std::string& value,
                                                 const std::string& key) {
    std::vector<std::size_t> out;
    for (const std::string& item : split_list(value, ',')) {
        out.push_back(parse_index(item, key));
    }
    return out;
}

inline Point2 parse_point(const std::string& value, const std::string& key) {
    const std::vector<std::string> parts = split_list(value, ',');
    if (parts.size() != 2) {
        throw ConfigError(key + ": expected 'x, y', got '" + value + "'");
    }
    return {parse_real(parts[0], key), parse_real(parts[1], key)};
}

inline std::uint64_t hash_bytes(std::string_view bytes) {
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (char c : bytes) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001B3ull;
    }
    return h;
}

}  // namespace detail

/// Parses the flat `key = value` config format. One assignment per line,
/// `#` starts a comment, `bump` and `init` may repeat, every other key may
/// appear once. Unknown keys and malformed values are hard errors so typos
/// in experiment sweeps fail loudly instead of running the defaults.
inline CliConfig parse_config(std::string_view text) {
    CliConfig cfg;
    cfg.config_hash = detail::hash_bytes(text);

    std::set<std::string> seen;
    std::vector<Point2> domain_vertices;

    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;

        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("line " + std::to_string(line_no) +
                              ": expected 'key = value'");
        }
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        if (key.empty()) {
            throw ConfigError("line " + std::to_string(line_no) + ": empty key");
        }
        if (key != "bump" && key != "init" && !seen.insert(key).second) {
            throw ConfigError("duplicate key '" + key + "'");
        }

        ScenarioConfig& sc = cfg.scenario;
        if (key == "agents") {
            sc.agent_count = detail::parse_index(value, key);
        } else if (key == "seed") {
            sc.seed = detail::parse_u64(value, key);
        } else if (key == "max_iters") {
            sc.max_iters = detail::parse_index(value, key);
        } else if (key == "max_measurements") {
            sc.max_measurements = detail::parse_index(value, key);
        } else if (key == "grid_step") {
            sc.grid_step = detail::parse_real(value, key);
        } else if (key == "lengthscale_sq") {
            sc.lengthscale_sq = detail::parse_real(value, key);
        } else if (key == "amplitude") {
            sc.amplitude = detail::parse_real(value, key);
        } else if (key == "noise_var") {
            sc.noise_var = detail::parse_real(value, key);
        } else if (key == "sigma_c_sq") {
            sc.phase1.sigma_C_sq = detail::parse_real(value, key);
        } else if (key == "sigma_delta_sq") {
            sc.phase1.sigma_Delta_sq = detail::parse_real(value, key);
        } else if (key == "rho_scale") {
            sc.phase1.rho_scale = detail::parse_real(value, key);
        } else if (key == "a_exponent") {
            sc.phase1.a_exponent = detail::parse_real(value, key);
        } else if (key == "switch_threshold") {
            sc.phase1.switch_threshold = detail::parse_real(value, key);
        } else if (key == "domain") {
            for (const std::string& part : detail::split_list(value, ';')) {
                domain_vertices.push_back(detail::parse_point(part, key));
            }
        } else if (key == "bump") {
            const std::vector<std::string> parts = detail::split_list(value, ',');
            if (parts.size() != 4) {
                throw ConfigError("bump: expected 'weight, cx, cy, width_sq'");
            }
            Bump b;
            b.weight = detail::parse_real(parts[0], key);
            b.center = {detail::parse_real(parts[1], key),
                        detail::parse_real(parts[2], key)};
            b.width_sq = detail::parse_real(parts[3], key);
            sc.true_field.bumps.push_back(b);
        } else if (key == "init") {
            sc.init_positions.push_back(detail::parse_point(value, key));
        } else if (key == "snapshots") {
            cfg.snapshots = detail::parse_index_list(value, key);
        } else if (key == "out_dir") {
            cfg.out_dir = value;
        } else if (key == "trials") {
            cfg.trials = detail::parse_index(value, key);
        } else if (key == "epsilon") {
            cfg.epsilon = detail::parse_real(value, key);
        } else if (key == "alpha") {
            cfg.alpha = detail::parse_real(value, key);
        } else if (key == "gamma0") {
            cfg.gamma0 = detail::parse_real(value, key);
        } else if (key == "t_list") {
            cfg.t_list = detail::parse_index_list(value, key);
        } else {
            throw ConfigError("unknown key '" + key + "'");
        }
    }

    if (!domain_vertices.empty()) {
        try {
            cfg.scenario.domain = ConvexPolygon::from_vertices(domain_vertices);
        } catch (const Error& e) {
            throw ConfigError(std::string("domain: ") + e.what());
        }
    }
    cfg.scenario.validate();
    if (cfg.gamma0 == 0.0) cfg.gamma0 = cfg.scenario.noise_var;
    if (!(cfg.gamma0 > 0.0)) throw ConfigError("gamma0 must be positive");
    return cfg;
}

inline CliConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

}  // namespace gpcover
