#ifndef NMOC_CONFIG_HPP
#define NMOC_CONFIG_HPP

#include <fstream>
#include <sstream>
#include <string>

#include "nmoc/errors.hpp"
#include "nmoc/experiment.hpp"

// Flat "key = value" experiment files; '#' starts a comment. CLI flags
// override file values.
namespace nmoc {

namespace config_detail {

inline std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

inline std::vector<double> parse_list(const std::string& s, long line) {
    std::vector<double> out;
    std::istringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            out.push_back(std::stod(trim(item)));
        } catch (const std::exception&) {
            throw ParseError("malformed number '" + item + "'", line);
        }
    }
    return out;
}

}  // namespace config_detail

// "axis=v1,v2,..." (used by both the config file and the --sweep flag)
inline void parse_sweep_spec(const std::string& spec, ExperimentConfig& cfg, long line = 0) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos)
        throw ParseError("sweep must look like axis=v1,v2,...", line);
    cfg.sweep_axis = config_detail::trim(spec.substr(0, eq));
    cfg.sweep_values = config_detail::parse_list(spec.substr(eq + 1), line);
    if (cfg.sweep_axis != "t_f" && cfg.sweep_axis != "cutoff" && cfg.sweep_axis != "alpha" &&
        cfg.sweep_axis != "temperature")
        throw ParseError("sweep axis must be one of t_f, cutoff, alpha, temperature", line);
}

inline void apply_config_line(const std::string& key, const std::string& value,
                              ExperimentConfig& cfg, long line) {
    using config_detail::trim;
    auto num = [&](const std::string& v) {
        try {
            return std::stod(v);
        } catch (const std::exception&) {
            throw ParseError("malformed number '" + v + "' for key '" + key + "'", line);
        }
    };
    if (key == "gate") cfg.gate = value;
    else if (key == "ideal") cfg.ideal = (value == "1" || value == "true" || value == "yes");
    else if (key == "alpha") cfg.bath.alpha = num(value);
    else if (key == "temperature") cfg.bath.temperature = num(value);
    else if (key == "cutoff") cfg.bath.cutoff = num(value);
    else if (key == "tf") cfg.t_f = num(value);
    else if (key == "dt") cfg.dt = num(value);
    else if (key == "lambda") cfg.lambda_weight = num(value);
    else if (key == "max_iter") cfg.max_iterations = static_cast<int>(num(value));
    else if (key == "error_threshold") cfg.error_threshold = num(value);
    else if (key == "max_amplitude") cfg.max_amplitude = num(value);
    else if (key == "max_terms") cfg.fit_max_terms = static_cast<int>(num(value));
    else if (key == "fit_target") cfg.fit_target = num(value);
    else if (key == "quad_tol") cfg.quad_tol = num(value);
    else if (key == "sweep") parse_sweep_spec(value, cfg, line);
    else if (key == "out") cfg.output_dir = value;
    else if (key == "workers") cfg.parallel_workers = static_cast<int>(num(value));
    else if (key == "initial_constant") cfg.initial_constant = num(value);
    else if (key == "initial_pulse_file") cfg.initial_pulse_file = value;
    else throw ParseError("unknown config key '" + key + "'", line);
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    ExperimentConfig cfg;
    std::string raw;
    long line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const auto hash = raw.find('#');
        std::string s = config_detail::trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (s.empty()) continue;
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw ParseError("expected 'key = value'", line);
        const std::string key = config_detail::trim(s.substr(0, eq));
        const std::string value = config_detail::trim(s.substr(eq + 1));
        apply_config_line(key, value, cfg, line);
    }
    return cfg;
}

}  // namespace nmoc

#endif
