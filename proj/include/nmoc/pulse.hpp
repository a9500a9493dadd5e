#ifndef NMOC_PULSE_HPP
#define NMOC_PULSE_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "nmoc/csv.hpp"
#include "nmoc/errors.hpp"

namespace nmoc {

// Piecewise-constant control amplitude: values[i] holds on [i*dt, (i+1)*dt).
struct ControlPulse {
    double dt = 0;
    std::vector<double> values;
    double max_amplitude = 30.0;

    double duration() const { return dt * static_cast<double>(values.size()); }
    std::size_t size() const { return values.size(); }

    void validate() const {
        if (dt <= 0) throw std::invalid_argument("ControlPulse: dt must be > 0");
        for (double v : values)
            if (!(std::abs(v) <= max_amplitude))
                throw std::invalid_argument("ControlPulse: |eps| exceeds max_amplitude");
    }

    static ControlPulse constant(double value, double t_f, double dt_cap,
                                 double max_amplitude = 30.0) {
        ControlPulse p;
        auto n = static_cast<std::size_t>(std::ceil(t_f / dt_cap - 1e-12));
        if (n == 0) n = 1;
        p.dt = t_f / static_cast<double>(n);
        p.max_amplitude = max_amplitude;
        const double v = std::clamp(value, -max_amplitude, max_amplitude);
        p.values.assign(n, v);
        return p;
    }
};

// File format: header row then one "t_start,epsilon" row per interval.
inline void save_pulse_csv(const ControlPulse& p, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open pulse file for writing: " + path);
    out << "t_start,epsilon\n";
    for (std::size_t i = 0; i < p.values.size(); ++i)
        out << csv::fmt(static_cast<double>(i) * p.dt) << ',' << csv::fmt(p.values[i]) << '\n';
}

inline ControlPulse load_pulse_csv(const std::string& path, double max_amplitude = 30.0) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open pulse file: " + path);
    std::string line;
    long lineno = 0;
    if (!std::getline(in, line)) throw ParseError("empty pulse file", 1);
    ++lineno;
    if (line.rfind("t_start", 0) != 0)
        throw ParseError("pulse file must start with a 't_start,epsilon' header", lineno);

    std::vector<double> starts, values;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string a, b;
        if (!std::getline(ss, a, ',') || !std::getline(ss, b))
            throw ParseError("expected 't_start,epsilon'", lineno);
        try {
            starts.push_back(std::stod(a));
            values.push_back(std::stod(b));
        } catch (const std::exception&) {
            throw ParseError("malformed number in pulse file", lineno);
        }
    }
    if (values.empty()) throw ParseError("pulse file has no intervals", lineno);

    ControlPulse p;
    p.values = std::move(values);
    p.max_amplitude = max_amplitude;
    if (starts.size() >= 2) {
        p.dt = starts[1] - starts[0];
        for (std::size_t i = 0; i + 1 < starts.size(); ++i)
            if (std::abs(starts[i + 1] - starts[i] - p.dt) > 1e-9 * std::max(1.0, p.dt))
                throw ParseError("pulse grid is not uniform", static_cast<long>(i + 3));
    } else {
        p.dt = starts[0] > 0 ? starts[0] : 1e-3;
    }
    if (p.dt <= 0) throw ParseError("pulse grid must be increasing", 2);
    for (double& v : p.values) {
        if (std::abs(v) > p.max_amplitude) p.max_amplitude = std::abs(v);
    }
    return p;
}

}  // namespace nmoc

#endif
