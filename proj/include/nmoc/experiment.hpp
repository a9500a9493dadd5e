#ifndef NMOC_EXPERIMENT_HPP
#define NMOC_EXPERIMENT_HPP

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "nmoc/krotov.hpp"
#include "nmoc/oracle.hpp"

// Experiment runner: single optimizations and one-axis parameter sweeps with
// CSV outputs (summary row + pulse file per point).
namespace nmoc {

struct ExperimentConfig {
    std::string gate = "z";          // z | identity
    bool ideal = false;              // no bath (unitary mode)
    BathParams bath;
    double t_f = 1.0;
    double lambda_weight = 5e-2;
    int max_iterations = 3000;
    double error_threshold = 1e-6;   // ideal mode default: 1e-8 (applied by the CLI)
    double max_amplitude = 30.0;
    double dt = 0;                   // 0 -> min(1e-3, t_f/1000)
    int fit_max_terms = 4;
    double fit_target = 1e-7;
    double quad_tol = 1e-12;
    std::string sweep_axis;          // one of: t_f, cutoff, alpha, temperature; empty = none
    std::vector<double> sweep_values;
    std::string output_dir = ".";
    int parallel_workers = 1;
    double initial_constant = std::numeric_limits<double>::quiet_NaN();  // NaN -> gate default
    std::string initial_pulse_file;

    void validate() const {
        if (gate != "z" && gate != "identity")
            throw std::invalid_argument("ExperimentConfig: gate must be z or identity");
        if (t_f <= 0) throw std::invalid_argument("ExperimentConfig: t_f must be > 0");
        if (!sweep_axis.empty() && sweep_values.empty())
            throw std::invalid_argument("ExperimentConfig: sweep values must be nonempty");
        if (parallel_workers < 1)
            throw std::invalid_argument("ExperimentConfig: workers >= 1");
        if (!ideal) bath.validate();
    }
};

struct PointResult {
    double point_value = 0;
    BathParams bath;
    double t_f = 0;
    int iterations = 0;
    double final_error = std::numeric_limits<double>::quiet_NaN();
    double final_fidelity = std::numeric_limits<double>::quiet_NaN();
    int fit_terms = 0;
    double fit_residual = 0;
    std::string status = "ok";
    ControlPulse pulse;
    std::vector<IterationRecord> trace;
};

namespace experiment_detail {

inline double default_dt(double t_f, double configured) {
    if (configured > 0) return configured;
    return std::min(1e-3, t_f / 1000.0);
}

// Default initial guess. The z gate needs a symmetry-breaking pulse: with
// eps = 0 the fidelity gradient vanishes identically (Tr{sigma_z U} = 0 for a
// pure sigma_x drive), so use a smooth sin^2 bump of pulse area pi. The
// identity gate starts from zero.
inline ControlPulse default_initial_pulse(const ExperimentConfig& cfg, double t_f) {
    const double dt_cap = default_dt(t_f, cfg.dt);
    if (!cfg.initial_pulse_file.empty())
        return load_pulse_csv(cfg.initial_pulse_file, cfg.max_amplitude);
    if (!std::isnan(cfg.initial_constant))
        return ControlPulse::constant(cfg.initial_constant, t_f, dt_cap, cfg.max_amplitude);
    if (cfg.gate == "identity")
        return ControlPulse::constant(0.0, t_f, dt_cap, cfg.max_amplitude);
    ControlPulse p = ControlPulse::constant(0.0, t_f, dt_cap, cfg.max_amplitude);
    const auto n = p.values.size();
    const double peak = 2.0 * M_PI / t_f;
    for (std::size_t i = 0; i < n; ++i) {
        const double s = std::sin(M_PI * static_cast<double>(i) / static_cast<double>(n));
        p.values[i] = std::clamp(peak * s * s, -cfg.max_amplitude, cfg.max_amplitude);
    }
    return p;
}

inline ExponentialSeries fit_bath(const ExperimentConfig& cfg, const BathParams& p, double t_f) {
    const double t_max = std::max(t_f, 10.0 / p.cutoff);
    auto samples = sample_correlation(p, t_max, 2001, cfg.quad_tol);
    return fit_exponential_series(samples, cfg.fit_max_terms, cfg.fit_target);
}

inline PointResult run_point(const ExperimentConfig& cfg, const std::string& axis, double value) {
    PointResult res;
    res.bath = cfg.bath;
    res.t_f = cfg.t_f;
    res.point_value = value;
    if (axis == "t_f") res.t_f = value;
    else if (axis == "cutoff") res.bath.cutoff = value;
    else if (axis == "alpha") res.bath.alpha = value;
    else if (axis == "temperature") res.bath.temperature = value;
    else if (!axis.empty()) throw std::invalid_argument("unknown sweep axis: " + axis);

    ExponentialSeries series;  // empty = ideal
    if (!cfg.ideal) {
        series = fit_bath(cfg, res.bath, res.t_f);
        res.fit_terms = static_cast<int>(series.terms.size());
        res.fit_residual = series.fit_residual;
    }
    ExtendedGenerator gen(1.0, series);

    KrotovConfig kc;
    kc.lambda_weight = cfg.lambda_weight;
    kc.max_iterations = cfg.max_iterations;
    kc.error_threshold = cfg.error_threshold;
    kc.max_amplitude = cfg.max_amplitude;
    kc.dt = default_dt(res.t_f, cfg.dt);
    kc.initial_pulse = default_initial_pulse(cfg, res.t_f);

    auto out = run_optimization(GateTarget::make(cfg.gate), gen, kc);
    res.pulse = out.pulse;
    res.trace = out.trace;
    res.iterations = static_cast<int>(out.trace.size());
    double best = std::numeric_limits<double>::infinity();
    for (const auto& r : out.trace)
        if (r.gate_error < best) {
            best = r.gate_error;
            res.final_error = r.gate_error;
            res.final_fidelity = r.fidelity;
        }
    return res;
}

}  // namespace experiment_detail

// One row per sweep point (in sweep order), plus pulse_<index>.csv per point.
// Point failures are recorded in the status column and do not abort the sweep.
inline std::vector<PointResult> run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    namespace fs = std::filesystem;
    fs::create_directories(cfg.output_dir);

    std::vector<double> points = cfg.sweep_values;
    std::string axis = cfg.sweep_axis;
    if (points.empty()) {
        points.push_back(cfg.t_f);
        axis.clear();
    }

    std::vector<PointResult> results(points.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t idx = next.fetch_add(1);
            if (idx >= points.size()) return;
            try {
                results[idx] = experiment_detail::run_point(cfg, axis, points[idx]);
            } catch (const std::exception& e) {
                results[idx].point_value = points[idx];
                results[idx].bath = cfg.bath;
                results[idx].t_f = cfg.t_f;
                std::string msg = e.what();
                for (char& c : msg)
                    if (c == ',' || c == '\n') c = ';';
                results[idx].status = msg;
            }
        }
    };
    const int workers = std::min<int>(cfg.parallel_workers, static_cast<int>(points.size()));
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    std::ofstream sum(fs::path(cfg.output_dir) / "summary.csv", std::ios::binary);
    if (!sum) throw std::runtime_error("cannot write summary.csv in " + cfg.output_dir);
    sum << "point_value,alpha,temperature,cutoff,t_f,iterations,final_error,"
           "final_fidelity,fit_terms,fit_residual,status\n";
    for (std::size_t i = 0; i < results.size(); ++i) {
        const auto& r = results[i];
        sum << csv::fmt(r.point_value) << ',' << csv::fmt(r.bath.alpha) << ','
            << csv::fmt(r.bath.temperature) << ',' << csv::fmt(r.bath.cutoff) << ','
            << csv::fmt(r.t_f) << ',' << r.iterations << ',' << csv::fmt(r.final_error) << ','
            << csv::fmt(r.final_fidelity) << ',' << r.fit_terms << ','
            << csv::fmt(r.fit_residual) << ',' << r.status << '\n';
        if (r.status == "ok")
            save_pulse_csv(r.pulse,
                           (fs::path(cfg.output_dir) / ("pulse_" + std::to_string(i) + ".csv"))
                               .string());
    }
    return results;
}

// Bloch trajectory of rho(0) = (I + P.sigma)/2 under a stored pulse.
inline void bloch_trajectory(const std::string& pulse_file, const Eigen::Vector3d& p0,
                             const std::optional<BathParams>& bath, const std::string& out_path,
                             double quad_tol = 1e-12, int fit_max_terms = 4,
                             double fit_target = 1e-7) {
    if (p0.norm() > 1 + 1e-12)
        throw std::invalid_argument("bloch_trajectory: |P(0)| must be <= 1");
    ControlPulse pulse = load_pulse_csv(pulse_file);

    ExponentialSeries series;
    if (bath) {
        const double t_max = std::max(pulse.duration(), 10.0 / bath->cutoff);
        series = fit_exponential_series(sample_correlation(*bath, t_max, 2001, quad_tol),
                                        fit_max_terms, fit_target);
    }
    ExtendedGenerator gen(1.0, series);
    const Eigen::Index dim = gen.dim();

    Mat2 rho0 = 0.5 * (Mat2::Identity() + p0.x() * pauli_x() + p0.y() * pauli_y() +
                       p0.z() * pauli_z());
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(dim);
    v.head<4>() = vectorize(rho0);

    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open trajectory file for writing: " + out_path);
    out << "t,P_x,P_y,P_z\n";
    auto emit = [&](double t) {
        const Mat2 rho = devectorize(v.head<4>());
        out << csv::fmt(t) << ',' << csv::fmt((pauli_x() * rho).trace().real()) << ','
            << csv::fmt((pauli_y() * rho).trace().real()) << ','
            << csv::fmt((pauli_z() * rho).trace().real()) << '\n';
    };
    emit(0.0);
    Eigen::VectorXcd k1(dim), k2(dim), k3(dim), k4(dim);
    for (std::size_t i = 0; i < pulse.size(); ++i) {
        const MatX a = gen.matrix(pulse.values[i]);
        const double dt = pulse.dt;
        k1.noalias() = a * v;
        k2.noalias() = a * (v + (0.5 * dt) * k1);
        k3.noalias() = a * (v + (0.5 * dt) * k2);
        k4.noalias() = a * (v + dt * k3);
        v += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (!v.allFinite()) throw PropagationError("bloch_trajectory: non-finite state");
        emit(static_cast<double>(i + 1) * dt);
    }
}

}  // namespace nmoc

#endif
