// Command-line experiment runner: Krotov pulse optimization for a qubit in a
// non-Markovian bosonic bath, parameter sweeps, and trajectory exports.
#include <cstdio>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "nmoc/config.hpp"
#include "nmoc/experiment.hpp"

namespace fs = std::filesystem;

int main(int argc, char** argv) {
    CLI::App app{"nmoc - optimal control for a qubit in a non-Markovian bath"};
    app.require_subcommand(1);

    // ---- run ----
    auto* run = app.add_subcommand("run", "optimize gates, optionally sweeping one axis");
    std::string config_path, sweep_spec, gate, out_dir, init_file;
    double alpha = -1, temperature = -1, cutoff = -1, tf = -1, dt = -1, lambda = -1;
    double err_thresh = -1, max_amp = -1, fit_target = -1, quad_tol = -1, init_const;
    int max_iter = -1, workers = -1, max_terms = -1;
    bool ideal = false;
    bool have_init_const = false;
    run->add_option("--config", config_path, "key = value experiment file");
    run->add_option("--gate", gate, "z | identity");
    run->add_option("--alpha", alpha, "bath damping constant");
    run->add_option("--temperature", temperature, "bath temperature (units of Omega)");
    run->add_option("--cutoff", cutoff, "bath cutoff frequency (units of Omega)");
    run->add_option("--tf", tf, "gate operation time (units of 1/Omega)");
    run->add_option("--dt", dt, "time step; default min(1e-3, tf/1000)");
    run->add_option("--lambda", lambda, "Krotov penalty weight");
    run->add_option("--max-iter", max_iter, "iteration cap");
    run->add_option("--error-threshold", err_thresh, "stopping gate error");
    run->add_option("--max-amplitude", max_amp, "control clamp |eps| <= bound");
    run->add_option("--max-terms", max_terms, "CF fit: maximum exponential terms");
    run->add_option("--fit-target", fit_target, "CF fit: normalized residual target");
    run->add_option("--quad-tol", quad_tol, "CF quadrature absolute tolerance");
    run->add_option("--sweep", sweep_spec, "axis=v1,v2,... (t_f, cutoff, alpha, temperature)");
    run->add_option("--out", out_dir, "output directory");
    run->add_option("--workers", workers, "sweep worker threads");
    auto* icopt = run->add_option("--initial-constant", init_const, "constant initial pulse");
    run->add_option("--initial-pulse", init_file, "initial pulse CSV file");
    run->add_flag("--ideal", ideal, "no bath (unitary mode)");

    // ---- bloch ----
    auto* bloch = app.add_subcommand("bloch", "Bloch trajectory under a stored pulse");
    std::string pulse_file, bloch_out = "bloch.csv";
    double px = 1, py = 0, pz = 0;
    double b_alpha = -1, b_temperature = 1, b_cutoff = 1;
    bloch->add_option("--pulse", pulse_file, "pulse CSV (t_start,epsilon)")->required();
    bloch->add_option("--px", px, "initial polarization x");
    bloch->add_option("--py", py, "initial polarization y");
    bloch->add_option("--pz", pz, "initial polarization z");
    bloch->add_option("--alpha", b_alpha, "bath alpha; omit for ideal mode");
    bloch->add_option("--temperature", b_temperature, "bath temperature");
    bloch->add_option("--cutoff", b_cutoff, "bath cutoff");
    bloch->add_option("--out", bloch_out, "output CSV");

    // ---- bath ----
    auto* bath_cmd = app.add_subcommand("bath", "sample and fit the bath correlation function");
    double s_alpha = 0.01, s_temperature = 1, s_cutoff = 1, s_tmax = 0, s_target = 1e-7;
    int s_n = 2001, s_terms = 4;
    std::string bath_out = ".";
    bath_cmd->add_option("--alpha", s_alpha, "bath alpha");
    bath_cmd->add_option("--temperature", s_temperature, "bath temperature");
    bath_cmd->add_option("--cutoff", s_cutoff, "bath cutoff");
    bath_cmd->add_option("--tmax", s_tmax, "sample window; default 10/cutoff");
    bath_cmd->add_option("--samples", s_n, "sample count");
    bath_cmd->add_option("--max-terms", s_terms, "maximum exponential terms");
    bath_cmd->add_option("--fit-target", s_target, "normalized residual target");
    bath_cmd->add_option("--out", bath_out, "output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            nmoc::ExperimentConfig cfg;
            if (!config_path.empty()) cfg = nmoc::load_config(config_path);
            if (!gate.empty()) cfg.gate = gate;
            if (ideal) cfg.ideal = true;
            if (alpha >= 0) cfg.bath.alpha = alpha;
            if (temperature >= 0) cfg.bath.temperature = temperature;
            if (cutoff >= 0) cfg.bath.cutoff = cutoff;
            if (tf > 0) cfg.t_f = tf;
            if (dt > 0) cfg.dt = dt;
            if (lambda > 0) cfg.lambda_weight = lambda;
            if (max_iter > 0) cfg.max_iterations = max_iter;
            if (err_thresh > 0) cfg.error_threshold = err_thresh;
            else if (cfg.ideal && config_path.empty()) cfg.error_threshold = 1e-8;
            if (max_amp > 0) cfg.max_amplitude = max_amp;
            if (max_terms > 0) cfg.fit_max_terms = max_terms;
            if (fit_target > 0) cfg.fit_target = fit_target;
            if (quad_tol > 0) cfg.quad_tol = quad_tol;
            if (!sweep_spec.empty()) nmoc::parse_sweep_spec(sweep_spec, cfg);
            if (!out_dir.empty()) cfg.output_dir = out_dir;
            if (workers > 0) cfg.parallel_workers = workers;
            if (icopt->count() > 0) cfg.initial_constant = init_const;
            if (!init_file.empty()) cfg.initial_pulse_file = init_file;

            auto results = nmoc::run_experiment(cfg);
            for (std::size_t i = 0; i < results.size(); ++i) {
                const auto& r = results[i];
                std::printf("point %zu (%s=%g): error=%.6g fidelity=%.9g iters=%d %s\n", i,
                            cfg.sweep_axis.empty() ? "t_f" : cfg.sweep_axis.c_str(),
                            r.point_value, r.final_error, r.final_fidelity, r.iterations,
                            r.status.c_str());
            }
            std::printf("summary: %s\n", (fs::path(cfg.output_dir) / "summary.csv").c_str());
        } else if (*bloch) {
            std::optional<nmoc::BathParams> bp;
            if (b_alpha >= 0) bp = nmoc::BathParams{b_alpha, b_cutoff, b_temperature};
            nmoc::bloch_trajectory(pulse_file, Eigen::Vector3d(px, py, pz), bp, bloch_out);
            std::printf("trajectory: %s\n", bloch_out.c_str());
        } else if (*bath_cmd) {
            nmoc::BathParams p{s_alpha, s_cutoff, s_temperature};
            const double tmax = s_tmax > 0 ? s_tmax : 10.0 / p.cutoff;
            auto samples = nmoc::sample_correlation(p, tmax, s_n);
            fs::create_directories(bath_out);
            {
                std::ofstream out(fs::path(bath_out) / "cf_samples.csv", std::ios::binary);
                out << "t,re_C,im_C\n";
                for (const auto& s : samples)
                    out << nmoc::csv::fmt(s.time) << ',' << nmoc::csv::fmt(s.value.real()) << ','
                        << nmoc::csv::fmt(s.value.imag()) << '\n';
            }
            auto series = nmoc::fit_exponential_series(samples, s_terms, s_target);
            {
                std::ofstream out(fs::path(bath_out) / "cf_fit.csv", std::ios::binary);
                out << "j,re_c,im_c,re_gamma,im_gamma\n";
                for (std::size_t j = 0; j < series.terms.size(); ++j)
                    out << j << ',' << nmoc::csv::fmt(series.terms[j].amplitude.real()) << ','
                        << nmoc::csv::fmt(series.terms[j].amplitude.imag()) << ','
                        << nmoc::csv::fmt(series.terms[j].rate.real()) << ','
                        << nmoc::csv::fmt(series.terms[j].rate.imag()) << '\n';
            }
            std::printf("fit: %zu terms, max residual %.3g (normalized %.3g), %s\n",
                        series.terms.size(), series.fit_residual,
                        series.fit_residual / std::abs(samples.front().value),
                        series.converged ? "converged" : "did not reach target");
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
