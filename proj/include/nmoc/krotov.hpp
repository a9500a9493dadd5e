#ifndef NMOC_KROTOV_HPP
#define NMOC_KROTOV_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <fstream>
#include <string>
#include <vector>

#include "nmoc/csv.hpp"
#include "nmoc/propagate.hpp"

namespace nmoc {

// O vec(rho) = vec(sigma_z rho sigma_z) = diag(1,-1,-1,1) in column stacking.
inline Mat4 z_gate_superoperator() { return kron22(pauli_z().transpose(), pauli_z()); }
inline Mat4 identity_gate_superoperator() { return Mat4::Identity(); }

struct GateTarget {
    std::string name;           // "z" or "identity"
    Mat4 qubit_superoperator;   // unitary 4x4 superoperator O

    // O in the rho-rho block, zero elsewhere; auxiliary blocks carry no target.
    MatX extended_embedding(Eigen::Index dim) const {
        MatX q = MatX::Zero(dim, dim);
        q.block<4, 4>(0, 0) = qubit_superoperator;
        return q;
    }

    static GateTarget make(const std::string& name) {
        if (name == "z") return {name, z_gate_superoperator()};
        if (name == "identity") return {name, identity_gate_superoperator()};
        throw std::invalid_argument("GateTarget: unknown gate '" + name + "'");
    }
};

// F = Re Tr{O^dag G_rhorho(t_f)} / 4; normalized by the rho-block dimension
// so that F = 1 is attainable.
inline double trace_fidelity(const GateTarget& target, const ExtendedPropagator& g_final) {
    if (g_final.entries.rows() < 4 || g_final.entries.rows() != g_final.entries.cols())
        throw std::invalid_argument("trace_fidelity: propagator must be square with dim >= 4");
    const Mat4 x = g_final.entries.block<4, 4>(0, 0);
    return (target.qubit_superoperator.adjoint() * x).trace().real() / 4.0;
}

// Hilbert-Schmidt distance Tr{(O - X)^dag (O - X)} / 4; non-negative for any X.
inline double gate_error(const GateTarget& target, const ExtendedPropagator& g_final) {
    if (g_final.entries.rows() < 4 || g_final.entries.rows() != g_final.entries.cols())
        throw std::invalid_argument("gate_error: propagator must be square with dim >= 4");
    const Mat4 d = target.qubit_superoperator - g_final.entries.block<4, 4>(0, 0);
    return (d.adjoint() * d).trace().real() / 4.0;
}

enum class ReferenceMode {
    previous_iterate,  // eps_0 = previous pulse: penalizes per-iteration change
    fixed              // eps_0 = the initial pulse throughout
};

struct KrotovConfig {
    double lambda_weight = 5e-2;
    ReferenceMode epsilon_ref_mode = ReferenceMode::previous_iterate;
    int max_iterations = 3000;
    double error_threshold = 1e-6;
    double max_amplitude = 30.0;
    double dt = 1e-3;
    ControlPulse initial_pulse;

    void validate() const {
        if (lambda_weight <= 0) throw std::invalid_argument("KrotovConfig: lambda_weight > 0");
        if (error_threshold <= 0) throw std::invalid_argument("KrotovConfig: error_threshold > 0");
        if (max_iterations < 1) throw std::invalid_argument("KrotovConfig: max_iterations >= 1");
        if (initial_pulse.values.empty())
            throw std::invalid_argument("KrotovConfig: initial pulse is empty");
        initial_pulse.validate();
    }
};

struct IterationRecord {
    int iteration = 0;  // 1-based; iteration 1 evaluates the initial pulse
    double fidelity = 0;
    double objective = 0;
    double gate_error = 0;
    double max_pulse_change = 0;
    bool clamped = false;
};

// J = F - lambda dt sum_i (eps_i - eps0_i)^2
inline double objective(double fidelity, const ControlPulse& pulse, const ControlPulse& ref,
                        const KrotovConfig& cfg) {
    if (pulse.values.size() != ref.values.size() || pulse.dt != ref.dt)
        throw std::invalid_argument("objective: pulse and reference share one grid");
    double penalty = 0;
    for (std::size_t i = 0; i < pulse.values.size(); ++i) {
        const double d = pulse.values[i] - ref.values[i];
        penalty += d * d;
    }
    return fidelity - cfg.lambda_weight * pulse.dt * penalty;
}

// Krotov step (iv): delta_eps = (1 / 2 lambda) Re Tr{B dLambda G}.
inline double krotov_update_value(const MatX& b_t, const MatX& dlambda, const MatX& g_t,
                                  double lambda_weight) {
    if (lambda_weight <= 0) throw std::invalid_argument("krotov_update_value: lambda > 0");
    return 0.5 / lambda_weight * (b_t * (dlambda * g_t)).trace().real();
}

struct OptimizationResult {
    ControlPulse pulse;                  // best pulse by gate error
    std::vector<IterationRecord> trace;  // one record per iteration
};

class OptimizationError : public std::runtime_error {
public:
    OptimizationError(const std::string& what, std::vector<IterationRecord> partial)
        : std::runtime_error(what), trace(std::move(partial)) {}
    std::vector<IterationRecord> trace;
};

// Krotov loop: forward propagate, backward propagate from Q^dag, then a
// sequential forward sweep that updates each interval in place before
// advancing through it. Stops at the error threshold or the iteration cap;
// returns the best-so-far pulse.
inline OptimizationResult run_optimization(const GateTarget& target, const ExtendedGenerator& gen,
                                           const KrotovConfig& cfg) {
    cfg.validate();
    const Eigen::Index dim = gen.dim();
    const auto n = cfg.initial_pulse.size();
    const double dt = cfg.initial_pulse.dt;
    const MatX q_dag = target.extended_embedding(dim).adjoint();
    const MatX& dlam = gen.control_derivative();
    const double inv2lam = 0.5 / cfg.lambda_weight;

    ControlPulse pulse = cfg.initial_pulse;
    pulse.max_amplitude = cfg.max_amplitude;
    ControlPulse previous = pulse;

    std::vector<IterationRecord> trace;
    ControlPulse best_pulse = pulse;
    double best_error = std::numeric_limits<double>::infinity();

    MatX g(dim, dim), k1(dim, dim), k2(dim, dim), k3(dim, dim), dg(dim, dim);
    std::vector<MatX> b_hist(n + 1, MatX(dim, dim));

    auto evaluate = [&](const ControlPulse& p) -> MatX {
        MatX gf = MatX::Identity(dim, dim);
        for (std::size_t i = 0; i < n; ++i) {
            rk4::step_forward(gf, gen.matrix(p.values[i]), dt, k1, k2, k3);
            if (!gf.allFinite())
                throw OptimizationError("run_optimization: non-finite forward propagation", trace);
        }
        return gf;
    };

    try {
        for (int iter = 1; iter <= cfg.max_iterations; ++iter) {
            bool clamped = false;
            double max_change = 0;
            if (iter > 1) {
                // backward pass with the current pulse
                b_hist[n] = q_dag;
                for (std::size_t i = n; i-- > 0;) {
                    b_hist[i] = b_hist[i + 1];
                    rk4::step_backward(b_hist[i], gen.matrix(pulse.values[i]), dt, k1, k2, k3);
                }
                // sequential forward sweep with immediate updates
                previous = pulse;
                g = MatX::Identity(dim, dim);
                for (std::size_t i = 0; i < n; ++i) {
                    dg.noalias() = dlam * g;
                    const double tr = (dg.transpose().cwiseProduct(b_hist[i])).sum().real();
                    double v = pulse.values[i] + inv2lam * tr;
                    if (std::abs(v) > cfg.max_amplitude) {
                        v = v > 0 ? cfg.max_amplitude : -cfg.max_amplitude;
                        clamped = true;
                    }
                    max_change = std::max(max_change, std::abs(v - pulse.values[i]));
                    pulse.values[i] = v;
                    rk4::step_forward(g, gen.matrix(v), dt, k1, k2, k3);
                    if (!g.allFinite())
                        throw OptimizationError("run_optimization: non-finite sweep", trace);
                }
            } else {
                g = evaluate(pulse);
            }

            ExtendedPropagator gf{g, static_cast<double>(n) * dt};
            IterationRecord rec;
            rec.iteration = iter;
            rec.fidelity = trace_fidelity(target, gf);
            rec.gate_error = gate_error(target, gf);
            rec.max_pulse_change = max_change;
            rec.clamped = clamped;
            const ControlPulse& ref =
                cfg.epsilon_ref_mode == ReferenceMode::fixed ? cfg.initial_pulse : previous;
            rec.objective = objective(rec.fidelity, pulse, ref, cfg);
            trace.push_back(rec);

            if (rec.gate_error < best_error) {
                best_error = rec.gate_error;
                best_pulse = pulse;
            }
            if (rec.gate_error <= cfg.error_threshold) break;
        }
    } catch (const PropagationError& e) {
        throw OptimizationError(e.what(), trace);
    }

    return {best_pulse, trace};
}

inline void write_trace_csv(const std::vector<IterationRecord>& trace, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open trace file for writing: " + path);
    out << "iteration,fidelity,objective,gate_error,max_pulse_change,clamped\n";
    for (const auto& r : trace)
        out << r.iteration << ',' << csv::fmt(r.fidelity) << ',' << csv::fmt(r.objective) << ','
            << csv::fmt(r.gate_error) << ',' << csv::fmt(r.max_pulse_change) << ','
            << (r.clamped ? 1 : 0) << '\n';
}

}  // namespace nmoc

#endif
