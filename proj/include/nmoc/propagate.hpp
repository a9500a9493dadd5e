#ifndef NMOC_PROPAGATE_HPP
#define NMOC_PROPAGATE_HPP

#include <vector>

#include "nmoc/errors.hpp"
#include "nmoc/extended.hpp"
#include "nmoc/pulse.hpp"

namespace nmoc {

struct ExtendedPropagator {
    MatX entries;
    double time = 0;
};

namespace rk4 {

// dG/dt = A G, one classic RK4 step; A constant over the step.
inline void step_forward(MatX& g, const MatX& a, double dt, MatX& k1, MatX& k2, MatX& k3) {
    k1.noalias() = a * g;
    k2.noalias() = a * (g + (0.5 * dt) * k1);
    k3.noalias() = a * (g + (0.5 * dt) * k2);
    k1.noalias() += 2.0 * k2;
    k2.noalias() = a * (g + dt * k3);  // k4
    g += (dt / 6.0) * (k1 + 2.0 * k3 + k2);
}

// dB/dt = -B A stepped from t_{i+1} down to t_i. The two sign flips cancel:
// for constant A this is exactly B <- B (I + dtA + dt^2A^2/2 + dt^3A^3/6 + dt^4A^4/24),
// the same step polynomial as forward, so B(t) G(t) is conserved to roundoff.
inline void step_backward(MatX& b, const MatX& a, double dt, MatX& k1, MatX& k2, MatX& k3) {
    k1.noalias() = b * a;
    k2.noalias() = (b + (0.5 * dt) * k1) * a;
    k3.noalias() = (b + (0.5 * dt) * k2) * a;
    k1.noalias() += 2.0 * k2;
    k2.noalias() = (b + dt * k3) * a;  // k4
    b += (dt / 6.0) * (k1 + 2.0 * k3 + k2);
}

}  // namespace rk4

// Forward propagator history G(t_i), i = 0..n, G(0) = I.
inline std::vector<ExtendedPropagator> propagate_forward(const ControlPulse& pulse,
                                                         const ExtendedGenerator& gen) {
    const Eigen::Index dim = gen.dim();
    std::vector<ExtendedPropagator> hist;
    hist.reserve(pulse.size() + 1);
    hist.push_back({MatX::Identity(dim, dim), 0.0});
    MatX g = hist.front().entries;
    MatX k1(dim, dim), k2(dim, dim), k3(dim, dim);
    for (std::size_t i = 0; i < pulse.size(); ++i) {
        const MatX a = gen.matrix(pulse.values[i]);
        rk4::step_forward(g, a, pulse.dt, k1, k2, k3);
        if (!g.allFinite())
            throw PropagationError("propagate_forward: non-finite entries at step " +
                                   std::to_string(i));
        hist.push_back({g, static_cast<double>(i + 1) * pulse.dt});
    }
    return hist;
}

// Backward propagator history: dB/dt = -B Lambda(t), B(t_f) = terminal.
inline std::vector<ExtendedPropagator> propagate_backward(const ControlPulse& pulse,
                                                          const ExtendedGenerator& gen,
                                                          const MatX& terminal) {
    const Eigen::Index dim = gen.dim();
    if (terminal.rows() != dim || terminal.cols() != dim)
        throw std::invalid_argument("propagate_backward: terminal dimension mismatch");
    const auto n = pulse.size();
    std::vector<ExtendedPropagator> hist(n + 1);
    hist[n] = {terminal, static_cast<double>(n) * pulse.dt};
    MatX b = terminal;
    MatX k1(dim, dim), k2(dim, dim), k3(dim, dim);
    for (std::size_t i = n; i-- > 0;) {
        const MatX a = gen.matrix(pulse.values[i]);
        rk4::step_backward(b, a, pulse.dt, k1, k2, k3);
        if (!b.allFinite())
            throw PropagationError("propagate_backward: non-finite entries at step " +
                                   std::to_string(i));
        hist[i] = {b, static_cast<double>(i) * pulse.dt};
    }
    return hist;
}

}  // namespace nmoc

#endif
