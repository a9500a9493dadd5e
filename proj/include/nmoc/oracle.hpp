#ifndef NMOC_ORACLE_HPP
#define NMOC_ORACLE_HPP

#include <fstream>
#include <vector>

#include "nmoc/bath.hpp"
#include "nmoc/csv.hpp"
#include "nmoc/pulse.hpp"
#include "nmoc/superop.hpp"

// Brute-force integrator of the time-nonlocal master equation. The memory
// kernel K(t) = -i int_0^t C(t-t') U_S(t,t') sigma_x rho(t') dt' is evaluated
// by trapezoidal quadrature over the stored history; correlation values come
// straight from quadrature, so this path is independent of the exponential
// fit and of the extended-space propagation it is used to check.
namespace nmoc {

struct HistoryBuffer {
    std::vector<double> grid;
    std::vector<Mat2> states;                // rho(t_i)
    std::vector<Mat2> unitary_propagators;   // U_S(t_i), dU/dt = -i H_S U
};

namespace oracle_detail {

// exp(-i H dt) for H = a sigma_z + b sigma_x (axis-angle closed form)
inline Mat2 qubit_step(double eps, double omega, double dt) {
    const double a = -eps / 2, b = -omega / 2;
    const double nu = std::hypot(a, b);
    if (nu == 0) return Mat2::Identity();
    const double th = nu * dt;
    Mat2 h_unit = (a * pauli_z() + b * pauli_x()) / nu;
    return std::cos(th) * Mat2::Identity() - cplx(0, 1) * std::sin(th) * h_unit;
}

}  // namespace oracle_detail

inline HistoryBuffer propagate_nonlocal_history(const Mat2& rho0, const ControlPulse& pulse,
                                                const BathParams& p, double quad_tol = 1e-12) {
    p.validate();
    pulse.validate();
    if ((rho0 - rho0.adjoint()).cwiseAbs().maxCoeff() > 1e-10)
        throw std::invalid_argument("propagate_nonlocal: rho0 must be Hermitian");
    if (std::abs(rho0.trace().real() - 1.0) > 1e-10 || std::abs(rho0.trace().imag()) > 1e-12)
        throw std::invalid_argument("propagate_nonlocal: rho0 must have unit trace");

    const auto n = pulse.size();
    const double dt = pulse.dt;

    std::vector<cplx> cf(n + 1);
    for (std::size_t k = 0; k <= n; ++k)
        cf[k] = correlation_function(static_cast<double>(k) * dt, p, quad_tol);

    HistoryBuffer hist;
    hist.grid.resize(n + 1);
    hist.states.reserve(n + 1);
    hist.unitary_propagators.reserve(n + 1);
    hist.states.push_back(rho0);
    hist.unitary_propagators.push_back(Mat2::Identity());
    for (std::size_t i = 0; i <= n; ++i) hist.grid[i] = static_cast<double>(i) * dt;
    for (std::size_t i = 0; i < n; ++i)
        hist.unitary_propagators.push_back(
            oracle_detail::qubit_step(pulse.values[i], 1.0, dt) * hist.unitary_propagators[i]);

    const Mat2 sx = pauli_x();
    // interaction-picture kernel slices M_j = U_j^dag sigma_x rho_j U_j
    std::vector<Mat2> slices;
    slices.reserve(n + 1);
    auto make_slice = [&](std::size_t j, const Mat2& rho) -> Mat2 {
        const Mat2& u = hist.unitary_propagators[j];
        return u.adjoint() * (sx * rho) * u;
    };
    slices.push_back(make_slice(0, rho0));

    auto dissipator = [&](std::size_t i) -> Mat2 {
        if (i == 0) return Mat2::Zero();
        Mat2 acc = Mat2::Zero();
        for (std::size_t j = 0; j <= i; ++j) {
            const double w = (j == 0 || j == i) ? 0.5 : 1.0;
            acc += (w * cf[i - j]) * slices[j];
        }
        const Mat2& u = hist.unitary_propagators[i];
        Mat2 kern = cplx(0, -1) * dt * (u * acc * u.adjoint());
        Mat2 lxk = cplx(0, -1) * (sx * kern - kern * sx);
        return lxk + lxk.adjoint();
    };

    auto rhs = [&](std::size_t i, const Mat2& rho) -> Mat2 {
        const double eps = pulse.values[std::min(i, n - 1)];
        const Mat2 h = -(eps / 2) * pauli_z() - 0.5 * sx;
        return cplx(0, -1) * (h * rho - rho * h) + dissipator(i);
    };

    for (std::size_t i = 0; i < n; ++i) {
        const Mat2& rho = hist.states[i];
        const Mat2 f1 = rhs(i, rho);
        const Mat2 pred = rho + dt * f1;
        slices.push_back(make_slice(i + 1, pred));
        const Mat2 f2 = rhs(i + 1, pred);
        Mat2 next = rho + (dt / 2) * (f1 + f2);
        if (!next.allFinite()) throw PropagationError("propagate_nonlocal: non-finite state");
        slices[i + 1] = make_slice(i + 1, next);
        hist.states.push_back(next);
    }
    return hist;
}

inline std::vector<Mat2> propagate_nonlocal(const Mat2& rho0, const ControlPulse& pulse,
                                            const BathParams& p, double quad_tol = 1e-12) {
    return propagate_nonlocal_history(rho0, pulse, p, quad_tol).states;
}

inline void write_trajectory_csv(const HistoryBuffer& hist, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open trajectory file for writing: " + path);
    out << "t,re_r00,im_r00,re_r01,im_r01,re_r10,im_r10,re_r11,im_r11\n";
    for (std::size_t i = 0; i < hist.states.size(); ++i) {
        const Mat2& r = hist.states[i];
        out << csv::fmt(hist.grid[i]);
        for (int row = 0; row < 2; ++row)
            for (int col = 0; col < 2; ++col)
                out << ',' << csv::fmt(r(row, col).real()) << ',' << csv::fmt(r(row, col).imag());
        out << '\n';
    }
}

}  // namespace nmoc

#endif
