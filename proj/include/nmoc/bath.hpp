#ifndef NMOC_BATH_HPP
#define NMOC_BATH_HPP

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "nmoc/quadrature.hpp"

// Ohmic bath with exponential cutoff: J(w) = alpha * w * exp(-w/w_c).
// Units: hbar = k_B = 1, frequencies in the qubit tunneling frequency Omega,
// times in 1/Omega.
namespace nmoc {

struct BathParams {
    double alpha = 0.01;        // dimensionless damping constant
    double cutoff = 1.0;        // w_c
    double temperature = 1.0;   // k_B T; 0 means the T->0 limit (coth -> 1)

    void validate() const {
        if (alpha < 0) throw std::invalid_argument("BathParams: alpha must be >= 0");
        if (cutoff <= 0) throw std::invalid_argument("BathParams: cutoff must be > 0");
        if (temperature < 0) throw std::invalid_argument("BathParams: temperature must be >= 0");
    }
};

struct CorrelationSample {
    double time = 0;
    std::complex<double> value;
};

inline double spectral_density(double omega, const BathParams& p) {
    p.validate();
    if (omega < 0) throw std::domain_error("spectral_density: omega must be >= 0");
    return p.alpha * omega * std::exp(-omega / p.cutoff);
}

namespace detail {

// w * coth(w / (2T)), continued analytically to 2T at w = 0; plain w for T = 0.
inline double w_coth(double w, double temperature) {
    if (temperature == 0) return w;
    const double x = w / (2 * temperature);
    if (x < 1e-4) return 2 * temperature + w * x / 3.0;  // 2T + w^2/(6T)
    return w / std::tanh(x);
}

inline double quadrature_cut(const BathParams& p) {
    return p.cutoff * (40.0 + 5.0 * std::log1p(p.temperature / p.cutoff));
}

}  // namespace detail

// C(tau) = int J(w) cos(w tau) coth(w/2T) dw - i int J(w) sin(w tau) dw,
// both integrals by adaptive quadrature to absolute tolerance quad_tol.
inline std::complex<double> correlation_function(double tau, const BathParams& p,
                                                 double quad_tol = 1e-12) {
    p.validate();
    if (tau < 0) throw std::domain_error("correlation_function: tau must be >= 0");
    if (quad_tol <= 0) throw std::invalid_argument("correlation_function: quad_tol must be > 0");
    const double wmax = detail::quadrature_cut(p);
    const double alpha = p.alpha, wc = p.cutoff, temp = p.temperature;
    auto re_int = [&](double w) {
        return alpha * detail::w_coth(w, temp) * std::exp(-w / wc) * std::cos(w * tau);
    };
    auto im_int = [&](double w) {
        return -alpha * w * std::exp(-w / wc) * std::sin(w * tau);
    };
    const double re = integrate_adaptive(re_int, 0.0, wmax, quad_tol).value;
    const double im = integrate_adaptive(im_int, 0.0, wmax, quad_tol).value;
    return {re, im};
}

// Im C(tau) = -2 alpha w_c^3 tau / (1 + w_c^2 tau^2)^2, temperature independent.
inline double correlation_imag_closed_form(double tau, const BathParams& p) {
    p.validate();
    if (tau < 0) throw std::domain_error("correlation_imag_closed_form: tau must be >= 0");
    const double u = p.cutoff * tau;
    const double d = 1 + u * u;
    return -2 * p.alpha * p.cutoff * p.cutoff * p.cutoff * tau / (d * d);
}

inline std::vector<CorrelationSample> sample_correlation(const BathParams& p, double t_max,
                                                         int n_samples,
                                                         double quad_tol = 1e-12) {
    p.validate();
    if (t_max <= 0) throw std::invalid_argument("sample_correlation: t_max must be > 0");
    if (n_samples < 2) throw std::invalid_argument("sample_correlation: need n_samples >= 2");
    std::vector<CorrelationSample> out(static_cast<std::size_t>(n_samples));
    const double dt = t_max / (n_samples - 1);
    for (int i = 0; i < n_samples; ++i) {
        out[i].time = i * dt;
        out[i].value = correlation_function(out[i].time, p, quad_tol);
    }
    return out;
}

}  // namespace nmoc

#endif
