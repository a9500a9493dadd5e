#ifndef NMOC_EXPFIT_HPP
#define NMOC_EXPFIT_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "nmoc/bath.hpp"

// Fit uniformly sampled data to a sum of damped complex exponentials
// sum_j c_j exp(gamma_j t), Re(gamma_j) < 0. Matrix-pencil initialization,
// linear least squares for the amplitudes, then damped Gauss-Newton over all
// parameters with a Lawson reweighting pass that pushes the refinement toward
// the max-norm target. Fully deterministic.
namespace nmoc {

struct ExponentialTerm {
    std::complex<double> amplitude;
    std::complex<double> rate;  // Re < 0
};

struct ExponentialSeries {
    std::vector<ExponentialTerm> terms;  // sorted by |Re(rate)| ascending
    double fit_residual = 0;             // max |fit - sample| over the fit grid
    bool converged = true;

    std::complex<double> eval(double t) const {
        std::complex<double> s = 0;
        for (const auto& term : terms) s += term.amplitude * std::exp(term.rate * t);
        return s;
    }
};

namespace expfit_detail {

using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using RVec = Eigen::VectorXd;
using RMat = Eigen::MatrixXd;

struct Grid {
    RVec t;
    CVec f;
    double dt;
};

inline Grid make_grid(const std::vector<CorrelationSample>& samples) {
    const auto n = static_cast<Eigen::Index>(samples.size());
    Grid g;
    g.t.resize(n);
    g.f.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        g.t(i) = samples[static_cast<std::size_t>(i)].time;
        g.f(i) = samples[static_cast<std::size_t>(i)].value;
    }
    g.dt = (g.t(n - 1) - g.t(0)) / static_cast<double>(n - 1);
    for (Eigen::Index i = 0; i + 1 < n; ++i) {
        const double step = g.t(i + 1) - g.t(i);
        if (std::abs(step - g.dt) > 1e-9 * std::max(1.0, std::abs(g.dt)))
            throw std::invalid_argument("fit_exponential_series: sample grid must be uniform");
    }
    if (g.dt <= 0) throw std::invalid_argument("fit_exponential_series: grid must be increasing");
    return g;
}

// Total-least-squares matrix pencil on a decimated copy of the grid.
inline std::vector<std::complex<double>> pencil_rates(const Grid& g, int m) {
    const Eigen::Index n = g.f.size();
    const Eigen::Index stride = std::max<Eigen::Index>(1, (n - 1) / 400);
    std::vector<std::complex<double>> dec;
    for (Eigen::Index i = 0; i < n; i += stride) dec.push_back(g.f(i));
    const auto p = static_cast<Eigen::Index>(dec.size());
    const Eigen::Index ell = p / 2;          // pencil parameter
    const Eigen::Index rows = p - ell;
    if (ell < m + 1 || rows < m) return {};

    CMat hank(rows, ell + 1);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j <= ell; ++j)
            hank(i, j) = dec[static_cast<std::size_t>(i + j)];

    Eigen::BDCSVD<CMat> svd(hank, Eigen::ComputeThinV);
    const Eigen::Index rank = std::min<Eigen::Index>(m, svd.matrixV().cols());
    CMat v = svd.matrixV().leftCols(rank);
    CMat v1 = v.topRows(ell);
    CMat v2 = v.bottomRows(ell);
    CMat pencil = (v1.adjoint() * v1).ldlt().solve(v1.adjoint() * v2);
    Eigen::ComplexEigenSolver<CMat> eig(pencil);

    std::vector<std::complex<double>> rates;
    const double dt_dec = g.dt * static_cast<double>(stride);
    for (Eigen::Index k = 0; k < eig.eigenvalues().size(); ++k) {
        const std::complex<double> z = eig.eigenvalues()(k);
        if (!(std::abs(z) > 0) || !std::isfinite(std::abs(z))) continue;
        const std::complex<double> gamma = std::log(z) / dt_dec;
        if (std::isfinite(gamma.real()) && std::isfinite(gamma.imag()) && gamma.real() < 0)
            rates.push_back(gamma);
    }
    // deterministic ordering for downstream steps
    std::sort(rates.begin(), rates.end(), [](const auto& a, const auto& b) {
        if (a.real() != b.real()) return a.real() > b.real();
        return a.imag() < b.imag();
    });
    return rates;
}

inline CMat vandermonde(const RVec& t, const std::vector<std::complex<double>>& rates) {
    CMat v(t.size(), static_cast<Eigen::Index>(rates.size()));
    for (Eigen::Index j = 0; j < v.cols(); ++j)
        for (Eigen::Index i = 0; i < v.rows(); ++i)
            v(i, j) = std::exp(rates[static_cast<std::size_t>(j)] * t(i));
    return v;
}

inline CVec weighted_amplitudes(const Grid& g, const std::vector<std::complex<double>>& rates,
                                const RVec& w) {
    CMat v = vandermonde(g.t, rates);
    CMat vw = w.asDiagonal() * v;
    CVec fw = w.asDiagonal() * g.f;
    return vw.colPivHouseholderQr().solve(fw);
}

struct FitState {
    std::vector<std::complex<double>> rates;
    CVec amps;

    double max_residual(const Grid& g) const {
        CVec r = vandermonde(g.t, rates) * amps - g.f;
        return r.cwiseAbs().maxCoeff();
    }
};

// Damped Gauss-Newton on [Re c, Im c, Re gamma, Im gamma], weighted SSE
// objective, backtracking keeps every Re(gamma) < 0.
inline void gauss_newton(const Grid& g, FitState& st, const RVec& w, int iters) {
    const auto m = static_cast<Eigen::Index>(st.rates.size());
    if (m == 0) return;
    const Eigen::Index n = g.f.size();
    double mu = 1e-12;

    auto wres = [&](const FitState& s) -> CVec {
        return w.asDiagonal() * (vandermonde(g.t, s.rates) * s.amps - g.f);
    };

    CVec r = wres(st);
    double sse = r.squaredNorm();
    for (int it = 0; it < iters; ++it) {
        CMat v = vandermonde(g.t, st.rates);
        CMat jc = w.asDiagonal() * v;                                     // d r / d c
        CMat jg = w.asDiagonal() * (g.t.asDiagonal() * v) * st.amps.asDiagonal();  // d r / d gamma

        RMat jr(2 * n, 4 * m);
        jr << jc.real(), -jc.imag(), jg.real(), -jg.imag(),
              jc.imag(),  jc.real(), jg.imag(),  jg.real();
        RVec rr(2 * n);
        rr << r.real(), r.imag();

        RMat h = jr.transpose() * jr;
        RVec grad = jr.transpose() * rr;
        RVec diag = h.diagonal().cwiseMax(1e-30);

        bool improved = false;
        for (int tries = 0; tries < 50; ++tries) {
            RMat hd = h;
            hd.diagonal() += mu * diag;
            RVec step = hd.ldlt().solve(-grad);
            FitState cand = st;
            for (Eigen::Index j = 0; j < m; ++j) {
                cand.amps(j) += std::complex<double>(step(j), step(m + j));
                cand.rates[static_cast<std::size_t>(j)] +=
                    std::complex<double>(step(2 * m + j), step(3 * m + j));
            }
            bool feasible = true;
            for (const auto& gma : cand.rates)
                if (!(gma.real() < 0) || !std::isfinite(gma.real()) || !std::isfinite(gma.imag()))
                    feasible = false;
            if (feasible) {
                CVec rc = wres(cand);
                const double sse_c = rc.squaredNorm();
                if (sse_c < sse * (1 - 1e-14)) {
                    st = cand;
                    r = rc;
                    sse = sse_c;
                    mu = std::max(mu / 5, 1e-14);
                    improved = true;
                    break;
                }
            }
            mu *= 10;
        }
        if (!improved) break;
    }
}

inline FitState refine(const Grid& g, std::vector<std::complex<double>> rates) {
    const Eigen::Index n = g.f.size();
    RVec w = RVec::Ones(n);
    FitState st;
    st.rates = std::move(rates);
    st.amps = weighted_amplitudes(g, st.rates, w);
    gauss_newton(g, st, w, 80);

    FitState best = st;
    double best_max = best.max_residual(g);

    // Lawson reweighting toward the minimax solution
    for (int pass = 0; pass < 12; ++pass) {
        CVec r = vandermonde(g.t, st.rates) * st.amps - g.f;
        RVec absr = r.cwiseAbs();
        w = (w.array() * absr.array().max(1e-300).sqrt()).matrix();
        w /= w.maxCoeff();
        w = w.cwiseMax(1e-12);
        st.amps = weighted_amplitudes(g, st.rates, w);
        gauss_newton(g, st, w, 40);
        const double mr = st.max_residual(g);
        if (mr < best_max) {
            best = st;
            best_max = mr;
        }
    }
    return best;
}

}  // namespace expfit_detail

// Smallest number of terms m <= max_terms whose max-abs residual over the
// sample grid is <= target_residual * |C(0)|. If no m reaches the target the
// best fit is returned with converged = false.
inline ExponentialSeries fit_exponential_series(const std::vector<CorrelationSample>& samples,
                                                int max_terms, double target_residual) {
    if (samples.size() < 8)
        throw std::invalid_argument("fit_exponential_series: need at least 8 samples");
    if (max_terms < 1) throw std::invalid_argument("fit_exponential_series: max_terms >= 1");
    if (target_residual <= 0)
        throw std::invalid_argument("fit_exponential_series: target_residual > 0");

    using namespace expfit_detail;
    Grid g = make_grid(samples);
    const double scale = std::abs(g.f(0));
    if (scale < 1e-300) {  // identically negligible data: nothing to fit
        ExponentialSeries zero;
        zero.fit_residual = g.f.cwiseAbs().maxCoeff();
        zero.converged = zero.fit_residual == 0;
        return zero;
    }
    const double target_abs = target_residual * scale;

    ExponentialSeries best;
    double best_res = std::numeric_limits<double>::infinity();
    for (int m = 1; m <= max_terms; ++m) {
        auto rates = pencil_rates(g, m);
        if (rates.empty()) continue;
        if (static_cast<int>(rates.size()) > m)
            rates.resize(static_cast<std::size_t>(m));
        FitState st = refine(g, std::move(rates));
        const double res = st.max_residual(g);
        if (res < best_res) {
            best_res = res;
            best.terms.clear();
            for (std::size_t j = 0; j < st.rates.size(); ++j)
                best.terms.push_back({st.amps(static_cast<Eigen::Index>(j)), st.rates[j]});
            best.fit_residual = res;
        }
        if (best_res <= target_abs) break;
    }
    best.converged = best_res <= target_abs;
    std::sort(best.terms.begin(), best.terms.end(), [](const auto& a, const auto& b) {
        const double ra = std::abs(a.rate.real()), rb = std::abs(b.rate.real());
        if (ra != rb) return ra < rb;
        return a.rate.imag() < b.rate.imag();
    });
    return best;
}

}  // namespace nmoc

#endif
