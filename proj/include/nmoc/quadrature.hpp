#ifndef NMOC_QUADRATURE_HPP
#define NMOC_QUADRATURE_HPP

#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "nmoc/errors.hpp"

namespace nmoc {

struct QuadratureResult {
    double value = 0;
    double error_estimate = 0;
    std::size_t segments = 0;
};

namespace detail {

// 15-point Kronrod / 7-point Gauss pair on [-1, 1] (QUADPACK dqk15 constants).
inline constexpr double kGK15Nodes[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000};

inline constexpr double kKronrodWeights[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714};

inline constexpr double kGaussWeights[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};

template <typename F>
inline void gk15(const F& f, double a, double b, double& value, double& err) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    double fv[15];
    for (int i = 0; i < 7; ++i) {
        fv[i] = f(c - h * kGK15Nodes[i]);
        fv[14 - i] = f(c + h * kGK15Nodes[i]);
    }
    fv[7] = f(c);
    double kres = kKronrodWeights[7] * fv[7];
    double gres = kGaussWeights[3] * fv[7];
    for (int i = 0; i < 7; ++i) {
        kres += kKronrodWeights[i] * (fv[i] + fv[14 - i]);
        if (i % 2 == 1) gres += kGaussWeights[i / 2] * (fv[i] + fv[14 - i]);
    }
    value = kres * h;
    // conservative: the raw Gauss-Kronrod difference, no sharpening
    err = std::abs(kres - gres) * std::abs(h);
}

}  // namespace detail

// Adaptive bisection with worst-first refinement; absolute tolerance.
template <typename F>
QuadratureResult integrate_adaptive(const F& f, double a, double b, double abs_tol,
                                    std::size_t max_segments = 20000) {
    struct Segment {
        double a, b, value, err;
    };
    std::vector<Segment> segs;
    segs.reserve(256);
    Segment s0{a, b, 0, 0};
    detail::gk15(f, a, b, s0.value, s0.err);
    segs.push_back(s0);

    double total_err = s0.err;
    while (total_err > abs_tol) {
        if (segs.size() >= max_segments) {
            throw QuadratureError("adaptive quadrature exceeded its interval-split budget",
                                  total_err);
        }
        std::size_t worst = 0;
        for (std::size_t i = 1; i < segs.size(); ++i)
            if (segs[i].err > segs[worst].err) worst = i;
        Segment cur = segs[worst];
        const double mid = 0.5 * (cur.a + cur.b);
        Segment l{cur.a, mid, 0, 0}, r{mid, cur.b, 0, 0};
        detail::gk15(f, l.a, l.b, l.value, l.err);
        detail::gk15(f, r.a, r.b, r.value, r.err);
        segs[worst] = l;
        segs.push_back(r);
        total_err += l.err + r.err - cur.err;
        if (mid == cur.a || mid == cur.b)
            throw QuadratureError("adaptive quadrature interval underflow", total_err);
    }

    QuadratureResult out;
    out.segments = segs.size();
    out.error_estimate = total_err;
    // compensated summation keeps the result deterministic and accurate
    double sum = 0, comp = 0;
    for (const auto& s : segs) {
        double y = s.value - comp;
        double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    out.value = sum;
    return out;
}

}  // namespace nmoc

#endif
