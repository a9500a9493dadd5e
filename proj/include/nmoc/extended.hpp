#ifndef NMOC_EXTENDED_HPP
#define NMOC_EXTENDED_HPP

#include <stdexcept>

#include "nmoc/expfit.hpp"
#include "nmoc/superop.hpp"

// Extended auxiliary Liouville space: the stacked vector {rho, K_j, K_j^dag}
// with one auxiliary pair per exponential term of the bath correlation
// function. Block index order is (rho, K_1..K_J, K_1^dag..K_J^dag); each
// block is a vectorized 2x2 operator, so dim = 4 (2J + 1).
namespace nmoc {

namespace extended_detail {

inline MatX assemble(double eps, double omega, const ExponentialSeries& series) {
    const auto j_terms = static_cast<Eigen::Index>(series.terms.size());
    const Eigen::Index dim = 4 * (2 * j_terms + 1);
    MatX lam = MatX::Zero(dim, dim);
    const Mat4 ls = system_liouvillian(eps, omega);
    const Mat4 lx = commutator_superoperator(pauli_x());
    const Mat4 lsx = left_mult_superoperator(pauli_x());
    const Mat4 rsx = right_mult_superoperator(pauli_x());

    lam.block<4, 4>(0, 0) = ls;
    for (Eigen::Index j = 0; j < j_terms; ++j) {
        const auto& term = series.terms[static_cast<std::size_t>(j)];
        const Eigen::Index k = 4 * (1 + j);                // K_j block
        const Eigen::Index kd = 4 * (1 + j_terms + j);     // K_j^dag block
        lam.block<4, 4>(0, k) = lx;
        lam.block<4, 4>(0, kd) = lx;
        lam.block<4, 4>(k, 0) = cplx(0, -1) * term.amplitude * lsx;
        lam.block<4, 4>(k, k) = ls + term.rate * Mat4::Identity();
        lam.block<4, 4>(kd, 0) = cplx(0, 1) * std::conj(term.amplitude) * rsx;
        lam.block<4, 4>(kd, kd) = ls + std::conj(term.rate) * Mat4::Identity();
    }
    return lam;
}

inline MatX control_derivative(Eigen::Index j_terms) {
    const Eigen::Index dim = 4 * (2 * j_terms + 1);
    MatX d = MatX::Zero(dim, dim);
    const Mat4 blk = commutator_superoperator(-0.5 * pauli_z());
    for (Eigen::Index b = 0; b < 2 * j_terms + 1; ++b) d.block<4, 4>(4 * b, 4 * b) = blk;
    return d;
}

}  // namespace extended_detail

// Lambda(eps) = base + eps * control_derivative; affine in the control.
// An empty series gives the closed-system (no bath) generator, dim = 4.
class ExtendedGenerator {
public:
    ExtendedGenerator(double omega, ExponentialSeries series)
        : omega_(omega),
          series_(std::move(series)),
          base_(extended_detail::assemble(0.0, omega_, series_)),
          dcontrol_(extended_detail::control_derivative(
              static_cast<Eigen::Index>(series_.terms.size()))) {}

    int block_count() const { return 2 * static_cast<int>(series_.terms.size()) + 1; }
    Eigen::Index dim() const { return base_.rows(); }
    double omega() const { return omega_; }
    const ExponentialSeries& series() const { return series_; }

    const MatX& base() const { return base_; }
    const MatX& control_derivative() const { return dcontrol_; }
    MatX matrix(double eps) const { return base_ + eps * dcontrol_; }

private:
    double omega_;
    ExponentialSeries series_;
    MatX base_;
    MatX dcontrol_;
};

inline MatX assemble_generator(double eps, double omega, const ExponentialSeries& series) {
    if (series.terms.empty())
        throw std::invalid_argument("assemble_generator: series must be nonempty");
    return extended_detail::assemble(eps, omega, series);
}

inline MatX generator_control_derivative(const ExponentialSeries& series) {
    return extended_detail::control_derivative(static_cast<Eigen::Index>(series.terms.size()));
}

}  // namespace nmoc

#endif
