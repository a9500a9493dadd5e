#ifndef NMOC_SUPEROP_HPP
#define NMOC_SUPEROP_HPP

#include <complex>
#include <Eigen/Dense>

// Superoperators on a single qubit, represented as 4x4 matrices acting on
// column-stacked 2x2 operators: vec([[a,b],[c,d]]) = (a, c, b, d).
namespace nmoc {

using cplx = std::complex<double>;
using Mat2 = Eigen::Matrix2cd;
using Mat4 = Eigen::Matrix4cd;
using MatX = Eigen::MatrixXcd;
using Vec4 = Eigen::Vector4cd;

inline Mat2 pauli_x() { return (Mat2() << 0, 1, 1, 0).finished(); }
inline Mat2 pauli_y() { return (Mat2() << 0, cplx(0, -1), cplx(0, 1), 0).finished(); }
inline Mat2 pauli_z() { return (Mat2() << 1, 0, 0, -1).finished(); }

inline Vec4 vectorize(const Mat2& a) {
    Vec4 v;
    v << a(0, 0), a(1, 0), a(0, 1), a(1, 1);
    return v;
}

inline Mat2 devectorize(const Vec4& v) {
    Mat2 a;
    a << v(0), v(2), v(1), v(3);
    return a;
}

inline Mat4 kron22(const Mat2& a, const Mat2& b) {
    Mat4 k;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            k.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
    return k;
}

// vec(S A) = (I (x) S) vec(A)
inline Mat4 left_mult_superoperator(const Mat2& s) {
    return kron22(Mat2::Identity(), s);
}

// vec(A S) = (S^T (x) I) vec(A)
inline Mat4 right_mult_superoperator(const Mat2& s) {
    return kron22(s.transpose(), Mat2::Identity());
}

// M vec(A) = vec(-i [H, A])
inline Mat4 commutator_superoperator(const Mat2& h) {
    return cplx(0, -1) * (kron22(Mat2::Identity(), h) - kron22(h.transpose(), Mat2::Identity()));
}

// L_S for H_S = -(eps/2) sigma_z - (Omega/2) sigma_x
inline Mat4 system_liouvillian(double eps, double omega) {
    Mat2 h = -(eps / 2) * pauli_z() - (omega / 2) * pauli_x();
    return commutator_superoperator(h);
}

}  // namespace nmoc

#endif
