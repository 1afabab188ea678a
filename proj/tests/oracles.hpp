// oracles.hpp
// Independent brute-force reference computations used only by the tests.
// Nothing here calls into the library's algebra beyond the plain types.

#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "qphoton/qcore.hpp"

namespace oracle {

using qphoton::cplx;
using qphoton::Matrix;

// Element-by-element Kronecker product.
inline Matrix kronecker(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index k = 0; k < b.rows(); ++k)
            for (Eigen::Index j = 0; j < a.cols(); ++j)
                for (Eigen::Index l = 0; l < b.cols(); ++l)
                    out(i * b.rows() + k, j * b.cols() + l) = a(i, j) * b(k, l);
    return out;
}

// Tr_B and Tr_A of a (dA*dB)-square operator by explicit index sums.
inline Matrix trace_out_second(const Matrix& rho, int da, int db) {
    Matrix out = Matrix::Zero(da, da);
    for (int i = 0; i < da; ++i)
        for (int j = 0; j < da; ++j)
            for (int k = 0; k < db; ++k) out(i, j) += rho(i * db + k, j * db + k);
    return out;
}

inline Matrix trace_out_first(const Matrix& rho, int da, int db) {
    Matrix out = Matrix::Zero(db, db);
    for (int k = 0; k < db; ++k)
        for (int l = 0; l < db; ++l)
            for (int i = 0; i < da; ++i) out(k, l) += rho(i * db + k, i * db + l);
    return out;
}

inline Matrix sx() {
    Matrix m(2, 2);
    m << 0, 1, 1, 0;
    return m;
}
inline Matrix sy() {
    Matrix m(2, 2);
    m << 0, cplx(0, -1), cplx(0, 1), 0;
    return m;
}
inline Matrix sz() {
    Matrix m(2, 2);
    m << 1, 0, 0, -1;
    return m;
}

// (I + s v.sigma)/2
inline Matrix bloch_projector(double x, double y, double z, int s) {
    return 0.5 * (Matrix::Identity(2, 2) + static_cast<double>(s) * (x * sx() + y * sy() + z * sz()));
}

// tr(rho * Pi) with Pi a tensor product of per-qubit projectors.
inline double projector_probability(const Matrix& rho, const std::vector<Matrix>& projectors) {
    Matrix pi = Matrix::Identity(1, 1);
    for (const auto& p : projectors) pi = kronecker(pi, p);
    return (rho * pi).trace().real();
}

// Expectation of a product of spin observables along the given directions.
inline double spin_product_expectation(const Matrix& rho, const std::vector<Eigen::Vector3d>& dirs) {
    Matrix op = Matrix::Identity(1, 1);
    for (const auto& d : dirs) op = kronecker(op, d.x() * sx() + d.y() * sy() + d.z() * sz());
    return (rho * op).trace().real();
}

inline double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

// Binary entropy written out directly.
inline double h2(double p) {
    if (p <= 0.0 || p >= 1.0) return 0.0;
    return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

// Bell vectors written out by hand: 0 psi-, 1 psi+, 2 phi-, 3 phi+.
inline Eigen::VectorXcd bell_vector(int k) {
    const double r = 1.0 / std::sqrt(2.0);
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(4);
    switch (k) {
        case 0: v(1) = r; v(2) = -r; break;
        case 1: v(1) = r; v(2) = r; break;
        case 2: v(0) = r; v(3) = -r; break;
        default: v(0) = r; v(3) = r; break;
    }
    return v;
}

}  // namespace oracle
