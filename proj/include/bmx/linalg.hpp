#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "error.hpp"

namespace bmx {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline Matrix symmetrize(const Matrix& a) { return 0.5 * (a + a.transpose()); }

struct SymEigen {
    Vector values;   // ascending
    Matrix vectors;  // columns
};

/// Cyclic Jacobi eigen-decomposition of a symmetric matrix. Input is symmetrized
/// after checking the asymmetry is within 1e-8 of its scale.
inline SymEigen sym_eigen(const Matrix& input) {
    if (input.rows() != input.cols()) throw StructuralError("sym_eigen needs a square matrix");
    const Eigen::Index n = input.rows();
    if (!input.allFinite()) throw NumericalError("sym_eigen: non-finite entries");
    double scale = std::max(1.0, input.cwiseAbs().maxCoeff());
    if ((input - input.transpose()).cwiseAbs().maxCoeff() > 1e-8 * scale)
        throw DomainError("sym_eigen: matrix is not symmetric");
    Matrix a = symmetrize(input);
    Matrix v = Matrix::Identity(n, n);
    const double fro = a.norm();
    bool converged = n <= 1;
    for (int sweep = 0; sweep < 100 && !converged; ++sweep) {
        double off = 0.0;
        for (Eigen::Index p = 0; p < n; ++p)
            for (Eigen::Index q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
        if (std::sqrt(2.0 * off) <= 1e-14 * fro || off == 0.0) {
            converged = true;
            break;
        }
        for (Eigen::Index p = 0; p < n; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) {
                double apq = a(p, q);
                if (apq == 0.0) continue;
                double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0);
                double s = t * c;
                for (Eigen::Index k = 0; k < n; ++k) {
                    double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (Eigen::Index k = 0; k < n; ++k) {
                    double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                for (Eigen::Index k = 0; k < n; ++k) {
                    double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }
    if (!converged) {
        double off = 0.0;
        for (Eigen::Index p = 0; p < n; ++p)
            for (Eigen::Index q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
        if (std::sqrt(2.0 * off) > 1e-10 * std::max(fro, 1e-300))
            throw NumericalError("sym_eigen: Jacobi sweeps did not converge");
    }
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto i, auto j) { return a(i, i) < a(j, j); });
    SymEigen out{Vector(n), Matrix(n, n)};
    for (Eigen::Index k = 0; k < n; ++k) {
        out.values(k) = a(order[k], order[k]);
        out.vectors.col(k) = v.col(order[k]);
    }
    return out;
}

/// Symmetric square root; eigenvalues below zero are clamped to zero.
inline Matrix sym_sqrt(const Matrix& a) {
    auto e = sym_eigen(a);
    Vector s = e.values.cwiseMax(0.0).cwiseSqrt();
    return e.vectors * s.asDiagonal() * e.vectors.transpose();
}

inline Matrix clamp_psd(const Matrix& a) {
    auto e = sym_eigen(a);
    return e.vectors * e.values.cwiseMax(0.0).asDiagonal() * e.vectors.transpose();
}

/// Spectral norm of a symmetric matrix.
inline double op_norm_sym(const Matrix& a) {
    if (a.size() == 0) return 0.0;
    auto e = sym_eigen(a);
    return std::max(std::abs(e.values(0)), std::abs(e.values(e.values.size() - 1)));
}

inline double log_det_spd(const Matrix& a) {
    Eigen::LLT<Matrix> llt(a);
    if (llt.info() != Eigen::Success) throw NumericalError("log_det_spd: matrix is not positive definite");
    return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

inline Matrix spd_inverse(const Matrix& a) {
    Eigen::LLT<Matrix> llt(a);
    if (llt.info() != Eigen::Success) throw NumericalError("spd_inverse: matrix is not positive definite");
    return llt.solve(Matrix::Identity(a.rows(), a.cols()));
}

/// Moore-Penrose inverse of a PSD matrix; eigenvalues below 1e-12 of the largest count as zero.
inline Matrix psd_pinv(const Matrix& a) {
    if (a.size() == 0) return a;
    auto e = sym_eigen(a);
    const double cut = 1e-12 * std::max(std::abs(e.values(e.values.size() - 1)), 1e-300);
    Vector inv(e.values.size());
    for (Eigen::Index i = 0; i < inv.size(); ++i) inv(i) = e.values(i) > cut ? 1.0 / e.values(i) : 0.0;
    return e.vectors * inv.asDiagonal() * e.vectors.transpose();
}

inline Vector to_vector(const std::vector<double>& v) {
    return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

inline std::vector<double> to_std(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

}  // namespace bmx
