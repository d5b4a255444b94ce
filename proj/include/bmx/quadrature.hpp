#pragma once

#include <cmath>
#include <vector>

#include "linalg.hpp"

namespace bmx {

struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

namespace detail {
// Golub-Welsch: nodes are eigenvalues of the Jacobi matrix, weights mu0 * v_0^2.
inline QuadratureRule golub_welsch(const std::vector<double>& diag, const std::vector<double>& off, double mu0) {
    const auto n = static_cast<Eigen::Index>(diag.size());
    Matrix j = Matrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) j(i, i) = diag[i];
    for (Eigen::Index i = 0; i + 1 < n; ++i) j(i, i + 1) = j(i + 1, i) = off[i];
    auto e = sym_eigen(j);
    QuadratureRule r;
    for (Eigen::Index i = 0; i < n; ++i) {
        r.nodes.push_back(e.values(i));
        r.weights.push_back(mu0 * e.vectors(0, i) * e.vectors(0, i));
    }
    return r;
}
}  // namespace detail

/// Nodes and weights for E f(Z), Z standard normal.
inline QuadratureRule gauss_hermite_normal(int n) {
    std::vector<double> diag(n, 0.0), off(n > 0 ? n - 1 : 0);
    for (int k = 1; k < n; ++k) off[k - 1] = std::sqrt(k / 2.0);
    auto r = detail::golub_welsch(diag, off, std::sqrt(M_PI));
    for (auto& x : r.nodes) x *= std::sqrt(2.0);
    for (auto& w : r.weights) w /= std::sqrt(M_PI);
    return r;
}

/// Nodes and weights for E f(X), X ~ Gamma(shape, rate).
inline QuadratureRule gauss_laguerre_gamma(int n, double shape, double rate) {
    double alpha = shape - 1.0;
    std::vector<double> diag(n), off(n > 0 ? n - 1 : 0);
    for (int k = 0; k < n; ++k) diag[k] = 2.0 * k + alpha + 1.0;
    for (int k = 1; k < n; ++k) off[k - 1] = std::sqrt(k * (k + alpha));
    auto r = detail::golub_welsch(diag, off, 1.0);
    for (auto& x : r.nodes) x /= rate;
    return r;
}

}  // namespace bmx
