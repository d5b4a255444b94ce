#pragma once

#include <cmath>
#include <vector>

#include "linalg.hpp"
#include "model.hpp"
#include "stats.hpp"

namespace bmx {

inline double mvn_logpdf(const Vector& x, const Vector& mean, const Matrix& cov) {
    Eigen::LLT<Matrix> llt(cov);
    if (llt.info() != Eigen::Success) throw NumericalError("mvn_logpdf: covariance is not positive definite");
    Vector z = llt.matrixL().solve(x - mean);
    double logdet = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    return -0.5 * (static_cast<double>(x.size()) * kLog2Pi + logdet + z.squaredNorm());
}

/// Cached Cholesky factor for repeated density evaluation.
class MvnDensity {
public:
    MvnDensity() = default;
    MvnDensity(Vector mean, const Matrix& cov) : mean_(std::move(mean)), llt_(cov) {
        if (llt_.info() != Eigen::Success) throw NumericalError("MvnDensity: covariance is not positive definite");
        logdet_ = 2.0 * llt_.matrixL().toDenseMatrix().diagonal().array().log().sum();
    }
    double operator()(const Vector& x) const {
        Vector z = llt_.matrixL().solve(x - mean_);
        return -0.5 * (static_cast<double>(x.size()) * kLog2Pi + logdet_ + z.squaredNorm());
    }

private:
    Vector mean_;
    Eigen::LLT<Matrix> llt_;
    double logdet_ = 0.0;
};

inline GaussianPosterior gaussian_posterior(const LinearGaussian& lg, const Vector& y) {
    if (y.size() != lg.design.rows())
        throw StructuralError("gaussian_posterior: data length " + std::to_string(y.size()) + ", model expects " +
                              std::to_string(lg.design.rows()));
    const Matrix& a = lg.design;
    Matrix s = a * lg.prior_cov * a.transpose() + lg.noise_cov;
    Eigen::LLT<Matrix> llt(s);
    if (llt.info() != Eigen::Success) throw NumericalError("gaussian_posterior: predictive covariance is singular");
    Matrix k = llt.solve(a * lg.prior_cov).transpose();  // P0 A' S^-1
    GaussianPosterior post;
    post.mean = lg.prior_mean + k * (y - a * lg.prior_mean);
    post.cov = symmetrize(lg.prior_cov - k * a * lg.prior_cov);
    return post;
}

/// Conditional of block `keep` given block `given` = value, for a joint N(mean, cov).
struct GaussianConditional {
    Vector mean_offset;  // mean of keep when given sits at its own mean
    Vector given_mean;
    Matrix gain;  // d mean / d given
    Matrix cov;

    Vector mean_at(const Vector& g) const { return mean_offset + gain * (g - given_mean); }
};

inline std::vector<int> index_range(int from, int to) {
    std::vector<int> v;
    for (int i = from; i < to; ++i) v.push_back(i);
    return v;
}

inline Matrix sub_matrix(const Matrix& m, const std::vector<int>& r, const std::vector<int>& c) {
    Matrix out(static_cast<Eigen::Index>(r.size()), static_cast<Eigen::Index>(c.size()));
    for (std::size_t i = 0; i < r.size(); ++i)
        for (std::size_t j = 0; j < c.size(); ++j) out(i, j) = m(r[i], c[j]);
    return out;
}

inline Vector sub_vector(const Vector& v, const std::vector<int>& r) {
    Vector out(static_cast<Eigen::Index>(r.size()));
    for (std::size_t i = 0; i < r.size(); ++i) out(i) = v(r[i]);
    return out;
}

inline Matrix columns(const Matrix& m, const std::vector<int>& c) {
    Matrix out(m.rows(), static_cast<Eigen::Index>(c.size()));
    for (std::size_t j = 0; j < c.size(); ++j) out.col(j) = m.col(c[j]);
    return out;
}

inline GaussianConditional gaussian_conditional(const Vector& mean, const Matrix& cov, const std::vector<int>& keep,
                                                const std::vector<int>& given) {
    GaussianConditional c;
    Matrix kk = sub_matrix(cov, keep, keep);
    if (given.empty()) {
        c.mean_offset = sub_vector(mean, keep);
        c.given_mean = Vector(0);
        c.gain = Matrix::Zero(kk.rows(), 0);
        c.cov = kk;
        return c;
    }
    Matrix gg = sub_matrix(cov, given, given);
    Matrix kg = sub_matrix(cov, keep, given);
    c.gain = kg * psd_pinv(gg);
    c.mean_offset = sub_vector(mean, keep);
    c.given_mean = sub_vector(mean, given);
    c.cov = symmetrize(kk - c.gain * kg.transpose());
    return c;
}

}  // namespace bmx
