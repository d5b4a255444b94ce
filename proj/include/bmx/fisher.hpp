#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "builtins.hpp"
#include "error.hpp"
#include "gaussian.hpp"
#include "linalg.hpp"
#include "model.hpp"
#include "parallel.hpp"
#include "samplers.hpp"
#include "stats.hpp"

namespace bmx {

struct InfoMatrixEstimate {
    Matrix matrix;
    Matrix std_error;
    std::size_t n_mc = 0;
    std::string at;  // "fixed", "prior" or "posterior"
    std::vector<std::string> warnings;
    std::vector<Matrix> samples;  // per-draw matrices behind the average, when Monte Carlo was used

    double trace() const { return matrix.trace(); }
    /// Standard error of the trace, from the per-draw traces.
    double trace_se() const {
        if (samples.size() < 2) return 0.0;
        std::vector<double> t;
        t.reserve(samples.size());
        for (const auto& s : samples) t.push_back(s.trace());
        return se_of_mean(t);
    }
};

inline double fd_step(double x) { return std::max(1e-4, 1e-4 * std::abs(x)); }

/// Central-difference Hessian of f over the coordinates `idx`. Steps shrink tenfold (twice)
/// when the stencil leaves the support.
inline Matrix fd_hessian(const std::function<double(Params)>& f, const std::vector<double>& x,
                         const std::vector<int>& idx) {
    const auto k = static_cast<Eigen::Index>(idx.size());
    for (int attempt = 0; attempt < 3; ++attempt) {
        const double shrink = std::pow(10.0, -attempt);
        std::vector<double> h(idx.size());
        for (std::size_t a = 0; a < idx.size(); ++a) h[a] = fd_step(x[idx[a]]) * shrink;
        std::vector<double> p = x;
        auto at = [&](int i, double di, int j, double dj) {
            p = x;
            if (i >= 0) p[idx[i]] += di;
            if (j >= 0) p[idx[j]] += dj;
            return f(p);
        };
        const double f0 = f(x);
        Matrix hess(k, k);
        bool ok = std::isfinite(f0);
        for (Eigen::Index a = 0; a < k && ok; ++a) {
            const int ia = static_cast<int>(a);
            double fp = at(ia, h[a], -1, 0), fm = at(ia, -h[a], -1, 0);
            hess(a, a) = (fp - 2.0 * f0 + fm) / (h[a] * h[a]);
            ok = std::isfinite(fp) && std::isfinite(fm);
            for (Eigen::Index b = a + 1; b < k && ok; ++b) {
                const int ib = static_cast<int>(b);
                double fpp = at(ia, h[a], ib, h[b]), fpm = at(ia, h[a], ib, -h[b]);
                double fmp = at(ia, -h[a], ib, h[b]), fmm = at(ia, -h[a], ib, -h[b]);
                ok = std::isfinite(fpp) && std::isfinite(fpm) && std::isfinite(fmp) && std::isfinite(fmm);
                hess(a, b) = hess(b, a) = (fpp - fpm - fmp + fmm) / (4.0 * h[a] * h[b]);
            }
        }
        if (ok) return symmetrize(hess);
    }
    throw DomainError("finite-difference stencil leaves the support of the density; point is on a boundary");
}

inline Matrix fd_hessian(const std::function<double(Params)>& f, const std::vector<double>& x) {
    return fd_hessian(f, x, index_range(0, static_cast<int>(x.size())));
}

/// -Hessian of the log-likelihood by central differences.
inline InfoMatrixEstimate observed_info_fd(const ModelSpec& model, const DataSet& y, Params point) {
    model.check_point(point);
    std::vector<double> x(point.begin(), point.end());
    InfoMatrixEstimate e;
    e.matrix = -fd_hessian([&](Params p) { return model.log_lik(y, p); }, x);
    e.std_error = Matrix::Zero(e.matrix.rows(), e.matrix.cols());
    e.at = "fixed";
    return e;
}

inline Matrix observed_info(const ModelSpec& model, const DataSet& y, Params point) {
    if (model.analytic.observed_info) return model.analytic.observed_info(y, point);
    return observed_info_fd(model, y, point).matrix;
}

namespace detail {
inline InfoMatrixEstimate average_matrices(std::vector<Matrix> samples, std::string at) {
    InfoMatrixEstimate e;
    const auto n = samples.size();
    e.matrix = Matrix::Zero(samples[0].rows(), samples[0].cols());
    for (const auto& s : samples) e.matrix += s;
    e.matrix /= static_cast<double>(n);
    e.std_error = Matrix::Zero(e.matrix.rows(), e.matrix.cols());
    if (n > 1) {
        for (const auto& s : samples) e.std_error += (s - e.matrix).cwiseAbs2();
        e.std_error = (e.std_error / static_cast<double>(n - 1) / static_cast<double>(n)).cwiseSqrt();
    }
    e.matrix = symmetrize(e.matrix);
    e.n_mc = n;
    e.at = std::move(at);
    e.samples = std::move(samples);
    return e;
}

/// Standard error of v' A v for the average A of `samples`.
inline double quad_form_se(const std::vector<Matrix>& samples, const Vector& v) {
    if (samples.size() < 2) return 0.0;
    std::vector<double> q;
    q.reserve(samples.size());
    for (const auto& s : samples) q.push_back(v.dot(s * v));
    return se_of_mean(q);
}

/// Negative eigenvalues within 3 s.e. of zero are clamped; anything more negative is an error.
inline void clamp_psd_with_se(InfoMatrixEstimate& e, const std::string& what) {
    auto eig = sym_eigen(e.matrix);
    const double scale = std::max(1.0, std::abs(eig.values(eig.values.size() - 1)));
    bool changed = false;
    for (Eigen::Index i = 0; i < eig.values.size(); ++i) {
        if (eig.values(i) >= 0.0) continue;
        double se = quad_form_se(e.samples, eig.vectors.col(i));
        if (eig.values(i) < -3.0 * se - 1e-9 * scale)
            throw NumericalError(what + ": eigenvalue " + std::to_string(eig.values(i)) +
                                 " is negative beyond Monte Carlo error");
        if (eig.values(i) < -1e-12 * scale)
            e.warnings.push_back(what + ": clamped eigenvalue " + std::to_string(eig.values(i)) + " to 0");
        eig.values(i) = 0.0;
        changed = true;
    }
    if (changed) e.matrix = symmetrize(eig.vectors * eig.values.asDiagonal() * eig.vectors.transpose());
}
}  // namespace detail

/// E_{y ~ p(.|theta)} of the observed information; exact when the model has a Fisher oracle.
inline InfoMatrixEstimate expected_fisher(const ModelSpec& model, Params point, std::size_t n_mc, Rng& rng) {
    model.check_point(point);
    if (model.analytic.fisher) {
        InfoMatrixEstimate e;
        e.matrix = symmetrize(model.analytic.fisher(point));
        e.std_error = Matrix::Zero(e.matrix.rows(), e.matrix.cols());
        e.at = "fixed";
        return e;
    }
    if (n_mc < 2) throw DomainError("expected_fisher: need at least two Monte Carlo draws");
    Rng base = rng.split(0x464953);
    rng();
    std::vector<Matrix> samples(n_mc);
    parallel_for(n_mc, [&](std::size_t i) {
        Rng r = base.split(i);
        DataSet y = model.simulate(point, r);
        samples[i] = observed_info(model, y, point);
    });
    auto e = detail::average_matrices(std::move(samples), "fixed");
    detail::clamp_psd_with_se(e, model.name + " expected Fisher");
    return e;
}

/// Fisher information of the marginal likelihood p(y | theta) with the extra block integrated out.
inline InfoMatrixEstimate shared_expected_fisher(const ModelSpec& model, Params theta, std::size_t n_mc, Rng& rng) {
    if (model.d_extra == 0) return expected_fisher(model, theta, n_mc, rng);
    if (theta.size() != model.d_shared) throw StructuralError(model.name + ": shared point has the wrong length");
    if (model.analytic.shared_fisher) {
        InfoMatrixEstimate e;
        e.matrix = symmetrize(model.analytic.shared_fisher(theta));
        e.std_error = Matrix::Zero(e.matrix.rows(), e.matrix.cols());
        e.at = "fixed";
        return e;
    }
    if (!model.analytic.shared_log_lik || !model.analytic.shared_sample_data)
        throw CapabilityError(model.name + ": marginal likelihood of the shared block is not available");
    if (n_mc < 2) throw DomainError("shared_expected_fisher: need at least two Monte Carlo draws");
    Rng base = rng.split(0x534846);
    rng();
    std::vector<double> x(theta.begin(), theta.end());
    std::vector<Matrix> samples(n_mc);
    parallel_for(n_mc, [&](std::size_t i) {
        Rng r = base.split(i);
        DataSet y = model.analytic.shared_sample_data(theta, r);
        samples[i] = -fd_hessian([&](Params p) { return model.analytic.shared_log_lik(y, p); }, x);
    });
    auto e = detail::average_matrices(std::move(samples), "fixed");
    detail::clamp_psd_with_se(e, model.name + " marginal Fisher");
    return e;
}

enum class FisherBlock { shared, full, shared_given_extra };

inline const char* to_string(FisherBlock b) {
    switch (b) {
        case FisherBlock::shared: return "shared";
        case FisherBlock::full: return "full";
        case FisherBlock::shared_given_extra: return "shared-given-extra";
    }
    return "?";
}

struct FisherBudget {
    std::size_t n_prior = 200;  // outer prior draws
    std::size_t n_mc = 40;      // data replicates per Fisher evaluation
    std::size_t n_y = 100;      // datasets for posterior-covariance terms
    std::size_t S_post = 2000;  // posterior draws when no closed form exists
};

inline Matrix principal_block(const Matrix& m, std::size_t k) { return m.topLeftCorner(k, k); }

/// E_prior of the Fisher information, restricted to the requested block.
/// shared: marginal Fisher of p(y | theta); shared-given-extra: theta-principal submatrix of the full Fisher.
inline InfoMatrixEstimate prior_expected_fisher(const ModelSpec& model, FisherBlock block, const FisherBudget& b,
                                                Rng& rng) {
    if (b.n_prior < 2) throw DomainError("prior_expected_fisher: need at least two prior draws");
    Rng base = rng.split(0x504546);
    rng();
    std::vector<Matrix> samples(b.n_prior);
    std::vector<std::vector<std::string>> warn(b.n_prior);
    parallel_for(b.n_prior, [&](std::size_t i) {
        Rng r = base.split(i);
        auto p = model.sample_prior(r);
        InfoMatrixEstimate f;
        if (block == FisherBlock::shared && model.d_extra > 0) {
            f = shared_expected_fisher(model, Params(p).first(model.d_shared), b.n_mc, r);
        } else {
            f = expected_fisher(model, p, b.n_mc, r);
            if (block != FisherBlock::full) f.matrix = principal_block(f.matrix, model.d_shared);
        }
        samples[i] = f.matrix;
        warn[i] = f.warnings;
    });
    auto e = detail::average_matrices(std::move(samples), "prior");
    e.n_mc = b.n_prior * b.n_mc;
    for (auto& w : warn)
        if (!w.empty()) {
            e.warnings.push_back(w.front());
            break;
        }
    return e;
}

/// Prior covariance of the first k parameters (analytic when declared, else 20000 prior draws).
inline Matrix prior_covariance(const ModelSpec& model, std::size_t k, std::uint64_t seed = 0x50434f56) {
    if (model.analytic.prior_cov) return principal_block(*model.analytic.prior_cov, k);
    Rng rng(seed);
    const std::size_t n = 20000;
    Matrix x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k));
    for (std::size_t i = 0; i < n; ++i) {
        auto p = model.sample_prior(rng);
        for (std::size_t j = 0; j < k; ++j) x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = p[j];
    }
    Matrix c = x.rowwise() - x.colwise().mean();
    return symmetrize(c.transpose() * c / static_cast<double>(n - 1));
}

// ---------------------------------------------------------------------------
// Bounds

inline double psi(double x) {
    if (!(x >= 0.0)) throw DomainError("psi: argument must be nonnegative");
    return x <= 1.0 ? std::sqrt(x) : 1.0 + 0.5 * std::log(x);
}

inline double psi_derivative(double x) {
    if (x <= 0.0) return std::numeric_limits<double>::infinity();
    return x <= 1.0 ? 0.5 / std::sqrt(x) : 0.5 / x;
}

/// d * psi(x / d)
inline double psi1(double x, std::size_t d) {
    const double dd = static_cast<double>(d);
    return dd * psi(std::max(0.0, x) / dd);
}

inline double psi2(double x, double R = 1.0) { return x / (1.0 + R * x); }

enum class BoundVariant { full, weak };

struct BoundValue {
    double value = 0.0;
    double trace = 0.0;  // argument of d psi(. / d)
    double std_error = 0.0;
    std::size_t d = 0;
    double v_pr = 0.0;
    std::vector<std::string> warnings;
};

/// Upper bound on I(theta; y) for the block's parameters.
inline BoundValue mi_upper_bound(const ModelSpec& model, BoundVariant variant, FisherBlock block,
                                 const FisherBudget& b, Rng& rng) {
    if (!model.log_concave_prior)
        throw CapabilityError(model.name +
                              ": the information bound needs a log-concave prior, which this model does not declare");
    const std::size_t d = block == FisherBlock::full ? model.d_total() : model.d_shared;
    Matrix sigma = prior_covariance(model, d);
    auto f = prior_expected_fisher(model, block, b, rng);
    BoundValue out;
    out.d = d;
    out.v_pr = sym_eigen(sigma).values(static_cast<Eigen::Index>(d) - 1);
    out.warnings = f.warnings;
    std::vector<double> per;
    if (variant == BoundVariant::full) {
        Matrix root = sym_sqrt(sigma);
        out.trace = (root * f.matrix * root).trace();
        for (const auto& s : f.samples) per.push_back((root * s * root).trace());
    } else {
        out.trace = out.v_pr * f.matrix.trace();
        for (const auto& s : f.samples) per.push_back(out.v_pr * s.trace());
    }
    out.trace = std::max(0.0, out.trace);
    out.value = psi1(out.trace, d);
    double se_trace = per.size() > 1 ? se_of_mean(per) : 0.0;
    out.std_error = out.trace > 0 ? psi_derivative(out.trace / static_cast<double>(d)) * se_trace : 0.0;
    return out;
}

struct TraceBound {
    std::vector<double> delta;        // Delta_j
    std::vector<double> prior_term;   // E{-d2/dtheta_j2 log p(lambda | theta)}
    std::vector<double> mixed_sum;    // sum_k E d2/dlambda_k dtheta_j log p(y | theta, lambda)
    std::vector<double> lik_term;     // E{-d2/dtheta_j2 log p(y | theta, lambda)}
    double op_norm = 0.0;             // E ||H(lambda; theta, y)||_op
    double lhs = 0.0, lhs_se = 0.0;   // E tr of the marginal Fisher of theta
    double rhs = 0.0, rhs_se = 0.0;
    double delta_sum = 0.0, delta_sum_se = 0.0;
    bool holds = false;
    std::size_t n_mc = 0;
};

/// E tr I(theta) <= sum_j [E{-d2 log p(y|theta,lambda)/dtheta_j2} + Delta_j] by Monte Carlo over the joint prior predictive.
inline TraceBound trace_bound_delta(const ExpansionPair& pair, const FisherBudget& b, Rng& rng) {
    pair.check_structure();
    const ModelSpec& m = pair.expanded;
    const auto ds = m.d_shared, dt = m.d_total();
    const std::size_t n = b.n_prior;
    if (n < 10) throw DomainError("trace_bound_delta: need at least ten prior draws");
    auto th = index_range(0, static_cast<int>(ds)), la = index_range(static_cast<int>(ds), static_cast<int>(dt));
    Rng base = rng.split(0x544244);
    rng();
    std::vector<std::vector<double>> A(n), B(n), M(n);
    std::vector<double> Hn(n), L(n);
    parallel_for(n, [&](std::size_t i) {
        Rng r = base.split(i);
        auto p = m.sample_prior(r);
        DataSet y = m.simulate(p, r);
        Matrix J = observed_info(m, y, p);
        A[i].resize(ds);
        B[i].assign(ds, 0.0);
        M[i].assign(ds, 0.0);
        for (std::size_t j = 0; j < ds; ++j) {
            A[i][j] = J(j, j);
            for (int k : la) M[i][j] -= J(k, static_cast<Eigen::Index>(j));
        }
        if (!m.prior_independent) {
            Matrix hp = -fd_hessian([&](Params q) { return m.log_prior_extra_given_shared(q); }, p, th);
            for (std::size_t j = 0; j < ds; ++j) B[i][j] = hp(j, j);
        }
        Matrix h_prior = -fd_hessian([&](Params q) { return m.log_prior_extra_given_shared(q); }, p, la);
        Hn[i] = op_norm_sym(sub_matrix(J, la, la) + h_prior);
        L[i] = shared_expected_fisher(m, Params(p).first(ds), b.n_mc, r).matrix.trace();
    });

    TraceBound t;
    t.n_mc = n;
    t.op_norm = mean_of(Hn);
    if (!(t.op_norm > 0.0))
        throw NumericalError(pair.name + ": partial Hessian in the extra parameters is degenerate (zero operator norm)");
    t.delta.resize(ds);
    t.prior_term.resize(ds);
    t.mixed_sum.resize(ds);
    t.lik_term.resize(ds);
    for (std::size_t j = 0; j < ds; ++j) {
        double a = 0, bb = 0, mm = 0;
        for (std::size_t i = 0; i < n; ++i) a += A[i][j], bb += B[i][j], mm += M[i][j];
        t.lik_term[j] = a / double(n);
        t.prior_term[j] = bb / double(n);
        t.mixed_sum[j] = mm / double(n);
        t.delta[j] = t.prior_term[j] - t.mixed_sum[j] * t.mixed_sum[j] / t.op_norm;
    }
    // Delta-method influence values for the rhs and for sum_j Delta_j.
    std::vector<double> infl_rhs(n), infl_delta(n);
    for (std::size_t i = 0; i < n; ++i) {
        double dd = 0.0, aa = 0.0;
        for (std::size_t j = 0; j < ds; ++j) {
            aa += A[i][j] - t.lik_term[j];
            dd += B[i][j] - t.prior_term[j];
            dd -= 2.0 * t.mixed_sum[j] * (M[i][j] - t.mixed_sum[j]) / t.op_norm;
            dd += t.mixed_sum[j] * t.mixed_sum[j] * (Hn[i] - t.op_norm) / (t.op_norm * t.op_norm);
        }
        infl_delta[i] = dd;
        infl_rhs[i] = aa + dd;
    }
    for (std::size_t j = 0; j < ds; ++j) t.delta_sum += t.delta[j];
    t.rhs = t.delta_sum;
    for (double a : t.lik_term) t.rhs += a;
    t.rhs_se = sd_of(infl_rhs) / std::sqrt(double(n));
    t.delta_sum_se = sd_of(infl_delta) / std::sqrt(double(n));
    t.lhs = mean_of(L);
    t.lhs_se = se_of_mean(L);
    t.holds = t.lhs <= t.rhs + 3.0 * std::hypot(t.lhs_se, t.rhs_se) + 1e-9 * std::max(1.0, std::abs(t.rhs));
    return t;
}

struct TraceTerm {
    double value = 0.0;
    double std_error = 0.0;
    std::size_t d = 0;
    double log_d = 0.0;
    std::string label = "lower-bound trace term (up to constant)";
};

/// tr E[Sigma_y^{1/2} I(theta) Sigma_y^{1/2}] over (theta, y) ~ p, or over y ~ p(.|theta0) when theta0 is given.
inline TraceTerm cmi_trace_term(const ModelSpec& model, const FisherBudget& b, Rng& rng,
                                std::optional<std::vector<double>> theta0 = std::nullopt) {
    if (b.n_y < 2) throw DomainError("cmi_trace_term: need at least two datasets");
    Rng base = rng.split(0x435454);
    rng();
    std::vector<double> terms(b.n_y);
    parallel_for(b.n_y, [&](std::size_t i) {
        Rng r = base.split(i);
        std::vector<double> theta = theta0 ? *theta0 : model.sample_prior(r);
        DataSet y = model.simulate(theta, r);
        Matrix cov;
        if (model.analytic.linear_gaussian) {
            cov = exact_gaussian_posterior(model, y).cov;
        } else {
            auto draws = posterior_draws(model, y, b.S_post, r());
            cov = weighted_cov(draws);
        }
        Matrix info = expected_fisher(model, theta, b.n_mc, r).matrix;
        terms[i] = (cov * info).trace();
    });
    TraceTerm t;
    t.value = mean_of(terms);
    t.std_error = se_of_mean(terms);
    t.d = model.d_total();
    t.log_d = std::log(static_cast<double>(t.d));
    return t;
}

/// sum_i iota_i / (1 + R iota_i)
inline double cmi_lower_bound_analytic(const std::vector<double>& iota, int R = 1) {
    if (R < 1) throw DomainError("cmi_lower_bound_analytic: R must be positive");
    double s = 0.0;
    for (double v : iota) {
        if (!(v >= 0.0)) throw DomainError("cmi_lower_bound_analytic: eigenvalues must be nonnegative");
        s += psi2(v, R);
    }
    return s;
}

// ---------------------------------------------------------------------------
// Dilution and skewness

enum class Dilution { totally_diluting, totally_concentrating, indefinite };

inline const char* to_string(Dilution d) {
    switch (d) {
        case Dilution::totally_diluting: return "totally-diluting";
        case Dilution::totally_concentrating: return "totally-concentrating";
        case Dilution::indefinite: return "indefinite";
    }
    return "?";
}

struct DilutionResult {
    InfoMatrixEstimate delta_dilute;
    Vector eigenvalues;
    Vector eigen_se;
    Dilution classification = Dilution::indefinite;
};

/// Zero sits in both dead-bands; it is reported as diluting.
inline Dilution classify_dilution(const Vector& ev, const Vector& se) {
    bool psd = true, nsd = true;
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        double tol = 3.0 * se(i) + 1e-10 * std::max(1.0, ev.cwiseAbs().maxCoeff());
        if (ev(i) < -tol) psd = false;
        if (ev(i) > tol) nsd = false;
    }
    if (psd) return Dilution::totally_diluting;
    if (nsd) return Dilution::totally_concentrating;
    return Dilution::indefinite;
}

/// E_{p(theta) p(lambda)} of I_b(theta) - I(theta | lambda).
inline DilutionResult dilution_matrix(const ExpansionPair& pair, const FisherBudget& b, Rng& rng) {
    pair.check_structure();
    const auto ds = pair.expanded.d_shared;
    Rng base = rng.split(0x44494c);
    rng();
    std::vector<Matrix> samples(b.n_prior);
    parallel_for(b.n_prior, [&](std::size_t i) {
        Rng r = base.split(i);
        auto theta = pair.base.sample_prior(r);
        auto full = pair.expanded.sample_prior(r);
        std::copy(theta.begin(), theta.end(), full.begin());
        Matrix ib = expected_fisher(pair.base, theta, b.n_mc, r).matrix;
        Matrix ic = principal_block(expected_fisher(pair.expanded, full, b.n_mc, r).matrix, ds);
        samples[i] = ib - ic;
    });
    DilutionResult out;
    out.delta_dilute = detail::average_matrices(std::move(samples), "prior");
    auto eig = sym_eigen(out.delta_dilute.matrix);
    out.eigenvalues = eig.values;
    out.eigen_se = Vector(eig.values.size());
    for (Eigen::Index i = 0; i < eig.values.size(); ++i)
        out.eigen_se(i) = detail::quad_form_se(out.delta_dilute.samples, eig.vectors.col(i));
    out.classification = classify_dilution(out.eigenvalues, out.eigen_se);
    return out;
}

struct SkewnessCheck {
    double var_op = 0.0;
    double lambda_min_mean = 0.0;
    double delta = 0.5;
    bool ok = false;
};

/// sqrt(E ||A - EA||_op^2) < delta * lambda_min(EA)
inline SkewnessCheck skewness_check(const std::vector<Matrix>& samples, double delta = 0.5) {
    if (!(delta > 0.0 && delta < std::sqrt(0.5))) throw DomainError("skewness_check: delta must lie in (0, 2^-1/2)");
    if (samples.size() < 2) throw DomainError("skewness_check: need at least two samples");
    Matrix mean = Matrix::Zero(samples[0].rows(), samples[0].cols());
    for (const auto& s : samples) mean += s;
    mean /= static_cast<double>(samples.size());
    SkewnessCheck c;
    c.delta = delta;
    for (const auto& s : samples) {
        double n = op_norm_sym(symmetrize(s - mean));
        c.var_op += n * n;
    }
    c.var_op /= static_cast<double>(samples.size());
    c.lambda_min_mean = sym_eigen(symmetrize(mean)).values(0);
    c.ok = std::sqrt(c.var_op) < delta * c.lambda_min_mean || (c.var_op == 0.0 && c.lambda_min_mean >= 0.0);
    return c;
}

// ---------------------------------------------------------------------------
// Identifiability / falsifiability tradeoff

struct TradeoffReport {
    std::string pair;
    std::vector<double> iota, iota_cond, iota_exp;
    double v_pr_base = 1.0, v_pr_exp = 1.0;  // prior scale factors folded into the eigenvalues
    double mi_bound_base = 0.0, mi_bound_exp = 0.0, mi_bound_cond = 0.0, mi_bound_trace = 0.0;
    double mi_bound_base_se = 0.0, mi_bound_exp_se = 0.0;
    double cmi_term_base = 0.0, cmi_term_exp = 0.0, cmi_term_cond = 0.0;
    double delta_i = 0.0, delta_f = 0.0, delta_f_se = 0.0;
    std::size_t d = 0, d_exp = 0;
    int R = 1;
    TraceBound trace_bound;
    DilutionResult dilution;
    SkewnessCheck skew_base, skew_exp;
    bool log_concave = false;
    bool delta_f_nonnegative = false;
    bool diluting_inequality = false;      // psi1(sum iota_cond) <= psi1(sum iota)
    bool nondiluting_inequality = false;   // sum psi2(iota_cond) >= sum psi2(iota)
    bool hypotheses_met() const { return log_concave && skew_base.ok && skew_exp.ok; }
    std::string text_table() const;
};

namespace detail {
inline std::vector<double> spectrum(const Matrix& m, double scale) {
    auto v = sym_eigen(scale * m).values;
    std::vector<double> out(v.data(), v.data() + v.size());
    for (auto& x : out) x = std::max(0.0, x);
    return out;
}
inline double sum_psi2(const std::vector<double>& v, int R) {
    double s = 0.0;
    for (double x : v) s += psi2(x, R);
    return s;
}
inline double sum_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
}
}  // namespace detail

inline TradeoffReport tradeoff_report(const ExpansionPair& pair, const FisherBudget& b, Rng& rng, int R = 1) {
    pair.check_structure();
    const ModelSpec& base = pair.base;
    const ModelSpec& ex = pair.expanded;
    TradeoffReport t;
    t.pair = pair.name;
    t.R = R;
    t.d = base.d_total();
    t.d_exp = ex.d_total();
    t.log_concave = base.log_concave_prior && ex.log_concave_prior;
    Rng r_base = rng.split(1), r_exp = rng.split(2), r_sh = rng.split(3), r_tb = rng.split(4), r_dil = rng.split(5);
    rng();

    auto fb = prior_expected_fisher(base, FisherBlock::full, b, r_base);
    auto fe = prior_expected_fisher(ex, FisherBlock::full, b, r_exp);
    auto fs = prior_expected_fisher(ex, FisherBlock::shared, b, r_sh);
    t.v_pr_base = sym_eigen(prior_covariance(base, t.d)).values(static_cast<Eigen::Index>(t.d) - 1);
    t.v_pr_exp = sym_eigen(prior_covariance(ex, t.d_exp)).values(static_cast<Eigen::Index>(t.d_exp) - 1);
    const double v_sh = sym_eigen(prior_covariance(ex, ex.d_shared)).values(static_cast<Eigen::Index>(ex.d_shared) - 1);

    t.iota = detail::spectrum(fb.matrix, t.v_pr_base);
    t.iota_exp = detail::spectrum(fe.matrix, t.v_pr_exp);
    t.iota_cond = detail::spectrum(principal_block(fe.matrix, ex.d_shared), t.v_pr_exp);

    t.trace_bound = trace_bound_delta(pair, b, r_tb);
    t.dilution = dilution_matrix(pair, b, r_dil);

    const double sum_b = detail::sum_of(t.iota), sum_c = detail::sum_of(t.iota_cond);
    t.mi_bound_base = psi1(sum_b, t.d);
    t.mi_bound_base_se = sum_b > 0 ? psi_derivative(sum_b / t.d) * t.v_pr_base * fb.trace_se() : 0.0;
    const double tr_sh = v_sh * fs.matrix.trace();
    t.mi_bound_exp = psi1(tr_sh, ex.d_shared);
    t.mi_bound_exp_se = tr_sh > 0 ? psi_derivative(tr_sh / ex.d_shared) * v_sh * fs.trace_se() : 0.0;
    t.mi_bound_cond = psi1(sum_c, ex.d_shared);
    t.mi_bound_trace = psi1(std::max(0.0, v_sh * t.trace_bound.rhs), ex.d_shared);
    t.delta_i = t.mi_bound_base - t.mi_bound_exp;

    t.cmi_term_base = detail::sum_psi2(t.iota, R);
    t.cmi_term_exp = detail::sum_psi2(t.iota_exp, R);
    t.cmi_term_cond = detail::sum_psi2(t.iota_cond, R);
    t.delta_f = t.cmi_term_exp - t.cmi_term_cond;
    // psi2 has slope at most 1, so the trace s.e. bounds the spread of the sum.
    t.delta_f_se = t.v_pr_exp * fe.trace_se();
    t.delta_f_nonnegative = t.delta_f >= -1e-8 - 3.0 * t.delta_f_se;

    const double se_dil = std::max(t.mi_bound_base_se, 1e-12) + t.v_pr_exp * fe.trace_se();
    t.diluting_inequality = t.mi_bound_cond <= t.mi_bound_base + 3.0 * se_dil + 1e-9;
    t.nondiluting_inequality = t.cmi_term_cond >= t.cmi_term_base - 3.0 * se_dil - 1e-9;

    std::vector<Matrix> sb = fb.samples, se = fe.samples;
    if (sb.size() < 2) sb = {fb.matrix, fb.matrix};
    if (se.size() < 2) se = {fe.matrix, fe.matrix};
    t.skew_base = skewness_check(sb, 0.5);
    t.skew_exp = skewness_check(se, 0.5);
    return t;
}

inline std::string TradeoffReport::text_table() const {
    std::ostringstream o;
    o.setf(std::ios::fixed);
    o.precision(4);
    if (!hypotheses_met()) o << "*** hypotheses unmet: bounds below are reported but not guaranteed ***\n";
    o << "pair: " << pair << "  (d = " << d << ", d_exp = " << d_exp << ", R = " << R << ")\n";
    o << "                    identifiability (mi bound)   falsifiability (cmi term, up to constant)\n";
    o << "base model          " << mi_bound_base << "                       " << cmi_term_base << "\n";
    o << "expanded model      " << mi_bound_exp << "                       " << cmi_term_exp << "\n";
    o << "change              delta_i = " << delta_i << "            delta_f = " << delta_f << "\n";
    o << "conditional block   " << mi_bound_cond << "                       " << cmi_term_cond << "\n";
    o << "dilution: " << to_string(dilution.classification) << "\n";
    o << "trace bound: lhs " << trace_bound.lhs << " <= rhs " << trace_bound.rhs << " : "
      << (trace_bound.holds ? "holds" : "violated") << "\n";
    o << "hypotheses: log_concave=" << log_concave << " skew_ok_base=" << skew_base.ok
      << " skew_ok_exp=" << skew_exp.ok << " normal_posterior=declared\n";
    return o.str();
}

}  // namespace bmx
