#pragma once

#include <array>
#include <cmath>
#include <cstdio>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "error.hpp"
#include "gaussian.hpp"
#include "model.hpp"
#include "quadrature.hpp"
#include "rng.hpp"
#include "stats.hpp"

namespace bmx {

using HyperParams = std::map<std::string, double>;

/// Reads hyperparameters against a whitelist so typos fail loudly.
class HyperReader {
public:
    HyperReader(std::string model, const HyperParams& hp, std::set<std::string> allowed)
        : model_(std::move(model)), hp_(hp) {
        for (const auto& [k, v] : hp_) {
            if (!allowed.count(k)) throw DomainError(model_ + ": unknown hyperparameter '" + k + "'");
            if (!std::isfinite(v)) throw DomainError(model_ + ": hyperparameter '" + k + "' is not finite");
        }
    }
    double get(const std::string& k, double def) const {
        auto it = hp_.find(k);
        return it == hp_.end() ? def : it->second;
    }
    double positive(const std::string& k, double def) const {
        double v = get(k, def);
        if (!(v > 0)) throw DomainError(model_ + ": " + k + " must be positive");
        return v;
    }
    double nonnegative(const std::string& k, double def) const {
        double v = get(k, def);
        if (v < 0) throw DomainError(model_ + ": " + k + " must be nonnegative");
        return v;
    }
    int integer(const std::string& k, int def, int min) const {
        double v = get(k, def);
        if (v != std::floor(v) || v < min)
            throw DomainError(model_ + ": " + k + " must be an integer >= " + std::to_string(min));
        return static_cast<int>(v);
    }
    double in_range(const std::string& k, double def, double lo, double hi) const {
        double v = get(k, def);
        if (!(v >= lo && v <= hi)) throw DomainError(model_ + ": " + k + " is outside its admissible range");
        return v;
    }

private:
    std::string model_;
    HyperParams hp_;
};

inline Eigen::Map<const Vector> as_vector(Params p) {
    return Eigen::Map<const Vector>(p.data(), static_cast<Eigen::Index>(p.size()));
}

inline Eigen::Map<const Vector> as_vector(const DataSet& y) {
    return Eigen::Map<const Vector>(y.values.data(), static_cast<Eigen::Index>(y.size()));
}

inline DataSet make_data(std::vector<double> values, std::vector<int> groups = {}, std::string name = {}) {
    DataSet d;
    d.values = std::move(values);
    d.groups = std::move(groups);
    d.name = std::move(name);
    return d;
}

inline Matrix gaussian_draws(const GaussianPosterior& g, std::size_t s, Rng& rng) {
    Matrix root = sym_sqrt(g.cov);
    Matrix out(static_cast<Eigen::Index>(s), g.mean.size());
    Vector z(g.mean.size());
    for (std::size_t i = 0; i < s; ++i) {
        for (Eigen::Index j = 0; j < z.size(); ++j) z(j) = rng.normal();
        out.row(static_cast<Eigen::Index>(i)) = (g.mean + root * z).transpose();
    }
    return out;
}

// ---------------------------------------------------------------------------
// Linear-Gaussian family

inline ModelSpec linear_gaussian_model(std::string name, LinearGaussian lg, std::size_t d_shared,
                                       std::vector<std::string> names, std::vector<int> labels = {}) {
    ModelSpec m;
    m.name = name;
    const auto d = static_cast<std::size_t>(lg.design.cols());
    const auto rows = lg.design.rows();
    if (d_shared > d) throw StructuralError(name + ": shared block larger than parameter vector");
    m.d_shared = d_shared;
    m.d_extra = d - d_shared;
    m.n_obs = static_cast<std::size_t>(rows);
    m.param_names = std::move(names);

    auto noise = std::make_shared<MvnDensity>(Vector::Zero(rows), lg.noise_cov);
    Matrix noise_root = Eigen::LLT<Matrix>(lg.noise_cov).matrixL();
    Matrix prior_root = sym_sqrt(lg.prior_cov);
    const bool prior_pd = Eigen::LLT<Matrix>(lg.prior_cov).info() == Eigen::Success &&
                          sym_eigen(lg.prior_cov).values(0) > 0.0;
    auto shared_idx = index_range(0, static_cast<int>(d_shared));
    auto extra_idx = index_range(static_cast<int>(d_shared), static_cast<int>(d));

    auto is_pd = [](const Matrix& c) { return c.size() > 0 && sym_eigen(c).values(0) > 0.0; };
    Matrix c_shared = sub_matrix(lg.prior_cov, shared_idx, shared_idx);
    Matrix c_extra = sub_matrix(lg.prior_cov, extra_idx, extra_idx);
    if (is_pd(c_shared)) {
        auto ps = std::make_shared<MvnDensity>(sub_vector(lg.prior_mean, shared_idx), c_shared);
        m.log_prior_shared = [ps](Params p) { return (*ps)(as_vector(p)); };
    }
    if (is_pd(c_extra)) {
        auto pe = std::make_shared<MvnDensity>(sub_vector(lg.prior_mean, extra_idx), c_extra);
        m.log_prior_extra = [pe](Params p) { return (*pe)(as_vector(p)); };
    }
    if (prior_pd) {
        auto prior = std::make_shared<MvnDensity>(lg.prior_mean, lg.prior_cov);
        m.log_prior = [prior](Params p) { return (*prior)(as_vector(p)); };
    } else {
        m.log_prior = [name](Params) -> double {
            throw CapabilityError(name + ": degenerate prior has no density");
        };
    }
    m.prior_independent =
        m.d_extra == 0 || sub_matrix(lg.prior_cov, shared_idx, extra_idx).cwiseAbs().maxCoeff() == 0.0;

    const Matrix a = lg.design;
    const bool diagonal_noise = lg.noise_cov.isDiagonal();
    if (diagonal_noise) {
        const Vector inv_var = lg.noise_cov.diagonal().cwiseInverse();
        const double c = -0.5 * (static_cast<double>(rows) * kLog2Pi + lg.noise_cov.diagonal().array().log().sum());
        m.log_lik = [a, inv_var, c, name](const DataSet& y, Params p) {
            if (static_cast<Eigen::Index>(y.size()) != a.rows())
                throw StructuralError(name + ": expects " + std::to_string(a.rows()) + " observations");
            Vector r = as_vector(y) - a * as_vector(p);
            return c - 0.5 * r.cwiseAbs2().dot(inv_var);
        };
    } else {
        m.log_lik = [a, noise, name](const DataSet& y, Params p) {
            if (static_cast<Eigen::Index>(y.size()) != a.rows())
                throw StructuralError(name + ": expects " + std::to_string(a.rows()) + " observations");
            return (*noise)(as_vector(y) - a * as_vector(p));
        };
    }
    const Vector m0 = lg.prior_mean;
    m.sample_prior = [m0, prior_root](Rng& rng) {
        Vector z(m0.size());
        for (Eigen::Index j = 0; j < z.size(); ++j) z(j) = rng.normal();
        return to_std(m0 + prior_root * z);
    };
    m.sample_data = [a, noise_root, labels, name](Params p, std::size_t n, Rng& rng) {
        if (n != 0 && static_cast<Eigen::Index>(n) != a.rows())
            throw StructuralError(name + ": fixed design with " + std::to_string(a.rows()) + " rows");
        Vector z(a.rows());
        for (Eigen::Index j = 0; j < z.size(); ++j) z(j) = rng.normal();
        return make_data(to_std(a * as_vector(p) + noise_root * z), labels);
    };

    Matrix noise_inv = spd_inverse(lg.noise_cov);
    Matrix info = symmetrize(a.transpose() * noise_inv * a);
    m.analytic.linear_gaussian = lg;
    m.analytic.prior_cov = lg.prior_cov;
    m.analytic.fisher = [info](Params) { return info; };
    m.analytic.observed_info = [info](const DataSet&, Params) { return info; };
    auto evidence = std::make_shared<MvnDensity>(a * lg.prior_mean,
                                                 symmetrize(a * lg.prior_cov * a.transpose() + lg.noise_cov));
    m.analytic.log_evidence = [evidence, rows, name](const DataSet& y) {
        if (static_cast<Eigen::Index>(y.size()) != rows) throw StructuralError(name + ": wrong data length");
        return (*evidence)(as_vector(y));
    };
    m.analytic.posterior_sampler = [lg](const DataSet& y, std::size_t s, Rng& rng) {
        return gaussian_draws(gaussian_posterior(lg, as_vector(y)), s, rng);
    };

    if (m.d_extra > 0) {
        Matrix as = columns(a, shared_idx), ae = columns(a, extra_idx);
        auto ext = gaussian_conditional(lg.prior_mean, lg.prior_cov, extra_idx, shared_idx);
        Matrix cov_y_theta = symmetrize(lg.noise_cov + ae * ext.cov * ae.transpose());
        auto dens_theta = std::make_shared<MvnDensity>(Vector::Zero(rows), cov_y_theta);
        m.analytic.shared_log_lik = [as, ae, ext, dens_theta](const DataSet& y, Params th) {
            Vector t = as_vector(th);
            return (*dens_theta)(as_vector(y) - as * t - ae * ext.mean_at(t));
        };
        Matrix a_eff = as + ae * ext.gain;
        Matrix sinfo = symmetrize(a_eff.transpose() * spd_inverse(cov_y_theta) * a_eff);
        m.analytic.shared_fisher = [sinfo](Params) { return sinfo; };
        Matrix root_y_theta = sym_sqrt(cov_y_theta);
        m.analytic.shared_sample_data = [as, ae, ext, root_y_theta, labels](Params th, Rng& rng) {
            Vector t = as_vector(th);
            Vector z(root_y_theta.rows());
            for (Eigen::Index j = 0; j < z.size(); ++j) z(j) = rng.normal();
            return make_data(to_std(as * t + ae * ext.mean_at(t) + root_y_theta * z), labels);
        };
        auto sh = gaussian_conditional(lg.prior_mean, lg.prior_cov, shared_idx, extra_idx);
        auto dens_lambda =
            std::make_shared<MvnDensity>(Vector::Zero(rows), symmetrize(lg.noise_cov + as * sh.cov * as.transpose()));
        m.analytic.log_evidence_given_extra = [as, ae, sh, dens_lambda](const DataSet& y, Params lam) {
            Vector l = as_vector(lam);
            return (*dens_lambda)(as_vector(y) - ae * l - as * sh.mean_at(l));
        };
    }
    return m;
}

/// y_i ~ N(theta, noise_sd^2) for any number of observations, theta ~ N(0, sigma_p^2).
inline ModelSpec normal_location_model(std::string name, int n, double sigma_p, double noise_sd,
                                       std::vector<int> labels = {}) {
    LinearGaussian lg{Matrix::Ones(n, 1), Matrix::Identity(n, n) * noise_sd * noise_sd, Vector::Zero(1),
                      Matrix::Identity(1, 1) * sigma_p * sigma_p};
    ModelSpec m = linear_gaussian_model(name, lg, 1, {"theta"}, labels);
    const double v = noise_sd * noise_sd, pv = sigma_p * sigma_p;
    m.log_lik = [noise_sd](const DataSet& y, Params p) {
        double s = 0.0;
        for (double x : y.values) s += normal_logpdf(x, p[0], noise_sd);
        return s;
    };
    m.sample_data = [noise_sd, n, labels](Params p, std::size_t k, Rng& rng) {
        std::size_t count = k == 0 ? static_cast<std::size_t>(n) : k;
        DataSet d;
        for (std::size_t i = 0; i < count; ++i) d.values.push_back(rng.normal(p[0], noise_sd));
        if (count == static_cast<std::size_t>(n)) d.groups = labels;
        return d;
    };
    m.analytic.observed_info = [v](const DataSet& y, Params) {
        return Matrix::Constant(1, 1, static_cast<double>(y.size()) / v);
    };
    m.analytic.posterior_sampler = [v, pv](const DataSet& y, std::size_t s, Rng& rng) {
        double sum = 0.0;
        for (double x : y.values) sum += x;
        double prec = 1.0 / pv + static_cast<double>(y.size()) / v;
        GaussianPosterior g{Vector::Constant(1, sum / v / prec), Matrix::Constant(1, 1, 1.0 / prec)};
        return gaussian_draws(g, s, rng);
    };
    m.analytic.log_evidence = [v, pv](const DataSet& y) {
        double n_ = static_cast<double>(y.size()), sum = 0.0, sq = 0.0;
        for (double x : y.values) sum += x, sq += x * x;
        double logdet = n_ * std::log(v) + std::log1p(n_ * pv / v);
        double quad = (sq - pv * sum * sum / (v + n_ * pv)) / v;
        return -0.5 * (n_ * kLog2Pi + logdet + quad);
    };
    return m;
}

// ---------------------------------------------------------------------------
// Count models

inline bool is_count(double y) { return y >= 0 && y == std::floor(y); }

inline double poisson_logpmf(double k, double mu) {
    if (!is_count(k)) return -std::numeric_limits<double>::infinity();
    return k * mu - std::exp(mu) - std::lgamma(k + 1.0);
}

/// Negative binomial with mean e^mu and size e^lam, evaluated through e^-lam so the
/// Poisson limit lam -> +inf is reached without overflow.
inline double negbin_logpmf(double k, double mu, double lam) {
    if (!is_count(k)) return -std::numeric_limits<double>::infinity();
    const double m = std::exp(mu), eps = std::exp(-lam);
    if (!std::isfinite(eps)) return -std::numeric_limits<double>::infinity();
    double s = k * mu - std::lgamma(k + 1.0);
    const double denom = 1.0 + m * eps;
    for (double j = 0; j < k; j += 1.0) s += std::log1p((j - m) * eps / denom);
    const double x = m * eps;
    s -= x < 1e-12 ? m * (1.0 - 0.5 * x) : m * std::log1p(x) / x;
    return s;
}

inline long negbin_draw(double mu, double lam, Rng& rng) {
    const double m = std::exp(mu), r = std::exp(lam);
    if (!std::isfinite(r) || r > 1e12) return rng.poisson(m);
    return rng.poisson(rng.gamma(r, r / m));
}

/// Per-observation Fisher information for lam = log size, from the score's second moment.
inline double negbin_info_lambda(double mu, double lam) {
    const double m = std::exp(mu), r = std::exp(lam);
    const double x = m / r;
    double p = std::exp(-(x < 1e-12 ? m : r * std::log1p(x)));
    double cum = 0.0, acc = 0.0, harmonic = 0.0;
    const double base = -r * std::log1p(x) + r * m / (m + r);
    for (long y = 0; y < 2000000; ++y) {
        double score = harmonic - static_cast<double>(y) * r / (m + r) + base;
        acc += p * score * score;
        cum += p;
        if (cum > 1.0 - 1e-15 && static_cast<double>(y) > m) break;
        harmonic += r / (r + static_cast<double>(y));
        p *= (static_cast<double>(y) + r) / (static_cast<double>(y) + 1.0) * m / (m + r);
    }
    return acc;
}

// ---------------------------------------------------------------------------
// Grouped-data helpers

inline double gamma_logpdf_logscale(double s, double shape, double rate) {
    return shape * std::log(rate) - std::lgamma(shape) + shape * s - rate * std::exp(s);
}

/// Collapsed log-likelihood with group means integrated out: y_ml ~ N(theta_l, sigma),
/// theta_l ~ N(mu, tau).
inline double grouped_collapsed_loglik(const GroupStats& st, double mu, double log_sigma, double log_tau) {
    const double s2 = std::exp(2.0 * log_sigma), t2 = std::exp(2.0 * log_tau);
    double ll = 0.0;
    for (std::size_t g = 0; g < st.count.size(); ++g) {
        const double m = st.count[g];
        if (m == 0) continue;
        const double v = s2 + m * t2;
        const double d = st.mean[g] - mu;
        ll += -0.5 * (m * kLog2Pi + (m - 1.0) * 2.0 * log_sigma + std::log(v) + st.ssw[g] / s2 + m * d * d / v);
    }
    return ll;
}

inline DataSet simulate_grouped_data(int M, int L, double sigma_star, double mu_star, double tau_star,
                                     std::uint64_t seed) {
    if (M < 1 || L < 1) throw DomainError("simulate_grouped_data: M and L must be at least 1");
    if (!(sigma_star > 0) || !(tau_star > 0)) throw DomainError("simulate_grouped_data: scales must be positive");
    Rng rng(seed);
    DataSet d;
    for (int l = 0; l < L; ++l) {
        double theta = rng.normal(mu_star, tau_star);
        for (int m = 0; m < M; ++m) {
            d.values.push_back(rng.normal(theta, sigma_star));
            d.groups.push_back(l);
        }
    }
    char buf[96];
    std::snprintf(buf, sizeof buf, "grouped-M%d-L%d-sigma%g", M, L, sigma_star);
    d.name = buf;
    d.seed = seed;
    return d;
}

/// Sample variance of the group means over the sample variance of all observations.
inline double variance_ratio(const DataSet& y) {
    auto st = group_stats(y);
    if (st.mean.size() < 2 || y.size() < 2) return 0.0;
    double total = var_of(y.values);
    return total > 0 ? var_of(st.mean) / total : 0.0;
}

struct GroupedSettings {
    int M = 2, L = 20;
    double sigma_guess = 1.0, mu0 = 2.0, a_sigma = 2.0, a_tau = 2.0, tau_rate = 1.0;
    double b_sigma() const { return (a_sigma - 1.0) / sigma_guess; }
};

inline GroupedSettings grouped_settings(const std::string& name, const HyperParams& hp) {
    HyperReader r(name, hp, {"M", "L", "sigma_guess", "mu0", "a_sigma", "a_tau", "tau_rate"});
    GroupedSettings g;
    g.M = r.integer("M", 2, 1);
    g.L = r.integer("L", 20, 1);
    g.sigma_guess = r.positive("sigma_guess", 1.0);
    g.mu0 = r.get("mu0", 2.0);
    if (g.mu0 == 0) throw DomainError(name + ": mu0 must be nonzero");
    g.a_sigma = r.get("a_sigma", 2.0);
    g.a_tau = r.get("a_tau", 2.0);
    if (g.a_sigma <= 1.0 || g.a_tau < 1.0) throw DomainError(name + ": gamma shapes must keep a positive mode");
    g.tau_rate = r.positive("tau_rate", 1.0);
    return g;
}

inline std::vector<int> group_labels(int M, int L) {
    std::vector<int> v;
    for (int l = 0; l < L; ++l)
        for (int m = 0; m < M; ++m) v.push_back(l);
    return v;
}

inline ModelSpec grouped_base_model(const GroupedSettings& g) {
    ModelSpec m = normal_location_model("grouped-base", g.M * g.L, std::abs(g.mu0), g.sigma_guess,
                                        group_labels(g.M, g.L));
    m.param_names = {"mu"};
    return m;
}

inline ModelSpec grouped_expanded_model(const GroupedSettings& g) {
    ModelSpec m;
    m.name = "grouped-expanded";
    m.d_shared = 1;
    m.d_extra = 2;
    m.n_obs = static_cast<std::size_t>(g.M * g.L);
    m.param_names = {"mu", "log_sigma", "log_tau"};
    m.pointwise = false;
    const double sd_mu = std::abs(g.mu0), bs = g.b_sigma();
    m.log_prior_shared = [sd_mu](Params p) { return normal_logpdf(p[0], 0.0, sd_mu); };
    m.log_prior_extra = [g, bs](Params p) {
        return gamma_logpdf_logscale(p[0], g.a_sigma, bs) + gamma_logpdf_logscale(p[1], g.a_tau, g.tau_rate);
    };
    m.log_prior = [sd_mu, g, bs](Params p) {
        return normal_logpdf(p[0], 0.0, sd_mu) + gamma_logpdf_logscale(p[1], g.a_sigma, bs) +
               gamma_logpdf_logscale(p[2], g.a_tau, g.tau_rate);
    };
    m.log_lik = [](const DataSet& y, Params p) { return grouped_collapsed_loglik(group_stats(y), p[0], p[1], p[2]); };
    m.sample_prior = [sd_mu, g, bs](Rng& rng) {
        double mu = rng.normal(0.0, sd_mu);
        double s = std::log(rng.gamma(g.a_sigma, bs));
        double t = std::log(rng.gamma(g.a_tau, g.tau_rate));
        return std::vector<double>{mu, s, t};
    };
    m.sample_data = [g](Params p, std::size_t n, Rng& rng) {
        int L = g.L;
        if (n != 0 && n != static_cast<std::size_t>(g.M * g.L)) {
            if (n % static_cast<std::size_t>(g.M) != 0)
                throw StructuralError("grouped-expanded: n must be a multiple of M");
            L = static_cast<int>(n) / g.M;
        }
        DataSet d;
        const double sigma = std::exp(p[1]), tau = std::exp(p[2]);
        for (int l = 0; l < L; ++l) {
            double th = rng.normal(p[0], tau);
            for (int k = 0; k < g.M; ++k) {
                d.values.push_back(rng.normal(th, sigma));
                d.groups.push_back(l);
            }
        }
        return d;
    };
    // Shared likelihood: integrate sigma and tau over their gamma priors.
    auto qs = std::make_shared<QuadratureRule>(gauss_laguerre_gamma(20, g.a_sigma, bs));
    auto qt = std::make_shared<QuadratureRule>(gauss_laguerre_gamma(20, g.a_tau, g.tau_rate));
    m.analytic.shared_log_lik = [qs, qt](const DataSet& y, Params th) {
        auto st = group_stats(y);
        std::vector<double> terms;
        terms.reserve(qs->nodes.size() * qt->nodes.size());
        for (std::size_t i = 0; i < qs->nodes.size(); ++i)
            for (std::size_t j = 0; j < qt->nodes.size(); ++j)
                terms.push_back(std::log(qs->weights[i] * qt->weights[j]) +
                                grouped_collapsed_loglik(st, th[0], std::log(qs->nodes[i]), std::log(qt->nodes[j])));
        return log_sum_exp(terms);
    };
    auto prior = m.sample_prior;
    auto data = m.sample_data;
    m.analytic.shared_sample_data = [prior, data](Params th, Rng& rng) {
        auto p = prior(rng);
        p[0] = th[0];
        return data(p, 0, rng);
    };
    return m;
}

/// Exact draw of the group means given (mu, sigma, tau) and the data.
inline std::vector<double> draw_group_means(const DataSet& y, double mu, double sigma, double tau, Rng& rng) {
    auto st = group_stats(y);
    std::vector<double> th(st.count.size());
    for (std::size_t g = 0; g < th.size(); ++g) {
        double prec = 1.0 / (tau * tau) + st.count[g] / (sigma * sigma);
        double mean = (mu / (tau * tau) + st.count[g] * st.mean[g] / (sigma * sigma)) / prec;
        th[g] = rng.normal(mean, 1.0 / std::sqrt(prec));
    }
    return th;
}

// ---------------------------------------------------------------------------
// Individual builtins

inline ModelSpec normal_gamma_model(int n, double mu_v, const std::string& name = "normal-gamma") {
    const double kappa = mu_v, alpha = 2.0, beta = mu_v;
    ModelSpec m;
    m.name = name;
    m.d_shared = 1;
    m.d_extra = 1;
    m.n_obs = static_cast<std::size_t>(n);
    m.param_names = {"theta1", "log_theta2"};
    m.prior_independent = false;
    m.log_concave_prior = false;
    m.log_prior = [=](Params p) {
        double prec = kappa * std::exp(p[1]);
        return -0.5 * kLog2Pi + 0.5 * std::log(prec) - 0.5 * prec * p[0] * p[0] +
               gamma_logpdf_logscale(p[1], alpha, beta);
    };
    m.log_prior_extra = [=](Params p) { return gamma_logpdf_logscale(p[0], alpha, beta); };
    // Student-t with 2 alpha degrees of freedom and squared scale beta / (alpha kappa).
    m.log_prior_shared = [=](Params p) {
        double nu = 2.0 * alpha, s2 = beta / (alpha * kappa);
        return std::lgamma((nu + 1) / 2) - std::lgamma(nu / 2) - 0.5 * std::log(nu * M_PI * s2) -
               (nu + 1) / 2 * std::log1p(p[0] * p[0] / (nu * s2));
    };
    m.log_lik = [](const DataSet& y, Params p) {
        double s = 0.0, prec = std::exp(p[1]);
        for (double x : y.values) s += -0.5 * kLog2Pi + 0.5 * p[1] - 0.5 * prec * (x - p[0]) * (x - p[0]);
        return s;
    };
    m.sample_prior = [=](Rng& rng) {
        double t2 = rng.gamma(alpha, beta);
        return std::vector<double>{rng.normal(0.0, 1.0 / std::sqrt(kappa * t2)), std::log(t2)};
    };
    m.sample_data = [n](Params p, std::size_t k, Rng& rng) {
        std::size_t count = k == 0 ? static_cast<std::size_t>(n) : k;
        DataSet d;
        double sd = std::exp(-0.5 * p[1]);
        for (std::size_t i = 0; i < count; ++i) d.values.push_back(rng.normal(p[0], sd));
        return d;
    };
    auto update = [=](const DataSet& y) {
        double nn = static_cast<double>(y.size()), ybar = y.size() ? mean_of(y.values) : 0.0, ss = 0.0;
        for (double x : y.values) ss += (x - ybar) * (x - ybar);
        double kn = kappa + nn;
        return std::array<double, 4>{nn * ybar / kn, kn, alpha + nn / 2,
                                     beta + 0.5 * ss + kappa * nn * ybar * ybar / (2 * kn)};
    };
    m.analytic.posterior_sampler = [update](const DataSet& y, std::size_t s, Rng& rng) {
        auto [mn, kn, an, bn] = update(y);
        Matrix out(static_cast<Eigen::Index>(s), 2);
        for (std::size_t i = 0; i < s; ++i) {
            double t2 = rng.gamma(an, bn);
            out(static_cast<Eigen::Index>(i), 0) = rng.normal(mn, 1.0 / std::sqrt(kn * t2));
            out(static_cast<Eigen::Index>(i), 1) = std::log(t2);
        }
        return out;
    };
    m.analytic.log_evidence = [=](const DataSet& y) {
        auto [mn, kn, an, bn] = update(y);
        double nn = static_cast<double>(y.size());
        return std::lgamma(an) - std::lgamma(alpha) + alpha * std::log(beta) - an * std::log(bn) +
               0.5 * std::log(kappa / kn) - 0.5 * nn * std::log(2 * M_PI);
    };
    // theta2 | theta1 ~ Gamma(alpha + 1/2, beta + kappa theta1^2 / 2) integrates out in closed form.
    m.analytic.shared_log_lik = [=](const DataSet& y, Params th) {
        double a1 = alpha + 0.5, b1 = beta + 0.5 * kappa * th[0] * th[0], ss = 0.0;
        for (double x : y.values) ss += (x - th[0]) * (x - th[0]);
        double nn = static_cast<double>(y.size());
        return std::lgamma(a1 + nn / 2) - std::lgamma(a1) + a1 * std::log(b1) - (a1 + nn / 2) * std::log(b1 + ss / 2) -
               0.5 * nn * kLog2Pi;
    };
    m.analytic.shared_sample_data = [=](Params th, Rng& rng) {
        double t2 = rng.gamma(alpha + 0.5, beta + 0.5 * kappa * th[0] * th[0]);
        DataSet d;
        for (int i = 0; i < n; ++i) d.values.push_back(rng.normal(th[0], 1.0 / std::sqrt(t2)));
        return d;
    };
    return m;
}

struct LinregDesign {
    Matrix x;  // n x m, standardized
    Vector z;  // extra predictor
};

inline LinregDesign linreg_design(int n, int m, double rho, double z_scale, std::uint64_t seed) {
    Rng rng(seed);
    auto standardize = [](Vector v) {
        v.array() -= v.mean();
        double sd = std::sqrt(v.squaredNorm() / static_cast<double>(v.size()));
        return Vector(v / sd);
    };
    LinregDesign d{Matrix(n, m), Vector(n)};
    for (int j = 0; j < m; ++j) {
        Vector c(n);
        for (int i = 0; i < n; ++i) c(i) = rng.normal();
        d.x.col(j) = standardize(c);
    }
    Vector w(n);
    for (int i = 0; i < n; ++i) w(i) = rng.normal();
    Matrix b(n, m + 1);
    b << d.x, Vector::Ones(n);
    w -= b * b.colPivHouseholderQr().solve(w);
    w = standardize(w);
    d.z = z_scale * (rho * d.x.col(0) + std::sqrt(1.0 - rho * rho) * w);
    return d;
}

/// log N(y; mean, e^tau I + B B').
inline double gaussian_lowrank_logpdf(const Vector& r, double tau, const Matrix& b) {
    const auto n = r.size();
    Matrix c = b * b.transpose();
    c.diagonal().array() += std::exp(tau);
    return mvn_logpdf(r, Vector::Zero(n), c);
}

// ---------------------------------------------------------------------------
// Registry

using Builtin = std::variant<ModelSpec, ExpansionPair>;

inline std::vector<std::string> builtin_names() {
    return {"normal-location", "redundant-location", "split-means",     "normal-gamma",   "normal-gamma-pair",
            "prior-scale",     "location-nuisance",  "linreg-addpred",  "poisson-negbin", "student-t-outlier",
            "grouped-base",    "grouped-expanded",   "grouped",         "simple-reg-2obs", "flat-location",
            "independent-extra"};
}

inline ModelSpec make_linreg_model(bool expanded, int n, int m, const LinregDesign& des, double sb, double tau_mean,
                                   double tau_sd) {
    ModelSpec md;
    md.name = expanded ? "linreg-addpred" : "linreg-base";
    md.d_shared = static_cast<std::size_t>(m + 2);
    md.d_extra = expanded ? 1 : 0;
    md.n_obs = static_cast<std::size_t>(n);
    md.param_names.push_back("tau");
    for (int j = 0; j < m; ++j) md.param_names.push_back("beta" + std::to_string(j + 1));
    md.param_names.push_back("alpha");
    if (expanded) md.param_names.push_back("lambda");
    // Mean design D with columns x_1..x_m, 1 and (expanded only) z; parameter p = (tau, coefficients).
    Matrix dm(n, m + 1 + (expanded ? 1 : 0));
    dm.leftCols(m) = des.x;
    dm.col(m) = Vector::Ones(n);
    if (expanded) dm.col(m + 1) = des.z;
    const auto k = dm.cols();
    md.log_prior = [=](Params p) {
        double s = normal_logpdf(p[0], tau_mean, tau_sd);
        for (Eigen::Index j = 1; j <= k; ++j) s += normal_logpdf(p[j], 0.0, sb);
        return s;
    };
    md.log_prior_shared = [=](Params p) {
        double s = normal_logpdf(p[0], tau_mean, tau_sd);
        for (int j = 1; j <= m + 1; ++j) s += normal_logpdf(p[j], 0.0, sb);
        return s;
    };
    if (expanded) md.log_prior_extra = [=](Params p) { return normal_logpdf(p[0], 0.0, sb); };
    auto resid = [dm, k](const DataSet& y, Params p) {
        Vector coef = as_vector(p).segment(1, k);
        return Vector(as_vector(y) - dm * coef);
    };
    md.log_lik = [=](const DataSet& y, Params p) {
        if (static_cast<int>(y.size()) != n) throw StructuralError("linreg: wrong data length");
        Vector r = resid(y, p);
        return -0.5 * (n * kLog2Pi + n * p[0] + r.squaredNorm() * std::exp(-p[0]));
    };
    md.sample_prior = [=](Rng& rng) {
        std::vector<double> p{rng.normal(tau_mean, tau_sd)};
        for (Eigen::Index j = 0; j < k; ++j) p.push_back(rng.normal(0.0, sb));
        return p;
    };
    md.sample_data = [=](Params p, std::size_t nn, Rng& rng) {
        if (nn != 0 && static_cast<int>(nn) != n) throw StructuralError("linreg: fixed design");
        Vector mean = dm * as_vector(p).segment(1, k);
        DataSet d;
        double sd = std::exp(0.5 * p[0]);
        for (int i = 0; i < n; ++i) d.values.push_back(rng.normal(mean(i), sd));
        return d;
    };
    Matrix dtd = dm.transpose() * dm;
    md.analytic.fisher = [=](Params p) {
        Matrix f = Matrix::Zero(k + 1, k + 1);
        f(0, 0) = n / 2.0;
        f.bottomRightCorner(k, k) = std::exp(-p[0]) * dtd;
        return f;
    };
    md.analytic.observed_info = [=](const DataSet& y, Params p) {
        Vector r = resid(y, p);
        double e = std::exp(-p[0]);
        Matrix j = Matrix::Zero(k + 1, k + 1);
        j(0, 0) = 0.5 * r.squaredNorm() * e;
        Vector cross = e * dm.transpose() * r;
        j.block(1, 0, k, 1) = cross;
        j.block(0, 1, 1, k) = cross.transpose();
        j.bottomRightCorner(k, k) = e * dtd;
        return j;
    };
    Matrix pc = Matrix::Identity(k + 1, k + 1) * sb * sb;
    pc(0, 0) = tau_sd * tau_sd;
    md.analytic.prior_cov = pc;
    auto gh = std::make_shared<QuadratureRule>(gauss_hermite_normal(40));
    auto evidence_of = [=](const Vector& r, const Matrix& b) {
        std::vector<double> terms;
        for (std::size_t q = 0; q < gh->nodes.size(); ++q)
            terms.push_back(std::log(gh->weights[q]) +
                            gaussian_lowrank_logpdf(r, tau_mean + tau_sd * gh->nodes[q], b));
        return log_sum_exp(terms);
    };
    Matrix bfull = dm * sb;
    md.analytic.log_evidence = [=](const DataSet& y) { return evidence_of(as_vector(y), bfull); };
    if (expanded) {
        Matrix bshared = dm.leftCols(m + 1) * sb;
        const Vector z = des.z;
        const double zz = z.squaredNorm();
        md.analytic.log_evidence_given_extra = [=](const DataSet& y, Params lam) {
            return evidence_of(Vector(as_vector(y) - lam[0] * z), bshared);
        };
        // y | theta ~ N(X beta + alpha, e^tau I + sb^2 z z').
        Matrix ds = dm.leftCols(m + 1);
        md.analytic.shared_log_lik = [=](const DataSet& y, Params th) {
            Vector r = as_vector(y) - ds * as_vector(th).segment(1, m + 1);
            double et = std::exp(th[0]), c = et + sb * sb * zz, zr = z.dot(r);
            double logdet = (n - 1) * th[0] + std::log(c);
            double quad = (r.squaredNorm() - sb * sb * zr * zr / c) / et;
            return -0.5 * (n * kLog2Pi + logdet + quad);
        };
        md.analytic.shared_fisher = [=](Params th) {
            double et = std::exp(th[0]), c = et + sb * sb * zz;
            Matrix cinv = (Matrix::Identity(n, n) - sb * sb * z * z.transpose() / c) / et;
            Matrix f = Matrix::Zero(m + 2, m + 2);
            f.bottomRightCorner(m + 1, m + 1) = symmetrize(ds.transpose() * cinv * ds);
            f(0, 0) = 0.5 * ((n - 1) + et * et / (c * c));
            return f;
        };
        md.analytic.shared_sample_data = [=](Params th, Rng& rng) {
            Vector mean = ds * as_vector(th).segment(1, m + 1);
            double g = rng.normal(0.0, sb), sd = std::exp(0.5 * th[0]);
            DataSet d;
            for (int i = 0; i < n; ++i) d.values.push_back(rng.normal(mean(i) + g * z(i), sd));
            return d;
        };
    }
    return md;
}

inline ModelSpec student_t_model(double df, double scale, double lo, double hi) {
    ModelSpec m;
    m.name = "student-t-outlier";
    m.d_shared = 1;
    m.n_obs = 2;
    m.param_names = {"theta"};
    const double width = hi - lo;
    m.log_prior = [=](Params p) {
        return (p[0] >= lo && p[0] <= hi) ? -std::log(width) : -std::numeric_limits<double>::infinity();
    };
    m.log_prior_shared = m.log_prior;
    const double c = std::lgamma((df + 1) / 2) - std::lgamma(df / 2) - 0.5 * std::log(df * M_PI) - std::log(scale);
    m.log_lik = [=](const DataSet& y, Params p) {
        double s = 0.0;
        for (double x : y.values) {
            double z = (x - p[0]) / scale;
            s += c - (df + 1) / 2 * std::log1p(z * z / df);
        }
        return s;
    };
    m.sample_prior = [=](Rng& rng) { return std::vector<double>{lo + width * rng.uniform()}; };
    m.sample_data = [=](Params p, std::size_t n, Rng& rng) {
        DataSet d;
        for (std::size_t i = 0; i < (n == 0 ? 2 : n); ++i) d.values.push_back(p[0] + scale * rng.student_t(df));
        return d;
    };
    m.analytic.prior_cov = Matrix::Constant(1, 1, width * width / 12.0);
    return m;
}

inline ModelSpec poisson_model(int n, double mu_sd) {
    ModelSpec m;
    m.name = "poisson";
    m.d_shared = 1;
    m.n_obs = static_cast<std::size_t>(n);
    m.param_names = {"mu"};
    m.log_prior = [=](Params p) { return normal_logpdf(p[0], 0.0, mu_sd); };
    m.log_prior_shared = m.log_prior;
    m.log_lik = [](const DataSet& y, Params p) {
        double s = 0.0;
        for (double k : y.values) s += poisson_logpmf(k, p[0]);
        return s;
    };
    m.sample_prior = [=](Rng& rng) { return std::vector<double>{rng.normal(0.0, mu_sd)}; };
    m.sample_data = [n](Params p, std::size_t k, Rng& rng) {
        DataSet d;
        for (std::size_t i = 0; i < (k == 0 ? static_cast<std::size_t>(n) : k); ++i)
            d.values.push_back(static_cast<double>(rng.poisson(std::exp(p[0]))));
        return d;
    };
    m.analytic.fisher = [n](Params p) { return Matrix::Constant(1, 1, n * std::exp(p[0])); };
    m.analytic.observed_info = [](const DataSet& y, Params p) {
        return Matrix::Constant(1, 1, static_cast<double>(y.size()) * std::exp(p[0]));
    };
    m.analytic.prior_cov = Matrix::Constant(1, 1, mu_sd * mu_sd);
    return m;
}

inline ModelSpec negbin_model(int n, double mu_sd, double lam_mean, double lam_sd) {
    ModelSpec m;
    m.name = "negbin";
    m.d_shared = 1;
    m.d_extra = 1;
    m.n_obs = static_cast<std::size_t>(n);
    m.param_names = {"mu", "lambda"};
    m.log_prior = [=](Params p) { return normal_logpdf(p[0], 0.0, mu_sd) + normal_logpdf(p[1], lam_mean, lam_sd); };
    m.log_prior_shared = [=](Params p) { return normal_logpdf(p[0], 0.0, mu_sd); };
    m.log_prior_extra = [=](Params p) { return normal_logpdf(p[0], lam_mean, lam_sd); };
    m.log_lik = [](const DataSet& y, Params p) {
        double s = 0.0;
        for (double k : y.values) s += negbin_logpmf(k, p[0], p[1]);
        return s;
    };
    m.sample_prior = [=](Rng& rng) {
        return std::vector<double>{rng.normal(0.0, mu_sd), rng.normal(lam_mean, lam_sd)};
    };
    m.sample_data = [n](Params p, std::size_t k, Rng& rng) {
        DataSet d;
        for (std::size_t i = 0; i < (k == 0 ? static_cast<std::size_t>(n) : k); ++i)
            d.values.push_back(static_cast<double>(negbin_draw(p[0], p[1], rng)));
        return d;
    };
    m.analytic.fisher = [n](Params p) {
        double mm = std::exp(p[0]), r = std::exp(p[1]);
        Matrix f = Matrix::Zero(2, 2);
        f(0, 0) = n * mm * r / (mm + r);
        f(1, 1) = n * negbin_info_lambda(p[0], p[1]);
        return f;
    };
    m.analytic.observed_info = [](const DataSet& y, Params p) {
        double mm = std::exp(p[0]), r = std::exp(p[1]), nn = static_cast<double>(y.size()), s = 0.0, inner = 0.0;
        for (double k : y.values) {
            s += k;
            for (double j = 0; j < k; j += 1.0) inner += r * j / ((r + j) * (r + j));
        }
        double mr = mm + r;
        Matrix j = Matrix::Zero(2, 2);
        j(0, 0) = r * mm * (nn * r + s) / (mr * mr);
        j(0, 1) = j(1, 0) = -(s - nn * mm) * r * mm / (mr * mr);
        j(1, 1) = -(inner - s * r * mm / (mr * mr) +
                    nn * (-r * std::log1p(mm / r) + r * mm / mr + r * mm * mm / (mr * mr)));
        return j;
    };
    Matrix pc = Matrix::Zero(2, 2);
    pc(0, 0) = mu_sd * mu_sd;
    pc(1, 1) = lam_sd * lam_sd;
    m.analytic.prior_cov = pc;
    auto gh = std::make_shared<QuadratureRule>(gauss_hermite_normal(32));
    m.analytic.shared_log_lik = [=](const DataSet& y, Params th) {
        std::vector<double> terms;
        for (std::size_t q = 0; q < gh->nodes.size(); ++q) {
            double lam = lam_mean + lam_sd * gh->nodes[q], s = std::log(gh->weights[q]);
            for (double k : y.values) s += negbin_logpmf(k, th[0], lam);
            terms.push_back(s);
        }
        return log_sum_exp(terms);
    };
    m.analytic.shared_sample_data = [=](Params th, Rng& rng) {
        double lam = rng.normal(lam_mean, lam_sd);
        DataSet d;
        for (int i = 0; i < n; ++i) d.values.push_back(static_cast<double>(negbin_draw(th[0], lam, rng)));
        return d;
    };
    return m;
}

/// Expanded model whose extra parameters only enter through an independent normal prior.
inline ExpansionPair independent_extra_pair(const ModelSpec& base, std::size_t k, double sd) {
    ExpansionPair pair;
    pair.name = "independent-extra";
    pair.base = base;
    ModelSpec e = base;
    e.name = base.name + "+independent-extra";
    e.d_extra = k;
    for (std::size_t i = 0; i < k; ++i) e.param_names.push_back("lambda" + std::to_string(i + 1));
    const std::size_t d = base.d_shared;
    auto bp = base.log_prior;
    auto bl = base.log_lik;
    auto bsp = base.sample_prior;
    auto bsd = base.sample_data;
    e.log_prior_shared = bp;
    e.log_prior_extra = [=](Params p) {
        double s = 0.0;
        for (double v : p) s += normal_logpdf(v, 0.0, sd);
        return s;
    };
    auto lpe = e.log_prior_extra;
    e.log_prior = [=](Params p) { return bp(p.first(d)) + lpe(p.subspan(d)); };
    e.log_lik = [=](const DataSet& y, Params p) { return bl(y, p.first(d)); };
    e.sample_prior = [=](Rng& rng) {
        auto p = bsp(rng);
        for (std::size_t i = 0; i < k; ++i) p.push_back(rng.normal(0.0, sd));
        return p;
    };
    e.sample_data = [=](Params p, std::size_t n, Rng& rng) { return bsd(p.first(d), n, rng); };
    e.prior_independent = true;
    AnalyticOracles a;
    if (base.analytic.linear_gaussian) {
        auto lg = *base.analytic.linear_gaussian;
        LinearGaussian x;
        x.design = Matrix::Zero(lg.design.rows(), lg.design.cols() + static_cast<Eigen::Index>(k));
        x.design.leftCols(lg.design.cols()) = lg.design;
        x.noise_cov = lg.noise_cov;
        x.prior_mean = Vector::Zero(x.design.cols());
        x.prior_mean.head(lg.prior_mean.size()) = lg.prior_mean;
        x.prior_cov = Matrix::Identity(x.design.cols(), x.design.cols()) * sd * sd;
        x.prior_cov.topLeftCorner(lg.prior_cov.rows(), lg.prior_cov.cols()) = lg.prior_cov;
        a.linear_gaussian = x;
        a.prior_cov = x.prior_cov;
    }
    const auto dk = static_cast<Eigen::Index>(d + k);
    if (base.analytic.fisher) {
        auto bf = base.analytic.fisher;
        a.fisher = [=](Params p) {
            Matrix f = Matrix::Zero(dk, dk);
            f.topLeftCorner(d, d) = bf(p.first(d));
            return f;
        };
        a.shared_fisher = [bf](Params th) { return bf(th); };
    }
    if (base.analytic.observed_info) {
        auto bo = base.analytic.observed_info;
        a.observed_info = [=](const DataSet& y, Params p) {
            Matrix f = Matrix::Zero(dk, dk);
            f.topLeftCorner(d, d) = bo(y, p.first(d));
            return f;
        };
    }
    if (base.analytic.posterior_sampler) {
        auto ps = base.analytic.posterior_sampler;
        a.posterior_sampler = [=](const DataSet& y, std::size_t s, Rng& rng) {
            Matrix b = ps(y, s, rng);
            Matrix out(b.rows(), dk);
            out.leftCols(d) = b;
            for (Eigen::Index i = 0; i < b.rows(); ++i)
                for (std::size_t j = 0; j < k; ++j) out(i, static_cast<Eigen::Index>(d + j)) = rng.normal(0.0, sd);
            return out;
        };
    }
    if (base.analytic.log_evidence) {
        auto ev = base.analytic.log_evidence;
        a.log_evidence = ev;
        a.log_evidence_given_extra = [ev](const DataSet& y, Params) { return ev(y); };
    }
    a.shared_log_lik = [bl](const DataSet& y, Params th) { return bl(y, th); };
    a.shared_sample_data = [bsd](Params th, Rng& rng) { return bsd(th, 0, rng); };
    e.analytic = a;
    pair.expanded = e;
    for (std::size_t i = 0; i < k; ++i) pair.lambda0.push_back(ExtendedReal::finite(0.0));
    return pair;
}

inline Builtin builtin(const std::string& name, const HyperParams& hp = {}) {
    if (name == "normal-location" || name == "prior-scale") {
        HyperReader r(name, hp, {"n", "sigma_p", "noise_sd"});
        int n = r.integer("n", 1, 1);
        ModelSpec m = normal_location_model(name, n, r.positive("sigma_p", 1.0), r.positive("noise_sd", 1.0));
        return m;
    }
    if (name == "flat-location") {
        HyperReader r(name, hp, {"n", "sigma_p"});
        int n = r.integer("n", 1, 1);
        double sp = r.positive("sigma_p", 1.0);
        LinearGaussian lg{Matrix::Zero(n, 1), Matrix::Identity(n, n), Vector::Zero(1), Matrix::Constant(1, 1, sp * sp)};
        return linear_gaussian_model(name, lg, 1, {"theta"});
    }
    if (name == "redundant-location") {
        HyperReader r(name, hp, {"n"});
        int n = r.integer("n", 1, 1);
        LinearGaussian lg{Matrix::Constant(n, 2, 1.0 / std::sqrt(2.0)), Matrix::Identity(n, n), Vector::Zero(2),
                          Matrix::Identity(2, 2)};
        return linear_gaussian_model(name, lg, 2, {"theta1", "theta2"});
    }
    if (name == "split-means") {
        HyperReader r(name, hp, {"n", "expanded"});
        int n = r.integer("n", 1, 1);
        bool expanded = r.in_range("expanded", 0, 0, 1) != 0;
        std::vector<int> labels(2 * n, 0);
        for (int i = n; i < 2 * n; ++i) labels[i] = 1;
        if (!expanded) {
            LinearGaussian lg{Matrix::Ones(2 * n, 1), Matrix::Identity(2 * n, 2 * n), Vector::Zero(1),
                              Matrix::Identity(1, 1)};
            return linear_gaussian_model("split-means-base", lg, 1, {"theta"}, labels);
        }
        Matrix a = Matrix::Zero(2 * n, 2);
        a.block(0, 0, n, 1).setOnes();
        a.block(n, 1, n, 1).setOnes();
        LinearGaussian lg{a, Matrix::Identity(2 * n, 2 * n), Vector::Zero(2), Matrix::Identity(2, 2)};
        return linear_gaussian_model("split-means-expanded", lg, 2, {"theta1", "theta2"}, labels);
    }
    if (name == "normal-gamma") {
        HyperReader r(name, hp, {"n", "r"});
        int n = r.integer("n", 2, 1);
        double ratio = r.positive("r", 1.0 / n);
        return normal_gamma_model(n, ratio * n);
    }
    if (name == "normal-gamma-pair") {
        HyperReader r(name, hp, {"n"});
        int n = r.integer("n", 2, 1);
        ExpansionPair p;
        p.name = name;
        p.base = normal_location_model("normal-location", n, 1.0, 1.0);
        p.expanded = normal_gamma_model(n, 1.0);
        p.lambda0 = {ExtendedReal::finite(0.0)};
        return p;
    }
    if (name == "location-nuisance") {
        HyperReader r(name, hp, {"n", "sigma_theta2", "sigma_lambda2"});
        int n = r.integer("n", 1, 1);
        double st2 = r.positive("sigma_theta2", 1.0), sl2 = r.nonnegative("sigma_lambda2", 3.0);
        ExpansionPair p;
        p.name = name;
        p.base = normal_location_model("normal-location", n, std::sqrt(st2), 1.0);
        Matrix pc = Matrix::Zero(2, 2);
        pc(0, 0) = st2;
        pc(1, 1) = sl2;
        LinearGaussian lg{Matrix::Ones(n, 2), Matrix::Identity(n, n), Vector::Zero(2), pc};
        p.expanded = linear_gaussian_model(name, lg, 1, {"theta", "lambda"});
        p.lambda0 = {ExtendedReal::finite(0.0)};
        return p;
    }
    if (name == "linreg-addpred") {
        HyperReader r(name, hp, {"n", "m", "rho", "sigma_b", "tau_mean", "tau_sd", "design_seed", "z_scale"});
        int n = r.integer("n", 20, 3), m = r.integer("m", 2, 1);
        double rho = r.in_range("rho", 0.6, -0.999, 0.999);
        if (m + 2 >= n) throw DomainError(name + ": need n > m + 2");
        auto des = linreg_design(n, m, rho, r.positive("z_scale", 1.0),
                                 static_cast<std::uint64_t>(r.integer("design_seed", 11, 0)));
        double sb = r.positive("sigma_b", 1.0), tm = r.get("tau_mean", 0.0), ts = r.positive("tau_sd", 0.5);
        ExpansionPair p;
        p.name = name;
        p.base = make_linreg_model(false, n, m, des, sb, tm, ts);
        p.expanded = make_linreg_model(true, n, m, des, sb, tm, ts);
        p.lambda0 = {ExtendedReal::finite(0.0)};
        return p;
    }
    if (name == "poisson-negbin") {
        HyperReader r(name, hp, {"n", "mu_sd", "lambda_mean", "lambda_sd"});
        int n = r.integer("n", 5, 1);
        double ms = r.positive("mu_sd", 1.0);
        ExpansionPair p;
        p.name = name;
        p.base = poisson_model(n, ms);
        p.expanded = negbin_model(n, ms, r.get("lambda_mean", 1.0), r.positive("lambda_sd", 1.0));
        p.lambda0 = {ExtendedReal::plus_infinity()};
        return p;
    }
    if (name == "student-t-outlier") {
        HyperReader r(name, hp, {"df", "scale", "lo", "hi"});
        double lo = r.get("lo", -15.0), hi = r.get("hi", 15.0);
        if (!(hi > lo)) throw DomainError(name + ": need hi > lo");
        return student_t_model(r.positive("df", 10.0), r.positive("scale", 1.0), lo, hi);
    }
    if (name == "grouped-base") return grouped_base_model(grouped_settings(name, hp));
    if (name == "grouped-expanded") return grouped_expanded_model(grouped_settings(name, hp));
    if (name == "grouped") {
        auto g = grouped_settings(name, hp);
        ExpansionPair p;
        p.name = name;
        p.base = grouped_base_model(g);
        p.expanded = grouped_expanded_model(g);
        p.lambda0 = {ExtendedReal::finite(std::log(g.sigma_guess)), ExtendedReal::minus_infinity()};
        return p;
    }
    if (name == "simple-reg-2obs") {
        HyperReader r(name, hp, {"rho", "sigma_b"});
        double rho = r.in_range("rho", 0.5, 0.0, 0.999), sb = r.positive("sigma_b", 10.0);
        // x1 = (0, 1) and x2 a unit vector with x1'x2 = rho.
        Vector x1(2), x2(2);
        x1 << 0.0, 1.0;
        x2 << std::sqrt(1.0 - rho * rho), rho;
        ExpansionPair p;
        p.name = name;
        LinearGaussian b{x1, Matrix::Identity(2, 2), Vector::Zero(1), Matrix::Constant(1, 1, sb * sb)};
        p.base = linear_gaussian_model("simple-reg-1", b, 1, {"beta1"});
        Matrix a(2, 2);
        a << x1, x2;
        LinearGaussian e{a, Matrix::Identity(2, 2), Vector::Zero(2), Matrix::Identity(2, 2) * sb * sb};
        p.expanded = linear_gaussian_model("simple-reg-2", e, 1, {"beta1", "beta2"});
        p.lambda0 = {ExtendedReal::finite(0.0)};
        return p;
    }
    if (name == "independent-extra") {
        HyperReader r(name, hp, {"n", "sigma_p", "sigma_lambda"});
        int n = r.integer("n", 1, 1);
        auto base = normal_location_model("normal-location", n, r.positive("sigma_p", 1.0), 1.0);
        return independent_extra_pair(base, 1, r.positive("sigma_lambda", 1.0));
    }
    throw UsageError("unknown builtin model '" + name + "'");
}

inline ModelSpec builtin_model(const std::string& name, const HyperParams& hp = {}) {
    auto b = builtin(name, hp);
    if (auto* m = std::get_if<ModelSpec>(&b)) return *m;
    throw UsageError("'" + name + "' is an expansion pair, not a single model");
}

inline ExpansionPair builtin_pair(const std::string& name, const HyperParams& hp = {}) {
    auto b = builtin(name, hp);
    if (auto* p = std::get_if<ExpansionPair>(&b)) return *p;
    throw UsageError("'" + name + "' is a single model, not an expansion pair");
}

}  // namespace bmx
