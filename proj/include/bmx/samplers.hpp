#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "builtins.hpp"
#include "error.hpp"
#include "gaussian.hpp"
#include "model.hpp"
#include "rng.hpp"
#include "stats.hpp"

namespace bmx {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class SamplerKind { exact, grid, rwm };

inline const char* to_string(SamplerKind k) {
    switch (k) {
        case SamplerKind::exact: return "exact";
        case SamplerKind::grid: return "grid";
        case SamplerKind::rwm: return "rwm";
    }
    return "?";
}

struct PosteriorDraws {
    RowMatrix draws;              // S x d
    std::vector<double> weights;  // empty means equal weights
    std::uint64_t seed = 0;
    SamplerKind sampler = SamplerKind::exact;
    double acceptance = std::numeric_limits<double>::quiet_NaN();
    std::size_t warmup = 0;
    std::vector<std::string> warnings;

    std::size_t size() const { return static_cast<std::size_t>(draws.rows()); }
    std::size_t dim() const { return static_cast<std::size_t>(draws.cols()); }
    bool weighted() const { return !weights.empty(); }
    double weight(std::size_t i) const { return weighted() ? weights[i] : 1.0 / static_cast<double>(size()); }
    Params point(std::size_t i) const {
        return Params(draws.data() + static_cast<Eigen::Index>(i) * draws.cols(), dim());
    }

    void validate() const {
        if (size() == 0) throw DomainError("PosteriorDraws: no draws");
        if (!draws.allFinite()) throw NumericalError("PosteriorDraws: non-finite draw");
        if (weighted()) {
            if (weights.size() != size()) throw StructuralError("PosteriorDraws: weight count mismatch");
            double s = 0.0;
            for (double w : weights) {
                if (w < 0) throw DomainError("PosteriorDraws: negative weight");
                s += w;
            }
            if (std::abs(s - 1.0) > 1e-12) throw NumericalError("PosteriorDraws: weights do not sum to one");
        }
    }
};

inline PosteriorDraws draws_from_matrix(const Matrix& m, SamplerKind kind, std::uint64_t seed) {
    PosteriorDraws d;
    d.draws = m;
    d.sampler = kind;
    d.seed = seed;
    return d;
}

inline PosteriorDraws single_draw(std::vector<double> point) {
    PosteriorDraws d;
    d.draws = RowMatrix(1, static_cast<Eigen::Index>(point.size()));
    for (std::size_t j = 0; j < point.size(); ++j) d.draws(0, static_cast<Eigen::Index>(j)) = point[j];
    return d;
}

/// Picks draw indices according to the weights by inverting the cumulative sum.
class DrawSelector {
public:
    explicit DrawSelector(const PosteriorDraws& d) : n_(d.size()) {
        if (d.weighted()) {
            cum_.resize(n_);
            double s = 0.0;
            for (std::size_t i = 0; i < n_; ++i) cum_[i] = (s += d.weights[i]);
        }
    }
    std::size_t operator()(Rng& rng) const {
        if (cum_.empty()) return rng.index(n_);
        double u = rng.uniform() * cum_.back();
        auto it = std::upper_bound(cum_.begin(), cum_.end(), u);
        return std::min<std::size_t>(static_cast<std::size_t>(it - cum_.begin()), n_ - 1);
    }

private:
    std::size_t n_;
    std::vector<double> cum_;
};

inline PosteriorDraws resample(const PosteriorDraws& d, std::size_t count, Rng& rng) {
    DrawSelector pick(d);
    PosteriorDraws out;
    out.draws = RowMatrix(static_cast<Eigen::Index>(count), d.draws.cols());
    for (std::size_t i = 0; i < count; ++i) out.draws.row(static_cast<Eigen::Index>(i)) = d.draws.row(pick(rng));
    out.sampler = d.sampler;
    out.seed = d.seed;
    return out;
}

inline Vector weighted_mean(const PosteriorDraws& d) {
    Vector m = Vector::Zero(d.draws.cols());
    for (std::size_t i = 0; i < d.size(); ++i) m += d.weight(i) * d.draws.row(static_cast<Eigen::Index>(i)).transpose();
    return m;
}

inline Matrix weighted_cov(const PosteriorDraws& d) {
    Vector m = weighted_mean(d);
    Matrix c = Matrix::Zero(d.draws.cols(), d.draws.cols());
    for (std::size_t i = 0; i < d.size(); ++i) {
        Vector x = d.draws.row(static_cast<Eigen::Index>(i)).transpose() - m;
        c += d.weight(i) * x * x.transpose();
    }
    if (!d.weighted() && d.size() > 1) c *= static_cast<double>(d.size()) / static_cast<double>(d.size() - 1);
    return symmetrize(c);
}

// ---------------------------------------------------------------------------

inline GaussianPosterior exact_gaussian_posterior(const ModelSpec& model, const DataSet& y) {
    if (!model.analytic.linear_gaussian)
        throw CapabilityError(model.name + " has no conjugate linear-Gaussian oracle");
    auto g = gaussian_posterior(*model.analytic.linear_gaussian, as_vector(y));
    auto e = sym_eigen(g.cov);
    if (e.values(0) < -1e-10) throw NumericalError("exact_gaussian_posterior: covariance is not PSD");
    if (e.values(0) < 0) g.cov = clamp_psd(g.cov);
    return g;
}

inline PosteriorDraws exact_posterior_draws(const ModelSpec& model, const DataSet& y, std::size_t S,
                                            std::uint64_t seed) {
    Rng rng(seed);
    if (model.analytic.posterior_sampler)
        return draws_from_matrix(model.analytic.posterior_sampler(y, S, rng), SamplerKind::exact, seed);
    if (model.analytic.linear_gaussian)
        return draws_from_matrix(gaussian_draws(exact_gaussian_posterior(model, y), S, rng), SamplerKind::exact, seed);
    throw CapabilityError(model.name + " has no exact posterior sampler");
}

struct GridBounds {
    double lo, hi;
};

/// Weighted draws on a tensor grid, normalized by log-sum-exp.
inline PosteriorDraws grid_posterior(const ModelSpec& model, const DataSet& y, const std::vector<GridBounds>& bounds,
                                     int resolution) {
    const std::size_t d = model.d_total();
    if (d > 2) throw CapabilityError("grid_posterior supports at most two parameters; " + model.name + " has " +
                                     std::to_string(d));
    if (bounds.size() != d) throw StructuralError("grid_posterior: one interval per parameter is required");
    if (resolution < 2) throw DomainError("grid_posterior: resolution must be at least 2");
    for (auto b : bounds)
        if (!(std::isfinite(b.lo) && std::isfinite(b.hi) && b.hi > b.lo)) throw DomainError("grid_posterior: bad bounds");
    std::size_t total = 1;
    for (std::size_t j = 0; j < d; ++j) total *= static_cast<std::size_t>(resolution);
    PosteriorDraws out;
    out.sampler = SamplerKind::grid;
    out.draws = RowMatrix(static_cast<Eigen::Index>(total), static_cast<Eigen::Index>(d));
    std::vector<double> logw(total);
    std::vector<double> p(d);
    for (std::size_t i = 0; i < total; ++i) {
        std::size_t rem = i;
        for (std::size_t j = d; j-- > 0;) {
            std::size_t k = rem % static_cast<std::size_t>(resolution);
            rem /= static_cast<std::size_t>(resolution);
            p[j] = bounds[j].lo + (bounds[j].hi - bounds[j].lo) * static_cast<double>(k) / (resolution - 1);
            out.draws(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = p[j];
        }
        logw[i] = model.log_joint(y, p);
    }
    double lse = log_sum_exp(logw);
    if (!std::isfinite(lse)) throw NumericalError("grid_posterior: every grid point has zero density");
    out.weights.resize(total);
    double s = 0.0;
    for (std::size_t i = 0; i < total; ++i) s += (out.weights[i] = std::exp(logw[i] - lse));
    for (auto& w : out.weights) w /= s;
    return out;
}

struct RwmOptions {
    std::size_t S = 6000;
    std::size_t warmup = 2000;
    std::uint64_t seed = 0;
    std::vector<double> init;  // empty: best of a few prior draws
};

/// Adaptive random-walk Metropolis. During warmup a global log-scale follows a
/// Robbins-Monro recursion towards acceptance 0.234 and the diagonal shape is refreshed
/// from the warmup chain; after warmup the proposal is frozen.
inline PosteriorDraws rwm_sample(const ModelSpec& model, const DataSet& y, const RwmOptions& opt) {
    if (opt.S < 100 || opt.warmup < 100) throw DomainError("rwm_sample: S and warmup must both be at least 100");
    const std::size_t d = model.d_total();
    Rng rng(opt.seed);
    auto target = [&](const std::vector<double>& p) { return model.log_joint(y, p); };

    std::vector<double> x;
    double lx = -std::numeric_limits<double>::infinity();
    std::vector<std::vector<double>> prior_draws;
    for (int i = 0; i < 200; ++i) prior_draws.push_back(model.sample_prior(rng));
    if (!opt.init.empty()) {
        model.check_point(opt.init);
        x = opt.init;
        lx = target(x);
    } else {
        for (int i = 0; i < 20; ++i) {
            double l = target(prior_draws[static_cast<std::size_t>(i)]);
            if (l > lx || x.empty()) x = prior_draws[static_cast<std::size_t>(i)], lx = l;
        }
    }
    if (!std::isfinite(lx)) throw NumericalError("rwm_sample: no starting point with finite density");

    std::vector<double> shape(d);
    for (std::size_t j = 0; j < d; ++j) {
        std::vector<double> col;
        for (auto& p : prior_draws) col.push_back(p[j]);
        shape[j] = std::max(sd_of(col), 1e-8);
    }
    double log_scale = std::log(2.38 / std::sqrt(static_cast<double>(d)));

    PosteriorDraws out;
    out.sampler = SamplerKind::rwm;
    out.seed = opt.seed;
    out.warmup = opt.warmup;
    out.draws = RowMatrix(static_cast<Eigen::Index>(opt.S), static_cast<Eigen::Index>(d));
    std::vector<std::vector<double>> history;
    history.reserve(opt.warmup);
    std::vector<double> prop(d);
    std::size_t accepted = 0;
    for (std::size_t t = 0; t < opt.warmup + opt.S; ++t) {
        const double scale = std::exp(log_scale);
        for (std::size_t j = 0; j < d; ++j) prop[j] = x[j] + scale * shape[j] * rng.normal();
        double lp = target(prop);
        double log_alpha = lp - lx;
        bool accept = std::isfinite(lp) && (log_alpha >= 0 || std::log(rng.uniform()) < log_alpha);
        if (accept) x = prop, lx = lp;
        if (t < opt.warmup) {
            double a = std::isfinite(lp) ? std::min(1.0, std::exp(std::min(0.0, log_alpha))) : 0.0;
            log_scale += (a - 0.234) / std::pow(static_cast<double>(t) + 1.0, 0.6);
            history.push_back(x);
            if (t >= 200 && t % 100 == 0) {
                std::size_t from = history.size() / 2;
                for (std::size_t j = 0; j < d; ++j) {
                    std::vector<double> col;
                    for (std::size_t k = from; k < history.size(); ++k) col.push_back(history[k][j]);
                    double s = sd_of(col);
                    if (s > 1e-12) shape[j] = s;
                }
            }
        } else {
            accepted += accept;
            for (std::size_t j = 0; j < d; ++j)
                out.draws(static_cast<Eigen::Index>(t - opt.warmup), static_cast<Eigen::Index>(j)) = x[j];
        }
    }
    out.acceptance = static_cast<double>(accepted) / static_cast<double>(opt.S);
    if (out.acceptance < 0.01 || out.acceptance > 0.99)
        out.warnings.push_back("adaptation failure: post-warmup acceptance " + std::to_string(out.acceptance));
    return out;
}

inline PosteriorDraws rwm_sample(const ModelSpec& model, const DataSet& y, std::size_t S, std::size_t warmup,
                                 std::uint64_t seed) {
    RwmOptions o;
    o.S = S;
    o.warmup = warmup;
    o.seed = seed;
    return rwm_sample(model, y, o);
}

/// Exact sampler when the model has one, otherwise random-walk Metropolis.
inline PosteriorDraws posterior_draws(const ModelSpec& model, const DataSet& y, std::size_t S, std::uint64_t seed) {
    if (model.analytic.posterior_sampler || model.analytic.linear_gaussian)
        return exact_posterior_draws(model, y, S, seed);
    return rwm_sample(model, y, S, std::max<std::size_t>(1000, S / 2), seed);
}

inline std::vector<DataSet> sample_ppd(const ModelSpec& model, const PosteriorDraws& draws, std::size_t n_rep,
                                       Rng& rng, std::size_t n = 0) {
    if (draws.size() == 0) throw DomainError("sample_ppd: no draws");
    DrawSelector pick(draws);
    std::vector<DataSet> out;
    out.reserve(n_rep);
    for (std::size_t r = 0; r < n_rep; ++r) out.push_back(model.sample_data(draws.point(pick(rng)), n, rng));
    return out;
}

}  // namespace bmx
