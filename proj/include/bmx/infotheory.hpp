#pragma once

#include <algorithm>
#ifndef BOOST_ALLOW_DEPRECATED_HEADERS
#define BOOST_ALLOW_DEPRECATED_HEADERS
#endif
#include <boost/geometry.hpp>
#include <boost/geometry/index/rtree.hpp>
#include <boost/math/special_functions/digamma.hpp>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "builtins.hpp"
#include "error.hpp"
#include "gaussian.hpp"
#include "model.hpp"
#include "parallel.hpp"
#include "samplers.hpp"
#include "stats.hpp"

namespace bmx {

enum class InfoMethod { analytic, nested_mc, mc, knn, grid };

inline const char* to_string(InfoMethod m) {
    switch (m) {
        case InfoMethod::analytic: return "analytic";
        case InfoMethod::nested_mc: return "nested-mc";
        case InfoMethod::mc: return "mc";
        case InfoMethod::knn: return "knn";
        case InfoMethod::grid: return "grid";
    }
    return "?";
}

/// An information quantity in nats.
struct InfoEstimate {
    std::string quantity;
    double value = 0.0;
    double std_error = 0.0;
    InfoMethod method = InfoMethod::analytic;
    std::map<std::string, double> config;
    bool degenerate = false;
};

inline InfoEstimate analytic_info(std::string q, double v) {
    InfoEstimate e;
    e.quantity = std::move(q);
    e.value = v;
    return e;
}

inline InfoEstimate gaussian_entropy(const Matrix& cov) {
    if (cov.rows() < 1 || cov.rows() != cov.cols()) throw StructuralError("gaussian_entropy: need a square matrix");
    auto e = sym_eigen(cov);
    const double d = static_cast<double>(cov.rows());
    InfoEstimate out = analytic_info("entropy", 0.0);
    double logdet = 0.0;
    for (Eigen::Index i = 0; i < e.values.size(); ++i) {
        if (e.values(i) < -1e-10 * std::max(1.0, std::abs(e.values(e.values.size() - 1))))
            throw DomainError("gaussian_entropy: covariance is not PSD");
        if (e.values(i) <= 0.0) {
            out.value = -std::numeric_limits<double>::infinity();
            out.degenerate = true;
            return out;
        }
        logdet += std::log(e.values(i));
    }
    out.value = 0.5 * (d * std::log(2.0 * M_PI * M_E) + logdet);
    return out;
}

// ---------------------------------------------------------------------------
// Closed forms for the linear-Gaussian family

struct GaussianInfo {
    InfoEstimate mi;          // I(shared; y)
    InfoEstimate cmi;         // I(all params; y_rep | y)
    InfoEstimate mi_full;     // I(all params; y)
    InfoEstimate cmi_shared;  // I(shared; y_rep | y)
};

namespace detail {
inline double logdet_psd(const Matrix& m) { return log_det_spd(symmetrize(m)); }

/// Covariance of all parameters after conditioning on the block `given`.
inline Matrix condition_out(const Matrix& cov, const std::vector<int>& given) {
    if (given.empty()) return cov;
    auto all = index_range(0, static_cast<int>(cov.rows()));
    Matrix cg = sub_matrix(cov, all, given);
    return symmetrize(cov - cg * psd_pinv(sub_matrix(cov, given, given)) * cg.transpose());
}
}  // namespace detail

/// MI and CMI of a linear-Gaussian model, using y-side determinants so degenerate
/// priors (a zero-variance block) are handled.
inline GaussianInfo gaussian_mi_cmi(const LinearGaussian& lg, std::size_t d_shared) {
    const Matrix& a = lg.design;
    const auto d = static_cast<int>(a.cols());
    auto shared = index_range(0, static_cast<int>(d_shared));
    Matrix sy = a * lg.prior_cov * a.transpose() + lg.noise_cov;
    Matrix k = Eigen::LLT<Matrix>(symmetrize(sy)).solve(a * lg.prior_cov).transpose();
    Matrix post = symmetrize(lg.prior_cov - k * a * lg.prior_cov);
    // The information form avoids cancellation when the prior is much wider than the likelihood.
    Eigen::LLT<Matrix> lp(lg.prior_cov), ln(lg.noise_cov);
    if (lp.info() == Eigen::Success && ln.info() == Eigen::Success) {
        Matrix prec = lp.solve(Matrix::Identity(d, d)) + a.transpose() * ln.solve(a);
        Eigen::LLT<Matrix> lq(symmetrize(prec));
        if (lq.info() == Eigen::Success) post = symmetrize(lq.solve(Matrix::Identity(d, d)));
    }
    const double ld_noise = detail::logdet_psd(lg.noise_cov);
    auto pred = [&](const Matrix& c) { return detail::logdet_psd(a * c * a.transpose() + lg.noise_cov); };

    GaussianInfo g;
    g.mi_full = analytic_info("mi_full", 0.5 * (detail::logdet_psd(sy) - ld_noise));
    g.mi = analytic_info("mi", static_cast<int>(d_shared) == d
                                   ? g.mi_full.value
                                   : 0.5 * (detail::logdet_psd(sy) - pred(detail::condition_out(lg.prior_cov, shared))));
    g.cmi = analytic_info("cmi", 0.5 * (pred(post) - ld_noise));
    g.cmi_shared = analytic_info("cmi_shared", static_cast<int>(d_shared) == d
                                                   ? g.cmi.value
                                                   : 0.5 * (pred(post) - pred(detail::condition_out(post, shared))));
    return g;
}

inline GaussianInfo gaussian_mi_cmi(const ModelSpec& model) {
    if (!model.analytic.linear_gaussian) throw CapabilityError(model.name + " is not in the linear-Gaussian family");
    return gaussian_mi_cmi(*model.analytic.linear_gaussian, model.d_shared);
}

// ---------------------------------------------------------------------------
// Predictive densities and the posterior sampling divergence

/// log of the weighted mixture of likelihoods; -inf when every component vanishes.
inline double ppd_logdensity(const DataSet& y_rep, const PosteriorDraws& draws, const ModelSpec& model) {
    if (draws.size() == 0) throw DomainError("ppd_logdensity: no draws");
    std::vector<double> terms(draws.size());
    for (std::size_t i = 0; i < draws.size(); ++i)
        terms[i] = std::log(draws.weight(i)) + model.log_lik(y_rep, draws.point(i));
    return log_sum_exp(terms);
}

struct PsdOptions {
    std::size_t S_outer = 500;
    std::size_t n_inner = 200;
    std::size_t S_mix = 0;  // mixture components for the ppd; 0 uses every draw
    std::size_t rep_n = 0;  // replicate size; 0 uses the model default
};

inline InfoEstimate estimate_psd(const DataSet& y, const ModelSpec& model, const PosteriorDraws& draws,
                                 const PsdOptions& opt, Rng& rng) {
    (void)y;
    draws.validate();
    if (!model.log_lik) throw CapabilityError(model.name + " has no evaluable likelihood density");
    if (opt.S_outer < 1 || opt.n_inner < 1) throw DomainError("estimate_psd: budgets must be positive");
    Rng base = rng.split(0x5053);
    rng();
    PosteriorDraws mix = draws;
    if (opt.S_mix > 0 && opt.S_mix < draws.size()) {
        Rng r = base.split(1);
        mix = resample(draws, opt.S_mix, r);
    }
    DrawSelector pick(draws);
    std::vector<double> outer(opt.S_outer);
    std::vector<std::size_t> bad(opt.S_outer, 0);
    parallel_for(opt.S_outer, [&](std::size_t s) {
        Rng r = base.split(100 + s);
        Params theta = draws.point(pick(r));
        double acc = 0.0;
        std::size_t used = 0;
        for (std::size_t i = 0; i < opt.n_inner; ++i) {
            DataSet yr = model.sample_data(theta, opt.rep_n, r);
            double lp = model.log_lik(yr, theta);
            double lq = ppd_logdensity(yr, mix, model);
            if (!std::isfinite(lq) || !std::isfinite(lp)) {
                ++bad[s];
                continue;
            }
            acc += lp - lq;
            ++used;
        }
        outer[s] = used ? acc / static_cast<double>(used) : 0.0;
    });
    std::size_t nbad = 0;
    for (auto b : bad) nbad += b;
    if (static_cast<double>(nbad) > 0.01 * static_cast<double>(opt.S_outer * opt.n_inner))
        throw ReliabilityError("estimate_psd: predictive density degenerate on " + std::to_string(nbad) + " draws");
    InfoEstimate e;
    e.quantity = "psd";
    e.method = InfoMethod::nested_mc;
    e.value = mean_of(outer);
    e.std_error = se_of_mean(outer);
    e.config = {{"S_outer", double(opt.S_outer)}, {"n_inner", double(opt.n_inner)},
                {"S_mix", double(opt.S_mix ? std::min(opt.S_mix, draws.size()) : draws.size())}};
    return e;
}

inline InfoEstimate estimate_psd(const DataSet& y, const ModelSpec& model, const PosteriorDraws& draws,
                                 std::size_t S_outer, std::size_t n_inner, Rng& rng) {
    PsdOptions o;
    o.S_outer = S_outer;
    o.n_inner = n_inner;
    return estimate_psd(y, model, draws, o, rng);
}

struct CmiOptions {
    std::size_t n_y = 200;
    std::size_t S_outer = 40;
    std::size_t n_inner = 25;
    std::size_t S_post = 1000;
    std::size_t S_mix = 0;
    std::size_t data_n = 0;  // size of y; 0 uses the model default
    std::size_t rep_n = 0;   // size of y_rep
};

/// Prior-predictive average of the posterior sampling divergence.
inline InfoEstimate estimate_cmi(const ModelSpec& model, const CmiOptions& opt, Rng& rng) {
    if (opt.n_y < 2) throw DomainError("estimate_cmi: need at least two datasets");
    Rng base = rng.split(0x434d49);
    rng();
    std::vector<double> psd(opt.n_y);
    parallel_for(opt.n_y, [&](std::size_t i) {
        Rng r = base.split(i);
        auto theta = model.sample_prior(r);
        DataSet y = model.sample_data(theta, opt.data_n, r);
        PosteriorDraws draws = posterior_draws(model, y, opt.S_post, r());
        PsdOptions po;
        po.S_outer = opt.S_outer;
        po.n_inner = opt.n_inner;
        po.S_mix = opt.S_mix;
        po.rep_n = opt.rep_n;
        psd[i] = estimate_psd(y, model, draws, po, r).value;
    });
    InfoEstimate e;
    e.quantity = "cmi";
    e.method = InfoMethod::nested_mc;
    e.value = mean_of(psd);
    e.std_error = se_of_mean(psd);
    e.config = {{"n_y", double(opt.n_y)},       {"S_outer", double(opt.S_outer)}, {"n_inner", double(opt.n_inner)},
                {"S_post", double(opt.S_post)}, {"rep_n", double(opt.rep_n)},     {"data_n", double(opt.data_n)}};
    return e;
}

inline InfoEstimate estimate_cmi(const ModelSpec& model, std::size_t n_y, std::size_t S_outer, std::size_t n_inner,
                                 Rng& rng) {
    CmiOptions o;
    o.n_y = n_y;
    o.S_outer = S_outer;
    o.n_inner = n_inner;
    return estimate_cmi(model, o, rng);
}

// ---------------------------------------------------------------------------
// Nearest-neighbour entropy

namespace detail {
template <int D>
std::vector<double> knn_distances_rtree(const RowMatrix& x, int k) {
    namespace bg = boost::geometry;
    namespace bgi = boost::geometry::index;
    using Point = bg::model::point<double, D, bg::cs::cartesian>;
    using Value = std::pair<Point, std::size_t>;
    std::vector<Value> pts;
    pts.reserve(static_cast<std::size_t>(x.rows()));
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        Point p;
        if constexpr (D >= 1) bg::set<0>(p, x(i, 0));
        if constexpr (D >= 2) bg::set<1>(p, x(i, 1));
        if constexpr (D >= 3) bg::set<2>(p, x(i, 2));
        if constexpr (D >= 4) bg::set<3>(p, x(i, 3));
        pts.emplace_back(p, static_cast<std::size_t>(i));
    }
    bgi::rtree<Value, bgi::rstar<16>> tree(pts.begin(), pts.end());
    std::vector<double> eps(pts.size());
    std::vector<Value> found;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        found.clear();
        tree.query(bgi::nearest(pts[i].first, static_cast<unsigned>(k + 1)), std::back_inserter(found));
        double best = 0.0;
        std::vector<double> dist;
        for (auto& f : found)
            if (f.second != i) dist.push_back(bg::distance(pts[i].first, f.first));
        std::sort(dist.begin(), dist.end());
        best = dist.size() >= static_cast<std::size_t>(k) ? dist[static_cast<std::size_t>(k) - 1] : dist.back();
        eps[i] = best;
    }
    return eps;
}

inline std::vector<double> knn_distances_1d(const RowMatrix& x, int k) {
    const auto n = static_cast<std::size_t>(x.rows());
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return x(a, 0) < x(b, 0); });
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = x(order[i], 0);
    std::vector<double> eps(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t lo = i, hi = i;
        double d = 0.0;
        for (int step = 0; step < k; ++step) {
            double dl = lo > 0 ? v[i] - v[lo - 1] : std::numeric_limits<double>::infinity();
            double dh = hi + 1 < n ? v[hi + 1] - v[i] : std::numeric_limits<double>::infinity();
            if (dl <= dh) d = dl, --lo;
            else d = dh, ++hi;
        }
        eps[order[i]] = d;
    }
    return eps;
}

inline std::vector<double> knn_distances_brute(const RowMatrix& x, int k) {
    const auto n = x.rows();
    std::vector<double> eps(static_cast<std::size_t>(n));
    std::vector<double> dist;
    for (Eigen::Index i = 0; i < n; ++i) {
        dist.clear();
        for (Eigen::Index j = 0; j < n; ++j)
            if (j != i) dist.push_back((x.row(i) - x.row(j)).norm());
        std::nth_element(dist.begin(), dist.begin() + (k - 1), dist.end());
        eps[static_cast<std::size_t>(i)] = dist[static_cast<std::size_t>(k - 1)];
    }
    return eps;
}
}  // namespace detail

/// Kozachenko-Leonenko estimate h = psi(N) - psi(k) + log V_d + (d/N) sum log eps_i.
inline InfoEstimate knn_entropy(const PosteriorDraws& draws, int k = 4) {
    if (draws.weighted()) throw DomainError("knn_entropy: resample weighted draws first");
    const auto n = draws.size();
    const auto d = static_cast<int>(draws.dim());
    if (n < 50) throw DomainError("knn_entropy: need at least 50 draws");
    if (k < 1 || k > 20) throw DomainError("knn_entropy: k must be in [1, 20]");
    std::vector<double> eps;
    switch (d) {
        case 1: eps = detail::knn_distances_1d(draws.draws, k); break;
        case 2: eps = detail::knn_distances_rtree<2>(draws.draws, k); break;
        case 3: eps = detail::knn_distances_rtree<3>(draws.draws, k); break;
        case 4: eps = detail::knn_distances_rtree<4>(draws.draws, k); break;
        default: eps = detail::knn_distances_brute(draws.draws, k);
    }
    std::size_t zero = 0;
    for (double e : eps) zero += (e <= 0.0);
    if (static_cast<double>(zero) > 0.01 * static_cast<double>(n))
        throw DomainError("knn_entropy: more than 1% duplicate points, jitter required");
    std::vector<double> terms;
    terms.reserve(n);
    for (double e : eps)
        if (e > 0) terms.push_back(d * std::log(e));
    const double log_vd = 0.5 * d * std::log(M_PI) - std::lgamma(0.5 * d + 1.0);
    InfoEstimate out;
    out.quantity = "entropy";
    out.method = InfoMethod::knn;
    out.value = boost::math::digamma(static_cast<double>(terms.size())) - boost::math::digamma(double(k)) + log_vd +
                mean_of(terms);
    out.std_error = se_of_mean(terms);
    out.config = {{"k", double(k)}, {"N", double(n)}};
    return out;
}

/// Entropy of a one-dimensional weighted grid, treating each weight as a cell of equal width.
inline InfoEstimate grid_entropy(const PosteriorDraws& grid) {
    if (grid.dim() != 1 || !grid.weighted() || grid.size() < 2)
        throw CapabilityError("grid_entropy: needs a weighted one-dimensional grid");
    double width = (grid.draws(grid.size() - 1, 0) - grid.draws(0, 0)) / static_cast<double>(grid.size() - 1);
    double h = 0.0;
    for (double w : grid.weights)
        if (w > 0) h -= w * std::log(w / width);
    InfoEstimate e;
    e.quantity = "entropy";
    e.method = InfoMethod::grid;
    e.value = h;
    return e;
}

// ---------------------------------------------------------------------------
// Weak identification

struct WeakIdVerdict {
    double gap = 0.0;
    double std_error = 0.0;
    bool weak = false;
    InfoMethod method = InfoMethod::analytic;
    double prior_entropy = 0.0;
    double posterior_entropy = 0.0;
};

inline PosteriorDraws select_columns(const PosteriorDraws& d, const std::vector<int>& cols) {
    PosteriorDraws out = d;
    out.draws = RowMatrix(d.draws.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j) out.draws.col(static_cast<Eigen::Index>(j)) = d.draws.col(cols[j]);
    return out;
}

/// gap = h(prior marginal of theta_I) - h(posterior marginal of theta_I); weak when gap < epsilon.
inline WeakIdVerdict weak_id_verdict(const ModelSpec& model, const DataSet& y, const std::vector<int>& subset,
                                     double epsilon, const PosteriorDraws& draws, std::uint64_t seed = 1) {
    if (subset.empty()) throw DomainError("weak_id_verdict: empty subset");
    for (int i : subset)
        if (i < 0 || static_cast<std::size_t>(i) >= model.d_shared)
            throw DomainError("weak_id_verdict: subset must index shared parameters");
    WeakIdVerdict v;
    if (model.analytic.linear_gaussian && draws.sampler == SamplerKind::exact &&
        static_cast<Eigen::Index>(y.size()) == model.analytic.linear_gaussian->design.rows()) {
        auto post = exact_gaussian_posterior(model, y);
        v.prior_entropy = gaussian_entropy(sub_matrix(*model.analytic.prior_cov, subset, subset)).value;
        v.posterior_entropy = gaussian_entropy(sub_matrix(post.cov, subset, subset)).value;
        v.method = InfoMethod::analytic;
    } else {
        Rng rng(seed);
        const std::size_t N = 20000;
        PosteriorDraws prior;
        prior.draws = RowMatrix(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(subset.size()));
        for (std::size_t i = 0; i < N; ++i) {
            auto p = model.sample_prior(rng);
            for (std::size_t j = 0; j < subset.size(); ++j)
                prior.draws(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = p[subset[j]];
        }
        auto hp = knn_entropy(prior);
        InfoEstimate hq;
        if (draws.sampler == SamplerKind::grid && draws.dim() == 1) {
            hq = grid_entropy(draws);
        } else {
            PosteriorDraws cols = select_columns(draws, subset);
            if (cols.weighted()) cols = resample(cols, 100000, rng);
            hq = knn_entropy(cols);
        }
        v.prior_entropy = hp.value;
        v.posterior_entropy = hq.value;
        v.std_error = std::hypot(hp.std_error, hq.std_error);
        v.method = hq.method == InfoMethod::grid ? InfoMethod::grid : InfoMethod::knn;
    }
    v.gap = v.prior_entropy - v.posterior_entropy;
    v.weak = v.gap < epsilon;
    return v;
}

// ---------------------------------------------------------------------------
// MI decomposition for an expansion

struct MiDecomposition {
    InfoEstimate mi_base, mi_exp, delta_exp, delta_post;
    double identity_residual = 0.0;  // mi_exp - (mi_base + delta_exp + delta_post)
    double identity_se = 0.0;
    bool identity_holds = false;
    bool delta_post_nonpositive = false;
};

namespace detail {
/// I(a; b) for a Gaussian vector; b may be degenerate, the a block must not be.
inline double gaussian_mutual(const Matrix& cov, const std::vector<int>& a, const std::vector<int>& b) {
    Matrix cond = condition_out(cov, b);
    return 0.5 * (logdet_psd(sub_matrix(cov, a, a)) - logdet_psd(sub_matrix(cond, a, a)));
}

inline InfoEstimate mc_info(std::string q, const std::vector<double>& v) {
    InfoEstimate e;
    e.quantity = std::move(q);
    e.method = InfoMethod::mc;
    e.value = mean_of(v);
    e.std_error = se_of_mean(v);
    e.config = {{"n", double(v.size())}};
    return e;
}
}  // namespace detail

inline MiDecomposition mi_decomposition(const ExpansionPair& pair, std::size_t n_mc, Rng& rng) {
    pair.check_structure();
    const ModelSpec& b = pair.base;
    const ModelSpec& e = pair.expanded;
    const auto ds = static_cast<int>(e.d_shared), d = static_cast<int>(e.d_total());
    auto th = index_range(0, ds), la = index_range(ds, d);
    MiDecomposition out;
    if (b.analytic.linear_gaussian && e.analytic.linear_gaussian && !pair.limit()) {
        const auto& lg = *e.analytic.linear_gaussian;
        out.mi_exp = analytic_info("mi_exp", gaussian_mi_cmi(lg, e.d_shared).mi.value);
        out.mi_base = analytic_info("mi_base", gaussian_mi_cmi(*b.analytic.linear_gaussian, b.d_shared).mi_full.value);
        // I(theta, y | lambda): the Gaussian conditional structure does not depend on the value of lambda.
        Matrix cond_prior = detail::condition_out(lg.prior_cov, la);
        auto post = gaussian_posterior(lg, Vector::Zero(lg.design.rows()));
        Matrix cond_post = detail::condition_out(post.cov, la);
        double i_given_lambda =
            0.5 * (detail::logdet_psd(sub_matrix(cond_prior, th, th)) - detail::logdet_psd(sub_matrix(cond_post, th, th)));
        out.delta_exp = analytic_info("delta_exp", i_given_lambda - out.mi_base.value);
        double prior_dep = detail::gaussian_mutual(lg.prior_cov, th, la);
        double post_dep = detail::gaussian_mutual(post.cov, th, la);
        out.delta_post = analytic_info("delta_post", prior_dep - post_dep);
    } else {
        if (!b.analytic.log_evidence || !e.analytic.log_evidence || !e.analytic.shared_log_lik ||
            !e.analytic.log_evidence_given_extra)
            throw CapabilityError(pair.name +
                                  ": MI decomposition needs evidences, the shared likelihood and the evidence given the "
                                  "extra parameters");
        if (!e.prior_independent)
            throw CapabilityError(pair.name + ": Monte Carlo MI decomposition assumes independent priors");
        Rng base = rng.split(0x4d4944);
        rng();
        std::vector<double> v_exp(n_mc), v_base(n_mc), v_cond(n_mc), v_post(n_mc);
        parallel_for(n_mc, [&](std::size_t i) {
            Rng r = base.split(i);
            {
                auto p = e.sample_prior(r);
                DataSet y = e.simulate(p, r);
                v_exp[i] = e.analytic.shared_log_lik(y, Params(p).first(e.d_shared)) - e.analytic.log_evidence(y);
            }
            {
                auto p = b.sample_prior(r);
                DataSet y = b.simulate(p, r);
                v_base[i] = b.log_lik(y, p) - b.analytic.log_evidence(y);
            }
            {
                auto p = e.sample_prior(r);
                DataSet y = e.simulate(p, r);
                v_cond[i] = e.log_lik(y, p) - e.analytic.log_evidence_given_extra(y, Params(p).subspan(e.d_shared));
            }
            {
                auto p = e.sample_prior(r);
                DataSet y = e.simulate(p, r);
                Params pp(p);
                v_post[i] = -(e.log_lik(y, p) + e.analytic.log_evidence(y) -
                              e.analytic.shared_log_lik(y, pp.first(e.d_shared)) -
                              e.analytic.log_evidence_given_extra(y, pp.subspan(e.d_shared)));
            }
        });
        out.mi_exp = detail::mc_info("mi_exp", v_exp);
        out.mi_base = detail::mc_info("mi_base", v_base);
        auto cond = detail::mc_info("i_given_lambda", v_cond);
        out.delta_exp = cond;
        out.delta_exp.quantity = "delta_exp";
        out.delta_exp.value = cond.value - out.mi_base.value;
        out.delta_exp.std_error = std::hypot(cond.std_error, out.mi_base.std_error);
        out.delta_post = detail::mc_info("delta_post", v_post);
    }
    out.identity_residual =
        out.mi_exp.value - (out.mi_base.value + out.delta_exp.value + out.delta_post.value);
    out.identity_se = std::sqrt(out.mi_exp.std_error * out.mi_exp.std_error +
                                out.mi_base.std_error * out.mi_base.std_error +
                                out.delta_exp.std_error * out.delta_exp.std_error +
                                out.delta_post.std_error * out.delta_post.std_error);
    out.identity_holds = std::abs(out.identity_residual) <= 3.0 * out.identity_se + 1e-10;
    out.delta_post_nonpositive = out.delta_post.value <= 3.0 * out.delta_post.std_error + 1e-12;
    return out;
}

}  // namespace bmx
