#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "builtins.hpp"
#include "error.hpp"
#include "parallel.hpp"
#include "samplers.hpp"
#include "stats.hpp"

namespace bmx {

enum class Scheme { same_subpops, new_subpops };
enum class Source { posterior, prior };

inline const char* to_string(Scheme s) { return s == Scheme::same_subpops ? "same-subpops" : "new-subpops"; }
inline const char* to_string(Source s) { return s == Source::posterior ? "posterior" : "prior"; }

struct BootConfig {
    std::size_t R = 500;
    int M_new = 8;         // new points per existing group
    int L_new = 20;        // new groups
    int M = 2;             // points per new group
    std::size_t S = 2000;  // draws per refit
    std::size_t S_ref = 20000;
    std::uint64_t seed = 1;
};

struct SchemeResult {
    Scheme scheme = Scheme::same_subpops;
    Source source = Source::posterior;
    std::vector<double> rho;
    double rho_bar = 0.0;
    double rho_se = 0.0;
    double rho_sd = 0.0;
    std::size_t failed = 0;
    std::size_t R = 0;
    int added = 0;  // M_new or L_new
    std::size_t S = 0;
    std::uint64_t seed = 0;
    std::string dataset;
};

/// Cost in units of one observation from an existing group; a new group costs four per observation.
inline int scheme_cost(Scheme s, const BootConfig& c, int L) {
    return s == Scheme::same_subpops ? c.M_new * L : 4 * c.L_new * c.M;
}

/// Reference posterior of (mu, log sigma, log tau) and the posterior sd of mu.
struct ReferenceFit {
    PosteriorDraws draws;
    double sigma_obs = 0.0;
};

inline std::vector<double> column_of(const PosteriorDraws& d, std::size_t j) {
    std::vector<double> c(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) c[i] = d.draws(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    return c;
}

inline PosteriorDraws grouped_fit(const ModelSpec& model, const DataSet& y, std::size_t S, std::uint64_t seed) {
    return rwm_sample(model, y, S, std::max<std::size_t>(1000, S / 2), seed);
}

inline ReferenceFit reference_fit(const ModelSpec& model, const DataSet& y, const BootConfig& c) {
    if (!y.grouped()) throw DomainError("bootstrap: the dataset needs group labels");
    y.validate();
    ReferenceFit f;
    f.draws = grouped_fit(model, y, c.S_ref, mix64(c.seed ^ 0x524546));
    f.sigma_obs = sd_of(column_of(f.draws, 0));
    if (!(f.sigma_obs > 0)) throw NumericalError("bootstrap: reference posterior sd of mu is zero");
    return f;
}

namespace detail {
/// One replication: hyperparameters from the posterior (or prior), new data, refit.
inline double boot_replication(const ModelSpec& model, const DataSet& y, const ReferenceFit& ref, Scheme scheme,
                               Source source, const BootConfig& c, Rng& r) {
    double mu, sigma, tau;
    if (source == Source::posterior) {
        std::size_t k = r.index(ref.draws.size());
        Params p = ref.draws.point(k);
        mu = p[0], sigma = std::exp(p[1]), tau = std::exp(p[2]);
    } else {
        auto p = model.sample_prior(r);
        mu = p[0], sigma = std::exp(p[1]), tau = std::exp(p[2]);
    }
    DataSet rep = y;
    rep.name = y.name + "-rep";
    const int L = y.num_groups();
    if (scheme == Scheme::same_subpops) {
        std::vector<double> theta;
        if (source == Source::posterior) {
            theta = draw_group_means(y, mu, sigma, tau, r);
        } else {
            for (int l = 0; l < L; ++l) theta.push_back(r.normal(mu, tau));
        }
        for (int l = 0; l < L; ++l)
            for (int m = 0; m < c.M_new; ++m) {
                rep.values.push_back(r.normal(theta[static_cast<std::size_t>(l)], sigma));
                rep.groups.push_back(l);
            }
    } else {
        for (int l = 0; l < c.L_new; ++l) {
            double th = r.normal(mu, tau);
            for (int m = 0; m < c.M; ++m) {
                rep.values.push_back(r.normal(th, sigma));
                rep.groups.push_back(L + l);
            }
        }
    }
    auto fit = grouped_fit(model, rep, c.S, r());
    if (!fit.warnings.empty()) throw NumericalError("refit: " + fit.warnings.front());
    return sd_of(column_of(fit, 0)) / ref.sigma_obs;
}
}  // namespace detail

inline SchemeResult run_scheme(const ModelSpec& model, const DataSet& y, const ReferenceFit& ref, Scheme scheme,
                               Source source, const BootConfig& c) {
    if (c.R < 2) throw DomainError("bootstrap: need at least two replications");
    if (c.M_new < 0 || c.L_new < 0 || c.M < 1) throw DomainError("bootstrap: bad design sizes");
    SchemeResult res;
    res.scheme = scheme;
    res.source = source;
    res.R = c.R;
    res.added = scheme == Scheme::same_subpops ? c.M_new : c.L_new;
    res.S = c.S;
    res.dataset = y.name;
    std::uint64_t stream = (scheme == Scheme::same_subpops ? 1u : 2u) + (source == Source::posterior ? 0u : 10u);
    Rng base = Rng(c.seed).split(stream);
    res.seed = base.key();
    std::vector<double> rho(c.R, std::numeric_limits<double>::quiet_NaN());
    parallel_for(c.R, [&](std::size_t i) {
        Rng r = base.split(i);
        try {
            rho[i] = detail::boot_replication(model, y, ref, scheme, source, c, r);
        } catch (const NumericalError&) {
        }
    });
    for (double v : rho) {
        if (std::isfinite(v) && v > 0) res.rho.push_back(v);
        else ++res.failed;
    }
    if (static_cast<double>(res.failed) > 0.05 * static_cast<double>(c.R))
        throw ReliabilityError("bootstrap: " + std::to_string(res.failed) + " of " + std::to_string(c.R) +
                               " refits failed");
    res.rho_bar = mean_of(res.rho);
    res.rho_sd = sd_of(res.rho);
    res.rho_se = se_of_mean(res.rho);
    return res;
}

inline SchemeResult boot_same_subpops(const ModelSpec& model, const DataSet& y, const BootConfig& c) {
    return run_scheme(model, y, reference_fit(model, y, c), Scheme::same_subpops, Source::posterior, c);
}

inline SchemeResult boot_new_subpops(const ModelSpec& model, const DataSet& y, const BootConfig& c) {
    return run_scheme(model, y, reference_fit(model, y, c), Scheme::new_subpops, Source::posterior, c);
}

inline SchemeResult boot_prior_variant(const ModelSpec& model, const DataSet& y, Scheme scheme, const BootConfig& c) {
    return run_scheme(model, y, reference_fit(model, y, c), scheme, Source::prior, c);
}

struct HistogramBin {
    double left = 0.0, right = 0.0;
    std::size_t count = 0;
};

inline std::vector<HistogramBin> histogram(const std::vector<double>& v, double lo, double hi, int bins) {
    if (bins < 1 || !(hi > lo)) throw DomainError("histogram: bad bins");
    std::vector<HistogramBin> h(static_cast<std::size_t>(bins));
    const double w = (hi - lo) / bins;
    for (int b = 0; b < bins; ++b) h[static_cast<std::size_t>(b)] = {lo + b * w, lo + (b + 1) * w, 0};
    for (double x : v) {
        int b = static_cast<int>(std::floor((x - lo) / w));
        h[static_cast<std::size_t>(std::clamp(b, 0, bins - 1))].count++;
    }
    return h;
}

struct SchemeComparison {
    std::string dataset;
    double variance_ratio = 0.0;
    double sigma_obs = 0.0;
    std::vector<SchemeResult> cells;  // same/posterior, new/posterior, same/prior, new/prior
    std::vector<std::vector<HistogramBin>> histograms;

    const SchemeResult& cell(Scheme s, Source src) const {
        for (const auto& c : cells)
            if (c.scheme == s && c.source == src) return c;
        throw StructuralError("comparison cell missing");
    }
};

inline SchemeComparison compare_schemes(const ModelSpec& model, const DataSet& y, const BootConfig& c, int bins = 20) {
    SchemeComparison out;
    out.dataset = y.name;
    out.variance_ratio = variance_ratio(y);
    auto ref = reference_fit(model, y, c);
    out.sigma_obs = ref.sigma_obs;
    for (Source src : {Source::posterior, Source::prior})
        for (Scheme s : {Scheme::same_subpops, Scheme::new_subpops}) out.cells.push_back(run_scheme(model, y, ref, s, src, c));
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& cell : out.cells)
        for (double v : cell.rho) lo = std::min(lo, v), hi = std::max(hi, v);
    if (!(hi > lo)) hi = lo + 1.0;
    for (const auto& cell : out.cells) out.histograms.push_back(histogram(cell.rho, lo, hi, bins));
    return out;
}

/// Within-group sds for the three simulated datasets (2 tau, tau, tau / 2 with tau = 1).
inline const std::vector<double>& grouped_dataset_sigmas() {
    static const std::vector<double> s{2.0, 1.0, 0.5};
    return s;
}

inline std::vector<DataSet> grouped_datasets(std::uint64_t seed, int M = 2, int L = 20) {
    std::vector<DataSet> out;
    const auto& sig = grouped_dataset_sigmas();
    for (std::size_t i = 0; i < sig.size(); ++i)
        out.push_back(simulate_grouped_data(M, L, sig[i], 2.0, 1.0, mix64(seed + i)));
    return out;
}

}  // namespace bmx
