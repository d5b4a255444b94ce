#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "error.hpp"
#include "linalg.hpp"
#include "rng.hpp"

namespace bmx {

using Params = std::span<const double>;

struct ParamLayout {
    std::size_t shared = 0;
    std::size_t extra = 0;
    std::size_t total() const { return shared + extra; }
};

/// Parameter vector with shared coordinates first and extra coordinates after.
class ParamPoint {
public:
    ParamPoint(std::vector<double> values, ParamLayout layout) : values_(std::move(values)), layout_(layout) {
        if (values_.size() != layout_.total())
            throw StructuralError("ParamPoint: length " + std::to_string(values_.size()) + " does not match layout " +
                                  std::to_string(layout_.total()));
        for (double v : values_)
            if (!std::isfinite(v)) throw DomainError("ParamPoint: non-finite entry");
    }
    const std::vector<double>& values() const { return values_; }
    ParamLayout layout() const { return layout_; }
    Params shared() const { return Params(values_).first(layout_.shared); }
    Params extra() const { return Params(values_).subspan(layout_.shared); }
    operator Params() const { return values_; }

private:
    std::vector<double> values_;
    ParamLayout layout_;
};

/// Scalar observations with optional group labels. An empty observation vector is allowed
/// in samplers (the likelihood is then constant); validate() enforces n >= 1.
struct DataSet {
    std::vector<double> values;
    std::vector<int> groups;
    std::string name;
    std::uint64_t seed = 0;

    std::size_t size() const { return values.size(); }
    bool grouped() const { return !groups.empty(); }

    int num_groups() const {
        int l = 0;
        for (int g : groups) l = std::max(l, g + 1);
        return l;
    }

    void validate() const {
        if (values.empty()) throw DomainError("DataSet '" + name + "' has no observations");
        for (double v : values)
            if (!std::isfinite(v)) throw DomainError("DataSet '" + name + "' has a non-finite observation");
        if (!grouped()) return;
        if (groups.size() != values.size()) throw StructuralError("DataSet: group labels and values differ in length");
        std::vector<int> count(static_cast<std::size_t>(num_groups()), 0);
        for (int g : groups) {
            if (g < 0) throw DomainError("DataSet: negative group label");
            ++count[static_cast<std::size_t>(g)];
        }
        for (int c : count)
            if (c == 0) throw DomainError("DataSet: empty group");
    }
};

struct GroupStats {
    std::vector<double> count, mean, ssw;
};

inline GroupStats group_stats(const DataSet& y) {
    int l = y.grouped() ? y.num_groups() : 1;
    GroupStats s{std::vector<double>(l, 0.0), std::vector<double>(l, 0.0), std::vector<double>(l, 0.0)};
    for (std::size_t i = 0; i < y.size(); ++i) {
        int g = y.grouped() ? y.groups[i] : 0;
        s.count[g] += 1.0;
        double d = y.values[i] - s.mean[g];
        s.mean[g] += d / s.count[g];
        s.ssw[g] += d * (y.values[i] - s.mean[g]);
    }
    return s;
}

/// y = design * params + noise, noise ~ N(0, noise_cov), params ~ N(prior_mean, prior_cov).
struct LinearGaussian {
    Matrix design;
    Matrix noise_cov;
    Vector prior_mean;
    Matrix prior_cov;
};

struct GaussianPosterior {
    Vector mean;
    Matrix cov;
};

using PosteriorSampler = std::function<Matrix(const DataSet&, std::size_t, Rng&)>;

/// Closed forms a builtin may supply. Every member is optional.
struct AnalyticOracles {
    std::optional<LinearGaussian> linear_gaussian;
    std::optional<Matrix> prior_cov;
    // Expected Fisher information of the full parameter at the default data size.
    std::function<Matrix(Params)> fisher;
    // Hessian of -log_lik in all parameters.
    std::function<Matrix(const DataSet&, Params)> observed_info;
    PosteriorSampler posterior_sampler;
    std::function<double(const DataSet&)> log_evidence;
    // Likelihood of the shared block with the extra parameters integrated over their conditional prior.
    std::function<double(const DataSet&, Params)> shared_log_lik;
    std::function<DataSet(Params, Rng&)> shared_sample_data;
    std::function<Matrix(Params)> shared_fisher;
    // log p(y | lambda): evidence with the shared block integrated out.
    std::function<double(const DataSet&, Params)> log_evidence_given_extra;
};

struct ModelSpec {
    std::string name;
    std::size_t d_shared = 0;
    std::size_t d_extra = 0;
    std::size_t n_obs = 1;
    std::vector<std::string> param_names;

    std::function<double(Params)> log_prior;
    std::function<double(Params)> log_prior_shared;  // marginal of the shared block
    std::function<double(Params)> log_prior_extra;   // marginal of the extra block
    std::function<double(const DataSet&, Params)> log_lik;
    std::function<std::vector<double>(Rng&)> sample_prior;
    std::function<DataSet(Params, std::size_t, Rng&)> sample_data;

    bool pointwise = true;
    bool log_concave_prior = true;
    bool prior_independent = true;
    AnalyticOracles analytic;

    std::size_t d_total() const { return d_shared + d_extra; }
    ParamLayout layout() const { return {d_shared, d_extra}; }

    double log_joint(const DataSet& y, Params p) const {
        double lp = log_prior(p);
        if (!std::isfinite(lp)) return -std::numeric_limits<double>::infinity();
        return lp + log_lik(y, p);
    }

    DataSet simulate(Params p, Rng& rng) const { return sample_data(p, n_obs, rng); }

    /// log p(theta | lambda).
    double log_prior_shared_given_extra(Params p) const {
        if (d_extra == 0) return log_prior(p);
        if (prior_independent && log_prior_shared) return log_prior_shared(p.first(d_shared));
        if (!log_prior_extra) throw CapabilityError(name + ": marginal prior of the extra block is not available");
        return log_prior(p) - log_prior_extra(p.subspan(d_shared));
    }

    /// log p(lambda | theta).
    double log_prior_extra_given_shared(Params p) const {
        if (d_extra == 0) return 0.0;
        if (prior_independent && log_prior_extra) return log_prior_extra(p.subspan(d_shared));
        if (!log_prior_shared) throw CapabilityError(name + ": marginal prior of the shared block is not available");
        return log_prior(p) - log_prior_shared(p.first(d_shared));
    }

    void check_point(Params p) const {
        if (p.size() != d_total())
            throw StructuralError(name + ": parameter length " + std::to_string(p.size()) + ", expected " +
                                  std::to_string(d_total()));
    }
};

/// A real number or a signed infinity, kept as a tag so densities never see inf.
class ExtendedReal {
public:
    enum class Kind { finite, plus_infinity, minus_infinity };
    static ExtendedReal finite(double v) { return ExtendedReal(Kind::finite, v); }
    static ExtendedReal plus_infinity() { return ExtendedReal(Kind::plus_infinity, 0.0); }
    static ExtendedReal minus_infinity() { return ExtendedReal(Kind::minus_infinity, 0.0); }

    Kind kind() const { return kind_; }
    bool is_finite() const { return kind_ == Kind::finite; }
    double value() const {
        if (!is_finite()) throw DomainError("ExtendedReal: value() on an infinite entry");
        return value_;
    }
    /// Finite stand-in at ladder position t (t itself for +inf, -t for -inf).
    double at(double t) const {
        switch (kind_) {
            case Kind::finite: return value_;
            case Kind::plus_infinity: return t;
            case Kind::minus_infinity: return -t;
        }
        return value_;
    }

private:
    ExtendedReal(Kind k, double v) : kind_(k), value_(v) {}
    Kind kind_;
    double value_;
};

struct ExpansionPair {
    std::string name;
    ModelSpec base;
    ModelSpec expanded;
    std::vector<ExtendedReal> lambda0;

    std::size_t d_shared() const { return base.d_shared; }
    bool limit() const {
        for (const auto& l : lambda0)
            if (!l.is_finite()) return true;
        return false;
    }
    void check_structure() const {
        if (base.d_extra != 0) throw StructuralError(name + ": base model has extra parameters");
        if (expanded.d_shared != base.d_shared)
            throw StructuralError(name + ": shared block sizes differ (" + std::to_string(base.d_shared) + " vs " +
                                  std::to_string(expanded.d_shared) + ")");
        if (lambda0.size() != expanded.d_extra)
            throw StructuralError(name + ": lambda0 has " + std::to_string(lambda0.size()) + " entries, expected " +
                                  std::to_string(expanded.d_extra));
    }
};

struct Probe {
    DataSet y;
    std::vector<double> theta;
};

struct ExpansionValidation {
    std::vector<double> probe_discrepancy;   // max over the ladder (limit case) or the single value
    std::vector<double> ladder;              // empty for finite lambda0
    std::vector<double> ladder_discrepancy;  // max over probes at each ladder value
    double max_discrepancy = 0.0;
    double tol = 0.0;
    bool pass = false;
};

inline const std::vector<double>& limit_ladder() {
    static const std::vector<double> l{1e1, 1e2, 1e3, 1e4};
    return l;
}

namespace detail {
inline double expansion_gap(const ExpansionPair& pair, const Probe& pr, const std::vector<double>& lambda) {
    std::vector<double> full(pr.theta);
    full.insert(full.end(), lambda.begin(), lambda.end());
    double base = pair.base.log_prior(pr.theta) + pair.base.log_lik(pr.y, pr.theta);
    double exp = pair.expanded.log_prior_shared_given_extra(full) + pair.expanded.log_lik(pr.y, full);
    if (std::isinf(base) && std::isinf(exp) && (base < 0) == (exp < 0)) return 0.0;
    return std::abs(base - exp);
}
}  // namespace detail

/// Compares log p(y, theta | lambda0) with the base log p(y, theta) at every probe.
/// For infinite lambda0 the ladder sequence must decrease strictly while positive, never
/// increase, and end within tol.
inline ExpansionValidation validate_expansion(const ExpansionPair& pair, const std::vector<Probe>& probes,
                                              double tol) {
    pair.check_structure();
    ExpansionValidation rep;
    rep.tol = tol;
    for (const auto& pr : probes)
        if (pr.theta.size() != pair.base.d_shared)
            throw StructuralError(pair.name + ": probe has " + std::to_string(pr.theta.size()) + " shared values");
    if (!pair.limit()) {
        std::vector<double> lambda;
        for (const auto& l : pair.lambda0) lambda.push_back(l.value());
        for (const auto& pr : probes) rep.probe_discrepancy.push_back(detail::expansion_gap(pair, pr, lambda));
        for (double d : rep.probe_discrepancy) rep.max_discrepancy = std::max(rep.max_discrepancy, d);
        rep.pass = rep.max_discrepancy <= tol;
        return rep;
    }
    rep.ladder = limit_ladder();
    rep.probe_discrepancy.assign(probes.size(), 0.0);
    for (double t : rep.ladder) {
        std::vector<double> lambda;
        for (const auto& l : pair.lambda0) lambda.push_back(l.at(t));
        double worst = 0.0;
        for (std::size_t i = 0; i < probes.size(); ++i) {
            double g = detail::expansion_gap(pair, probes[i], lambda);
            if (std::isnan(g)) g = std::numeric_limits<double>::infinity();
            rep.probe_discrepancy[i] = std::max(rep.probe_discrepancy[i], g);
            worst = std::max(worst, g);
        }
        rep.ladder_discrepancy.push_back(worst);
    }
    // Once the gap reaches roundoff it stops shrinking; that still counts as convergence.
    constexpr double kRoundoff = 1e-12;
    bool ok = true;
    for (std::size_t i = 1; i < rep.ladder_discrepancy.size(); ++i) {
        double prev = rep.ladder_discrepancy[i - 1], cur = rep.ladder_discrepancy[i];
        if (!(cur < prev || cur <= kRoundoff)) ok = false;
    }
    rep.max_discrepancy = rep.ladder_discrepancy.back();
    rep.pass = ok && rep.max_discrepancy <= tol;
    return rep;
}

/// Five prior draws of theta times five data draws from the base model, plus the origin.
inline std::vector<Probe> default_probes(const ExpansionPair& pair, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<Probe> probes;
    for (int i = 0; i < 5; ++i) {
        auto theta = pair.base.sample_prior(rng);
        for (int j = 0; j < 5; ++j) probes.push_back({pair.base.simulate(theta, rng), theta});
    }
    std::vector<double> origin(pair.base.d_shared, 0.0);
    probes.push_back({pair.base.simulate(origin, rng), origin});
    return probes;
}

}  // namespace bmx
