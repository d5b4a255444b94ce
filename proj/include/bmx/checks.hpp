#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "error.hpp"
#include "model.hpp"
#include "parallel.hpp"
#include "samplers.hpp"
#include "stats.hpp"

namespace bmx {

enum class Tail { right, left, two };

inline const char* to_string(Tail t) {
    switch (t) {
        case Tail::right: return "right";
        case Tail::left: return "left";
        case Tail::two: return "two";
    }
    return "?";
}

struct TestStatistic {
    std::string name;
    std::function<double(const DataSet&)> eval;
    Tail tail = Tail::right;
};

namespace statistic {

inline TestStatistic negated_first() {
    return {"neg-first", [](const DataSet& y) {
                if (y.size() < 1) throw DomainError("neg-first needs one observation");
                return -y.values[0];
            }};
}

/// k is zero-based.
inline TestStatistic coordinate(std::size_t k) {
    return {"coord" + std::to_string(k + 1), [k](const DataSet& y) {
                if (y.size() <= k) throw DomainError("coordinate statistic: dataset too short");
                return y.values[k];
            }};
}

inline TestStatistic mean() {
    return {"mean", [](const DataSet& y) { return mean_of(y.values); }};
}

/// Sample standard deviation of the last k observations.
inline TestStatistic window_sd(std::size_t k) {
    if (k < 2) throw DomainError("window_sd needs a window of at least 2");
    return {"window-sd" + std::to_string(k), [k](const DataSet& y) {
                if (y.size() < k) throw DomainError("window_sd: dataset shorter than the window");
                return sd_of(std::span<const double>(y.values).last(k));
            }};
}

/// Standard deviation of the group means.
inline TestStatistic group_mean_sd() {
    return {"group-mean-sd", [](const DataSet& y) {
                auto st = group_stats(y);
                if (st.mean.size() < 2) return 0.0;
                return sd_of(st.mean);
            }};
}

inline TestStatistic constant(double c = 0.0) {
    return {"constant", [c](const DataSet&) { return c; }};
}

inline TestStatistic by_name(const std::string& name) {
    if (name == "neg-first") return negated_first();
    if (name == "mean") return mean();
    if (name == "group-mean-sd") return group_mean_sd();
    if (name == "constant") return constant();
    if (name.rfind("coord", 0) == 0 && name.size() > 5) {
        int k = std::stoi(name.substr(5));
        if (k < 1) throw UsageError("coordinate statistics are numbered from 1");
        return coordinate(static_cast<std::size_t>(k - 1));
    }
    if (name.rfind("window-sd", 0) == 0 && name.size() > 9) return window_sd(std::stoul(name.substr(9)));
    throw UsageError("unknown statistic '" + name +
                     "' (known: neg-first, mean, group-mean-sd, constant, coordK, window-sdK)");
}

}  // namespace statistic

struct CheckResult {
    std::string stat_name;
    Tail tail = Tail::right;
    double t_obs = 0.0;
    double marginal_p = 0.0;
    std::vector<double> conditional_p;
    std::size_t n_inner = 0;
    std::uint64_t seed = 0;       // stream key used for the replicates
    std::uint64_t draws_seed = 0;
    std::size_t dropped = 0;
    std::vector<std::string> warnings;
};

/// p_T(theta_s) for every draw: the share of replicates y_rep ~ p(.|theta_s) with T(y_rep) >= T(y)
/// (ties count), mirrored for the left tail; the marginal p is their weighted average.
inline CheckResult conditional_pppv(const ModelSpec& model, const DataSet& y, const PosteriorDraws& draws,
                                    const TestStatistic& T, std::size_t n_inner, Rng& rng) {
    draws.validate();
    if (draws.size() == 0) throw DomainError("conditional_pppv: no draws");
    if (n_inner < 100) throw DomainError("conditional_pppv: n_inner must be at least 100");
    CheckResult res;
    res.stat_name = T.name;
    res.tail = T.tail;
    res.n_inner = n_inner;
    res.draws_seed = draws.seed;
    res.t_obs = T.eval(y);
    if (!std::isfinite(res.t_obs)) throw DomainError("conditional_pppv: statistic is not finite on the observed data");
    Rng base = rng.split(0x505056);
    res.seed = base.key();
    rng();
    const std::size_t S = draws.size();
    res.conditional_p.assign(S, 0.0);
    std::vector<std::size_t> dropped(S, 0);
    parallel_for(S, [&](std::size_t s) {
        Rng r = base.split(s);
        Params theta = draws.point(s);
        std::size_t ge = 0, le = 0, used = 0;
        for (std::size_t i = 0; i < n_inner; ++i) {
            double t = T.eval(model.sample_data(theta, y.size(), r));
            if (!std::isfinite(t)) {
                ++dropped[s];
                continue;
            }
            ++used;
            ge += t >= res.t_obs;
            le += t <= res.t_obs;
        }
        if (used == 0) return;
        double right = double(ge) / double(used), left = double(le) / double(used);
        switch (T.tail) {
            case Tail::right: res.conditional_p[s] = right; break;
            case Tail::left: res.conditional_p[s] = left; break;
            case Tail::two: res.conditional_p[s] = std::min(1.0, 2.0 * std::min(left, right)); break;
        }
    });
    for (auto d : dropped) res.dropped += d;
    if (res.dropped > 0)
        res.warnings.push_back(std::to_string(res.dropped) + " replicates dropped for a non-finite statistic");
    if (static_cast<double>(res.dropped) > 0.01 * static_cast<double>(S * n_inner))
        throw ReliabilityError("conditional_pppv: more than 1% of replicates gave a non-finite statistic");
    double m = 0.0;
    for (std::size_t s = 0; s < S; ++s) m += draws.weight(s) * res.conditional_p[s];
    res.marginal_p = std::clamp(m, 0.0, 1.0);
    return res;
}

inline double marginal_pppv(const ModelSpec& model, const DataSet& y, const PosteriorDraws& draws,
                            const TestStatistic& T, std::size_t n_inner, Rng& rng) {
    return conditional_pppv(model, y, draws, T, n_inner, rng).marginal_p;
}

struct Projection {
    std::string name;
    std::function<double(Params)> eval;
};

inline Projection coordinate_projection(const ModelSpec& model, std::size_t k) {
    if (k >= model.d_total()) throw UsageError("projection index out of range for " + model.name);
    std::string name = k < model.param_names.size() ? model.param_names[k] : "p" + std::to_string(k + 1);
    return {name, [k](Params p) { return p[k]; }};
}

struct ScatterPoint {
    std::size_t draw_index = 0;
    double projection = 0.0;
    double conditional_p = 0.0;
    double weight = 0.0;
};

inline std::vector<ScatterPoint> check_scatter(const CheckResult& result, const PosteriorDraws& draws,
                                               const Projection& proj) {
    if (result.conditional_p.size() != draws.size())
        throw StructuralError("check_scatter: result and draws are not aligned");
    std::vector<ScatterPoint> out(draws.size());
    for (std::size_t s = 0; s < draws.size(); ++s)
        out[s] = {s, proj.eval(draws.point(s)), result.conditional_p[s], draws.weight(s)};
    return out;
}

/// Posterior mass of draws whose conditional p lies below `level`.
inline double mass_below(const CheckResult& result, const PosteriorDraws& draws, double level) {
    double m = 0.0;
    for (std::size_t s = 0; s < draws.size(); ++s)
        if (result.conditional_p[s] < level) m += draws.weight(s);
    return m;
}

/// Rank correlation between projection and conditional p on an unweighted scatter.
inline double scatter_rank_correlation(const std::vector<ScatterPoint>& pts) {
    std::vector<double> a, b;
    for (const auto& p : pts) a.push_back(p.projection), b.push_back(p.conditional_p);
    return spearman(a, b);
}

}  // namespace bmx
