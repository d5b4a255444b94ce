#pragma once

#include <boost/math/distributions/students_t.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "bootstrap.hpp"
#include "builtins.hpp"
#include "checks.hpp"
#include "fisher.hpp"
#include "infotheory.hpp"
#include "io.hpp"
#include "samplers.hpp"

namespace bmx {

/// One numeric comparison: `estimate` against `reference` with the stated tolerance.
struct CheckLine {
    std::string name;
    double reference = 0.0;
    double estimate = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    std::string note;
};

struct CriterionResult {
    int id = 0;
    std::string group;
    std::string title;
    std::vector<CheckLine> lines;
    double seconds = 0.0;

    bool pass() const {
        for (const auto& l : lines)
            if (!l.pass) return false;
        return !lines.empty();
    }
    void add(std::string name, double ref, double est, double tol, bool ok, std::string note = {}) {
        lines.push_back({std::move(name), ref, est, tol, ok, std::move(note)});
    }
    /// |est - ref| <= tol
    void near(std::string name, double ref, double est, double tol, std::string note = {}) {
        add(std::move(name), ref, est, tol, std::abs(est - ref) <= tol, std::move(note));
    }
};

namespace regression {

inline std::string label(const char* fmt_str, double a) {
    char buf[96];
    std::snprintf(buf, sizeof buf, fmt_str, a);
    return buf;
}

inline std::string label(const char* fmt_str, double a, double b) {
    char buf[96];
    std::snprintf(buf, sizeof buf, fmt_str, a, b);
    return buf;
}

// 1. Closed-form MI/CMI values.
inline CriterionResult analytic_cmi() {
    CriterionResult c{1, "analytic", "closed-form CMI/MI regressions", {}, 0.0};
    const double tol = 1e-12;
    const double half_log_15 = 0.5 * std::log(1.5);
    c.near("normal-location cmi", half_log_15, gaussian_mi_cmi(builtin_model("normal-location")).cmi.value, tol);
    c.near("redundant-location cmi", half_log_15, gaussian_mi_cmi(builtin_model("redundant-location")).cmi.value, tol);
    for (int n : {1, 5, 30}) {
        const double nn = n;
        auto b = gaussian_mi_cmi(builtin_model("split-means", {{"n", nn}, {"expanded", 0}}));
        auto e = gaussian_mi_cmi(builtin_model("split-means", {{"n", nn}, {"expanded", 1}}));
        c.near(label("split-means base cmi n=%g", nn), 0.5 * std::log((4 * nn + 1) / (2 * nn + 1)), b.cmi.value, tol);
        c.near(label("split-means expanded cmi n=%g", nn), std::log((2 * nn + 1) / (nn + 1)), e.cmi.value, tol);
    }
    for (double sp : {0.001, 1.0, 1000.0}) {
        double v = gaussian_mi_cmi(builtin_model("prior-scale", {{"sigma_p", sp}})).cmi.value;
        double s2 = sp * sp;
        c.near(label("prior-scale cmi sigma_p=%g", sp), 0.5 * std::log((2 * s2 + 1) / (s2 + 1)), v, tol);
        if (sp == 0.001) c.near("prior-scale small-sigma limit 0", 0.0, v, 1e-6);
        if (sp == 1000.0) c.near("prior-scale large-sigma limit log(2)/2", 0.5 * std::log(2.0), v, 1e-6);
    }
    for (auto [st, sl] : std::vector<std::pair<double, double>>{{1, 0}, {1, 3}, {1, 1000}}) {
        auto p = builtin_pair("location-nuisance", {{"sigma_theta2", st}, {"sigma_lambda2", sl}});
        auto g = gaussian_mi_cmi(p.expanded);
        c.near(label("location-nuisance mi (%g,%g)", st, sl), 0.5 * std::log(1 + st / (1 + sl)), g.mi.value, tol);
        c.near(label("location-nuisance cmi (%g,%g)", st, sl),
               0.5 * std::log((1 + 2 * (st + sl)) / (1 + st + sl)), g.cmi.value, tol);
    }
    return c;
}

// 2. Nested Monte Carlo CMI against the closed form.
inline CriterionResult nested_cmi(std::uint64_t seed) {
    CriterionResult c{2, "cmi", "nested-MC CMI vs closed form (normal-location)", {}, 0.0};
    Rng rng(seed);
    CmiOptions o;
    o.n_y = 400;
    o.S_outer = 50;
    o.n_inner = 20;
    o.S_post = 1000;
    auto e = estimate_cmi(builtin_model("normal-location"), o, rng);
    const double ref = 0.5 * std::log(1.5);
    c.add("estimate_cmi", ref, e.value, 0.01, std::abs(e.value - ref) <= 0.01 && 3 * e.std_error <= 0.01,
          label("s.e. %.4f", e.std_error));
    return c;
}

// 3. Split-means percent change curve.
inline CriterionResult split_means_curve(std::uint64_t seed) {
    CriterionResult c{3, "cmi", "split-means CMI percent change", {}, 0.0};
    CmiOptions o;
    o.n_y = 50;
    o.S_outer = 100;
    o.n_inner = 20;
    o.S_post = 400;
    for (int n : {1, 2, 5, 10, 30}) {
        const double nn = n;
        Rng r1 = Rng(seed).split(2 * n), r2 = Rng(seed).split(2 * n + 1);
        auto b = estimate_cmi(builtin_model("split-means", {{"n", nn}, {"expanded", 0}}), o, r1);
        auto e = estimate_cmi(builtin_model("split-means", {{"n", nn}, {"expanded", 1}}), o, r2);
        double change = (e.value - b.value) / b.value;
        double exact = (std::log((2 * nn + 1) / (nn + 1)) - 0.5 * std::log((4 * nn + 1) / (2 * nn + 1))) /
                       (0.5 * std::log((4 * nn + 1) / (2 * nn + 1)));
        c.add(label("percent change positive n=%g", nn), exact, change, 0.0, change > 0.0);
        if (n == 30) c.near("percent change near 1 at n=30", 1.0, change, 0.1);
    }
    return c;
}

// 4. Student-t conditional checks.
inline CriterionResult student_t_check(std::uint64_t seed) {
    CriterionResult c{4, "ppc", "student-t conditional/marginal ppp-values", {}, 0.0};
    auto m = builtin_model("student-t-outlier");
    DataSet y = make_data({-10.0, 10.0}, {}, "student-t-y");
    auto g = grid_posterior(m, y, {{-15.0, 15.0}}, 2001);
    Rng rng(seed);
    const std::size_t n_inner = 500;
    auto r1 = conditional_pppv(m, y, g, statistic::negated_first(), n_inner, rng);
    auto r2 = conditional_pppv(m, y, g, statistic::coordinate(1), n_inner, rng);
    // Quadrature oracle: exact t tail probabilities on the same grid.
    boost::math::students_t dist(10.0);
    double o1 = 0.0, o2 = 0.0, mass_oracle = 0.0, se1 = 0.0;
    for (std::size_t s = 0; s < g.size(); ++s) {
        double th = g.draws(static_cast<Eigen::Index>(s), 0);
        double p1 = boost::math::cdf(dist, -10.0 - th);
        double p2 = boost::math::cdf(boost::math::complement(dist, 10.0 - th));
        o1 += g.weight(s) * p1;
        o2 += g.weight(s) * p2;
        if (p1 < 0.01) mass_oracle += g.weight(s);
        se1 += g.weight(s) * g.weight(s) * p1 * (1 - p1) / n_inner;
    }
    se1 = std::sqrt(se1);
    c.near("marginal p, T1 = -y1", 0.165, r1.marginal_p, 0.02);
    c.near("marginal p, T2 = y2", 0.165, r2.marginal_p, 0.02);
    double mass = mass_below(r1, g, 0.01);
    c.add("posterior mass with conditional p < 0.01", 0.60, mass, 0.0, mass >= 0.60,
          label("quadrature oracle mass %.4f", mass_oracle));
    c.near("quadrature oracle marginal p (T1)", 0.165, o1, 0.02);
    c.near("MC marginal vs oracle (T1)", o1, r1.marginal_p, std::max(3 * se1, 1e-3));
    c.near("MC marginal vs oracle (T2)", o2, r2.marginal_p, std::max(3 * se1, 1e-3));
    return c;
}

// 5. Fisher trace inequalities.
inline double linreg_required_drop(const HyperParams& hp = {}) {
    auto get = [&](const char* k, double d) { return hp.count(k) ? hp.at(k) : d; };
    const int n = static_cast<int>(get("n", 20)), m = static_cast<int>(get("m", 2));
    auto des = linreg_design(n, m, get("rho", 0.6), get("z_scale", 1.0), static_cast<std::uint64_t>(get("design_seed", 11)));
    const double tm = get("tau_mean", 0.0), ts = get("tau_sd", 0.5);
    Vector zc = des.z.array() - des.z.mean();
    const double var_z = zc.squaredNorm() / n;
    double s = 0.0;
    for (int j = 0; j < m; ++j) {
        Vector xc = des.x.col(j).array() - des.x.col(j).mean();
        double cov = xc.dot(zc) / n;
        s += (cov / var_z) * (cov / var_z);
    }
    return double(n) * n * std::exp(-tm + 0.5 * ts * ts) * s;
}

inline const std::vector<std::string>& builtin_pair_names() {
    static const std::vector<std::string> v{"location-nuisance", "linreg-addpred",    "poisson-negbin",   "grouped",
                                            "simple-reg-2obs",   "independent-extra", "normal-gamma-pair"};
    return v;
}

inline CriterionResult fisher_traces(std::uint64_t seed) {
    CriterionResult c{5, "fisher", "Fisher-trace inequalities", {}, 0.0};
    FisherBudget b;
    b.n_prior = 400;
    b.n_mc = 40;
    {
        auto p = builtin_pair("poisson-negbin");
        Rng r1 = Rng(seed).split(1), r2 = Rng(seed).split(2);
        auto fb = prior_expected_fisher(p.base, FisherBlock::full, b, r1);
        auto fe = prior_expected_fisher(p.expanded, FisherBlock::shared_given_extra, b, r2);
        double drop = fb.trace() - fe.trace(), se = std::hypot(fb.trace_se(), fe.trace_se());
        c.add("poisson-negbin trace drop > 3 s.e.", 3 * se, drop, 0.0, drop > 3 * se,
              label("base %.4f expanded %.4f", fb.trace(), fe.trace()));
    }
    {
        auto p = builtin_pair("linreg-addpred");
        Rng r1 = Rng(seed).split(3), r2 = Rng(seed).split(4);
        auto fb = prior_expected_fisher(p.base, FisherBlock::full, b, r1);
        auto fe = prior_expected_fisher(p.expanded, FisherBlock::shared, b, r2);
        double drop = fb.trace() - fe.trace(), se = std::hypot(fb.trace_se(), fe.trace_se());
        double term = linreg_required_drop();
        c.add("linreg-addpred trace drop >= closed-form term - 3 s.e.", term, drop, 3 * se, drop >= term - 3 * se,
              label("drop s.e. %.4f", se));
    }
    for (const auto& name : builtin_pair_names()) {
        Rng r = Rng(seed).split(fnv1a(name));
        FisherBudget tb = b;
        tb.n_prior = 300;
        auto t = trace_bound_delta(builtin_pair(name), tb, r);
        c.add(name + ": trace lhs <= rhs", t.rhs, t.lhs, 3 * std::hypot(t.lhs_se, t.rhs_se), t.holds);
    }
    return c;
}

// 6. Bound sandwiches.
inline CriterionResult bound_sandwich(std::uint64_t seed) {
    CriterionResult c{6, "bounds", "information bound sandwiches", {}, 0.0};
    FisherBudget b;
    b.n_prior = 20;
    struct Case {
        std::string label;
        ModelSpec model;
        FisherBlock block;
        double mi;
    };
    std::vector<Case> cases;
    auto full_case = [&](const std::string& lab, ModelSpec m) {
        double mi = gaussian_mi_cmi(m).mi_full.value;
        cases.push_back({lab, std::move(m), FisherBlock::full, mi});
    };
    full_case("normal-location", builtin_model("normal-location"));
    for (double sp : {0.001, 1.0, 1000.0}) full_case(label("prior-scale sigma_p=%g", sp), builtin_model("prior-scale", {{"sigma_p", sp}}));
    full_case("redundant-location", builtin_model("redundant-location"));
    full_case("flat-location", builtin_model("flat-location"));
    for (int e : {0, 1}) full_case(e ? "split-means expanded n=5" : "split-means base n=5",
                                   builtin_model("split-means", {{"n", 5}, {"expanded", double(e)}}));
    {
        auto p = builtin_pair("simple-reg-2obs");
        full_case("simple-reg base", p.base);
        full_case("simple-reg expanded", p.expanded);
        auto ln = builtin_pair("location-nuisance");
        double mi = gaussian_mi_cmi(ln.expanded).mi.value;
        cases.push_back({"location-nuisance shared block", ln.expanded, FisherBlock::shared, mi});
    }
    for (auto& k : cases) {
        Rng r1 = Rng(seed).split(fnv1a(k.label)), r2 = r1.split(1);
        auto full = mi_upper_bound(k.model, BoundVariant::full, k.block, b, r1);
        auto weak = mi_upper_bound(k.model, BoundVariant::weak, k.block, b, r2);
        bool ok = k.mi <= full.value + 1e-12 && full.value <= weak.value + 3 * weak.std_error + 1e-12;
        c.add(k.label + ": mi <= bound <= weak bound", full.value, k.mi, weak.value - full.value, ok,
              label("weak %.6f", weak.value));
    }
    // Unit-prior Gaussians: trace term equals sum iota/(1+iota).
    for (auto [lab, m] : std::vector<std::pair<std::string, ModelSpec>>{
             {"normal-location", builtin_model("normal-location")},
             {"redundant-location", builtin_model("redundant-location")},
             {"split-means expanded n=5", builtin_model("split-means", {{"n", 5}, {"expanded", 1}})}}) {
        Rng r = Rng(seed).split(fnv1a(lab) + 7);
        FisherBudget tb;
        tb.n_y = 5;
        auto t = cmi_trace_term(m, tb, r);
        auto ev = sym_eigen(m.analytic.fisher(std::vector<double>(m.d_total(), 0.0))).values;
        std::vector<double> iota(ev.data(), ev.data() + ev.size());
        for (auto& v : iota) v = std::max(0.0, v);
        c.near(lab + ": trace term = sum iota/(1+iota)", cmi_lower_bound_analytic(iota, 1), t.value, 1e-6);
    }
    // Large-n regime: the trace term approaches the dimension.
    for (auto [lab, m, theta] : std::vector<std::tuple<std::string, ModelSpec, std::vector<double>>>{
             {"normal-location n=1000", builtin_model("normal-location", {{"n", 1000}}), {0.5}},
             {"split-means expanded n=1000", builtin_model("split-means", {{"n", 1000}, {"expanded", 1}}), {0.5, -0.3}}}) {
        Rng r = Rng(seed).split(fnv1a(lab) + 11);
        FisherBudget tb;
        tb.n_y = 10;
        auto t = cmi_trace_term(m, tb, r, theta);
        c.near(lab + ": trace term ~ d", double(t.d), t.value, 0.1 * double(t.d));
    }
    return c;
}

// 7. Tradeoff ordering.
inline CriterionResult tradeoff_ordering(std::uint64_t seed) {
    CriterionResult c{7, "tradeoff", "identifiability/falsifiability tradeoff", {}, 0.0};
    FisherBudget b;
    b.n_prior = 100;
    std::vector<double> mi, cmi;
    for (double rho : {0.0, 0.25, 0.5, 0.75, 0.9}) {
        Rng r = Rng(seed).split(static_cast<std::uint64_t>(rho * 100));
        auto t = tradeoff_report(builtin_pair("simple-reg-2obs", {{"rho", rho}}), b, r);
        mi.push_back(t.mi_bound_exp);
        cmi.push_back(t.cmi_term_exp);
    }
    double rc = spearman(mi, cmi);
    std::string seq = "mi";
    for (double v : mi) seq += " " + fmt(v);
    seq += " | cmi";
    for (double v : cmi) seq += " " + fmt(v);
    c.add("simple-reg rank correlation (mi bound vs cmi term)", -1.0, rc, 0.0, rc == -1.0, seq);
    Rng r = Rng(seed).split(999);
    FisherBudget pb;
    pb.n_prior = 300;
    auto t = tradeoff_report(builtin_pair("poisson-negbin"), pb, r);
    c.add("poisson-negbin totally diluting", 1.0, t.dilution.classification == Dilution::totally_diluting ? 1.0 : 0.0,
          0.0, t.dilution.classification == Dilution::totally_diluting,
          label("smallest eigenvalue %.4f", t.dilution.eigenvalues(0)));
    c.add("poisson-negbin psi1(sum iota_cond) <= psi1(sum iota)", t.mi_bound_base, t.mi_bound_cond, 0.0,
          t.diluting_inequality);
    return c;
}

// 9. Bootstrap directional checks.
inline CriterionResult bootstrap_directions(std::uint64_t seed, std::size_t R = 100) {
    CriterionResult c{9, "bootstrap", "bootstrap designs at reduced scale", {}, 0.0};
    BootConfig cfg;
    cfg.R = R;
    cfg.seed = seed;
    auto model = builtin_model("grouped-expanded");
    auto data = grouped_datasets(seed);
    const int L = data[0].num_groups();
    c.add("equal cost 4 L_new M = M_new L", scheme_cost(Scheme::same_subpops, cfg, L),
          scheme_cost(Scheme::new_subpops, cfg, L), 0.0,
          scheme_cost(Scheme::same_subpops, cfg, L) == scheme_cost(Scheme::new_subpops, cfg, L));
    bool any_differ = false;
    std::string diffs;
    for (std::size_t i = 0; i < data.size(); ++i) {
        auto cmp = compare_schemes(model, data[i], cfg);
        for (Scheme s : {Scheme::same_subpops, Scheme::new_subpops}) {
            const auto& post = cmp.cell(s, Source::posterior);
            const auto& prior = cmp.cell(s, Source::prior);
            c.add(data[i].name + " " + to_string(s) + " posterior rho_bar < 1.05", 1.05, post.rho_bar, 0.0,
                  post.rho_bar < 1.05);
            double z = std::abs(post.rho_bar - prior.rho_bar) / std::hypot(post.rho_se, prior.rho_se);
            any_differ = any_differ || z > 3.0;
            diffs += " " + fmt(z);
        }
        if (i == 0) {
            double a = cmp.cell(Scheme::same_subpops, Source::posterior).rho_sd;
            double bnew = cmp.cell(Scheme::new_subpops, Source::posterior).rho_sd;
            c.add(data[i].name + " sd(rho_same) > sd(rho_new)", bnew, a, 0.0, a > bnew,
                  "dataset with the largest within-group sd");
        }
    }
    c.add("posterior vs prior rho_bar differ beyond 3 s.e. on some dataset", 3.0, any_differ ? 1.0 : 0.0, 0.0,
          any_differ, "z-scores" + diffs);
    return c;
}

}  // namespace regression

using RegressionFn = std::function<CriterionResult(std::uint64_t)>;

struct RegressionEntry {
    int id;
    std::string group;
    RegressionFn run;
};

/// Reference-value regression checks shared by the CLI and the acceptance binary.
inline std::vector<RegressionEntry> regression_suite() {
    using namespace regression;
    return {{1, "analytic", [](std::uint64_t) { return analytic_cmi(); }},
            {2, "cmi", nested_cmi},
            {3, "cmi", split_means_curve},
            {4, "ppc", student_t_check},
            {5, "fisher", fisher_traces},
            {6, "bounds", bound_sandwich},
            {7, "tradeoff", tradeoff_ordering},
            {9, "bootstrap", [](std::uint64_t s) { return bootstrap_directions(s); }}};
}

inline CriterionResult run_timed(const RegressionEntry& e, std::uint64_t seed) {
    auto t0 = std::chrono::steady_clock::now();
    auto r = e.run(seed);
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

}  // namespace bmx
