#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "bmx/bmx.hpp"

namespace bmx::props {

struct PropertyResult {
    std::string name;
    std::size_t cases = 0;
    std::size_t failures = 0;
    double worst = 0.0;  // largest violation seen, in the property's own units
    std::string detail;
    double seconds = 0.0;

    bool pass() const { return cases >= 1000 && failures == 0; }
    void record(bool ok, double violation = 0.0) {
        ++cases;
        if (!ok) ++failures;
        worst = std::max(worst, violation);
    }
};

inline Matrix random_spd(int d, Rng& r, double ridge = 0.1) {
    Matrix a(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) a(i, j) = r.normal();
    return a * a.transpose() + ridge * Matrix::Identity(d, d);
}

inline Matrix random_matrix(int rows, int cols, Rng& r) {
    Matrix a(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) a(i, j) = r.normal();
    return a;
}

inline int uniform_int(Rng& r, int lo, int hi) { return lo + static_cast<int>(r.index(static_cast<std::size_t>(hi - lo + 1))); }

inline double log_uniform(Rng& r, double lo, double hi) { return std::exp(std::log(lo) + r.uniform() * std::log(hi / lo)); }

// KL(N(m0, S0) || N(m1, S1)) = -h(p) - E_p log q.
inline double gaussian_kl(const Vector& m0, const Matrix& s0, const Vector& m1, const Matrix& s1) {
    const double d = static_cast<double>(m0.size());
    Matrix inv1 = spd_inverse(s1);
    Vector diff = m1 - m0;
    double cross = 0.5 * ((inv1 * s0).trace() + diff.dot(inv1 * diff) + d * kLog2Pi + log_det_spd(s1));
    return cross - gaussian_entropy(s0).value;
}

inline PropertyResult kl_nonnegative(std::uint64_t seed) {
    PropertyResult res{"KL >= 0"};
    Rng root(seed);
    for (std::size_t c = 0; c < 1000; ++c) {
        Rng r = root.split(c);
        int d = uniform_int(r, 1, 4);
        Vector m0 = to_vector(std::vector<double>(d, 0.0)), m1 = m0;
        for (int i = 0; i < d; ++i) m0(i) = r.normal(), m1(i) = r.normal();
        double kl = gaussian_kl(m0, random_spd(d, r), m1, random_spd(d, r));
        res.record(kl >= -1e-10, std::max(0.0, -kl));
    }
    // Monte Carlo divergences: the posterior sampling divergence on random normal-location data.
    auto model = builtin_model("normal-location");
    for (std::size_t c = 0; c < 20; ++c) {
        Rng r = root.split(5000 + c);
        DataSet y = make_data({r.normal(0.0, 3.0)});
        auto draws = posterior_draws(model, y, 500, r());
        PsdOptions o;
        o.S_outer = 100;
        o.n_inner = 50;
        auto e = estimate_psd(y, model, draws, o, r);
        res.record(e.value >= -3.0 * e.std_error, std::max(0.0, -e.value - 3.0 * e.std_error));
    }
    res.detail = "Gaussian pairs in 1-4 dimensions plus Monte Carlo psd estimates";
    return res;
}

// I(theta, lambda; y) = I(theta; y) + I(lambda; y | theta). The second term is computed here from the joint
// covariance by a Schur complement, independently of the library's conditioning code.
inline PropertyResult chain_rule(std::uint64_t seed) {
    PropertyResult res{"chain rule on 3-block Gaussian systems"};
    Rng root(seed);
    for (std::size_t c = 0; c < 1000; ++c) {
        Rng r = root.split(c);
        int a = uniform_int(r, 1, 2), b = uniform_int(r, 1, 2), n = uniform_int(r, 1, 4);
        int d = a + b;
        LinearGaussian lg{random_matrix(n, d, r), random_spd(n, r, 0.5), Vector::Zero(d), random_spd(d, r, 0.2)};
        auto g = gaussian_mi_cmi(lg, static_cast<std::size_t>(a));
        const Matrix& P = lg.prior_cov;
        const Matrix& A = lg.design;
        Matrix syy = A * P * A.transpose() + lg.noise_cov;
        Matrix pt = P.topLeftCorner(a, a);
        Matrix cross = (A * P).leftCols(a);  // cov(y, theta)
        Matrix syy_theta = syy - cross * pt.ldlt().solve(cross.transpose());
        double i_lambda_given_theta = 0.5 * (std::log(syy_theta.determinant()) - std::log(lg.noise_cov.determinant()));
        double gap = std::abs(g.mi_full.value - (g.mi.value + i_lambda_given_theta));
        res.record(gap <= 1e-9 * std::max(1.0, g.mi_full.value), gap);
    }
    res.detail = "random designs, priors and noise covariances; tolerance 1e-9";
    return res;
}

// I(theta; T(y)) <= I(theta; y) for the sample-mean summary of a conjugate linear-Gaussian model.
inline PropertyResult data_processing(std::uint64_t seed) {
    PropertyResult res{"data processing"};
    Rng root(seed);
    for (std::size_t c = 0; c < 1000; ++c) {
        Rng r = root.split(c);
        int n = uniform_int(r, 1, 8), d = uniform_int(r, 1, 3);
        LinearGaussian full{random_matrix(n, d, r), random_spd(n, r, 0.5), Vector::Zero(d), random_spd(d, r, 0.2)};
        Matrix avg = Matrix::Constant(1, n, 1.0 / n);
        LinearGaussian summary{avg * full.design, avg * full.noise_cov * avg.transpose(), Vector::Zero(d),
                               full.prior_cov};
        double i_full = gaussian_mi_cmi(full, static_cast<std::size_t>(d)).mi_full.value;
        double i_mean = gaussian_mi_cmi(summary, static_cast<std::size_t>(d)).mi_full.value;
        res.record(i_mean <= i_full + 1e-10, std::max(0.0, i_mean - i_full));
    }
    res.detail = "random linear-Gaussian models against their sample-mean summary";
    return res;
}

// Entropy of any distribution is at most the Gaussian entropy at the same covariance.
inline PropertyResult max_entropy(std::uint64_t seed) {
    PropertyResult res{"max-entropy dominance"};
    Rng root(seed);
    const std::size_t N = 400;
    for (std::size_t c = 0; c < 1000; ++c) {
        Rng r = root.split(c);
        const int d = uniform_int(r, 1, 2);
        const int kind = static_cast<int>(c % 4);
        Matrix mix = d == 1 ? Matrix::Constant(1, 1, log_uniform(r, 0.1, 10.0)) : random_spd(d, r, 0.3);
        RowMatrix x(static_cast<Eigen::Index>(N), d);
        for (std::size_t i = 0; i < N; ++i) {
            Vector z(d);
            for (int j = 0; j < d; ++j) {
                switch (kind) {
                    case 0: z(j) = r.uniform(); break;                                   // uniform
                    case 1: z(j) = -std::log(1.0 - r.uniform()); break;                  // exponential
                    case 2: z(j) = r.normal(r.uniform() < 0.5 ? -3.0 : 3.0, 1.0); break;  // bimodal mixture
                    default: z(j) = r.gamma(0.5, 1.0); break;                            // skewed gamma
                }
            }
            x.row(static_cast<Eigen::Index>(i)) = (mix * z).transpose();
        }
        PosteriorDraws p;
        p.draws = x;
        p.sampler = SamplerKind::rwm;
        auto h = knn_entropy(p);
        double hg = gaussian_entropy(weighted_cov(p)).value;
        double viol = h.value - 3.0 * h.std_error - hg;
        res.record(viol <= 0.0, std::max(0.0, viol));
    }
    res.detail = "uniform, exponential, bimodal and gamma draws under random linear maps, n = 400";
    return res;
}

// I(theta; y_M | y, y_1..y_{M-1}) for normal-location: closed form over random scales plus a Monte Carlo ordering check.
inline PropertyResult dmi_monotone(std::uint64_t seed, bool with_mc = true) {
    PropertyResult res{"DMI monotonicity"};
    Rng root(seed);
    for (std::size_t c = 0; c < 1000; ++c) {
        Rng r = root.split(c);
        const bool unit = c == 0;
        double sp = unit ? 1.0 : log_uniform(r, 0.1, 10.0), ns = unit ? 1.0 : log_uniform(r, 0.1, 10.0);
        std::vector<double> mi;
        for (int n = 1; n <= 6; ++n)
            mi.push_back(
                gaussian_mi_cmi(builtin_model("normal-location", {{"n", n}, {"sigma_p", sp}, {"noise_sd", ns}})).mi.value);
        bool ok = true;
        double worst = 0.0;
        for (int M = 1; M <= 5; ++M) {
            double inc = mi[M] - mi[M - 1];
            double exact = 0.5 * std::log((1.0 + (M + 1) * sp * sp / (ns * ns)) / (1.0 + M * sp * sp / (ns * ns)));
            worst = std::max(worst, std::abs(inc - exact));
            ok = ok && std::abs(inc - exact) <= 1e-10;
            if (M > 1) ok = ok && inc < mi[M - 1] - mi[M - 2];
        }
        res.record(ok, worst);
    }
    if (with_mc) {
        auto model = builtin_model("normal-location");
        std::vector<InfoEstimate> est;
        for (int M = 1; M <= 5; ++M) {
            CmiOptions o;
            o.n_y = 120;
            o.S_outer = 40;
            o.n_inner = 20;
            o.S_post = 500;
            o.data_n = static_cast<std::size_t>(M);
            o.rep_n = 1;
            Rng r = root.split(9000 + static_cast<std::uint64_t>(M));
            est.push_back(estimate_cmi(model, o, r));
            double exact = 0.5 * std::log((M + 2.0) / (M + 1.0));
            double dev = std::abs(est.back().value - exact);
            res.record(dev <= 3.0 * est.back().std_error, dev);
            res.detail += "M=" + std::to_string(M) + " est " + fmt(est.back().value) + " exact " + fmt(exact) + "; ";
        }
        for (std::size_t k = 1; k < est.size(); ++k) {
            double se = std::hypot(est[k].std_error, est[k - 1].std_error);
            res.record(est[k].value < est[k - 1].value + 3.0 * se);
        }
    }
    return res;
}

inline PropertyResult interlacing(std::uint64_t seed) {
    PropertyResult res{"eigenvalue interlacing"};
    Rng root(seed);
    for (std::size_t c = 0; c < 1000; ++c) {
        Rng r = root.split(c);
        const int n = uniform_int(r, 2, 6), k = uniform_int(r, 1, n - 1);
        const int rank = uniform_int(r, 1, n);
        Matrix g = random_matrix(n, rank, r);
        Matrix full = g * g.transpose();
        std::vector<int> idx(static_cast<std::size_t>(n));
        std::iota(idx.begin(), idx.end(), 0);
        for (int i = n - 1; i > 0; --i) std::swap(idx[static_cast<std::size_t>(i)], idx[r.index(static_cast<std::size_t>(i + 1))]);
        idx.resize(static_cast<std::size_t>(k));
        std::sort(idx.begin(), idx.end());
        Matrix sub = sub_matrix(full, idx, idx);
        Vector ef = sym_eigen(full).values, es = sym_eigen(sub).values;
        const double tol = 1e-10 * std::max(1.0, ef(n - 1));
        bool ok = true;
        double worst = 0.0;
        for (int i = 0; i < k; ++i) {
            worst = std::max({worst, es(i) - ef(i + n - k), ef(i) - es(i)});
            ok = ok && es(i) <= ef(i + n - k) + tol && ef(i) <= es(i) + tol;
        }
        std::vector<double> vs(es.data(), es.data() + k), vf(ef.data(), ef.data() + n);
        double s_sub = 0.0, s_full = 0.0;
        for (double v : vs) s_sub += psi2(std::max(0.0, v));
        for (double v : vf) s_full += psi2(std::max(0.0, v));
        ok = ok && s_sub <= s_full + tol;
        res.record(ok, std::max(0.0, worst));
    }
    res.detail = "random PSD matrices of rank 1-6 with random principal submatrices";
    return res;
}

inline PropertyResult psi_shape() {
    PropertyResult res{"psi monotone and concave"};
    const int n = 1000;
    const double hi = 25.0, h = hi / n;
    for (int i = 1; i < n; ++i) {
        double x = i * h;
        double d1 = psi(x + h) - psi(x), d2 = psi(x + h) - 2 * psi(x) + psi(x - h);
        double p1 = psi1(x + h, 3) - psi1(x, 3), q2 = psi2(x + h, 2.0) - psi2(x, 2.0);
        bool ok = d1 >= 0.0 && d2 <= 1e-12 && p1 >= 0.0 && q2 >= 0.0;
        res.record(ok, std::max({0.0, -d1, d2}));
    }
    res.record(psi(0.0) == 0.0 && psi(1.0) == 1.0);
    res.detail = "first and second differences on a 1000-point grid over [0, 25]";
    return res;
}

inline PropertyResult fd_vs_analytic(std::uint64_t seed) {
    PropertyResult res{"finite-difference Hessian vs analytic"};
    struct Case {
        ModelSpec model;
        double point_sd;
    };
    std::vector<Case> models{
        {builtin_model("normal-location", {{"n", 3}}), 2.0},
        {builtin_model("redundant-location", {{"n", 2}}), 2.0},
        {builtin_model("split-means", {{"n", 2}, {"expanded", 1}}), 2.0},
        {builtin_model("prior-scale", {{"sigma_p", 3.0}}), 2.0},
        {builtin_pair("location-nuisance").expanded, 2.0},
        {builtin_pair("simple-reg-2obs").expanded, 2.0},
        {builtin_pair("linreg-addpred").base, 0.5},
        {builtin_pair("linreg-addpred").expanded, 0.5},
        {builtin_pair("poisson-negbin").base, 0.7},
        {builtin_pair("poisson-negbin").expanded, 0.7},
        {builtin_pair("independent-extra").expanded, 2.0},
    };
    Rng root(seed);
    for (std::size_t c = 0; c < 1100; ++c) {
        const auto& [m, sd] = models[c % models.size()];
        Rng r = root.split(c);
        std::vector<double> theta = m.sample_prior(r);
        for (auto& t : theta) t = std::clamp(t, -3.0 * sd, 3.0 * sd);
        DataSet y = m.simulate(theta, r);
        Matrix fd = observed_info_fd(m, y, theta).matrix;
        Matrix an = m.analytic.observed_info(y, theta);
        double rel = (fd - an).cwiseAbs().maxCoeff() / std::max(1.0, an.cwiseAbs().maxCoeff());
        res.record(rel <= 1e-4, rel);
    }
    res.detail = std::to_string(models.size()) + " builtins with analytic Hessians at prior draws";
    return res;
}

inline std::vector<std::function<PropertyResult(std::uint64_t)>> all_properties() {
    return {kl_nonnegative, chain_rule, data_processing,
            max_entropy,    [](std::uint64_t s) { return dmi_monotone(s); },
            interlacing,    [](std::uint64_t) { return psi_shape(); },
            fd_vs_analytic};
}

inline PropertyResult timed(const std::function<PropertyResult(std::uint64_t)>& f, std::uint64_t seed) {
    auto t0 = std::chrono::steady_clock::now();
    auto r = f(seed);
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

}  // namespace bmx::props
