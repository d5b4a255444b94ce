#include <gtest/gtest.h>

#include <cmath>

#include "bmx/bmx.hpp"

using namespace bmx;

namespace {
const double kHalfLog2PiE = 0.5 * std::log(2.0 * M_PI * M_E);

PosteriorDraws iid_draws(int d, std::size_t n, std::uint64_t seed, bool uniform) {
    Rng r(seed);
    PosteriorDraws p;
    p.sampler = SamplerKind::rwm;
    p.draws = RowMatrix(static_cast<Eigen::Index>(n), d);
    for (std::size_t i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j) p.draws(static_cast<Eigen::Index>(i), j) = uniform ? r.uniform() : r.normal();
    return p;
}
}  // namespace

TEST(GaussianEntropy, Examples) {
    EXPECT_NEAR(gaussian_entropy(Matrix::Identity(1, 1)).value, 1.4189385332, 1e-9);
    EXPECT_NEAR(gaussian_entropy(Matrix::Identity(2, 2)).value, 2.8378770664, 1e-9);
    Matrix d = Matrix::Zero(2, 2);
    d(0, 0) = 4;
    d(1, 1) = 1;
    EXPECT_NEAR(gaussian_entropy(d).value, 0.5 * std::log(2 * M_PI * M_E * 4) + kHalfLog2PiE, 1e-12);
    EXPECT_EQ(gaussian_entropy(d).std_error, 0.0);
    EXPECT_EQ(gaussian_entropy(d).method, InfoMethod::analytic);
}

TEST(GaussianMiCmi, ClosedForms) {
    EXPECT_NEAR(gaussian_mi_cmi(builtin_model("normal-location")).cmi.value, 0.5 * std::log(1.5), 1e-12);
    EXPECT_NEAR(gaussian_mi_cmi(builtin_model("split-means", {{"n", 1}})).cmi.value, 0.5 * std::log(5.0 / 3.0), 1e-12);
    EXPECT_NEAR(gaussian_mi_cmi(builtin_model("split-means", {{"n", 1}, {"expanded", 1}})).cmi.value, std::log(1.5),
                1e-12);
    double big = gaussian_mi_cmi(builtin_model("prior-scale", {{"sigma_p", 1e4}})).cmi.value;
    EXPECT_NEAR(big, 0.5 * std::log(2.0), 1e-7);
    auto ln = gaussian_mi_cmi(builtin_pair("location-nuisance", {{"sigma_theta2", 2.0}, {"sigma_lambda2", 5.0}}).expanded);
    EXPECT_NEAR(ln.mi.value, 0.5 * std::log(1 + 2.0 / 6.0), 1e-12);
    EXPECT_NEAR(ln.cmi.value, 0.5 * std::log((1 + 2 * 7.0) / (1 + 7.0)), 1e-12);
    EXPECT_LE(ln.cmi.value, 0.5 * std::log(2.0));
}

TEST(GaussianMiCmi, InvariantUnderLinearReparametrization) {
    Rng r(3);
    Matrix a(3, 2), t(2, 2);
    a << 1, 0.5, -0.3, 2, 0.7, 0.1;
    t << 2, 1, -0.5, 1.5;
    LinearGaussian lg{a, Matrix::Identity(3, 3), Vector::Zero(2), Matrix::Identity(2, 2)};
    // theta' = T theta: design A T^-1, prior cov T P T'.
    LinearGaussian re{a * t.inverse(), lg.noise_cov, Vector::Zero(2), t * lg.prior_cov * t.transpose()};
    auto g1 = gaussian_mi_cmi(lg, 2), g2 = gaussian_mi_cmi(re, 2);
    EXPECT_NEAR(g1.mi_full.value, g2.mi_full.value, 1e-12);
    EXPECT_NEAR(g1.cmi.value, g2.cmi.value, 1e-12);
}

TEST(PpdLogDensity, SingleDrawEqualsLikelihood) {
    auto m = builtin_model("normal-location");
    DataSet y = make_data({0.7});
    std::vector<double> th{0.3};
    EXPECT_NEAR(ppd_logdensity(y, single_draw(th), m), m.log_lik(y, th), 1e-14);
}

TEST(PpdLogDensity, NormalLocationConjugate) {
    auto m = builtin_model("normal-location");
    auto d = exact_posterior_draws(m, make_data({0.0}), 20000, 4);
    EXPECT_NEAR(ppd_logdensity(make_data({0.0}), d, m), normal_logpdf(0.0, 0.0, std::sqrt(1.5)), 0.01);
}

TEST(PpdLogDensity, OutsideSupportIsMinusInfinity) {
    auto m = builtin_pair("poisson-negbin").base;
    double v = ppd_logdensity(make_data({-1.0}), single_draw({0.0}), m);
    EXPECT_TRUE(std::isinf(v) && v < 0);
}

TEST(Psd, SingleDrawIsZero) {
    auto m = builtin_model("normal-location");
    Rng r(1);
    auto e = estimate_psd(make_data({0.0}), m, single_draw({0.2}), 50, 20, r);
    EXPECT_NEAR(e.value, 0.0, 1e-12);
}

TEST(Psd, NormalLocationPositive) {
    auto m = builtin_model("normal-location");
    DataSet y = make_data({0.0});
    auto d = exact_posterior_draws(m, y, 2000, 6);
    Rng r(2);
    auto e = estimate_psd(y, m, d, 300, 100, r);
    EXPECT_GT(e.value, 0.0);
    EXPECT_TRUE(std::isfinite(e.value));
    EXPECT_EQ(e.method, InfoMethod::nested_mc);
}

TEST(Psd, StudentTSeparatedModes) {
    auto m = builtin_model("student-t-outlier");
    DataSet y = make_data({-10.0, 10.0});
    auto g = grid_posterior(m, y, {{-15.0, 15.0}}, 2001);
    Rng r(3);
    PsdOptions o;
    o.S_outer = 300;
    o.n_inner = 100;
    auto e = estimate_psd(y, m, g, o, r);
    EXPECT_GT(e.value - 3 * e.std_error, 0.5);
}

TEST(Psd, RequiresLikelihood) {
    auto m = builtin_model("normal-location");
    m.log_lik = nullptr;
    Rng r(3);
    EXPECT_THROW(estimate_psd(make_data({0.0}), m, single_draw({0.0}), 10, 10, r), CapabilityError);
}

TEST(Cmi, NormalLocation) {
    Rng r(11);
    CmiOptions o;
    o.n_y = 200;
    o.S_outer = 40;
    o.n_inner = 20;
    o.S_post = 500;
    auto e = estimate_cmi(builtin_model("normal-location"), o, r);
    EXPECT_NEAR(e.value, 0.5 * std::log(1.5), 3 * e.std_error + 0.005);
}

TEST(Cmi, TinyPriorScaleGivesZero) {
    Rng r(12);
    CmiOptions o;
    o.n_y = 50;
    o.S_outer = 20;
    o.n_inner = 10;
    o.S_post = 200;
    auto e = estimate_cmi(builtin_model("prior-scale", {{"sigma_p", 1e-3}}), o, r);
    EXPECT_NEAR(e.value, 0.0, 3 * e.std_error + 1e-4);
}

TEST(Cmi, NormalGammaLargeRatioFallsBelowBase) {
    Rng r(13);
    CmiOptions o;
    o.n_y = 100;
    o.S_outer = 40;
    o.n_inner = 20;
    o.S_post = 1000;
    auto pair = builtin_pair("normal-gamma-pair");
    auto exp = estimate_cmi(builtin_model("normal-gamma", {{"r", 20.0}}), o, r);
    double base = gaussian_mi_cmi(pair.base).cmi.value;
    EXPECT_LT(exp.value, base);
}

TEST(Cmi, Deterministic) {
    CmiOptions o;
    o.n_y = 10;
    o.S_outer = 10;
    o.n_inner = 10;
    o.S_post = 200;
    Rng a(5), b(5);
    EXPECT_EQ(estimate_cmi(builtin_model("normal-location"), o, a).value,
              estimate_cmi(builtin_model("normal-location"), o, b).value);
}

TEST(Knn, UnitNormal1d) {
    auto e = knn_entropy(iid_draws(1, 100000, 1, false));
    EXPECT_NEAR(e.value, kHalfLog2PiE, 0.02);
    EXPECT_EQ(e.method, InfoMethod::knn);
}

TEST(Knn, Uniform) { EXPECT_NEAR(knn_entropy(iid_draws(1, 100000, 2, true)).value, 0.0, 0.02); }

TEST(Knn, StandardNormal2d) { EXPECT_NEAR(knn_entropy(iid_draws(2, 100000, 3, false)).value, 2 * kHalfLog2PiE, 0.03); }

TEST(Knn, RejectsWeightedAndTinySamples) {
    auto w = grid_posterior(builtin_model("normal-location"), make_data({0.0}), {{-5.0, 5.0}}, 101);
    EXPECT_THROW(knn_entropy(w), DomainError);
    EXPECT_THROW(knn_entropy(iid_draws(1, 10, 1, false)), DomainError);
}

TEST(WeakId, FlatLikelihoodIsWeak) {
    auto m = builtin_model("flat-location");
    DataSet y = make_data({1.0});
    auto v = weak_id_verdict(m, y, {0}, 0.01, exact_posterior_draws(m, y, 1000, 1));
    EXPECT_NEAR(v.gap, 0.0, 1e-12);
    EXPECT_TRUE(v.weak);
}

TEST(WeakId, NormalLocationGap) {
    auto m = builtin_model("normal-location");
    DataSet y = make_data({0.3});
    auto v = weak_id_verdict(m, y, {0}, 0.1, exact_posterior_draws(m, y, 1000, 1));
    EXPECT_NEAR(v.gap, 0.5 * std::log(2.0), 1e-12);
    EXPECT_FALSE(v.weak);
    EXPECT_EQ(v.method, InfoMethod::analytic);
}

TEST(WeakId, NuisanceVarianceDrivesGapToZero) {
    double prev = 1e9;
    for (double sl : {1.0, 100.0, 1e6}) {
        auto m = builtin_pair("location-nuisance", {{"sigma_lambda2", sl}}).expanded;
        DataSet y = make_data({0.5});
        auto v = weak_id_verdict(m, y, {0}, 0.1, exact_posterior_draws(m, y, 500, 1));
        EXPECT_LT(v.gap, prev);
        prev = v.gap;
    }
    EXPECT_LT(prev, 1e-5);
}

TEST(MiDecomposition, LocationNuisanceIdentity) {
    Rng r(1);
    auto d = mi_decomposition(builtin_pair("location-nuisance", {{"sigma_theta2", 1.0}, {"sigma_lambda2", 3.0}}), 100, r);
    EXPECT_TRUE(d.identity_holds);
    EXPECT_NEAR(d.identity_residual, 0.0, 1e-12);
    EXPECT_NEAR(d.mi_exp.value, 0.5 * std::log(1.25), 1e-12);
    EXPECT_NEAR(d.mi_base.value, 0.5 * std::log(2.0), 1e-12);
    EXPECT_TRUE(d.delta_post_nonpositive);
}

TEST(MiDecomposition, ConstantInLambdaGivesZeroDeltaExp) {
    Rng r(2);
    auto d = mi_decomposition(builtin_pair("independent-extra"), 2000, r);
    EXPECT_NEAR(d.delta_exp.value, 0.0, 1e-12 + 3 * d.delta_exp.std_error);
}

TEST(MiDecomposition, OrthogonalRegressorGivesZeroDeltaExp) {
    Rng r(3);
    auto d = mi_decomposition(builtin_pair("linreg-addpred", {{"rho", 0.0}}), 2000, r);
    EXPECT_NEAR(d.delta_exp.value, 0.0, 1e-8 + 3 * d.delta_exp.std_error);
}
