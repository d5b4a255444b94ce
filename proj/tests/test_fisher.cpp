#include <gtest/gtest.h>

#include <cmath>

#include "bmx/bmx.hpp"

using namespace bmx;

namespace {
FisherBudget budget(std::size_t n_prior = 200, std::size_t n_mc = 40, std::size_t n_y = 50) {
    FisherBudget b;
    b.n_prior = n_prior;
    b.n_mc = n_mc;
    b.n_y = n_y;
    return b;
}
}  // namespace

TEST(SymEigen, Examples) {
    auto a = sym_eigen(Matrix::Identity(3, 3)).values;
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(a(i), 1.0, 1e-14);
    Matrix d = Matrix::Zero(3, 3);
    d.diagonal() << 3, 1, 2;
    auto b = sym_eigen(d).values;
    EXPECT_NEAR(b(0), 1, 1e-14);
    EXPECT_NEAR(b(1), 2, 1e-14);
    EXPECT_NEAR(b(2), 3, 1e-14);
    Matrix c(2, 2);
    c << 2, 1, 1, 2;
    auto e = sym_eigen(c);
    EXPECT_NEAR(e.values(0), 1, 1e-13);
    EXPECT_NEAR(e.values(1), 3, 1e-13);
    Matrix recon = e.vectors * e.values.asDiagonal() * e.vectors.transpose();
    EXPECT_NEAR((recon - c).norm(), 0.0, 1e-12);
}

TEST(ObservedInfo, NormalLocationIsN) {
    auto m = builtin_model("normal-location", {{"n", 4}});
    std::vector<double> th{0.7};
    auto fd = observed_info_fd(m, make_data({0.1, -2, 3, 0.5}), th);
    EXPECT_NEAR(fd.matrix(0, 0), 4.0, 1e-6);
}

TEST(ObservedInfo, PoissonLogRate) {
    auto m = builtin_pair("poisson-negbin").base;
    DataSet y = make_data({0, 2, 1, 4, 3});
    for (double mu : {-0.5, 0.0, 0.8}) {
        std::vector<double> th{mu};
        EXPECT_NEAR(observed_info_fd(m, y, th).matrix(0, 0), 5 * std::exp(mu), 1e-4 * 5 * std::exp(mu));
    }
}

TEST(ObservedInfo, NegbinMatchesClosedForm) {
    auto m = builtin_pair("poisson-negbin").expanded;
    DataSet y = make_data({0, 2, 1, 4, 3});
    const double ybar = 2.0;
    for (auto [mu, lam] : std::vector<std::pair<double, double>>{{0.0, 0.0}, {0.5, 1.5}, {-0.3, -0.7}}) {
        std::vector<double> p{mu, lam};
        double em = std::exp(mu), el = std::exp(lam);
        double closed = 5 * em * (1 - em / (em + el)) * ((ybar + el) / (em + el));
        EXPECT_NEAR(observed_info(m, y, p)(0, 0), closed, 1e-10 * closed);
        EXPECT_NEAR(observed_info_fd(m, y, p).matrix(0, 0), closed, 1e-4 * closed);
    }
}

TEST(ExpectedFisher, Examples) {
    Rng r(1);
    std::vector<double> zero{0.0};
    EXPECT_NEAR(expected_fisher(builtin_model("normal-location", {{"n", 3}}), zero, 10, r).matrix(0, 0), 3.0, 1e-12);
    EXPECT_NEAR(expected_fisher(builtin_pair("poisson-negbin").base, zero, 10, r).matrix(0, 0), 5.0, 1e-12);
    std::vector<double> p{0.0, 0.0};
    EXPECT_NEAR(expected_fisher(builtin_pair("poisson-negbin").expanded, p, 10, r).matrix(0, 0), 2.5, 1e-12);
}

TEST(ExpectedFisher, MonteCarloPathMatchesAnalytic) {
    auto m = builtin_pair("poisson-negbin").expanded;
    auto mc = m;
    mc.analytic.fisher = nullptr;
    std::vector<double> p{0.0, 0.0};
    Rng r(2);
    auto e = expected_fisher(mc, p, 4000, r);
    EXPECT_NEAR(e.matrix(0, 0), 2.5, 3 * e.std_error(0, 0) + 1e-3);
}

TEST(PriorExpectedFisher, PoissonNegbinTraceFalls) {
    auto pair = builtin_pair("poisson-negbin");
    Rng r(3);
    auto base = prior_expected_fisher(pair.base, FisherBlock::full, budget(400), r);
    auto exp = prior_expected_fisher(pair.expanded, FisherBlock::shared, budget(400), r);
    EXPECT_LT(exp.trace() + 3 * std::hypot(exp.trace_se(), base.trace_se()), base.trace());
}

TEST(PriorExpectedFisher, OrthogonalRegressorLeavesTrace) {
    auto pair = builtin_pair("linreg-addpred", {{"rho", 0.0}});
    Rng r1(4), r2(4);
    auto base = prior_expected_fisher(pair.base, FisherBlock::full, budget(300), r1);
    auto given = prior_expected_fisher(pair.expanded, FisherBlock::shared_given_extra, budget(300), r2);
    Matrix bb = principal_block(base.matrix, pair.base.d_shared);
    double se = std::hypot(base.trace_se(), given.trace_se());
    EXPECT_NEAR(given.matrix.trace(), bb.trace(), 3 * se + 1e-8);
}

TEST(Psi, Examples) {
    EXPECT_EQ(psi(0.0), 0.0);
    EXPECT_DOUBLE_EQ(psi(1.0), 1.0);
    EXPECT_NEAR(psi(4.0), 1 + 0.5 * std::log(4.0), 1e-12);
    EXPECT_NEAR(psi(0.25), 0.5, 1e-15);
    EXPECT_NEAR(psi1(2.0, 2), 2.0, 1e-15);
    EXPECT_NEAR(psi2(1.0, 1.0), 0.5, 1e-15);
    EXPECT_THROW(psi(-1.0), DomainError);
}

TEST(MiUpperBound, NormalLocation) {
    Rng r(5);
    auto b = mi_upper_bound(builtin_model("normal-location"), BoundVariant::full, FisherBlock::full, budget(), r);
    EXPECT_NEAR(b.value, 1.0, 1e-12);
    EXPECT_GE(b.value, 0.5 * std::log(2.0));
}

TEST(MiUpperBound, FlatLikelihood) {
    Rng r(6);
    auto b = mi_upper_bound(builtin_model("flat-location"), BoundVariant::full, FisherBlock::full, budget(), r);
    EXPECT_EQ(b.value, 0.0);
}

TEST(MiUpperBound, LocationNuisanceConditionalBlock) {
    Rng r(7);
    auto m = builtin_pair("location-nuisance", {{"sigma_theta2", 1.0}, {"sigma_lambda2", 3.0}}).expanded;
    auto b = mi_upper_bound(m, BoundVariant::full, FisherBlock::shared_given_extra, budget(), r);
    EXPECT_NEAR(b.trace, 1.0, 1e-12);
    EXPECT_NEAR(b.value, 1.0, 1e-12);
    EXPECT_GE(b.value, 0.5 * std::log(1.25));
}

TEST(MiUpperBound, RejectsNonLogConcavePrior) {
    Rng r(8);
    EXPECT_THROW(mi_upper_bound(builtin_model("normal-gamma"), BoundVariant::full, FisherBlock::full, budget(), r),
                 CapabilityError);
}

TEST(TraceBound, IndependentPriorGivesNonPositiveDelta) {
    Rng r(9);
    auto t = trace_bound_delta(builtin_pair("independent-extra"), budget(200), r);
    ASSERT_EQ(t.delta.size(), 1u);
    EXPECT_LE(t.delta[0], 3 * t.delta_sum_se + 1e-12);
    // No mixed dependence: Delta is the prior term alone.
    EXPECT_NEAR(t.mixed_sum[0], 0.0, 1e-8);
    EXPECT_TRUE(t.holds);
}

TEST(TraceBound, CorrelatedRegressorHasNegativeDelta) {
    Rng r(10);
    auto t = trace_bound_delta(builtin_pair("linreg-addpred"), budget(300), r);
    EXPECT_LT(t.delta_sum + 3 * t.delta_sum_se, 0.0);
    EXPECT_TRUE(t.holds);
}

TEST(CmiTraceTerm, Examples) {
    Rng r(11);
    auto t = cmi_trace_term(builtin_model("normal-location"), budget(), r);
    EXPECT_NEAR(t.value, 0.5, 1e-10);
    auto f = cmi_trace_term(builtin_model("flat-location"), budget(), r);
    EXPECT_NEAR(f.value, 0.0, 1e-12);
}

TEST(CmiLowerBound, Examples) {
    EXPECT_NEAR(cmi_lower_bound_analytic({1.0}, 1), 0.5, 1e-15);
    EXPECT_EQ(cmi_lower_bound_analytic({0.0, 0.0}, 3), 0.0);
    EXPECT_NEAR(cmi_lower_bound_analytic({2.0, 3.0}, 2), 2.0 / 5.0 + 3.0 / 7.0, 1e-15);
}

TEST(Dilution, PoissonNegbinIsDiluting) {
    Rng r(12);
    auto d = dilution_matrix(builtin_pair("poisson-negbin"), budget(300), r);
    EXPECT_EQ(d.classification, Dilution::totally_diluting);
    EXPECT_GT(d.eigenvalues(0), 0.0);
}

TEST(Dilution, ExtraChannelWithoutLikelihoodEffectIsZero) {
    Rng r(13);
    auto d = dilution_matrix(builtin_pair("independent-extra"), budget(100), r);
    EXPECT_NEAR(d.delta_dilute.matrix.cwiseAbs().maxCoeff(), 0.0, 1e-12);
}

TEST(Dilution, CorrelatedRegressorIsDiluting) {
    Rng r(14);
    auto d = dilution_matrix(builtin_pair("linreg-addpred"), budget(200), r);
    EXPECT_EQ(d.classification, Dilution::totally_diluting);
}

TEST(Dilution, ClassifierDeadBand) {
    Vector se = Vector::Constant(2, 0.1);
    Vector pos(2), neg(2), mix(2);
    pos << 0.5, 1.0;
    neg << -1.0, -0.5;
    mix << -1.0, 1.0;
    EXPECT_EQ(classify_dilution(pos, se), Dilution::totally_diluting);
    EXPECT_EQ(classify_dilution(neg, se), Dilution::totally_concentrating);
    EXPECT_EQ(classify_dilution(mix, se), Dilution::indefinite);
}

TEST(Skewness, Examples) {
    std::vector<Matrix> same(5, Matrix::Identity(2, 2) * 2.0);
    auto c = skewness_check(same);
    EXPECT_EQ(c.var_op, 0.0);
    EXPECT_TRUE(c.ok);
    std::vector<Matrix> alt;
    for (int i = 0; i < 10; ++i) alt.push_back(Matrix::Identity(2, 2) * (i % 2 ? 1.9 : 0.1));
    auto a = skewness_check(alt, 0.5);
    EXPECT_NEAR(a.var_op, 0.81, 1e-12);
    EXPECT_NEAR(a.lambda_min_mean, 1.0, 1e-12);
    EXPECT_FALSE(a.ok);
    EXPECT_THROW(skewness_check(alt, 0.8), DomainError);
}

TEST(Skewness, NormalLocationObservedInfoIsConstant) {
    auto m = builtin_model("normal-location");
    Rng r(15);
    std::vector<Matrix> s;
    for (int i = 0; i < 20; ++i) {
        std::vector<double> th{r.normal()};
        s.push_back(observed_info(m, m.simulate(th, r), th));
    }
    EXPECT_TRUE(skewness_check(s).ok);
}

TEST(Tradeoff, PoissonNegbinDilutingInequality) {
    Rng r(16);
    auto t = tradeoff_report(builtin_pair("poisson-negbin"), budget(300), r);
    EXPECT_EQ(t.dilution.classification, Dilution::totally_diluting);
    EXPECT_TRUE(t.diluting_inequality);
    EXPECT_LE(t.mi_bound_cond, t.mi_bound_base);
    EXPECT_GE(t.delta_f, -1e-8);
}

TEST(Tradeoff, OrthogonalRegressorIsTight) {
    Rng r(17);
    auto t = tradeoff_report(builtin_pair("linreg-addpred", {{"rho", 0.0}}), budget(300), r);
    EXPECT_NEAR(t.mi_bound_cond, t.mi_bound_base, 3 * t.mi_bound_base_se + 1e-8);
    EXPECT_NEAR(t.cmi_term_cond, t.cmi_term_base, 1e-6 + 0.02 * t.cmi_term_base);
}

TEST(Tradeoff, ReportsHypotheses) {
    Rng r(18);
    auto t = tradeoff_report(builtin_pair("simple-reg-2obs"), budget(50), r);
    auto j = to_json(t);
    ASSERT_TRUE(j.contains("hypotheses"));
    EXPECT_TRUE(j["hypotheses"].contains("log_concave"));
    EXPECT_TRUE(j["hypotheses"].contains("skew_ok_base"));
    EXPECT_EQ(j["hypotheses"]["normal_posterior"], "declared");
    EXPECT_NE(t.text_table().find("identifiability"), std::string::npos);
}

TEST(FiniteDifference, StepRule) {
    EXPECT_DOUBLE_EQ(fd_step(0.0), 1e-4);
    EXPECT_DOUBLE_EQ(fd_step(50.0), 5e-3);
}
