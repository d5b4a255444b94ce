#include <gtest/gtest.h>

#include <cmath>

#include "bmx/bmx.hpp"

using namespace bmx;

TEST(Expansion, PoissonNegbinLimitAtLargeLambda) {
    auto pair = builtin_pair("poisson-negbin");
    std::vector<Probe> probes;
    for (int k = 0; k <= 10; ++k) probes.push_back({make_data({double(k)}), {0.0}});
    auto rep = validate_expansion(pair, probes, 1e-3);
    EXPECT_TRUE(rep.pass);
    EXPECT_LT(rep.max_discrepancy, 1e-3);
    ASSERT_EQ(rep.ladder.size(), 4u);
    EXPECT_DOUBLE_EQ(rep.ladder.back(), 1e4);
}

TEST(Expansion, IndependentExtraIsExact) {
    auto pair = builtin_pair("independent-extra");
    auto rep = validate_expansion(pair, default_probes(pair, 3), 0.0);
    EXPECT_TRUE(rep.pass);
    EXPECT_EQ(rep.max_discrepancy, 0.0);
}

TEST(Expansion, RegressionAtZeroCoefficient) {
    auto pair = builtin_pair("linreg-addpred");
    auto probes = default_probes(pair, 5);
    auto rep = validate_expansion(pair, probes, 1e-12);
    EXPECT_TRUE(rep.pass) << rep.max_discrepancy;
}

TEST(Expansion, EveryBuiltinPairValidates) {
    for (const auto& name : builtin_names()) {
        auto b = builtin(name);
        if (auto* p = std::get_if<ExpansionPair>(&b)) {
            auto rep = validate_expansion(*p, default_probes(*p, 11), 1e-6);
            EXPECT_TRUE(rep.pass) << name << " discrepancy " << rep.max_discrepancy;
        }
    }
}

TEST(Expansion, StructuralMismatchIsRejected) {
    auto pair = builtin_pair("poisson-negbin");
    std::vector<Probe> probes{{make_data({1.0}), {0.0, 1.0}}};
    EXPECT_THROW(validate_expansion(pair, probes, 1e-3), StructuralError);
}

TEST(Builtins, StudentTHasUniformPrior) {
    auto m = builtin_model("student-t-outlier", {{"df", 10}, {"scale", 1}, {"lo", -15}, {"hi", 15}});
    EXPECT_EQ(m.d_total(), 1u);
    std::vector<double> a{0.0}, b{7.5}, out{16.0};
    EXPECT_DOUBLE_EQ(m.log_prior(a), m.log_prior(b));
    EXPECT_NEAR(m.log_prior(a), -std::log(30.0), 1e-12);
    EXPECT_TRUE(std::isinf(m.log_prior(out)));
}

TEST(Builtins, NormalLocationPosteriorVariance) {
    auto m = builtin_model("normal-location", {{"n", 1}, {"sigma_p", 1}});
    for (double y : {-3.0, 0.0, 5.0}) {
        auto post = exact_gaussian_posterior(m, make_data({y}));
        EXPECT_NEAR(post.cov(0, 0), 0.5, 1e-14);
    }
}

TEST(Builtins, UnknownNameAndBadHyperparameters) {
    EXPECT_THROW(builtin("no-such-model"), UsageError);
    EXPECT_THROW(builtin("normal-location", {{"sigma_p", 0.0}}), Error);
    EXPECT_THROW(builtin("normal-location", {{"sigma_p", -1.0}}), Error);
    EXPECT_THROW(builtin("normal-location", {{"bogus", 1.0}}), Error);
    EXPECT_THROW(builtin_model("poisson-negbin"), UsageError);
    EXPECT_THROW(builtin_pair("normal-location"), UsageError);
}

TEST(Builtins, EveryNameBuilds) {
    for (const auto& name : builtin_names()) EXPECT_NO_THROW(builtin(name)) << name;
}

TEST(GroupedData, DegenerateSizeIsFinite) {
    auto y = simulate_grouped_data(1, 1, 1.0, 0.0, 1.0, 9);
    ASSERT_EQ(y.size(), 1u);
    EXPECT_TRUE(std::isfinite(y.values[0]));
    EXPECT_EQ(y.num_groups(), 1);
}

TEST(GroupedData, SeedDeterminism) {
    auto a = simulate_grouped_data(2, 20, 0.5, 2.0, 1.0, 42);
    auto b = simulate_grouped_data(2, 20, 0.5, 2.0, 1.0, 42);
    EXPECT_EQ(a.values, b.values);
    EXPECT_EQ(a.groups, b.groups);
}

TEST(GroupedData, VarianceRatioBand) {
    // Small within-group sd: the group means carry most of the variance.
    double total = 0.0;
    for (std::uint64_t s = 0; s < 20; ++s) total += variance_ratio(simulate_grouped_data(2, 20, 0.5, 2.0, 1.0, 100 + s));
    double mean_ratio = total / 20.0;
    EXPECT_GT(mean_ratio, 0.25);
    EXPECT_LT(mean_ratio, 1.15);
}

TEST(DataSet, ValidationCatchesBadInput) {
    DataSet bad = make_data({1.0, std::nan("")});
    EXPECT_THROW(bad.validate(), DomainError);
    DataSet gaps = make_data({1.0, 2.0}, {0, 2});
    EXPECT_THROW(gaps.validate(), DomainError);
    DataSet mismatch = make_data({1.0, 2.0}, {0});
    EXPECT_THROW(mismatch.validate(), StructuralError);
}
