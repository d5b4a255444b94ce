#include <gtest/gtest.h>

#include <boost/math/distributions/students_t.hpp>
#include <cmath>

#include "bmx/bmx.hpp"

using namespace bmx;

namespace {
struct StudentT {
    ModelSpec model = builtin_model("student-t-outlier");
    DataSet y = make_data({-10.0, 10.0});
    PosteriorDraws grid = grid_posterior(model, y, {{-15.0, 15.0}}, 2001);
};
}  // namespace

TEST(ConditionalPppv, StudentTMarginalAgreesWithQuadrature) {
    StudentT s;
    Rng r(1);
    auto res = conditional_pppv(s.model, s.y, s.grid, statistic::negated_first(), 400, r);
    boost::math::students_t t(10.0);
    double oracle = 0.0, mass = 0.0;
    for (std::size_t i = 0; i < s.grid.size(); ++i) {
        double p = boost::math::cdf(t, -10.0 - s.grid.draws(i, 0));
        oracle += s.grid.weight(i) * p;
        if (p < 0.01) mass += s.grid.weight(i);
    }
    EXPECT_NEAR(res.marginal_p, 0.165, 0.02);
    EXPECT_NEAR(res.marginal_p, oracle, 0.005);
    EXPECT_NEAR(mass_below(res, s.grid, 0.01), mass, 0.03);
}

TEST(ConditionalPppv, SingleDrawMarginalEqualsConditional) {
    auto m = builtin_model("normal-location");
    Rng r(2);
    auto res = conditional_pppv(m, make_data({0.4}), single_draw({0.1}), statistic::mean(), 500, r);
    ASSERT_EQ(res.conditional_p.size(), 1u);
    EXPECT_DOUBLE_EQ(res.marginal_p, res.conditional_p[0]);
}

TEST(ConditionalPppv, ConstantStatisticGivesOne) {
    auto m = builtin_model("normal-location");
    DataSet y = make_data({0.4});
    auto d = exact_posterior_draws(m, y, 200, 3);
    Rng r(3);
    auto res = conditional_pppv(m, y, d, statistic::constant(), 100, r);
    for (double p : res.conditional_p) EXPECT_EQ(p, 1.0);
    EXPECT_EQ(res.marginal_p, 1.0);
}

TEST(ConditionalPppv, TailConventions) {
    auto m = builtin_model("normal-location");
    DataSet y = make_data({0.0});
    auto d = exact_posterior_draws(m, y, 200, 4);
    auto left = statistic::mean();
    left.tail = Tail::left;
    auto two = statistic::mean();
    two.tail = Tail::two;
    Rng a(4), b(4), c(4);
    auto pr = conditional_pppv(m, y, d, statistic::mean(), 200, a);
    auto pl = conditional_pppv(m, y, d, left, 200, b);
    auto pt = conditional_pppv(m, y, d, two, 200, c);
    for (std::size_t s = 0; s < d.size(); ++s) {
        EXPECT_NEAR(pt.conditional_p[s], std::min(1.0, 2 * std::min(pr.conditional_p[s], pl.conditional_p[s])), 1e-15);
        EXPECT_GE(pr.conditional_p[s] + pl.conditional_p[s], 1.0 - 1e-15);
    }
}

TEST(ConditionalPppv, RejectsSmallInnerBudget) {
    auto m = builtin_model("normal-location");
    Rng r(5);
    EXPECT_THROW(conditional_pppv(m, make_data({0.0}), single_draw({0.0}), statistic::mean(), 50, r), DomainError);
}

TEST(MarginalPppv, NormalLocationCentre) {
    auto m = builtin_model("normal-location");
    DataSet y = make_data({0.0});
    auto d = exact_posterior_draws(m, y, 2000, 6);
    Rng r(6);
    EXPECT_NEAR(marginal_pppv(m, y, d, statistic::mean(), 200, r), 0.5, 0.02);
}

TEST(MarginalPppv, ExtremeTail) {
    auto m = builtin_model("normal-location");
    DataSet y = make_data({10.0});
    auto d = exact_posterior_draws(m, y, 2000, 7);
    Rng r(7);
    EXPECT_LT(marginal_pppv(m, y, d, statistic::mean(), 200, r), 0.01);
}

TEST(MarginalPppv, SameSeedSameValue) {
    auto m = builtin_model("normal-location");
    DataSet y = make_data({0.8});
    auto d = exact_posterior_draws(m, y, 300, 8);
    Rng a(8), b(8);
    EXPECT_EQ(marginal_pppv(m, y, d, statistic::mean(), 150, a), marginal_pppv(m, y, d, statistic::mean(), 150, b));
}

TEST(CheckScatter, StudentTLobes) {
    StudentT s;
    Rng r(9);
    auto res = conditional_pppv(s.model, s.y, s.grid, statistic::negated_first(), 200, r);
    auto pts = check_scatter(res, s.grid, coordinate_projection(s.model, 0));
    double pos = 0, pos_w = 0, neg = 0, neg_w = 0;
    for (const auto& p : pts) {
        if (p.projection > 2) pos += p.weight * p.conditional_p, pos_w += p.weight;
        if (p.projection < -2) neg += p.weight * p.conditional_p, neg_w += p.weight;
    }
    EXPECT_LT(pos / pos_w, 0.01);
    EXPECT_GT(neg / neg_w, 0.2);
    EXPECT_LT(scatter_rank_correlation(pts), 0.0);
}

TEST(CheckScatter, ConstantProjectionIsValid) {
    StudentT s;
    Rng r(10);
    auto res = conditional_pppv(s.model, s.y, s.grid, statistic::coordinate(1), 100, r);
    Projection flat{"const", [](Params) { return 1.0; }};
    auto pts = check_scatter(res, s.grid, flat);
    ASSERT_EQ(pts.size(), s.grid.size());
    for (const auto& p : pts) EXPECT_EQ(p.projection, 1.0);
}

TEST(CheckScatter, GroupedTauTrend) {
    auto m = builtin_model("grouped-expanded");
    auto y = simulate_grouped_data(2, 20, 1.0, 2.0, 1.0, 5);
    auto d = rwm_sample(m, y, 1000, 2000, 11);
    Rng r(11);
    auto res = conditional_pppv(m, y, d, statistic::group_mean_sd(), 100, r);
    auto pts = check_scatter(res, d, coordinate_projection(m, 2));
    double rc = scatter_rank_correlation(pts);
    EXPECT_TRUE(std::isfinite(rc));
    // Larger tau spreads the replicated group means, so p rises with tau.
    EXPECT_GT(rc, 0.0);
}

TEST(Statistics, NamesAndErrors) {
    EXPECT_EQ(statistic::by_name("coord2").name, "coord2");
    EXPECT_EQ(statistic::by_name("window-sd3").name, "window-sd3");
    EXPECT_THROW(statistic::by_name("nope"), UsageError);
    EXPECT_THROW(statistic::window_sd(1), DomainError);
    DataSet y = make_data({1, 2, 3, 4});
    EXPECT_NEAR(statistic::window_sd(2).eval(y), std::sqrt(0.5), 1e-12);
    EXPECT_THROW(statistic::coordinate(7).eval(y), DomainError);
}
