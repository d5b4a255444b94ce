#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "bmx/bmx.hpp"

using namespace bmx;

namespace {
BootConfig small(std::uint64_t seed = 1) {
    BootConfig c;
    c.R = 20;
    c.S = 1000;
    c.S_ref = 4000;
    c.seed = seed;
    return c;
}

const ModelSpec& grouped() {
    static const ModelSpec m = builtin_model("grouped-expanded");
    return m;
}
}  // namespace

TEST(SchemeCost, DefaultDesignsMatch) {
    BootConfig c;
    EXPECT_EQ(scheme_cost(Scheme::same_subpops, c, 20), 160);
    EXPECT_EQ(scheme_cost(Scheme::new_subpops, c, 20), 160);
}

TEST(Bootstrap, NoNewDataGivesRatioNearOne) {
    auto y = simulate_grouped_data(2, 20, 1.0, 2.0, 1.0, 3);
    auto c = small();
    c.M_new = 0;
    c.L_new = 0;
    auto ref = reference_fit(grouped(), y, c);
    auto same = run_scheme(grouped(), y, ref, Scheme::same_subpops, Source::posterior, c);
    auto fresh = run_scheme(grouped(), y, ref, Scheme::new_subpops, Source::posterior, c);
    EXPECT_NEAR(same.rho_bar, 1.0, 0.1);
    EXPECT_NEAR(fresh.rho_bar, 1.0, 0.1);
}

TEST(Bootstrap, SameSeedSameReplications) {
    auto y = simulate_grouped_data(2, 20, 1.0, 2.0, 1.0, 4);
    auto c = small(9);
    c.R = 4;
    auto a = boot_new_subpops(grouped(), y, c);
    auto b = boot_new_subpops(grouped(), y, c);
    EXPECT_EQ(a.rho, b.rho);
    EXPECT_EQ(a.seed, b.seed);
}

TEST(Bootstrap, SmallWithinGroupSdFavoursNewGroups) {
    auto y = simulate_grouped_data(2, 20, 0.5, 2.0, 1.0, 5);
    auto c = small(2);
    auto ref = reference_fit(grouped(), y, c);
    auto same = run_scheme(grouped(), y, ref, Scheme::same_subpops, Source::posterior, c);
    auto fresh = run_scheme(grouped(), y, ref, Scheme::new_subpops, Source::posterior, c);
    EXPECT_GT(same.rho_bar, fresh.rho_bar);
    EXPECT_EQ(same.failed + same.rho.size(), c.R);
}

TEST(Bootstrap, ComparisonHistogramsCoverEveryReplication) {
    auto y = simulate_grouped_data(2, 20, 1.0, 2.0, 1.0, 6);
    auto c = small(3);
    c.R = 8;
    auto cmp = compare_schemes(grouped(), y, c, 10);
    ASSERT_EQ(cmp.cells.size(), 4u);
    ASSERT_EQ(cmp.histograms.size(), 4u);
    for (std::size_t i = 0; i < 4; ++i) {
        std::size_t n = 0;
        for (const auto& b : cmp.histograms[i]) n += b.count;
        EXPECT_EQ(n, cmp.cells[i].rho.size());
    }
    EXPECT_NO_THROW(cmp.cell(Scheme::new_subpops, Source::prior));
}

TEST(Bootstrap, Errors) {
    auto y = simulate_grouped_data(2, 20, 1.0, 2.0, 1.0, 7);
    auto c = small();
    c.R = 1;
    EXPECT_THROW(boot_same_subpops(grouped(), y, c), DomainError);
    EXPECT_THROW(boot_same_subpops(grouped(), make_data({1.0, 2.0, 3.0}), small()), DomainError);
}

TEST(Histogram, ClampsToRange) {
    auto h = histogram({-5.0, 0.0, 0.5, 0.99, 1.0, 7.0}, 0.0, 1.0, 2);
    ASSERT_EQ(h.size(), 2u);
    EXPECT_EQ(h[0].count, 2u);
    EXPECT_EQ(h[1].count, 4u);
    EXPECT_THROW(histogram({}, 1.0, 1.0, 3), DomainError);
}

TEST(GroupedDatasets, ThreeWithinGroupScales) {
    auto d = grouped_datasets(1);
    ASSERT_EQ(d.size(), 3u);
    for (const auto& y : d) {
        EXPECT_EQ(y.size(), 40u);
        EXPECT_EQ(y.num_groups(), 20);
    }
}
