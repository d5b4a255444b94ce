#include <gtest/gtest.h>

#include "properties.hpp"

using namespace bmx::props;

namespace {
void expect_pass(const PropertyResult& r) {
    EXPECT_GE(r.cases, 1000u) << r.name;
    EXPECT_EQ(r.failures, 0u) << r.name << ": worst " << r.worst << " " << r.detail;
}
}  // namespace

TEST(Properties, KlNonnegative) { expect_pass(kl_nonnegative(1)); }
TEST(Properties, ChainRule) { expect_pass(chain_rule(2)); }
TEST(Properties, DataProcessing) { expect_pass(data_processing(3)); }
TEST(Properties, GaussianMaximisesEntropy) { expect_pass(max_entropy(4)); }
TEST(Properties, ReplicateInformationShrinksWithDataSize) { expect_pass(dmi_monotone(5, false)); }
TEST(Properties, EigenvalueInterlacing) { expect_pass(interlacing(6)); }
TEST(Properties, PsiShape) { expect_pass(psi_shape()); }
TEST(Properties, FiniteDifferencesMatchAnalyticInformation) { expect_pass(fd_vs_analytic(7)); }
