#include <gtest/gtest.h>

#include <sstream>
#include <string>

#include "realtree/selftest.hpp"

namespace {

using namespace realtree;

TEST(Selftest, DefaultSeedPassesEverySuite) {
    std::ostringstream log;
    EXPECT_TRUE(run_selftest(42, 100, log)) << log.str();
    EXPECT_EQ(log.str(),
              "roundtrip: pass (100 cases)\n"
              "mirror: pass (100 cases)\n"
              "balanced: pass (100 cases)\n"
              "vanishing: pass (100 cases)\n");
}

TEST(Selftest, OtherSeedsPass) {
    for (std::uint64_t seed : {1u, 7u, 1234u, 99991u}) {
        for (const SuiteResult& r : {selftest_roundtrip(seed, 40), selftest_mirror(seed, 40),
                                     selftest_balanced(seed, 40), selftest_vanishing(seed, 40)}) {
            EXPECT_TRUE(r.passed()) << r.name << " seed " << seed << " first failure " << r.first_failure;
        }
    }
}

TEST(Selftest, CasesAreIndependentOfSuiteSize) {
    // Case k draws from its own stream, so a prefix of a longer run matches.
    Rng a(42, (std::uint64_t{3} << 32) | 5);
    Rng b(42, (std::uint64_t{3} << 32) | 5);
    const Representation ra = random_balanced_representation(a);
    const Representation rb = random_balanced_representation(b);
    EXPECT_EQ(ra.L, rb.L);
    EXPECT_EQ(ra.x, rb.x);
}

TEST(Generators, ContractingNormsSum) {
    for (int k = 0; k < 100; ++k) {
        Rng rng(83, static_cast<std::uint64_t>(k));
        const Representation rep = random_contracting_representation(rng);
        ASSERT_NO_THROW(rep.validate());
        ASSERT_NEAR(spectral_norm(rep.L) + spectral_norm(rep.R), 0.9, 1e-12);
    }
}

TEST(Generators, BalancedFamilyMeetsHypotheses) {
    for (int k = 0; k < 200; ++k) {
        Rng rng(89, static_cast<std::uint64_t>(k));
        double alpha = 0.0;
        const Representation rep = random_balanced_representation(rng, &alpha);
        ASSERT_NE(alpha, 0.0);
        ASSERT_LE(std::abs(alpha), 2.0);
        ASSERT_TRUE(rep.L.triangularView<Eigen::Upper>().toDenseMatrix().isZero(0.0));
        ASSERT_EQ(rep.R, alpha * rep.L);
        const auto h = nilpotency_index(rep.L);
        ASSERT_TRUE(h.has_value());
        ASSERT_FALSE(in_kernel(matrix_power(rep.L, static_cast<unsigned>(*h - 1)), rep.x));
    }
}

TEST(Generators, VanishingFamilyHasRequestedTheta) {
    for (int k = 0; k < 100; ++k) {
        Rng rng(97, static_cast<std::uint64_t>(k));
        const Representation rep = random_vanishing_representation(rng);
        const double nl = spectral_norm(rep.L);
        const double nr = spectral_norm(rep.R);
        ASSERT_NEAR(std::max(nl, nr), 0.5, 1e-12);
        ASSERT_LE(std::min(nl, nr), 0.4 + 1e-12);
    }
}

}  // namespace
