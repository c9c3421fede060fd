#include <cmath>

#include <gtest/gtest.h>

#include "lingape/complexity.hpp"
#include "support.hpp"

namespace lingape {
namespace {

using testing::canonical_instance;
using testing::random_instance;

double h(const Instance& inst, double eps) { return h_epsilon(inst, eps, AllocationCache(inst.arms())); }

TEST(Gaps, SettingTwo) {
    const Gaps g = instance_gaps(make_setting_two(5, 0.5));
    EXPECT_EQ(g.best_arm, 0u);
    for (Eigen::Index i = 0; i < 5; ++i) EXPECT_DOUBLE_EQ(g.values(i), 0.5);
}

TEST(Gaps, SettingOne) {
    const Gaps g = instance_gaps(make_setting_one(5));
    const double hard = 2.0 * (1.0 - std::cos(0.01));
    EXPECT_NEAR(g.values(5), hard, 1e-15);
    for (Eigen::Index i = 1; i <= 4; ++i) EXPECT_DOUBLE_EQ(g.values(i), 2.0);
    EXPECT_NEAR(g.values(0), hard, 1e-15);
}

TEST(Gaps, TwoArmsShareTheirGap) {
    const Instance inst = make_setting_two(2, 0.7);
    const Gaps g = instance_gaps(inst);
    EXPECT_DOUBLE_EQ(g.values(0), g.values(1));
}

TEST(Gaps, PositiveExceptAtBestWhichIsMinimum) {
    Rng rng(1);
    for (int trial = 0; trial < 20; ++trial) {
        const Instance inst = random_instance(3, 6, rng);
        const Gaps g = instance_gaps(inst);
        double smallest = INFINITY;
        for (std::size_t i = 0; i < 6; ++i) {
            EXPECT_GT(g.values(Eigen::Index(i)), 0.0);
            if (i != g.best_arm) smallest = std::min(smallest, inst.mean(g.best_arm) - inst.mean(i));
        }
        EXPECT_DOUBLE_EQ(g.values(Eigen::Index(g.best_arm)), smallest);
    }
}

TEST(HEpsilon, CanonicalClosedForm) {
    EXPECT_NEAR(h(canonical_instance(5, 0.5), 0.0), 360.0, 1e-10 * 360.0);
    for (std::size_t K : {2, 3, 6}) {
        for (double gap : {0.1, 1.0, 2.0}) {
            EXPECT_NEAR(h(canonical_instance(K, gap), 0.0), 18.0 * K / (gap * gap), 1e-10 * 18.0 * K / (gap * gap));
        }
    }
}

TEST(HEpsilon, ReductionFormulaForCanonicalArms) {
    for (double eps : {0.0, 0.01, 0.1, 0.3, 1.0, 5.0}) {
        const Instance inst = canonical_instance(5, 0.5);
        const Gaps g = instance_gaps(inst);
        double closed = 0.0;
        for (Eigen::Index k = 0; k < 5; ++k) {
            const double denom = std::max(eps, (eps + g.values(k)) / 3.0);
            closed += 2.0 / (denom * denom);
        }
        EXPECT_NEAR(h(inst, eps), closed, 1e-10 * closed) << "eps " << eps;
    }
}

TEST(HEpsilon, VanishesForLargeEpsilon) {
    const Instance inst = make_setting_one(3, 0.1);
    EXPECT_LT(h(inst, 1e6), 1e-9);
}

TEST(HEpsilon, PropertyNonincreasingInEpsilon) {
    Rng rng(3);
    for (int trial = 0; trial < 10; ++trial) {
        const Instance inst = random_instance(3, 5, rng);
        const AllocationCache cache(inst.arms());
        double prev = INFINITY;
        for (double eps : {0.0, 0.001, 0.01, 0.1, 1.0, 10.0}) {
            const double v = h_epsilon(inst, eps, cache);
            EXPECT_TRUE(std::isfinite(v));
            EXPECT_LE(v, prev);
            prev = v;
        }
    }
}

TEST(HEpsilon, RejectsNegativeEpsilonAndForeignCache) {
    const Instance inst = make_setting_two(3, 1.0);
    EXPECT_THROW(h_epsilon(inst, -1.0, AllocationCache(inst.arms())), InvalidInput);
    EXPECT_THROW(h_epsilon(inst, 0.0, AllocationCache(ArmSet(Matrix::Identity(4, 4)))), InvalidInput);
}

TEST(OracleComplexity, CanonicalValues) {
    const Instance inst = canonical_instance(5, 0.5);
    const OracleComplexity oc = oracle_complexity(inst, AllocationCache(inst.arms()));
    EXPECT_NEAR(oc.h_oracle, 16.0, 1e-10);
    EXPECT_NEAR(oc.h_oracle_prime, 64.0, 1e-10);
    const ComplexityReport r = complexity_report(inst, 0.0, 1.0, 0.05);
    EXPECT_TRUE(r.theorem3_ok);
    EXPECT_LE(r.h_zero, 72.0 * r.h_oracle_prime);
}

TEST(OracleComplexity, TwoArmsSingleSummand) {
    const Instance inst = make_setting_two(2, 0.8);
    const OracleComplexity oc = oracle_complexity(inst, AllocationCache(inst.arms()));
    EXPECT_DOUBLE_EQ(oc.h_oracle, oc.h_oracle_prime);
}

TEST(OracleComplexity, PropertyOrdering) {
    Rng rng(5);
    for (int trial = 0; trial < 30; ++trial) {
        const Instance inst = random_instance(2 + trial % 4, 6, rng);
        const OracleComplexity oc = oracle_complexity(inst, AllocationCache(inst.arms()));
        EXPECT_LE(oc.h_oracle, oc.h_oracle_prime * (1 + 1e-12));
        EXPECT_LE(oc.h_oracle_prime, 6.0 * oc.h_oracle * (1 + 1e-12));
    }
}

TEST(Theorem3, HoldsOnRandomInstances) {
    Rng rng(7);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t d = 2 + static_cast<std::size_t>(trial % 5);
        const std::size_t K = d + static_cast<std::size_t>(trial / 5 % 5);
        const Instance inst = random_instance(d, K, rng);
        const ComplexityReport r = complexity_report(inst, 0.0, 1.0, 0.05);
        EXPECT_TRUE(r.theorem3_ok) << "trial " << trial;
    }
}

TEST(Theorem2, SmallLambdaExample) {
    const BoundParams p{1.0, 0.5, 5, 5, 1.0, 1.0, 0.05};
    const StoppingBound b = theorem2_bound(360.0, p);
    EXPECT_EQ(b.regime, BoundRegime::SmallLambda);
    // independent high-precision evaluation
    EXPECT_NEAR(b.bound, 157540.9286260247, 1e-9 * 157540.9286260247);
    const double N = 2880.0 * std::log(500.0) + 5.0;
    EXPECT_NEAR(N, 17903.07132345591, 1e-9);
}

TEST(Theorem2, LargeLambdaRegimeIsLinearInLambda) {
    const double H = 360.0;
    BoundParams p{1.0, 0.5, 5, 5, 1.0, 10.0 * 4.0 * H, 0.05};
    const StoppingBound b = theorem2_bound(H, p);
    EXPECT_EQ(b.regime, BoundRegime::LargeLambda);
    EXPECT_NEAR(b.bound, 5201908.071323456, 1e-9 * 5201908.071323456);
    p.lambda *= 2.0;
    const StoppingBound b2 = theorem2_bound(H, p);
    EXPECT_NEAR(b2.bound - b.bound, 2.0 * 2.0 * H * 14400.0 * 0.25, 1e-6);
}

TEST(Theorem2, NoGuaranteeBetweenRegimes) {
    const BoundParams p{1.0, 0.5, 5, 5, 1.0, 100.0, 0.05};
    const StoppingBound b = theorem2_bound(360.0, p);
    EXPECT_EQ(b.regime, BoundRegime::NoGuarantee);
    EXPECT_GT(b.bound, 0.0);
}

TEST(Theorem2, TinyComplexityFloor) {
    const BoundParams p{1.0, 0.5, 5, 5, 1.0, 1.0, 0.05};
    const StoppingBound b = theorem2_bound(1e-12, p);
    EXPECT_EQ(b.regime, BoundRegime::SmallLambda);
    EXPECT_NEAR(b.bound, 5.0, 1e-6);
    const BoundParams big{1.0, 0.5, 5, 5, 1.0, 1e3, 0.05};
    const StoppingBound c = theorem2_bound(1e-12, big);
    EXPECT_EQ(c.regime, BoundRegime::LargeLambda);
    EXPECT_NEAR(c.bound, 10.0, 1e-6);
}

TEST(Theorem2, PropertyNondecreasingInH) {
    const BoundParams p{1.0, 0.5, 5, 5, 1.0, 1.0, 0.05};
    double prev = 0.0;
    for (double H = 1e-3; H < 1e7; H *= 1.7) {
        const double b = theorem2_bound(H, p).bound;
        EXPECT_GE(b, prev);
        prev = b;
    }
    EXPECT_THROW(theorem2_bound(0.0, p), InvalidInput);
}

}  // namespace
}  // namespace lingape
