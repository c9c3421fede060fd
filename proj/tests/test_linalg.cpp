#include <cmath>

#include <gtest/gtest.h>

#include "lingape/linalg.hpp"
#include "support.hpp"

namespace lingape {
namespace {

using testing::random_matrix;
using testing::random_spd;
using testing::random_vector;

// A DesignState whose matrix equals an arbitrary SPD target, built by feeding the
// columns of chol(target - lambda I) as updates.
DesignState state_for(const Matrix& target, double lambda) {
    const auto d = target.rows();
    DesignState s(static_cast<std::size_t>(d), lambda);
    Eigen::LLT<Matrix> llt(target - lambda * Matrix::Identity(d, d));
    const Matrix L = llt.matrixL();
    for (Eigen::Index c = 0; c < d; ++c) s.rank_one_update(L.col(c), 0.0, 0);
    return s;
}

Vector vec(std::initializer_list<double> v) {
    Vector out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) out(i++) = x;
    return out;
}

TEST(DesignState, FreshStateIsScaledIdentity) {
    DesignState s(3, 0.5);
    EXPECT_TRUE(s.matrix().isApprox(0.5 * Matrix::Identity(3, 3)));
    EXPECT_TRUE(s.inverse().isApprox(2.0 * Matrix::Identity(3, 3)));
    EXPECT_NEAR(s.log_det(), 3.0 * std::log(0.5), 1e-15);
    EXPECT_EQ(s.round(), 0u);
}

TEST(DesignState, DiagonalUpdate) {
    DesignState s(2, 1.0);
    s.rank_one_update(vec({1.0, 0.0}), 0.0, 0);
    EXPECT_TRUE(s.matrix().isApprox(vec({2.0, 1.0}).asDiagonal().toDenseMatrix()));
    EXPECT_NEAR(s.inverse()(0, 0), 0.5, 1e-15);
    EXPECT_NEAR(s.inverse()(1, 1), 1.0, 1e-15);
    EXPECT_NEAR(s.inverse()(0, 1), 0.0, 1e-15);
    EXPECT_NEAR(s.log_det(), std::log(2.0), 1e-15);
    EXPECT_EQ(s.round(), 1u);
    EXPECT_EQ(s.count(0), 1u);
}

TEST(DesignState, ZeroUpdateOnlyAdvancesRound) {
    Rng rng(7);
    DesignState s(3, 1.0);
    for (int k = 0; k < 5; ++k) s.rank_one_update(random_vector(3, rng), 1.0, 0);
    const Matrix m = s.matrix(), inv = s.inverse();
    const double ld = s.log_det();
    s.rank_one_update(Vector::Zero(3), 4.0, 2);
    EXPECT_EQ(s.matrix(), m);
    EXPECT_EQ(s.inverse(), inv);
    EXPECT_EQ(s.log_det(), ld);
    EXPECT_EQ(s.round(), 6u);
    EXPECT_EQ(s.count(2), 1u);
}

TEST(DesignState, FiftyRandomUpdatesMatchDenseRecomputation) {
    Rng rng(11);
    DesignState s(3, 0.5);
    Matrix dense = 0.5 * Matrix::Identity(3, 3);
    Vector b = Vector::Zero(3);
    for (int k = 0; k < 50; ++k) {
        const Vector x = random_vector(3, rng);
        const double r = random_vector(1, rng)(0);
        s.rank_one_update(x, r, static_cast<std::size_t>(k % 4));
        dense += x * x.transpose();
        b += r * x;
    }
    const Matrix inv = dense.inverse();
    EXPECT_LE((s.inverse() - inv).norm() / inv.norm(), 1e-8);
    EXPECT_LE(std::abs(s.log_det() - std::log(dense.determinant())) / std::abs(std::log(dense.determinant())),
              1e-8);
    EXPECT_LE((s.response() - b).norm(), 1e-10);
    EXPECT_TRUE((s.matrix() * s.inverse()).isApprox(Matrix::Identity(3, 3), 1e-8));
}

TEST(DesignState, CountsSumToRound) {
    Rng rng(3);
    DesignState s(2, 1.0);
    for (int k = 0; k < 37; ++k) s.rank_one_update(random_vector(2, rng), 0.0, static_cast<std::size_t>(k % 5));
    std::uint64_t total = 0;
    for (auto c : s.counts()) total += c;
    EXPECT_EQ(total, s.round());
}

TEST(DesignState, MatrixMinusLambdaIsPositiveSemidefinite) {
    Rng rng(5);
    DesignState s(4, 2.0);
    for (int k = 0; k < 20; ++k) s.rank_one_update(random_vector(4, rng), 0.0, 0);
    Eigen::SelfAdjointEigenSolver<Matrix> es(s.matrix() - 2.0 * Matrix::Identity(4, 4));
    EXPECT_GE(es.eigenvalues().minCoeff(), -1e-10);
}

TEST(DesignState, RejectsBadInput) {
    DesignState s(2, 1.0);
    EXPECT_THROW(s.rank_one_update(Vector::Zero(3), 0.0, 0), InvalidInput);
    EXPECT_THROW(s.rank_one_update(vec({NAN, 0.0}), 0.0, 0), InvalidInput);
    EXPECT_THROW(s.rank_one_update(vec({1.0, 0.0}), INFINITY, 0), InvalidInput);
    EXPECT_THROW(DesignState(0, 1.0), InvalidInput);
    EXPECT_THROW(DesignState(2, 0.0), InvalidInput);
}

TEST(DesignState, TrackedGramAndEstimatesFollowUpdates) {
    Rng rng(19);
    const Matrix x = random_matrix(6, 3, rng);
    DesignState s(3, 1.0);
    s.track_arms(x);
    for (int k = 0; k < 200; ++k) s.pull_arm(static_cast<std::size_t>(k % 6), random_vector(1, rng)(0));
    const Matrix gram = x * s.matrix().inverse() * x.transpose();
    EXPECT_LE((s.arm_gram() - gram).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LE((s.arm_estimates() - x * s.theta_hat()).cwiseAbs().maxCoeff(), 1e-10);
    const Vector y = (x.row(1) - x.row(4)).transpose();
    EXPECT_NEAR(s.pair_norm_sq(1, 4), y.dot(s.matrix().inverse() * y), 1e-10);
    EXPECT_THROW(s.pull_arm(6, 0.0), InvalidInput);
}

TEST(WeightedNorm, HandExamples) {
    DesignState s(2, 1.0);
    EXPECT_DOUBLE_EQ(weighted_norm(s, vec({3.0, 4.0})), 5.0);
    EXPECT_DOUBLE_EQ(weighted_norm(s, Vector::Zero(2)), 0.0);
    s.rank_one_update(vec({1.0, 0.0}), 0.0, 0);
    EXPECT_NEAR(weighted_norm(s, vec({1.0, 1.0})), std::sqrt(1.5), 1e-15);
    EXPECT_THROW(weighted_norm(s, Vector::Zero(3)), InvalidInput);
}

TEST(WeightedNorm, ZeroOnlyForZeroVector) {
    Rng rng(23);
    const DesignState s = state_for(random_spd(4, rng), 0.5);
    for (int k = 0; k < 20; ++k) EXPECT_GT(weighted_norm(s, random_vector(4, rng)), 0.0);
}

TEST(NormIfAdded, HandExamples) {
    DesignState s(5, 1.0);
    const Vector y = vec({1.0, -1.0, 0.0, 0.0, 0.0});
    EXPECT_NEAR(norm_if_added(s, vec({1.0, 0.0, 0.0, 0.0, 0.0}), y), 1.5, 1e-15);
    EXPECT_NEAR(norm_if_added(s, vec({0.0, 0.0, 1.0, 0.0, 0.0}), y), 2.0, 1e-15);
    EXPECT_THROW(norm_if_added(s, Vector::Zero(4), y), InvalidInput);
    EXPECT_THROW(norm_if_added(s, y, Vector::Zero(4)), InvalidInput);
}

TEST(NormIfAdded, MatchesDenseInversionAndLeavesStateUntouched) {
    Rng rng(29);
    for (int trial = 0; trial < 50; ++trial) {
        const Matrix A = random_spd(4, rng);
        const DesignState s = state_for(A, 0.5);
        const Matrix before = s.inverse();
        const Vector x = random_vector(4, rng), y = random_vector(4, rng);
        const double oracle = y.dot((A + x * x.transpose()).inverse() * y);
        EXPECT_NEAR(norm_if_added(s, x, y), oracle, 1e-10 * oracle);
        EXPECT_EQ(s.inverse(), before);
    }
}

TEST(NormIfAdded, PropertyMonotoneUnderPositiveUpdates) {
    Rng rng(31);
    for (int trial = 0; trial < 200; ++trial) {
        const DesignState s = state_for(random_spd(3, rng), 0.5);
        const Vector x = random_vector(3, rng), y = random_vector(3, rng);
        const double alpha = std::exp(random_vector(1, rng)(0));
        const double base = y.dot(s.inverse() * y);
        EXPECT_LE(norm_if_added(s, std::sqrt(alpha) * x, y), base * (1.0 + 1e-12));
    }
}

TEST(DesignState, PropertyDeterminantGrowthBound) {
    Rng rng(37);
    const double lambda = 0.7, L = 1.3;
    const std::size_t d = 4;
    DesignState s(d, lambda);
    for (std::uint64_t t = 1; t <= 2000; ++t) {
        Vector x = random_vector(4, rng);
        x *= L * std::min(1.0, std::abs(random_vector(1, rng)(0))) / x.norm();
        s.rank_one_update(x, 0.0, 0);
        const double bound = static_cast<double>(d) * std::log(lambda + static_cast<double>(t) * L * L / d);
        ASSERT_LE(s.log_det(), bound + 1e-9) << "at round " << t;
    }
}

TEST(DesignState, PropertyDriftOverLongRunStaysSmall) {
    Rng rng(41);
    DesignState s(5, 1.0);
    s.set_refresh_interval(std::uint64_t{1} << 40);
    Matrix dense = Matrix::Identity(5, 5);
    for (int step = 1; step <= 100'000; ++step) {
        const Vector x = random_vector(5, rng) / std::sqrt(5.0);
        s.rank_one_update(x, 0.0, 0);
        dense += x * x.transpose();
        if (step % 10'000 == 0) {
            const Matrix inv = dense.inverse();
            ASSERT_LE((s.inverse() - inv).norm() / inv.norm(), 1e-8) << "step " << step;
            Eigen::LLT<Matrix> llt(dense);
            const double ld = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
            ASSERT_NEAR(s.log_det(), ld, 1e-6) << "step " << step;
        }
    }
}

TEST(DesignState, RefreshRestoresDenseValues) {
    Rng rng(43);
    DesignState s(3, 1.0);
    s.set_refresh_interval(7);
    for (int k = 0; k < 50; ++k) s.rank_one_update(random_vector(3, rng), 0.0, 0);
    EXPECT_LE((s.inverse() - s.matrix().inverse()).norm(), 1e-12);
}

}  // namespace
}  // namespace lingape
