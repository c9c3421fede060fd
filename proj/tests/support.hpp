#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>

#include "lingape/lingape.hpp"

namespace lingape::testing {

inline Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = n(rng);
    return m;
}

inline Vector random_vector(Eigen::Index n, Rng& rng) { return random_matrix(n, 1, rng).col(0); }

// Random SPD matrix lambda*I + B B^T.
inline Matrix random_spd(Eigen::Index d, Rng& rng, double lambda = 0.5) {
    const Matrix b = random_matrix(d, d, rng);
    return lambda * Matrix::Identity(d, d) + b * b.transpose();
}

// Unit-norm features, first d rows forced to span R^d, theta with a unique best arm.
inline Instance random_instance(std::size_t d, std::size_t K, Rng& rng, double sigma = 1.0) {
    for (;;) {
        Matrix x = random_matrix(static_cast<Eigen::Index>(K), static_cast<Eigen::Index>(d), rng);
        for (Eigen::Index i = 0; i < x.rows(); ++i) x.row(i).normalize();
        Eigen::FullPivLU<Matrix> lu(x);
        if (static_cast<std::size_t>(lu.rank()) < d) continue;
        Vector theta = random_vector(static_cast<Eigen::Index>(d), rng);
        theta.normalize();
        const Vector means = x * theta;
        Vector sorted = means;
        std::sort(sorted.data(), sorted.data() + sorted.size());
        if (sorted(sorted.size() - 1) - sorted(sorted.size() - 2) < 1e-3) continue;
        return Instance(ArmSet(std::move(x)), std::move(theta), GaussianNoise{sigma}, 1.0, 1.0);
    }
}

inline Instance canonical_instance(std::size_t d, double gap, double sigma = 1.0) {
    const auto n = static_cast<Eigen::Index>(d);
    Vector theta = Vector::Zero(n);
    theta(0) = gap;
    return Instance(ArmSet(Matrix::Identity(n, n)), std::move(theta), GaussianNoise{sigma}, 1.0, gap);
}

// Minimum of sum|w| over every support of at most d linearly independent arms that
// represents y exactly: the optimum of the L1 problem is attained at such a vertex.
inline double exhaustive_l1(const Vector& y, const ArmSet& arms) {
    const std::size_t K = arms.size(), d = arms.dim();
    const Matrix xt = arms.features().transpose();
    double best = std::numeric_limits<double>::infinity();
    for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << K); ++mask) {
        const auto size = static_cast<std::size_t>(std::popcount(mask));
        if (size > d) continue;
        Matrix sub(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(size));
        Eigen::Index c = 0;
        for (std::size_t k = 0; k < K; ++k)
            if (mask >> k & 1) sub.col(c++) = xt.col(static_cast<Eigen::Index>(k));
        Eigen::ColPivHouseholderQR<Matrix> qr(sub);
        if (static_cast<std::size_t>(qr.rank()) < size) continue;
        const Vector w = qr.solve(y);
        if ((sub * w - y).norm() > 1e-9 * std::max(1.0, y.norm())) continue;
        best = std::min(best, w.cwiseAbs().sum());
    }
    if (y.norm() == 0.0) return 0.0;
    return best;
}

}  // namespace lingape::testing
