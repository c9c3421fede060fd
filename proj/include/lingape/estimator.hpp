#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>

#include "lingape/error.hpp"
#include "lingape/linalg.hpp"
#include "lingape/model.hpp"

namespace lingape {

/// Regularized least-squares estimator with the adaptive confidence ellipsoid
///   C_t = R sqrt(2 log(c_K det(A_t)^{1/2} det(lambda I)^{-1/2} / delta)) + sqrt(lambda) S
/// where c_K is the pair union-bound multiplier (K^2 by default).
class EstimatorState {
public:
    EstimatorState(DesignState design, double R, double S, double delta, std::size_t num_arms)
        : EstimatorState(std::move(design), R, S, delta, num_arms,
                         static_cast<double>(num_arms) * static_cast<double>(num_arms)) {}

    EstimatorState(DesignState design, double R, double S, double delta, std::size_t num_arms,
                   double pair_correction)
        : design_(std::move(design)), R_(R), S_(S), delta_(delta), num_arms_(num_arms),
          pair_correction_(pair_correction) {
        if (!(delta > 0.0 && delta < 1.0)) throw InvalidInput("EstimatorState: delta must lie in (0, 1)");
        if (!(R > 0.0) || !(S > 0.0)) throw InvalidInput("EstimatorState: R and S must be positive");
        if (num_arms == 0) throw InvalidInput("EstimatorState: number of arms must be positive");
        if (!(pair_correction > 0.0)) throw InvalidInput("EstimatorState: pair correction must be positive");
    }

    DesignState& design() noexcept { return design_; }
    const DesignState& design() const noexcept { return design_; }
    double R() const noexcept { return R_; }
    double S() const noexcept { return S_; }
    double delta() const noexcept { return delta_; }
    std::size_t num_arms() const noexcept { return num_arms_; }
    double pair_correction() const noexcept { return pair_correction_; }

private:
    DesignState design_;
    double R_;
    double S_;
    double delta_;
    std::size_t num_arms_;
    double pair_correction_;
};

inline Vector theta_hat(const EstimatorState& est) { return est.design().theta_hat(); }

/// C_t, read off the maintained log-determinant.
inline double confidence_scale(const EstimatorState& est) {
    const auto& design = est.design();
    const double log_ratio =
        0.5 * (design.log_det() - static_cast<double>(design.dim()) * std::log(design.lambda()));
    const double inner = std::log(est.pair_correction()) + log_ratio - std::log(est.delta());
    return est.R() * std::sqrt(2.0 * std::max(0.0, inner)) + std::sqrt(design.lambda()) * est.S();
}

namespace detail {

inline void require_arm(std::size_t i, const ArmSet& arms, const char* what) {
    if (i >= arms.size()) {
        throw InvalidInput(std::string(what) + ": arm index " + std::to_string(i) + " out of range (K = " +
                           std::to_string(arms.size()) + ")");
    }
}

}  // namespace detail

/// Estimated gap (x_i - x_j)^T theta_hat.
inline double gap_estimate(const EstimatorState& est, std::size_t i, std::size_t j, const ArmSet& arms) {
    detail::require_arm(i, arms, "gap_estimate");
    detail::require_arm(j, arms, "gap_estimate");
    if (i == j) return 0.0;
    return arms.direction(i, j).dot(theta_hat(est));
}

/// beta_t(i, j) = ||x_i - x_j||_{A_t^{-1}} C_t (regularized design).
inline double gap_width(const EstimatorState& est, std::size_t i, std::size_t j, const ArmSet& arms) {
    detail::require_arm(i, arms, "gap_width");
    detail::require_arm(j, arms, "gap_width");
    if (i == j) return 0.0;
    return weighted_norm(est.design(), arms.direction(i, j)) * confidence_scale(est);
}

// Azuma log factor sqrt(2 log(6 n^2 K / (delta pi^2))) shared by the fixed-design widths.
inline double static_log_factor(double K, double n, double delta) {
    const double arg = 6.0 * n * n * K / (delta * std::numbers::pi * std::numbers::pi);
    return std::sqrt(2.0 * std::max(0.0, std::log(arg)));
}

/// Fixed-sequence width 2 sigma ||y||_{A^{-1}} sqrt(2 log(6 n^2 K / (delta pi^2))).
inline double static_width(const DesignState& design, const Vector& y, double sigma, std::size_t K,
                           std::uint64_t n, double delta) {
    if (n < 1) throw InvalidInput("static_width: n must be at least 1");
    if (!(delta > 0.0 && delta < 1.0)) throw InvalidInput("static_width: delta must lie in (0, 1)");
    return 2.0 * sigma * weighted_norm(design, y) *
           static_log_factor(static_cast<double>(K), static_cast<double>(n), delta);
}

}  // namespace lingape
