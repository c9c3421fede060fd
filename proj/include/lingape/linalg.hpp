#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lingape/error.hpp"

namespace lingape {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

namespace detail {

inline bool all_finite(const Vector& v) { return v.allFinite(); }

inline void require_dim(const Vector& v, std::size_t dim, const char* what) {
    if (static_cast<std::size_t>(v.size()) != dim) {
        throw InvalidInput(std::string(what) + ": expected length " + std::to_string(dim) +
                           ", got " + std::to_string(v.size()));
    }
}

// Lowest-index argmin/argmax helpers share one tie rule: a later candidate only
// wins if it beats the incumbent by more than a relative 1e-12.
inline constexpr double kTieTolerance = 1e-12;

inline bool strictly_less(double candidate, double incumbent) {
    const double scale = std::max({std::abs(candidate), std::abs(incumbent), 1e-300});
    return candidate < incumbent - kTieTolerance * scale;
}

inline bool strictly_greater(double candidate, double incumbent) {
    return strictly_less(-candidate, -incumbent);
}

}  // namespace detail

/// Regularized design A = lambda*I + sum x x^T, with its inverse and log-determinant
/// maintained under rank-one updates, plus the response b = sum r x and pull counts.
///
/// Optionally the state tracks a fixed feature set X (K x d). It then also maintains
/// the arm-space Gram G = X A^{-1} X^T and the estimated rewards h = X A^{-1} b, which
/// lets algorithms evaluate every pairwise norm ||x_i - x_j||_{A^{-1}} in O(1).
class DesignState {
public:
    static constexpr std::uint64_t kDefaultRefreshInterval = std::uint64_t{1} << 20;

    DesignState(std::size_t dim, double lambda) : dim_(dim), lambda_(lambda) {
        if (dim == 0) throw InvalidInput("DesignState: dimension must be positive");
        if (!(lambda > 0.0) || !std::isfinite(lambda)) {
            throw InvalidInput("DesignState: lambda must be positive and finite");
        }
        const auto d = static_cast<Eigen::Index>(dim);
        matrix_ = lambda * Matrix::Identity(d, d);
        inverse_ = (1.0 / lambda) * Matrix::Identity(d, d);
        log_det_ = static_cast<double>(dim) * std::log(lambda);
        response_ = Vector::Zero(d);
        scratch_u_.resize(d);
    }

    // Start tracking the arm-space projection for `features` (one arm per row).
    void track_arms(const Matrix& features) {
        if (static_cast<std::size_t>(features.cols()) != dim_) {
            throw InvalidInput("DesignState::track_arms: feature dimension mismatch");
        }
        features_ = features;
        tracking_ = true;
        if (counts_.size() < static_cast<std::size_t>(features.rows())) {
            counts_.resize(static_cast<std::size_t>(features.rows()), 0);
        }
        scratch_g_.resize(features.rows());
        recompute_projection();
    }

    std::size_t dim() const noexcept { return dim_; }
    double lambda() const noexcept { return lambda_; }
    const Matrix& matrix() const noexcept { return matrix_; }
    const Matrix& inverse() const noexcept { return inverse_; }
    double log_det() const noexcept { return log_det_; }
    const Vector& response() const noexcept { return response_; }
    std::uint64_t round() const noexcept { return round_; }
    std::span<const std::uint64_t> counts() const noexcept { return counts_; }
    std::uint64_t count(std::size_t arm) const noexcept {
        return arm < counts_.size() ? counts_[arm] : 0;
    }

    bool tracks_arms() const noexcept { return tracking_; }
    const Matrix& features() const noexcept { return features_; }
    // G = X A^{-1} X^T
    const Matrix& arm_gram() const noexcept { return gram_; }
    // h = X theta_hat
    const Vector& arm_estimates() const noexcept { return estimates_; }

    // ||x_i - x_j||^2_{A^{-1}} from the tracked Gram.
    double pair_norm_sq(std::size_t i, std::size_t j) const noexcept {
        const auto a = static_cast<Eigen::Index>(i), b = static_cast<Eigen::Index>(j);
        return std::max(0.0, gram_(a, a) + gram_(b, b) - 2.0 * gram_(a, b));
    }

    Vector theta_hat() const { return inverse_ * response_; }

    std::uint64_t refresh_interval() const noexcept { return refresh_interval_; }
    void set_refresh_interval(std::uint64_t n) { refresh_interval_ = n == 0 ? 1 : n; }

    // Dense recomputation of inverse, log-det and the tracked projection from `matrix`.
    void refresh() {
        Eigen::LLT<Matrix> llt(matrix_);
        if (llt.info() != Eigen::Success) {
            throw ConstructionError("DesignState::refresh: design matrix lost positive definiteness");
        }
        const auto d = static_cast<Eigen::Index>(dim_);
        inverse_ = llt.solve(Matrix::Identity(d, d));
        inverse_ = 0.5 * (inverse_ + inverse_.transpose()).eval();
        log_det_ = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
        if (tracking_) recompute_projection();
        since_refresh_ = 0;
    }

    /// Adds x x^T to the design, r x to the response, and one pull to `arm`.
    /// The inverse follows Sherman-Morrison; the log-det grows by log(1 + x^T A^{-1} x)
    /// evaluated with the pre-update inverse.
    void rank_one_update(const Vector& x, double r, std::size_t arm) {
        detail::require_dim(x, dim_, "rank_one_update");
        if (!x.allFinite() || !std::isfinite(r)) {
            throw InvalidInput("rank_one_update: non-finite feature or reward");
        }
        apply_update(x, r, arm);
    }

    // Fast path for a pull of tracked arm `arm`; skips validation of the feature.
    void pull_arm(std::size_t arm, double r) {
        if (!tracking_ || arm >= static_cast<std::size_t>(features_.rows())) {
            throw InvalidInput("pull_arm: arm is not part of the tracked feature set");
        }
        if (!std::isfinite(r)) throw InvalidInput("pull_arm: non-finite reward");
        apply_update(features_.row(static_cast<Eigen::Index>(arm)).transpose(), r, arm);
    }

private:
    template <typename Vec>
    void apply_update(const Vec& x, double r, std::size_t arm) {
        scratch_u_.noalias() = inverse_ * x;
        const double s = std::max(0.0, x.dot(scratch_u_));
        const double denom = 1.0 + s;
        const double predicted = scratch_u_.dot(response_);  // x^T theta_hat before the pull

        if (s > 0.0) {
            inverse_.noalias() -= (scratch_u_ / denom) * scratch_u_.transpose();
            matrix_.noalias() += x * x.transpose();
            log_det_ += std::log1p(s);
        }
        response_.noalias() += r * x;

        if (tracking_) {
            scratch_g_.noalias() = features_ * scratch_u_;
            if (s > 0.0) gram_.noalias() -= (scratch_g_ / denom) * scratch_g_.transpose();
            estimates_.noalias() += ((r - predicted) / denom) * scratch_g_;
        }

        ++round_;
        if (arm >= counts_.size()) counts_.resize(arm + 1, 0);
        ++counts_[arm];
        if (++since_refresh_ >= refresh_interval_) refresh();
    }

    void recompute_projection() {
        gram_ = features_ * inverse_ * features_.transpose();
        gram_ = 0.5 * (gram_ + gram_.transpose()).eval();
        estimates_ = features_ * (inverse_ * response_);
    }

    std::size_t dim_;
    double lambda_;
    Matrix matrix_;
    Matrix inverse_;
    double log_det_ = 0.0;
    Vector response_;
    std::uint64_t round_ = 0;
    std::vector<std::uint64_t> counts_;

    bool tracking_ = false;
    Matrix features_;
    Matrix gram_;
    Vector estimates_;

    std::uint64_t refresh_interval_ = kDefaultRefreshInterval;
    std::uint64_t since_refresh_ = 0;

    Vector scratch_u_;
    Vector scratch_g_;
};

/// sqrt(y^T A^{-1} y).
inline double weighted_norm(const DesignState& state, const Vector& y) {
    detail::require_dim(y, state.dim(), "weighted_norm");
    return std::sqrt(std::max(0.0, y.dot(state.inverse() * y)));
}

/// y^T (A + x x^T)^{-1} y, evaluated through the Sherman-Morrison correction without
/// touching the state. Never exceeds y^T A^{-1} y.
inline double norm_if_added(const DesignState& state, const Vector& x, const Vector& y) {
    detail::require_dim(x, state.dim(), "norm_if_added (candidate)");
    detail::require_dim(y, state.dim(), "norm_if_added (direction)");
    const Vector u = state.inverse() * x;
    const double base = y.dot(state.inverse() * y);
    const double c = y.dot(u);
    const double value = base - c * c / (1.0 + x.dot(u));
    return std::max(0.0, value);
}

}  // namespace lingape
