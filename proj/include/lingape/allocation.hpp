#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <sstream>
#include <vector>

#include "lingape/error.hpp"
#include "lingape/linalg.hpp"
#include "lingape/model.hpp"
#include "lingape/simplex.hpp"

namespace lingape {

/// Minimal-L1 representation of a direction y in the arm features.
///
/// weights w solve  min sum|w_k|  s.t.  sum w_k x_k = y;  ratio p_k = |w_k| / sum|w|
/// is the asymptotically optimal share of pulls for estimating y^T theta, and
/// rho = (sum|w_k|)^2 = sum_k w_k^2 / p_k is the matching variance constant.
///
/// rho is the *squared* L1 norm. This is the value that makes sum w^2/p and the
/// canonical-basis case (rho(e_i - e_j) = 4) agree.
struct Decomposition {
    Vector direction;
    Vector weights;
    Vector ratio;
    double l1 = 0.0;
    double rho = 0.0;

    // Arms with ratio above the support threshold.
    std::vector<std::size_t> support() const {
        std::vector<std::size_t> s;
        for (Eigen::Index k = 0; k < ratio.size(); ++k) {
            if (ratio(k) > kSupportThreshold) s.push_back(static_cast<std::size_t>(k));
        }
        return s;
    }

    static constexpr double kSupportThreshold = 1e-12;
};

namespace detail {

inline Decomposition decomposition_from_weights(Vector y, Vector w) {
    Decomposition dec;
    dec.l1 = w.cwiseAbs().sum();
    dec.rho = dec.l1 * dec.l1;
    dec.ratio = dec.l1 > 0.0 ? Vector(w.cwiseAbs() / dec.l1) : Vector(Vector::Zero(w.size()));
    dec.direction = std::move(y);
    dec.weights = std::move(w);
    return dec;
}

}  // namespace detail

/// Solves the L1 problem as an LP over split variables w = w+ - w- (2K columns,
/// d equality rows) with Bland's-rule simplex. The direction is normalized before
/// solving and the weights on the optimal support are polished by least squares.
inline Decomposition l1_decompose(const Vector& y, const ArmSet& arms) {
    detail::require_dim(y, arms.dim(), "l1_decompose");
    if (!y.allFinite()) throw InvalidInput("l1_decompose: non-finite direction");
    const auto K = static_cast<Eigen::Index>(arms.size());
    const double scale = y.norm();
    if (scale == 0.0) return detail::decomposition_from_weights(y, Vector::Zero(K));

    const Matrix xt = arms.features().transpose();  // d x K
    Matrix A(xt.rows(), 2 * K);
    A << xt, -xt;
    const Vector target = y / scale;
    const LpResult lp = solve_lp(A, target, Vector::Ones(2 * K));

    if (lp.status != LpStatus::Optimal) {
        const Vector w_ls = xt.completeOrthogonalDecomposition().solve(y);
        const double residual = (xt * w_ls - y).norm();
        std::ostringstream msg;
        msg << "l1_decompose: direction is not in the span of the arm features (residual norm "
            << residual << ")";
        throw InfeasibleDirection(msg.str(), residual);
    }

    Vector w = lp.x.head(K) - lp.x.tail(K);

    // Re-solve on the support so that X^T w = y holds to working precision.
    std::vector<Eigen::Index> support;
    for (Eigen::Index k = 0; k < K; ++k) {
        if (w(k) != 0.0) support.push_back(k);
    }
    if (!support.empty()) {
        Matrix sub(xt.rows(), static_cast<Eigen::Index>(support.size()));
        for (std::size_t s = 0; s < support.size(); ++s) sub.col(static_cast<Eigen::Index>(s)) = xt.col(support[s]);
        const Vector ws = sub.colPivHouseholderQr().solve(target);
        if ((sub * ws - target).norm() <= (xt * w - target).norm() + 1e-14) {
            bool same_signs = true;
            for (std::size_t s = 0; s < support.size(); ++s) {
                if (ws(static_cast<Eigen::Index>(s)) * w(support[s]) < 0.0) same_signs = false;
            }
            if (same_signs) {
                w.setZero();
                for (std::size_t s = 0; s < support.size(); ++s) w(support[s]) = ws(static_cast<Eigen::Index>(s));
            }
        }
    }
    return detail::decomposition_from_weights(y, scale * w);
}

/// Decompositions of y(i, j) = x_i - x_j for every ordered pair i != j. Each
/// unordered pair is solved once; (j, i) is the negation of (i, j).
class AllocationCache {
public:
    explicit AllocationCache(const ArmSet& arms) : K_(arms.size()), entries_(K_ * K_) {
        for (std::size_t i = 0; i < K_; ++i) {
            for (std::size_t j = i + 1; j < K_; ++j) {
                Decomposition d = l1_decompose(arms.direction(i, j), arms);
                Decomposition neg = d;
                neg.direction = -d.direction;
                neg.weights = -d.weights;
                entries_[i * K_ + j] = std::move(d);
                entries_[j * K_ + i] = std::move(neg);
            }
        }
        for (std::size_t i = 0; i < K_; ++i) {
            entries_[i * K_ + i] = detail::decomposition_from_weights(
                Vector::Zero(static_cast<Eigen::Index>(arms.dim())), Vector::Zero(static_cast<Eigen::Index>(K_)));
        }
    }

    std::size_t num_arms() const noexcept { return K_; }
    // Number of ordered pairs i != j covered.
    std::size_t size() const noexcept { return K_ * (K_ - 1); }

    const Decomposition& operator()(std::size_t i, std::size_t j) const {
        if (i >= K_ || j >= K_) throw InvalidInput("AllocationCache: arm index out of range");
        return entries_[i * K_ + j];
    }

private:
    std::size_t K_;
    std::vector<Decomposition> entries_;
};

/// argmin_a y^T (A + x_a x_a^T)^{-1} y, lowest index on ties.
inline std::size_t greedy_arm(const DesignState& state, const Vector& y, const ArmSet& arms) {
    detail::require_dim(y, state.dim(), "greedy_arm");
    const Vector Ay = state.inverse() * y;
    const double base = y.dot(Ay);
    std::size_t best = 0;
    double best_value = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < arms.size(); ++a) {
        const Vector x = arms.arm(a);
        const Vector u = state.inverse() * x;
        const double c = Ay.dot(x);
        const double value = base - c * c / (1.0 + x.dot(u));
        if (a == 0 || detail::strictly_less(value, best_value)) {
            best = a;
            best_value = value;
        }
    }
    return best;
}

/// Same rule for the direction x_i - x_j, read off the tracked arm Gram in O(K).
inline std::size_t greedy_arm_for_pair(const DesignState& state, std::size_t i, std::size_t j) {
    const Matrix& G = state.arm_gram();
    const auto ii = static_cast<Eigen::Index>(i), jj = static_cast<Eigen::Index>(j);
    const double base = state.pair_norm_sq(i, j);
    std::size_t best = 0;
    double best_value = std::numeric_limits<double>::infinity();
    for (Eigen::Index a = 0; a < G.rows(); ++a) {
        const double c = G(ii, a) - G(jj, a);
        const double value = base - c * c / (1.0 + G(a, a));
        if (a == 0 || detail::strictly_less(value, best_value)) {
            best = static_cast<std::size_t>(a);
            best_value = value;
        }
    }
    return best;
}

/// Ratio tracking: argmin over {a : p*_a > 0} of T_a / p*_a, lowest index on ties.
inline std::size_t ratio_arm(std::span<const std::uint64_t> counts, const Decomposition& dec) {
    std::size_t best = 0;
    double best_value = std::numeric_limits<double>::infinity();
    bool found = false;
    for (Eigen::Index a = 0; a < dec.ratio.size(); ++a) {
        const double p = dec.ratio(a);
        if (!(p > Decomposition::kSupportThreshold)) continue;
        const auto idx = static_cast<std::size_t>(a);
        const double t = idx < counts.size() ? static_cast<double>(counts[idx]) : 0.0;
        const double value = t / p;
        if (!found || detail::strictly_less(value, best_value)) {
            best = idx;
            best_value = value;
            found = true;
        }
    }
    if (!found) throw InvalidInput("ratio_arm: decomposition has no positive ratio entry");
    return best;
}

struct WeightedDirection {
    Vector direction;
    double weight = 1.0;
};

namespace detail {

// Relative temperature of the smoothed max in the design step.
inline constexpr double kDesignTemperature = 1e-2;

// Soft-max weights exp((v_k - M) / T), T = kDesignTemperature * M, over the current
// weighted norms v_k of the design directions (M = max_k v_k).
//
// A plain max stalls whenever several directions sit near it: no single pull lowers
// all of them, so the arm that shaves a little off each of them beats the arm the
// hardest direction needs. The design step instead takes the pull with the largest
// first-order decrease of the smoothed max, sum_k w_k * (v_k - v_k(a)).
inline std::vector<double> softmax_weights(const std::vector<double>& values) {
    double top = 0.0;
    for (double v : values) top = std::max(top, v);
    std::vector<double> w(values.size(), 0.0);
    if (!(top > 0.0)) {
        std::fill(w.begin(), w.end(), 1.0);
        return w;
    }
    const double temperature = kDesignTemperature * top;
    for (std::size_t k = 0; k < values.size(); ++k) w[k] = std::exp((values[k] - top) / temperature);
    return w;
}

}  // namespace detail

/// One greedy step of the weighted transductive design
///   min_a max_{(y, w)} y^T (A + x_a x_a^T)^{-1} y / w^2,
/// with the max smoothed as in detail::softmax_weights; lowest index on ties.
/// For a single direction this is greedy_arm.
inline std::size_t design_greedy_step(const DesignState& state, std::span<const WeightedDirection> directions,
                                      const ArmSet& arms) {
    if (directions.empty()) throw InvalidInput("design_greedy_step: no directions given");
    for (const auto& d : directions) {
        detail::require_dim(d.direction, state.dim(), "design_greedy_step");
        if (!(d.weight > 0.0)) throw InvalidInput("design_greedy_step: direction weights must be positive");
    }
    std::vector<Vector> inv_y;
    std::vector<double> current;
    for (const auto& d : directions) {
        inv_y.push_back(state.inverse() * d.direction);
        current.push_back(d.direction.dot(inv_y.back()) / (d.weight * d.weight));
    }
    const std::vector<double> w = detail::softmax_weights(current);
    std::size_t best = 0;
    double best_gain = -1.0;
    for (std::size_t a = 0; a < arms.size(); ++a) {
        const Vector x = arms.arm(a);
        const double denom = 1.0 + x.dot(state.inverse() * x);
        double gain = 0.0;
        for (std::size_t k = 0; k < directions.size(); ++k) {
            const double c = inv_y[k].dot(x);
            gain += w[k] * c * c / (directions[k].weight * directions[k].weight);
        }
        gain /= denom;
        if (a == 0 || detail::strictly_greater(gain, best_gain)) {
            best = a;
            best_gain = gain;
        }
    }
    return best;
}

/// A pairwise direction x_i - x_j with weight, for the Gram fast path.
struct PairDirection {
    std::size_t i = 0;
    std::size_t j = 0;
    double weight = 1.0;
};

/// design_greedy_step restricted to pairwise directions, evaluated on the tracked
/// arm Gram G. The weighted sum over pairs of (G_ia - G_ja)^2 is the Laplacian form
/// g^T L g with g = G e_a, so one step costs a K x K product.
inline std::size_t design_greedy_step_pairs(const DesignState& state, std::span<const PairDirection> directions,
                                            std::span<const std::size_t> candidates) {
    if (directions.empty()) throw InvalidInput("design_greedy_step_pairs: no directions given");
    const Matrix& G = state.arm_gram();
    std::vector<double> current;
    current.reserve(directions.size());
    for (const auto& d : directions) {
        const auto ii = static_cast<Eigen::Index>(d.i), jj = static_cast<Eigen::Index>(d.j);
        current.push_back((G(ii, ii) + G(jj, jj) - 2.0 * G(ii, jj)) / (d.weight * d.weight));
    }
    const std::vector<double> w = detail::softmax_weights(current);

    Matrix L = Matrix::Zero(G.rows(), G.cols());
    for (std::size_t k = 0; k < directions.size(); ++k) {
        const auto ii = static_cast<Eigen::Index>(directions[k].i), jj = static_cast<Eigen::Index>(directions[k].j);
        const double c = w[k] / (directions[k].weight * directions[k].weight);
        L(ii, ii) += c;
        L(jj, jj) += c;
        L(ii, jj) -= c;
        L(jj, ii) -= c;
    }
    const Matrix LG = L * G;

    std::size_t best = candidates.empty() ? 0 : candidates.front();
    double best_gain = -1.0;
    bool first = true;
    for (std::size_t a : candidates) {
        const auto aa = static_cast<Eigen::Index>(a);
        const double gain = G.col(aa).dot(LG.col(aa)) / (1.0 + G(aa, aa));
        if (first || detail::strictly_greater(gain, best_gain)) {
            best = a;
            best_gain = gain;
            first = false;
        }
    }
    return best;
}

}  // namespace lingape
