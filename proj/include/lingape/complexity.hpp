#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <string_view>

#include "lingape/allocation.hpp"
#include "lingape/error.hpp"
#include "lingape/model.hpp"

namespace lingape {

struct Gaps {
    Vector values;  // Delta_i, with Delta_{a*} the smallest positive gap
    std::size_t best_arm = 0;
};

/// Delta_i = (x* - x_i)^T theta for i != a*, and Delta_{a*} = min_{j != a*} of the same.
inline Gaps instance_gaps(const Instance& inst) {
    Gaps g;
    g.best_arm = inst.best_arm();
    const double top = inst.mean(g.best_arm);
    g.values = (top - inst.means().array()).matrix();
    double smallest = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < g.values.size(); ++i) {
        if (static_cast<std::size_t>(i) != g.best_arm) smallest = std::min(smallest, g.values(i));
    }
    if (!(smallest > 0.0)) throw InvalidInput("instance_gaps: best arm is not unique");
    g.values(static_cast<Eigen::Index>(g.best_arm)) = smallest;
    return g;
}

/// H_eps = sum_k max_{i != j} p*_k(y(i,j)) rho(y(i,j)) / max(eps, (eps+Delta_i)/3, (eps+Delta_j)/3)^2.
inline double h_epsilon(const Instance& inst, double epsilon, const AllocationCache& cache) {
    if (!(epsilon >= 0.0)) throw InvalidInput("h_epsilon: epsilon must be nonnegative");
    const std::size_t K = inst.num_arms();
    if (cache.num_arms() != K) throw InvalidInput("h_epsilon: cache built for a different arm set");
    const Gaps g = instance_gaps(inst);
    double total = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
        double worst = 0.0;
        for (std::size_t i = 0; i < K; ++i) {
            for (std::size_t j = 0; j < K; ++j) {
                if (i == j) continue;
                const Decomposition& dec = cache(i, j);
                const double denom = std::max({epsilon, (epsilon + g.values(static_cast<Eigen::Index>(i))) / 3.0,
                                               (epsilon + g.values(static_cast<Eigen::Index>(j))) / 3.0});
                worst = std::max(worst, dec.ratio(static_cast<Eigen::Index>(k)) * dec.rho / (denom * denom));
            }
        }
        total += worst;
    }
    return total;
}

struct OracleComplexity {
    double h_oracle = 0.0;        // max_{i != a*} rho(y(a*, i)) / Delta_i^2
    double h_oracle_prime = 0.0;  // sum_{i != a*} rho(y(a*, i)) / Delta_i^2
};

inline OracleComplexity oracle_complexity(const Instance& inst, const AllocationCache& cache) {
    const Gaps g = instance_gaps(inst);
    OracleComplexity oc;
    for (std::size_t i = 0; i < inst.num_arms(); ++i) {
        if (i == g.best_arm) continue;
        const double delta_i = g.values(static_cast<Eigen::Index>(i));
        const double term = cache(g.best_arm, i).rho / (delta_i * delta_i);
        oc.h_oracle = std::max(oc.h_oracle, term);
        oc.h_oracle_prime += term;
    }
    return oc;
}

enum class BoundRegime { SmallLambda, LargeLambda, NoGuarantee };

inline constexpr std::string_view regime_name(BoundRegime r) {
    switch (r) {
        case BoundRegime::SmallLambda: return "small-lambda";
        case BoundRegime::LargeLambda: return "large-lambda";
        case BoundRegime::NoGuarantee: return "no-guarantee";
    }
    return "unknown";
}

struct BoundParams {
    double R = 1.0;
    double S = 1.0;
    std::size_t K = 2;
    std::size_t d = 1;
    double L = 1.0;
    double lambda = 1.0;
    double delta = 0.05;
};

struct StoppingBound {
    double bound = 0.0;
    BoundRegime regime = BoundRegime::NoGuarantee;
};

/// High-probability stopping-time bound for ratio-tracking LinGapE given complexity h.
///
/// small-lambda (lambda <= 2 R^2/S^2 log(K^2/delta)):
///     8 h R^2 log(K^2/delta) + C(h, delta),  C = K + 4 h R^2 d log(1 + M^2 L^2 / (lambda d)),
///     M = 2 sqrt(16 h^2 R^4 d L^2 / lambda + N^2),  N = 8 h R^2 log(K^2/delta) + K
/// large-lambda (lambda > 4 h R^2 L^2):
///     2 (4 h R^2 log(K^2/delta) + 2 h lambda S^2 + K)
/// Otherwise no bound applies; the small-lambda formula is reported for reference.
inline StoppingBound theorem2_bound(double h, const BoundParams& p) {
    if (!(h > 0.0)) throw InvalidInput("theorem2_bound: complexity must be positive");
    const double K = static_cast<double>(p.K);
    const double d = static_cast<double>(p.d);
    const double R2 = p.R * p.R;
    const double log_term = std::log(K * K / p.delta);

    const double N = 8.0 * h * R2 * log_term + K;
    const double M = 2.0 * std::sqrt(16.0 * h * h * R2 * R2 * d * p.L * p.L / p.lambda + N * N);
    const double C = K + 4.0 * h * R2 * d * std::log1p(M * M * p.L * p.L / (p.lambda * d));
    const double small = 8.0 * h * R2 * log_term + C;

    if (p.lambda <= 2.0 * R2 / (p.S * p.S) * log_term) return {small, BoundRegime::SmallLambda};
    if (p.lambda > 4.0 * h * R2 * p.L * p.L) {
        return {2.0 * (4.0 * h * R2 * log_term + 2.0 * h * p.lambda * p.S * p.S + K), BoundRegime::LargeLambda};
    }
    return {small, BoundRegime::NoGuarantee};
}

struct ComplexityReport {
    Gaps gaps;
    double epsilon = 0.0;
    double h_epsilon = 0.0;
    double h_zero = 0.0;
    double h_oracle = 0.0;
    double h_oracle_prime = 0.0;
    bool theorem3_ok = false;  // H_0 <= 72 H'_oracle
    StoppingBound bound;
};

inline ComplexityReport complexity_report(const Instance& inst, double epsilon, double lambda, double delta) {
    const AllocationCache cache(inst.arms());
    ComplexityReport r;
    r.gaps = instance_gaps(inst);
    r.epsilon = epsilon;
    r.h_epsilon = h_epsilon(inst, epsilon, cache);
    r.h_zero = h_epsilon(inst, 0.0, cache);
    const OracleComplexity oc = oracle_complexity(inst, cache);
    r.h_oracle = oc.h_oracle;
    r.h_oracle_prime = oc.h_oracle_prime;
    r.theorem3_ok = r.h_zero <= 72.0 * r.h_oracle_prime * (1.0 + 1e-12);
    r.bound = theorem2_bound(r.h_epsilon, BoundParams{inst.R(), inst.S(), inst.num_arms(), inst.dim(),
                                                     inst.arms().max_norm(), lambda, delta});
    return r;
}

}  // namespace lingape
