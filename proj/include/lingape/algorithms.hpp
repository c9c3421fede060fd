#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lingape/allocation.hpp"
#include "lingape/error.hpp"
#include "lingape/estimator.hpp"
#include "lingape/linalg.hpp"
#include "lingape/model.hpp"

namespace lingape {

enum class Algorithm { LinGapEGreedy, LinGapERatio, XYStatic, XYAdaptive, XYOracle };

inline constexpr std::string_view algorithm_name(Algorithm a) {
    switch (a) {
        case Algorithm::LinGapEGreedy: return "lingape_greedy";
        case Algorithm::LinGapERatio: return "lingape_ratio";
        case Algorithm::XYStatic: return "xy_static";
        case Algorithm::XYAdaptive: return "xy_adaptive";
        case Algorithm::XYOracle: return "xy_oracle";
    }
    return "unknown";
}

inline std::optional<Algorithm> parse_algorithm(std::string_view name) {
    for (auto a : {Algorithm::LinGapEGreedy, Algorithm::LinGapERatio, Algorithm::XYStatic, Algorithm::XYAdaptive,
                   Algorithm::XYOracle}) {
        if (algorithm_name(a) == name) return a;
    }
    return std::nullopt;
}

enum class RunStatus { Stopped, BudgetExhausted };

inline constexpr std::size_t kNoArm = std::numeric_limits<std::size_t>::max();

// One snapshot of the selection loop: estimated best i, challenger j, the index
// B(t), the next arm to pull (kNoArm when the run stops here) and the width of (i, j).
struct TraceStep {
    std::uint64_t t = 0;
    std::size_t i = 0;
    std::size_t j = 0;
    double B = 0.0;
    std::size_t next_arm = kNoArm;
    double width = 0.0;

    bool operator==(const TraceStep&) const = default;
};

struct RunRecord {
    Algorithm algorithm = Algorithm::LinGapEGreedy;
    RunStatus status = RunStatus::Stopped;
    std::uint64_t tau = 0;
    std::size_t returned_arm = 0;
    std::vector<std::uint64_t> counts;
    bool correct = false;
    double epsilon = 0.0;
    double delta = 0.05;
    double lambda = 1.0;
    std::uint64_t seed = 0;
    bool uses_ground_truth = false;
    std::vector<std::size_t> phase_active_sizes;  // XY-adaptive only
    std::vector<TraceStep> trace;

    bool conclusive() const noexcept { return status == RunStatus::Stopped; }
    bool operator==(const RunRecord&) const = default;
};

// Read-only view handed to a StepObserver at every selection round. `design` is the
// state the decision was made on; `confidence` is C_t for LinGapE and the Azuma
// factor 2 sigma sqrt(2 log(6 n^2 K / (delta pi^2))) for the XY baselines.
struct StepView {
    std::uint64_t t;
    std::size_t i;
    std::size_t j;
    double B;
    double width;
    double confidence;
    std::size_t next_arm;
    const DesignState& design;
};

using StepObserver = std::function<void(const StepView&)>;

struct RunOptions {
    double epsilon = 0.0;
    double delta = 0.05;
    double lambda = 1.0;
    std::uint64_t seed = 0;
    std::uint64_t budget = 100'000'000;
    std::uint64_t trace_every = 0;  // 0 disables the trace
    double pair_correction = 0.0;   // 0 means K^2
    std::uint64_t refresh_interval = DesignState::kDefaultRefreshInterval;
    StepObserver observer;
};

// XY-adaptive phase j lasts max(min_length, ceil(initial_length * 2^(j-1))) pulls;
// zero lengths mean 10 d.
struct PhaseSchedule {
    std::uint64_t initial_length = 0;
    std::uint64_t min_length = 0;

    std::uint64_t length(std::size_t phase, std::size_t dim) const {
        const std::uint64_t n0 = initial_length ? initial_length : 10 * dim;
        const std::uint64_t floor_len = min_length ? min_length : 10 * dim;
        const double scaled = std::ceil(static_cast<double>(n0) * std::ldexp(1.0, static_cast<int>(phase) - 1));
        const double capped = std::min(scaled, 1e18);
        return std::max<std::uint64_t>(floor_len, static_cast<std::uint64_t>(capped));
    }
};

struct DirectionChoice {
    std::size_t i = 0;
    std::size_t j = 0;
    double B = 0.0;
    double width = 0.0;  // beta_t(i, j)
};

/// i_t = argmax_i x_i^T theta_hat;  j_t = argmax_{j != i_t} Delta_hat(j, i_t) + beta(j, i_t);
/// B(t) is the value of that maximum. Lowest index wins ties.
inline DirectionChoice select_direction(const EstimatorState& est, const ArmSet& arms) {
    const DesignState& design = est.design();
    const std::size_t K = arms.size();
    const double C = confidence_scale(est);

    Vector computed;
    if (!design.tracks_arms()) computed = arms.features() * design.theta_hat();
    const Vector& estimates = design.tracks_arms() ? design.arm_estimates() : computed;

    DirectionChoice out;
    for (std::size_t a = 1; a < K; ++a) {
        if (detail::strictly_greater(estimates(static_cast<Eigen::Index>(a)),
                                     estimates(static_cast<Eigen::Index>(out.i)))) {
            out.i = a;
        }
    }
    bool first = true;
    for (std::size_t j = 0; j < K; ++j) {
        if (j == out.i) continue;
        const double norm_sq = design.tracks_arms()
                                   ? design.pair_norm_sq(j, out.i)
                                   : std::pow(weighted_norm(design, arms.direction(j, out.i)), 2);
        const double beta = std::sqrt(norm_sq) * C;
        const double value =
            estimates(static_cast<Eigen::Index>(j)) - estimates(static_cast<Eigen::Index>(out.i)) + beta;
        if (first || detail::strictly_greater(value, out.B)) {
            out.j = j;
            out.B = value;
            out.width = beta;
            first = false;
        }
    }
    return out;
}

namespace detail {

inline bool is_correct(const Instance& inst, std::size_t arm, double epsilon) {
    return inst.mean(inst.best_arm()) - inst.mean(arm) <= epsilon;
}

inline RunRecord start_record(Algorithm algo, const Instance& inst, const RunOptions& opt) {
    if (!(opt.delta > 0.0 && opt.delta < 1.0)) throw InvalidInput("run: delta must lie in (0, 1)");
    if (!(opt.lambda > 0.0)) throw InvalidInput("run: lambda must be positive");
    if (!(opt.epsilon >= 0.0)) throw InvalidInput("run: epsilon must be nonnegative");
    RunRecord rec;
    rec.algorithm = algo;
    rec.epsilon = opt.epsilon;
    rec.delta = opt.delta;
    rec.lambda = opt.lambda;
    rec.seed = opt.seed;
    rec.counts.assign(inst.num_arms(), 0);
    return rec;
}

inline void finish_record(RunRecord& rec, const Instance& inst, const DesignState& design, RunStatus status,
                          std::size_t returned) {
    rec.status = status;
    rec.returned_arm = returned;
    rec.tau = design.round();
    rec.counts.assign(design.counts().begin(), design.counts().end());
    rec.counts.resize(inst.num_arms(), 0);
    rec.correct = status == RunStatus::Stopped && is_correct(inst, returned, rec.epsilon);
}

inline void note_step(RunRecord& rec, const RunOptions& opt, const StepView& view) {
    if (opt.observer) opt.observer(view);
    if (opt.trace_every > 0 && (view.t % opt.trace_every == 0 || view.next_arm == kNoArm)) {
        rec.trace.push_back(TraceStep{view.t, view.i, view.j, view.B, view.next_arm, view.width});
    }
}

inline DesignState make_tracked_design(const Instance& inst, const RunOptions& opt) {
    DesignState design(inst.dim(), opt.lambda);
    design.set_refresh_interval(opt.refresh_interval);
    design.track_arms(inst.arms().features());
    return design;
}

// Empirical best among `arms` by tracked estimate, lowest index on ties.
inline std::size_t empirical_best(const DesignState& design, std::span<const std::size_t> arms) {
    const Vector& h = design.arm_estimates();
    std::size_t best = arms.front();
    for (std::size_t a : arms) {
        if (strictly_greater(h(static_cast<Eigen::Index>(a)), h(static_cast<Eigen::Index>(best)))) best = a;
    }
    return best;
}

// B = max_{j in arms, j != i} Delta_hat(j, i) + width(j, i), where width uses the
// fixed-design factor. Returns (j, B, width).
struct Separation {
    std::size_t j = 0;
    double B = -std::numeric_limits<double>::infinity();
    double width = 0.0;
};

inline Separation static_separation(const DesignState& design, std::size_t i, std::span<const std::size_t> arms,
                                    double factor) {
    const Vector& h = design.arm_estimates();
    Separation s;
    bool first = true;
    for (std::size_t j : arms) {
        if (j == i) continue;
        const double w = factor * std::sqrt(design.pair_norm_sq(j, i));
        const double value = h(static_cast<Eigen::Index>(j)) - h(static_cast<Eigen::Index>(i)) + w;
        if (first || strictly_greater(value, s.B)) {
            s = Separation{j, value, w};
            first = false;
        }
    }
    return s;
}

inline double azuma_factor(double sigma, std::size_t K, std::uint64_t n, double delta) {
    return 2.0 * sigma * static_log_factor(static_cast<double>(K), static_cast<double>(n), delta);
}

}  // namespace detail

enum class Selector { Greedy, Ratio };

/// LinGapE: pull every arm once, then repeatedly pick the pair (i_t, j_t), stop with
/// i_t once B(t) <= epsilon, otherwise pull the arm that best shrinks
/// ||x_{i_t} - x_{j_t}||_{A^{-1}} (greedy) or that tracks the optimal ratio p* (ratio).
inline RunRecord lingape_run(const Instance& inst, Selector selector, const RunOptions& opt) {
    RunRecord rec = detail::start_record(
        selector == Selector::Greedy ? Algorithm::LinGapEGreedy : Algorithm::LinGapERatio, inst, opt);
    const std::size_t K = inst.num_arms();
    const double pair_correction =
        opt.pair_correction > 0.0 ? opt.pair_correction : static_cast<double>(K) * static_cast<double>(K);
    EstimatorState est(detail::make_tracked_design(inst, opt), inst.R(), inst.S(), opt.delta, K, pair_correction);
    DesignState& design = est.design();
    RewardStream reward(inst, opt.seed);

    std::optional<AllocationCache> cache;
    if (selector == Selector::Ratio) cache.emplace(inst.arms());

    for (std::size_t a = 0; a < K; ++a) {
        if (design.round() >= opt.budget) {
            detail::finish_record(rec, inst, design, RunStatus::BudgetExhausted, 0);
            return rec;
        }
        design.pull_arm(a, reward(a));
    }

    for (;;) {
        const DirectionChoice dir = select_direction(est, inst.arms());
        const bool stop = dir.B <= opt.epsilon;
        const bool exhausted = !stop && design.round() >= opt.budget;
        std::size_t next = kNoArm;
        if (!stop && !exhausted) {
            next = selector == Selector::Greedy ? greedy_arm_for_pair(design, dir.i, dir.j)
                                                : ratio_arm(design.counts(), (*cache)(dir.i, dir.j));
        }
        detail::note_step(rec, opt,
                          StepView{design.round(), dir.i, dir.j, dir.B, dir.width, confidence_scale(est), next, design});
        if (stop) {
            detail::finish_record(rec, inst, design, RunStatus::Stopped, dir.i);
            return rec;
        }
        if (exhausted) {
            detail::finish_record(rec, inst, design, RunStatus::BudgetExhausted, dir.i);
            return rec;
        }
        design.pull_arm(next, reward(next));
    }
}

namespace detail {

// Shared loop of XY-static and XY-oracle: a fixed weighted design over `directions`,
// stopped once B = max_j Delta_hat(j, i) + width(j, i) <= epsilon for the candidate i
// (the empirical best, or the known best arm for the oracle).
inline RunRecord run_fixed_design(Algorithm algo, const Instance& inst, const RunOptions& opt,
                                  const std::vector<PairDirection>& directions,
                                  std::optional<std::size_t> known_best) {
    RunRecord rec = start_record(algo, inst, opt);
    rec.uses_ground_truth = known_best.has_value();
    const std::size_t K = inst.num_arms();
    DesignState design = make_tracked_design(inst, opt);
    RewardStream reward(inst, opt.seed);
    std::vector<std::size_t> all(K);
    for (std::size_t a = 0; a < K; ++a) all[a] = a;
    const double sigma = inst.noise_bound();

    for (;;) {
        std::size_t i = known_best.value_or(0);
        Separation sep;
        double factor = std::numeric_limits<double>::infinity();
        bool stop = false;
        if (design.round() > 0) {
            if (!known_best) i = empirical_best(design, all);
            factor = azuma_factor(sigma, K, design.round(), opt.delta);
            sep = static_separation(design, i, all, factor);
            stop = sep.B <= opt.epsilon;
        }
        const bool exhausted = !stop && design.round() >= opt.budget;
        const std::size_t next = (stop || exhausted) ? kNoArm : design_greedy_step_pairs(design, directions, all);
        if (design.round() > 0) {
            note_step(rec, opt, StepView{design.round(), i, sep.j, sep.B, sep.width, factor, next, design});
        }
        if (stop || exhausted) {
            finish_record(rec, inst, design, stop ? RunStatus::Stopped : RunStatus::BudgetExhausted, i);
            return rec;
        }
        design.pull_arm(next, reward(next));
    }
}

}  // namespace detail

/// XY-static: greedy rounding of  argmin max_{y in Y} ||y||_{A^{-1}}  over all pairwise
/// directions, with the fixed-design (Azuma) width and the regularized estimator
/// (opt.lambda is the small static regularizer).
inline RunRecord xy_static_run(const Instance& inst, const RunOptions& opt) {
    std::vector<PairDirection> dirs;
    for (std::size_t i = 0; i < inst.num_arms(); ++i)
        for (std::size_t j = i + 1; j < inst.num_arms(); ++j) dirs.push_back({i, j, 1.0});
    return detail::run_fixed_design(Algorithm::XYStatic, inst, opt, dirs, std::nullopt);
}

/// XY-oracle: design over {x* - x_i} weighted by the true gaps Delta_i; confirms the
/// true best arm with the fixed-design width.
inline RunRecord xy_oracle_run(const Instance& inst, const RunOptions& opt) {
    const std::size_t best = inst.best_arm();
    std::vector<PairDirection> dirs;
    for (std::size_t i = 0; i < inst.num_arms(); ++i) {
        if (i == best) continue;
        dirs.push_back({best, i, inst.mean(best) - inst.mean(i)});
    }
    return detail::run_fixed_design(Algorithm::XYOracle, inst, opt, dirs, best);
}

/// XY-adaptive: phased XY design. Each phase starts from a fresh design matrix and
/// targets the pairwise directions of the current active set; at phase end the
/// arms are re-eliminated from the whole arm set using only that phase's data,
/// and the run stops once a single arm survives or the survivors are
/// epsilon-separated. When an arm the phase did not target survives, the next
/// phase reverts to the full arm set. Phase j spends confidence 6 delta / (pi^2 j^2).
inline RunRecord xy_adaptive_run(const Instance& inst, const RunOptions& opt, PhaseSchedule schedule = {}) {
    RunRecord rec = detail::start_record(Algorithm::XYAdaptive, inst, opt);
    const std::size_t K = inst.num_arms();
    RewardStream reward(inst, opt.seed);
    std::vector<std::size_t> all(K);
    for (std::size_t a = 0; a < K; ++a) all[a] = a;
    std::vector<std::size_t> active = all;
    const double sigma = inst.noise_bound();
    std::vector<std::uint64_t> totals(K, 0);
    std::uint64_t spent = 0;

    auto finish = [&](RunStatus status, std::size_t returned) {
        rec.status = status;
        rec.returned_arm = returned;
        rec.tau = spent;
        rec.counts = totals;
        rec.correct = status == RunStatus::Stopped && detail::is_correct(inst, returned, rec.epsilon);
        return rec;
    };

    for (std::size_t phase = 1;; ++phase) {
        const std::uint64_t length = schedule.length(phase, inst.dim());
        const double phase_delta = 6.0 * opt.delta / (std::numbers::pi * std::numbers::pi * double(phase) * double(phase));
        DesignState design = detail::make_tracked_design(inst, opt);
        std::vector<PairDirection> dirs;
        for (std::size_t p = 0; p < active.size(); ++p)
            for (std::size_t q = p + 1; q < active.size(); ++q) dirs.push_back({active[p], active[q], 1.0});

        for (std::uint64_t s = 0; s < length; ++s) {
            if (spent >= opt.budget) return finish(RunStatus::BudgetExhausted, detail::empirical_best(design, active));
            const std::size_t a = design_greedy_step_pairs(design, dirs, all);
            design.pull_arm(a, reward(a));
            ++totals[a];
            ++spent;
        }

        // Elimination over the whole arm set with this phase's data only.
        const double factor = detail::azuma_factor(sigma, K, design.round(), phase_delta);
        const Vector& h = design.arm_estimates();
        std::vector<std::size_t> survivors;
        for (std::size_t x = 0; x < K; ++x) {
            bool dominated = false;
            for (std::size_t y = 0; y < K && !dominated; ++y) {
                if (y == x) continue;
                const double gap = h(static_cast<Eigen::Index>(y)) - h(static_cast<Eigen::Index>(x));
                dominated = gap > factor * std::sqrt(design.pair_norm_sq(y, x));
            }
            if (!dominated) survivors.push_back(x);
        }
        rec.phase_active_sizes.push_back(survivors.size());

        const std::size_t best = detail::empirical_best(design, survivors);
        const detail::Separation sep = detail::static_separation(design, best, survivors, factor);
        const bool stop = survivors.size() == 1 || sep.B <= opt.epsilon;
        // Phase-end snapshots carry no next arm.
        const StepView view{spent, best, survivors.size() == 1 ? best : sep.j,
                            survivors.size() == 1 ? 0.0 : sep.B, sep.width, factor, kNoArm, design};
        if (opt.observer) opt.observer(view);
        if (opt.trace_every > 0) rec.trace.push_back(TraceStep{view.t, view.i, view.j, view.B, kNoArm, view.width});
        if (stop) return finish(RunStatus::Stopped, best);
        // An arm outside this phase's active set cannot be eliminated by its data and
        // survives; the discarded arms are then forgotten and the next phase covers X.
        const bool forgot = std::any_of(survivors.begin(), survivors.end(), [&](std::size_t x) {
            return std::find(active.begin(), active.end(), x) == active.end();
        });
        active = forgot ? all : std::move(survivors);
    }
}

/// Dispatches on `algo`. LinGapE variants use opt.lambda; baselines expect the caller
/// to pass the static regularizer in opt.lambda.
inline RunRecord run_algorithm(Algorithm algo, const Instance& inst, const RunOptions& opt,
                               PhaseSchedule schedule = {}) {
    switch (algo) {
        case Algorithm::LinGapEGreedy: return lingape_run(inst, Selector::Greedy, opt);
        case Algorithm::LinGapERatio: return lingape_run(inst, Selector::Ratio, opt);
        case Algorithm::XYStatic: return xy_static_run(inst, opt);
        case Algorithm::XYAdaptive: return xy_adaptive_run(inst, opt, schedule);
        case Algorithm::XYOracle: return xy_oracle_run(inst, opt);
    }
    throw InvalidInput("run_algorithm: unknown algorithm");
}

}  // namespace lingape
