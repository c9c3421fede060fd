#pragma once

#include <algorithm>
#include <atomic>
#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "lingape/algorithms.hpp"
#include "lingape/error.hpp"
#include "lingape/model.hpp"

#ifndef LINGAPE_VERSION
#define LINGAPE_VERSION "unknown"
#endif

namespace lingape {

inline constexpr const char* kVersion = LINGAPE_VERSION;

enum class ExperimentKind { SettingOneSweep, SettingTwoSweep, RealDataSweep, Custom };

inline constexpr std::string_view experiment_name(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::SettingOneSweep: return "setting_one_sweep";
        case ExperimentKind::SettingTwoSweep: return "setting_two_sweep";
        case ExperimentKind::RealDataSweep: return "real_data_sweep";
        case ExperimentKind::Custom: return "custom";
    }
    return "unknown";
}

inline std::optional<ExperimentKind> parse_experiment(std::string_view name) {
    for (auto k : {ExperimentKind::SettingOneSweep, ExperimentKind::SettingTwoSweep, ExperimentKind::RealDataSweep,
                   ExperimentKind::Custom}) {
        if (experiment_name(k) == name) return k;
    }
    return std::nullopt;
}

/// One campaign. `points` holds d (setting one), Delta (setting two) or K (real data);
/// custom experiments run the single instance in `instance_file`.
struct ExperimentConfig {
    std::string name = "campaign";
    ExperimentKind experiment = ExperimentKind::SettingOneSweep;
    std::vector<double> points;
    std::vector<Algorithm> algorithms;
    double epsilon = 0.0;
    double delta = 0.05;
    double lambda = 1.0;
    double lambda_static = 0.01;
    std::size_t repetitions = 1;
    std::uint64_t seed = 1;
    std::uint64_t budget = 100'000'000;
    std::uint64_t trace_every = 0;
    PhaseSchedule schedule;

    double angle = 0.01;   // setting one
    std::size_t dim = 5;   // setting two

    // real data: a table on disk, or a generated surrogate when empty
    std::string dataset;
    std::size_t surrogate_rows = 10'000;
    std::size_t surrogate_dim = 36;
    double lambda_fit = 0.01;
    double min_gap = 0.05;

    std::string instance_file;  // custom

    void validate() const;
};

namespace detail {

inline std::string trim(std::string s) {
    const auto not_space = [](unsigned char c) { return !std::isspace(c); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
    s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
    return s;
}

// Splits on commas and/or whitespace.
inline std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',' || std::isspace(static_cast<unsigned char>(c))) {
            if (!cur.empty()) out.push_back(std::move(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

struct KeyValue {
    std::string key;
    std::string value;
    std::size_t line = 0;
};

// `key = value` lines; '#' starts a comment; blank lines ignored.
inline std::vector<KeyValue> parse_key_values(std::istream& in, const std::string& source) {
    std::vector<KeyValue> out;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw InvalidInput(source + ":" + std::to_string(n) + ": expected 'key = value'");
        }
        std::string key = trim(line.substr(0, eq));
        if (key.empty()) throw InvalidInput(source + ":" + std::to_string(n) + ": empty key");
        out.push_back({std::move(key), trim(line.substr(eq + 1)), n});
    }
    return out;
}

inline std::string where(const std::string& source, const KeyValue& kv) {
    return source + ":" + std::to_string(kv.line) + ": ";
}

inline double to_real(const std::string& source, const KeyValue& kv, const std::string& text) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != text.size()) {
        throw InvalidInput(where(source, kv) + "'" + kv.key + "' expects a number, got '" + text + "'");
    }
    return v;
}

inline std::uint64_t to_count(const std::string& source, const KeyValue& kv) {
    const double v = to_real(source, kv, kv.value);
    if (!(v >= 0.0) || v != std::floor(v) || v > 1.8e19) {
        throw InvalidInput(where(source, kv) + "'" + kv.key + "' expects a nonnegative integer, got '" + kv.value +
                           "'");
    }
    return static_cast<std::uint64_t>(v);
}

inline std::string format_real(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

}  // namespace detail

inline void ExperimentConfig::validate() const {
    if (repetitions < 1) throw InvalidInput("config: repetitions must be at least 1");
    if (algorithms.empty()) throw InvalidInput("config: no algorithms given");
    if (!(delta > 0.0 && delta < 1.0)) throw InvalidInput("config: delta must lie in (0, 1)");
    if (!(epsilon >= 0.0)) throw InvalidInput("config: epsilon must be nonnegative");
    if (!(lambda > 0.0) || !(lambda_static > 0.0)) throw InvalidInput("config: lambda values must be positive");
    if (budget < 1) throw InvalidInput("config: budget must be positive");
    if (experiment == ExperimentKind::Custom) {
        if (instance_file.empty()) throw InvalidInput("config: custom experiments need 'instance'");
        return;
    }
    if (points.empty()) throw InvalidInput("config: no experiment points given");
    for (double p : points) {
        const bool integral = p == std::floor(p);
        switch (experiment) {
            case ExperimentKind::SettingOneSweep:
                if (!integral || p < 2) throw InvalidInput("config: setting_one_sweep points are dimensions d >= 2");
                break;
            case ExperimentKind::SettingTwoSweep:
                if (!(p > 0.0)) throw InvalidInput("config: setting_two_sweep points are gaps Delta > 0");
                break;
            case ExperimentKind::RealDataSweep:
                if (!integral || p < 2) throw InvalidInput("config: real_data_sweep points are arm counts K >= 2");
                break;
            case ExperimentKind::Custom: break;
        }
    }
}

/// Reads a flat key/value config. Keys: name, experiment, points, algorithms,
/// epsilon, delta, lambda, lambda_static, repetitions, seed, budget, trace_every,
/// phase_initial, phase_min, angle, dim, dataset, surrogate_rows, surrogate_dim,
/// lambda_fit, min_gap, instance. Relative paths resolve against `base_dir`.
inline ExperimentConfig parse_config(std::istream& in, const std::string& source = "config",
                                     const std::filesystem::path& base_dir = {}) {
    ExperimentConfig c;
    bool have_experiment = false;
    for (const auto& kv : detail::parse_key_values(in, source)) {
        const auto& k = kv.key;
        const auto real = [&] { return detail::to_real(source, kv, kv.value); };
        const auto count = [&] { return detail::to_count(source, kv); };
        const auto path = [&] {
            std::filesystem::path p(kv.value);
            return (p.is_relative() && !base_dir.empty() ? base_dir / p : p).string();
        };
        if (k == "name") c.name = kv.value;
        else if (k == "experiment") {
            const auto e = parse_experiment(kv.value);
            if (!e) throw InvalidInput(detail::where(source, kv) + "unknown experiment '" + kv.value + "'");
            c.experiment = *e;
            have_experiment = true;
        } else if (k == "points") {
            c.points.clear();
            for (const auto& p : detail::split_list(kv.value)) c.points.push_back(detail::to_real(source, kv, p));
        } else if (k == "algorithms") {
            c.algorithms.clear();
            for (const auto& a : detail::split_list(kv.value)) {
                const auto algo = parse_algorithm(a);
                if (!algo) throw InvalidInput(detail::where(source, kv) + "unknown algorithm '" + a + "'");
                c.algorithms.push_back(*algo);
            }
        } else if (k == "epsilon") c.epsilon = real();
        else if (k == "delta") c.delta = real();
        else if (k == "lambda") c.lambda = real();
        else if (k == "lambda_static") c.lambda_static = real();
        else if (k == "repetitions") c.repetitions = count();
        else if (k == "seed") c.seed = count();
        else if (k == "budget") c.budget = count();
        else if (k == "trace_every") c.trace_every = count();
        else if (k == "phase_initial") c.schedule.initial_length = count();
        else if (k == "phase_min") c.schedule.min_length = count();
        else if (k == "angle") c.angle = real();
        else if (k == "dim") c.dim = count();
        else if (k == "dataset") c.dataset = path();
        else if (k == "surrogate_rows") c.surrogate_rows = count();
        else if (k == "surrogate_dim") c.surrogate_dim = count();
        else if (k == "lambda_fit") c.lambda_fit = real();
        else if (k == "min_gap") c.min_gap = real();
        else if (k == "instance") c.instance_file = path();
        else throw InvalidInput(detail::where(source, kv) + "unknown key '" + k + "'");
    }
    if (!have_experiment) throw InvalidInput(source + ": missing 'experiment'");
    c.validate();
    return c;
}

inline ExperimentConfig read_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open config file '" + path + "'");
    return parse_config(in, path, std::filesystem::path(path).parent_path());
}

/// Instance description file (key = value):
///   R = 1
///   S = 2
///   noise = gaussian 1      (or: noise = signflip)
///   theta = 2 0 0
///   arm = 1 0 0             (one line per arm, in order)
inline Instance parse_instance(std::istream& in, const std::string& source = "instance") {
    std::optional<double> R, S;
    std::optional<Vector> theta;
    NoiseModel noise = GaussianNoise{1.0};
    std::vector<std::vector<double>> arms;
    const auto numbers = [&](const detail::KeyValue& kv, const std::string& text) {
        std::vector<double> v;
        for (const auto& t : detail::split_list(text)) v.push_back(detail::to_real(source, kv, t));
        return v;
    };
    for (const auto& kv : detail::parse_key_values(in, source)) {
        if (kv.key == "R") R = detail::to_real(source, kv, kv.value);
        else if (kv.key == "S") S = detail::to_real(source, kv, kv.value);
        else if (kv.key == "theta") {
            const auto v = numbers(kv, kv.value);
            theta = Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
        } else if (kv.key == "arm") {
            arms.push_back(numbers(kv, kv.value));
        } else if (kv.key == "noise") {
            const auto parts = detail::split_list(kv.value);
            if (parts.size() == 1 && parts[0] == "signflip") noise = SignFlipNoise{};
            else if (parts.size() == 2 && parts[0] == "gaussian") noise = GaussianNoise{detail::to_real(source, kv, parts[1])};
            else throw InvalidInput(detail::where(source, kv) + "noise must be 'gaussian <sigma>' or 'signflip'");
        } else {
            throw InvalidInput(detail::where(source, kv) + "unknown key '" + kv.key + "'");
        }
    }
    if (!theta) throw InvalidInput(source + ": missing 'theta'");
    if (arms.size() < 2) throw InvalidInput(source + ": need at least two 'arm' lines");
    const auto d = static_cast<Eigen::Index>(theta->size());
    Matrix x(static_cast<Eigen::Index>(arms.size()), d);
    for (std::size_t i = 0; i < arms.size(); ++i) {
        if (static_cast<Eigen::Index>(arms[i].size()) != d) {
            throw InvalidInput(source + ": arm " + std::to_string(i + 1) + " has " + std::to_string(arms[i].size()) +
                               " entries, theta has " + std::to_string(d));
        }
        for (Eigen::Index k = 0; k < d; ++k) x(static_cast<Eigen::Index>(i), k) = arms[i][static_cast<std::size_t>(k)];
    }
    const double r = R.value_or(std::holds_alternative<SignFlipNoise>(noise) ? 2.0 : 1.0);
    const double s = S.value_or(std::max(theta->norm(), 1e-12));
    return Instance(ArmSet(std::move(x)), *theta, noise, r, s);
}

inline Instance read_instance_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open instance file '" + path + "'");
    return parse_instance(in, path);
}

/// Writes an instance in the format read by parse_instance (17 significant digits).
inline void write_instance(std::ostream& out, const Instance& inst) {
    const auto row = [&](const Vector& v) {
        std::string s;
        char buf[40];
        for (Eigen::Index k = 0; k < v.size(); ++k) {
            std::snprintf(buf, sizeof buf, "%.17g", v(k));
            if (k) s += ' ';
            s += buf;
        }
        return s;
    };
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", inst.R());
    out << "R = " << buf << '\n';
    std::snprintf(buf, sizeof buf, "%.17g", inst.S());
    out << "S = " << buf << '\n';
    if (const auto* g = std::get_if<GaussianNoise>(&inst.noise())) {
        std::snprintf(buf, sizeof buf, "%.17g", g->sigma);
        out << "noise = gaussian " << buf << '\n';
    } else {
        out << "noise = signflip\n";
    }
    out << "theta = " << row(inst.theta()) << '\n';
    for (std::size_t a = 0; a < inst.num_arms(); ++a) out << "arm = " << row(inst.arms().arm(a)) << '\n';
}

/// A finished run together with where it sits in the campaign.
struct BatchRecord {
    double point = 0.0;
    std::size_t repetition = 0;
    RunRecord run;

    bool operator==(const BatchRecord&) const = default;
};

struct BatchError : ConstructionError {
    using ConstructionError::ConstructionError;
};

// Seed of one run: depends on the campaign seed, the point value, the algorithm
// name and the repetition, so any subset of a campaign reruns identically.
inline std::uint64_t run_seed(std::uint64_t campaign, double point, Algorithm algo, std::size_t rep) {
    return derive_seed(campaign, {std::bit_cast<std::uint64_t>(point), hash_string(algorithm_name(algo)), rep});
}

// Seed of the instance shared by all algorithms at (point, rep) for real-data sweeps.
inline std::uint64_t instance_seed(std::uint64_t campaign, double point, std::size_t rep) {
    return derive_seed(campaign, {hash_string("instance"), std::bit_cast<std::uint64_t>(point), rep});
}

inline std::uint64_t surrogate_seed(std::uint64_t campaign) {
    return derive_seed(campaign, {hash_string("surrogate")});
}

/// Worker count from LINGAPE_WORKERS, else the hardware concurrency.
inline std::size_t worker_count() {
    if (const char* env = std::getenv("LINGAPE_WORKERS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

inline std::string point_label(ExperimentKind kind, double point) {
    switch (kind) {
        case ExperimentKind::SettingOneSweep: return "d=" + detail::format_real(point);
        case ExperimentKind::SettingTwoSweep: return "Delta=" + detail::format_real(point);
        case ExperimentKind::RealDataSweep: return "K=" + detail::format_real(point);
        case ExperimentKind::Custom: return "custom";
    }
    return detail::format_real(point);
}

namespace detail {

// Loads the table for real-data sweeps.
inline FeatureOutcomeTable campaign_table(const ExperimentConfig& c) {
    if (!c.dataset.empty()) {
        if (!std::filesystem::exists(c.dataset)) {
            throw BatchError("dataset '" + c.dataset +
                             "' not found; generate a stand-in with `lingape surrogate-data --rows N --dim 36 --out "
                             "PATH` or leave 'dataset' unset to use a generated surrogate");
        }
        return read_table_file(c.dataset);
    }
    return generate_surrogate_table(c.surrogate_rows, c.surrogate_dim, surrogate_seed(c.seed)).table;
}

}  // namespace detail

/// Instances of a campaign, indexed [point][repetition]. Synthetic settings share one
/// instance across repetitions; real-data sweeps draw a fresh arm set per repetition.
inline std::vector<std::vector<Instance>> campaign_instances(const ExperimentConfig& c) {
    std::vector<std::vector<Instance>> out;
    const std::vector<double> points = c.experiment == ExperimentKind::Custom ? std::vector<double>{0.0} : c.points;
    std::optional<FeatureOutcomeTable> table;
    for (double p : points) {
        std::vector<Instance> row;
        try {
            switch (c.experiment) {
                case ExperimentKind::SettingOneSweep:
                    row.assign(c.repetitions, make_setting_one(static_cast<std::size_t>(p), c.angle));
                    break;
                case ExperimentKind::SettingTwoSweep:
                    row.assign(c.repetitions, make_setting_two(c.dim, p));
                    break;
                case ExperimentKind::Custom:
                    row.assign(c.repetitions, read_instance_file(c.instance_file));
                    break;
                case ExperimentKind::RealDataSweep: {
                    if (!table) table = detail::campaign_table(c);
                    for (std::size_t rep = 0; rep < c.repetitions; ++rep) {
                        Rng rng(instance_seed(c.seed, p, rep));
                        row.push_back(build_real_instance(*table, static_cast<std::size_t>(p), c.lambda_fit,
                                                          c.min_gap, rng)
                                          .instance);
                    }
                    break;
                }
            }
        } catch (const BatchError&) {
            throw;
        } catch (const std::exception& e) {
            throw BatchError("point " + point_label(c.experiment, p) + ": " + e.what());
        }
        out.push_back(std::move(row));
    }
    return out;
}

/// Runs repetitions x algorithms x points, fanned out over `workers` threads (0 means
/// worker_count()). Output order is (point, algorithm, repetition) regardless of
/// scheduling. Baselines run with lambda_static, LinGapE with lambda.
inline std::vector<BatchRecord> run_batch(const ExperimentConfig& c, std::size_t workers = 0) {
    c.validate();
    const auto instances = campaign_instances(c);
    const std::vector<double> points = c.experiment == ExperimentKind::Custom ? std::vector<double>{0.0} : c.points;

    struct Task {
        std::size_t point_index;
        Algorithm algo;
        std::size_t rep;
    };
    std::vector<Task> tasks;
    for (std::size_t p = 0; p < points.size(); ++p)
        for (Algorithm a : c.algorithms)
            for (std::size_t r = 0; r < c.repetitions; ++r) tasks.push_back({p, a, r});

    std::vector<BatchRecord> out(tasks.size());
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::mutex error_mutex;
    std::string error;

    auto work = [&] {
        for (;;) {
            const std::size_t k = next.fetch_add(1);
            if (k >= tasks.size() || failed.load()) return;
            const Task& t = tasks[k];
            const double point = points[t.point_index];
            try {
                const bool lingape = t.algo == Algorithm::LinGapEGreedy || t.algo == Algorithm::LinGapERatio;
                RunOptions opt;
                opt.epsilon = c.epsilon;
                opt.delta = c.delta;
                opt.lambda = lingape ? c.lambda : c.lambda_static;
                opt.seed = run_seed(c.seed, point, t.algo, t.rep);
                opt.budget = c.budget;
                opt.trace_every = c.trace_every;
                out[k] = BatchRecord{point, t.rep,
                                     run_algorithm(t.algo, instances[t.point_index][t.rep], opt, c.schedule)};
            } catch (const std::exception& e) {
                std::lock_guard lock(error_mutex);
                if (!failed.exchange(true)) {
                    error = "point " + point_label(c.experiment, point) + ", " + std::string(algorithm_name(t.algo)) +
                            ", repetition " + std::to_string(t.rep) + ": " + e.what();
                }
            }
        }
    };

    const std::size_t n = std::min(workers ? workers : worker_count(), std::max<std::size_t>(1, tasks.size()));
    if (n <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t i = 0; i < n; ++i) pool.emplace_back(work);
        for (auto& th : pool) th.join();
    }
    if (failed) throw BatchError("batch aborted at " + error);
    return out;
}

/// Aggregate of one (point, algorithm) group. tau statistics and the error rate are
/// over conclusive runs only; budget-exhausted runs are counted in `inconclusive`.
struct SummaryRow {
    double point = 0.0;
    Algorithm algorithm = Algorithm::LinGapEGreedy;
    std::size_t runs = 0;
    std::size_t inconclusive = 0;
    double mean_tau = std::numeric_limits<double>::quiet_NaN();
    double min_tau = std::numeric_limits<double>::quiet_NaN();
    double max_tau = std::numeric_limits<double>::quiet_NaN();
    double error_rate = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> mean_counts;

    std::size_t conclusive() const noexcept { return runs - inconclusive; }
};

inline std::vector<SummaryRow> summarize(const std::vector<BatchRecord>& records) {
    std::vector<SummaryRow> rows;
    std::map<std::pair<std::uint64_t, Algorithm>, std::size_t> index;
    std::vector<std::size_t> wrong;
    for (const auto& r : records) {
        const auto key = std::make_pair(std::bit_cast<std::uint64_t>(r.point), r.run.algorithm);
        auto it = index.find(key);
        if (it == index.end()) {
            it = index.emplace(key, rows.size()).first;
            SummaryRow row;
            row.point = r.point;
            row.algorithm = r.run.algorithm;
            row.mean_counts.assign(r.run.counts.size(), 0.0);
            rows.push_back(std::move(row));
            wrong.push_back(0);
        }
        SummaryRow& row = rows[it->second];
        ++row.runs;
        if (!r.run.conclusive()) {
            ++row.inconclusive;
            continue;
        }
        const auto tau = static_cast<double>(r.run.tau);
        const std::size_t done = row.conclusive();
        if (done == 1) {
            row.mean_tau = row.min_tau = row.max_tau = tau;
        } else {
            row.mean_tau += (tau - row.mean_tau) / static_cast<double>(done);
            row.min_tau = std::min(row.min_tau, tau);
            row.max_tau = std::max(row.max_tau, tau);
        }
        if (row.mean_counts.size() < r.run.counts.size()) row.mean_counts.resize(r.run.counts.size(), 0.0);
        for (std::size_t a = 0; a < r.run.counts.size(); ++a) {
            row.mean_counts[a] += (static_cast<double>(r.run.counts[a]) - row.mean_counts[a]) / static_cast<double>(done);
        }
        if (!r.run.correct) ++wrong[it->second];
        row.error_rate = static_cast<double>(wrong[it->second]) / static_cast<double>(done);
    }
    return rows;
}

inline constexpr const char* kSummaryHeader = "point,algorithm,mean_tau,min_tau,max_tau,error_rate,inconclusive";

inline void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows) {
    out << kSummaryHeader << '\n';
    for (const auto& r : rows) {
        out << detail::format_real(r.point) << ',' << algorithm_name(r.algorithm) << ','
            << detail::format_real(r.mean_tau) << ',' << detail::format_real(r.min_tau) << ','
            << detail::format_real(r.max_tau) << ',' << detail::format_real(r.error_rate) << ',' << r.inconclusive
            << '\n';
    }
}

/// Per-arm pull counts, one column per algorithm (first repetition of the first point),
/// with a closing total row.
inline void write_arm_table_csv(std::ostream& out, const std::vector<BatchRecord>& records) {
    std::vector<const RunRecord*> cols;
    for (const auto& r : records) {
        if (r.repetition != 0 || r.point != records.front().point) continue;
        cols.push_back(&r.run);
    }
    out << "arm";
    for (const auto* c : cols) out << ',' << algorithm_name(c->algorithm);
    out << '\n';
    std::size_t K = 0;
    for (const auto* c : cols) K = std::max(K, c->counts.size());
    for (std::size_t a = 0; a < K; ++a) {
        out << (a + 1);
        for (const auto* c : cols) out << ',' << (a < c->counts.size() ? c->counts[a] : 0);
        out << '\n';
    }
    out << "total";
    for (const auto* c : cols) out << ',' << c->tau;
    out << '\n';
}

inline nlohmann::json config_json(const ExperimentConfig& c) {
    nlohmann::json algos = nlohmann::json::array();
    for (Algorithm a : c.algorithms) algos.push_back(std::string(algorithm_name(a)));
    nlohmann::json j{
        {"name", c.name},
        {"experiment", std::string(experiment_name(c.experiment))},
        {"points", c.points},
        {"algorithms", algos},
        {"epsilon", c.epsilon},
        {"delta", c.delta},
        {"lambda", c.lambda},
        {"lambda_static", c.lambda_static},
        {"repetitions", c.repetitions},
        {"seed", c.seed},
        {"budget", c.budget},
        {"trace_every", c.trace_every},
        {"phase_initial", c.schedule.initial_length},
        {"phase_min", c.schedule.min_length},
    };
    switch (c.experiment) {
        case ExperimentKind::SettingOneSweep: j["angle"] = c.angle; break;
        case ExperimentKind::SettingTwoSweep: j["dim"] = c.dim; break;
        case ExperimentKind::RealDataSweep:
            j["dataset"] = c.dataset;
            j["surrogate_rows"] = c.surrogate_rows;
            j["surrogate_dim"] = c.surrogate_dim;
            j["lambda_fit"] = c.lambda_fit;
            j["min_gap"] = c.min_gap;
            if (c.dataset.empty()) j["surrogate_seed"] = surrogate_seed(c.seed);
            break;
        case ExperimentKind::Custom: j["instance"] = c.instance_file; break;
    }
    return j;
}

/// Manifest: software version, the full config, every run's seed and the files written.
inline nlohmann::json manifest_json(const ExperimentConfig& c, const std::vector<BatchRecord>& records,
                                    const std::vector<std::string>& outputs) {
    nlohmann::json runs = nlohmann::json::array();
    for (const auto& r : records) {
        runs.push_back({{"point", r.point},
                        {"algorithm", std::string(algorithm_name(r.run.algorithm))},
                        {"repetition", r.repetition},
                        {"seed", r.run.seed},
                        {"status", r.run.conclusive() ? "stopped" : "budget_exhausted"},
                        {"tau", r.run.tau}});
    }
    return {{"software", "lingape"}, {"version", kVersion}, {"config", config_json(c)},
            {"runs", runs},          {"outputs", outputs}};
}

enum class Scale { Ci, Full };

/// Preset campaigns behind `reproduce`. CI scale keeps every run small (setting one
/// at angle 0.1, three repetitions); full scale uses the published experiment sizes.
inline ExperimentConfig preset(std::string_view figure, Scale scale) {
    ExperimentConfig c;
    c.name = std::string(figure);
    c.seed = 20190101;
    const bool full = scale == Scale::Full;
    c.repetitions = full ? 10 : 3;
    if (figure == "fig1") {
        c.experiment = ExperimentKind::SettingOneSweep;
        c.points = full ? std::vector<double>{2, 3, 4, 5, 6, 7, 8, 9, 10} : std::vector<double>{2, 3, 5};
        c.angle = full ? 0.01 : 0.1;
        c.algorithms = {Algorithm::LinGapEGreedy, Algorithm::XYStatic, Algorithm::XYAdaptive, Algorithm::XYOracle};
    } else if (figure == "fig2") {
        c.experiment = ExperimentKind::SettingTwoSweep;
        c.dim = 5;
        c.points = full ? std::vector<double>{2.0, 1.0, 0.5, 0.2, 0.1} : std::vector<double>{2.0, 1.0, 0.5};
        c.algorithms = {Algorithm::LinGapEGreedy, Algorithm::XYStatic};
    } else if (figure == "fig3") {
        c.experiment = ExperimentKind::RealDataSweep;
        c.points = full ? std::vector<double>{5, 10, 15, 20} : std::vector<double>{10, 20};
        c.algorithms = {Algorithm::LinGapEGreedy, Algorithm::XYStatic};
        c.repetitions = full ? 10 : 2;
    } else if (figure == "table1") {
        c.experiment = ExperimentKind::SettingOneSweep;
        c.points = {5};
        c.angle = full ? 0.01 : 0.1;
        c.repetitions = 1;
        c.algorithms = {Algorithm::LinGapEGreedy, Algorithm::XYStatic, Algorithm::XYOracle};
    } else {
        throw InvalidInput("unknown figure '" + std::string(figure) + "' (expected fig1, fig2, fig3 or table1)");
    }
    return c;
}

struct ReproduceResult {
    std::vector<BatchRecord> records;
    std::vector<SummaryRow> summary;
    std::vector<std::string> files;
};

/// Runs a campaign and writes <name>.csv (summary, or the per-arm table for table1)
/// plus <name>_manifest.json into `out_dir`.
inline ReproduceResult run_campaign(const ExperimentConfig& c, const std::filesystem::path& out_dir,
                                    bool arm_table = false, std::size_t workers = 0) {
    ReproduceResult res;
    res.records = run_batch(c, workers);
    res.summary = summarize(res.records);
    std::filesystem::create_directories(out_dir);

    const auto csv = out_dir / (c.name + ".csv");
    {
        std::ofstream f(csv, std::ios::binary);
        if (!f) throw InvalidInput("cannot write '" + csv.string() + "'");
        if (arm_table) write_arm_table_csv(f, res.records);
        else write_summary_csv(f, res.summary);
    }
    res.files.push_back(csv.string());
    if (arm_table) {
        const auto sum = out_dir / (c.name + "_summary.csv");
        std::ofstream f(sum, std::ios::binary);
        write_summary_csv(f, res.summary);
        res.files.push_back(sum.string());
    }
    const auto man = out_dir / (c.name + "_manifest.json");
    {
        std::vector<std::string> names;
        for (const auto& f : res.files) names.push_back(std::filesystem::path(f).filename().string());
        std::ofstream f(man, std::ios::binary);
        f << manifest_json(c, res.records, names).dump(2) << '\n';
    }
    res.files.push_back(man.string());
    return res;
}

inline ReproduceResult reproduce(std::string_view figure, Scale scale, const std::filesystem::path& out_dir,
                                 std::size_t workers = 0) {
    return run_campaign(preset(figure, scale), out_dir, figure == "table1", workers);
}

}  // namespace lingape
