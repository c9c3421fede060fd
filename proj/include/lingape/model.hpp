#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "lingape/error.hpp"
#include "lingape/linalg.hpp"

namespace lingape {

using Rng = std::mt19937_64;

// splitmix64 finalizer; used to derive independent per-run seeds from a campaign seed.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t hash_string(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> parts) {
    std::uint64_t h = mix64(base);
    for (auto p : parts) h = mix64(h ^ mix64(p));
    return h;
}

/// The feature set X: K arms in R^d, one per row.
class ArmSet {
public:
    explicit ArmSet(Matrix features) : features_(std::move(features)) {
        if (features_.rows() < 2) throw InvalidInput("ArmSet: at least two arms are required");
        if (features_.cols() < 1) throw InvalidInput("ArmSet: features must have positive dimension");
        if (!features_.allFinite()) throw InvalidInput("ArmSet: non-finite feature entry");
        max_norm_ = features_.rowwise().norm().maxCoeff();
    }

    static ArmSet from_rows(const std::vector<std::vector<double>>& rows) {
        if (rows.empty()) throw InvalidInput("ArmSet: no arms given");
        const std::size_t d = rows.front().size();
        Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(d));
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (rows[i].size() != d) {
                throw InvalidInput("ArmSet: arm " + std::to_string(i + 1) + " has length " +
                                   std::to_string(rows[i].size()) + ", expected " + std::to_string(d));
            }
            for (std::size_t k = 0; k < d; ++k) {
                m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k];
            }
        }
        return ArmSet(std::move(m));
    }

    std::size_t size() const noexcept { return static_cast<std::size_t>(features_.rows()); }
    std::size_t dim() const noexcept { return static_cast<std::size_t>(features_.cols()); }
    double max_norm() const noexcept { return max_norm_; }
    const Matrix& features() const noexcept { return features_; }
    Vector arm(std::size_t i) const { return features_.row(static_cast<Eigen::Index>(i)).transpose(); }
    // y(i, j) = x_i - x_j
    Vector direction(std::size_t i, std::size_t j) const { return arm(i) - arm(j); }

private:
    Matrix features_;
    double max_norm_ = 0.0;
};

struct GaussianNoise {
    double sigma = 1.0;
};

// Rewards in {-1, +1} with P(+1) = (1 + x^T theta) / 2.
struct SignFlipNoise {};

using NoiseModel = std::variant<GaussianNoise, SignFlipNoise>;

/// Ground truth for one simulated problem. Immutable once built.
class Instance {
public:
    static constexpr double kBestArmTolerance = 1e-12;

    Instance(ArmSet arms, Vector theta, NoiseModel noise, double R, double S)
        : arms_(std::move(arms)), theta_(std::move(theta)), noise_(noise), R_(R), S_(S) {
        detail::require_dim(theta_, arms_.dim(), "Instance theta");
        if (!theta_.allFinite()) throw InvalidInput("Instance: non-finite theta");
        if (!(R_ > 0.0) || !std::isfinite(R_)) throw InvalidInput("Instance: R must be positive");
        if (!(S_ > 0.0) || !std::isfinite(S_)) throw InvalidInput("Instance: S must be positive");
        if (theta_.norm() > S_ * (1.0 + 1e-12)) {
            throw InvalidInput("Instance: ||theta|| exceeds S");
        }
        if (const auto* g = std::get_if<GaussianNoise>(&noise_)) {
            if (!(g->sigma >= 0.0) || g->sigma > R_) {
                throw InvalidInput("Instance: gaussian sigma must lie in [0, R]");
            }
        }
        means_ = arms_.features() * theta_;
        if (is_signflip()) {
            for (Eigen::Index i = 0; i < means_.size(); ++i) {
                if (std::abs(means_(i)) > 1.0) {
                    throw InvalidInput("Instance: sign-flip arm " + std::to_string(i + 1) +
                                       " has mean outside [-1, 1]");
                }
            }
        }
        Eigen::Index best = 0;
        means_.maxCoeff(&best);
        best_ = static_cast<std::size_t>(best);
        for (Eigen::Index i = 0; i < means_.size(); ++i) {
            if (i != best && means_(best) - means_(i) <= kBestArmTolerance) {
                throw InvalidInput("Instance: best arm is not unique (arms " + std::to_string(best + 1) +
                                   " and " + std::to_string(i + 1) + " tie)");
            }
        }
    }

    const ArmSet& arms() const noexcept { return arms_; }
    const Vector& theta() const noexcept { return theta_; }
    const NoiseModel& noise() const noexcept { return noise_; }
    double R() const noexcept { return R_; }
    double S() const noexcept { return S_; }
    std::size_t num_arms() const noexcept { return arms_.size(); }
    std::size_t dim() const noexcept { return arms_.dim(); }
    const Vector& means() const noexcept { return means_; }
    double mean(std::size_t arm) const { return means_(static_cast<Eigen::Index>(arm)); }
    std::size_t best_arm() const noexcept { return best_; }
    bool is_signflip() const noexcept { return std::holds_alternative<SignFlipNoise>(noise_); }
    // sigma used by the fixed-design (Azuma) width. Gaussian noise is unbounded, so R
    // stands in for the bound in both noise models.
    double noise_bound() const noexcept { return R_; }

private:
    ArmSet arms_;
    Vector theta_;
    NoiseModel noise_;
    double R_;
    double S_;
    Vector means_;
    std::size_t best_ = 0;
};

/// Draws x_arm^T theta + noise. Builds a fresh distribution per call; long runs should
/// go through RewardStream instead.
inline double sample_reward(const Instance& inst, std::size_t arm, Rng& rng) {
    if (arm >= inst.num_arms()) throw InvalidInput("sample_reward: arm index out of range");
    const double mu = inst.mean(arm);
    if (const auto* g = std::get_if<GaussianNoise>(&inst.noise())) {
        if (g->sigma == 0.0) return mu;
        std::normal_distribution<double> n(0.0, g->sigma);
        return mu + n(rng);
    }
    std::uniform_real_distribution<double> u(0.0, 1.0);
    return u(rng) < 0.5 * (1.0 + mu) ? 1.0 : -1.0;
}

// Per-run reward source owning its random stream.
class RewardStream {
public:
    RewardStream(const Instance& inst, std::uint64_t seed) : inst_(&inst), rng_(seed) {
        if (const auto* g = std::get_if<GaussianNoise>(&inst.noise())) sigma_ = g->sigma;
    }

    double operator()(std::size_t arm) {
        const double mu = inst_->mean(arm);
        if (inst_->is_signflip()) return uniform_(rng_) < 0.5 * (1.0 + mu) ? 1.0 : -1.0;
        if (sigma_ == 0.0) return mu;
        return mu + sigma_ * normal_(rng_);
    }

private:
    const Instance* inst_;
    Rng rng_;
    double sigma_ = 0.0;
    std::normal_distribution<double> normal_{0.0, 1.0};
    std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

/// d canonical arms plus x_{d+1} = (cos a, sin a, 0, ..., 0), theta = 2 e_1, N(0,1) noise.
/// The hard pair is (1, d+1), separated by 2(1 - cos a).
inline Instance make_setting_one(std::size_t d, double angle = 0.01) {
    if (d < 2) throw InvalidInput("make_setting_one: d must be at least 2");
    if (!(angle > 0.0) || angle >= std::acos(-1.0) / 2) {
        throw InvalidInput("make_setting_one: angle must lie in (0, pi/2)");
    }
    const auto n = static_cast<Eigen::Index>(d);
    Matrix x = Matrix::Zero(n + 1, n);
    x.topRows(n) = Matrix::Identity(n, n);
    x(n, 0) = std::cos(angle);
    x(n, 1) = std::sin(angle);
    Vector theta = Vector::Zero(n);
    theta(0) = 2.0;
    return Instance(ArmSet(std::move(x)), std::move(theta), GaussianNoise{1.0}, 1.0, 2.0);
}

/// Canonical basis arms with theta = gap * e_1: every suboptimal arm trails by `gap`.
inline Instance make_setting_two(std::size_t d, double gap) {
    if (d < 2) throw InvalidInput("make_setting_two: d must be at least 2");
    if (!(gap > 0.0) || !std::isfinite(gap)) throw InvalidInput("make_setting_two: gap must be positive");
    const auto n = static_cast<Eigen::Index>(d);
    Vector theta = Vector::Zero(n);
    theta(0) = gap;
    return Instance(ArmSet(Matrix::Identity(n, n)), std::move(theta), GaussianNoise{1.0}, 1.0, gap);
}

// ---------------------------------------------------------------------------
// Feature/outcome tables

/// Rows of (feature vector, outcome in {-1, +1}).
struct FeatureOutcomeTable {
    Matrix features;  // n x d
    Vector outcomes;  // n

    std::size_t rows() const noexcept { return static_cast<std::size_t>(features.rows()); }
    std::size_t dim() const noexcept { return static_cast<std::size_t>(features.cols()); }
};

namespace detail {

inline char detect_delimiter(const std::string& header) {
    for (char c : {',', '\t', ';'}) {
        if (header.find(c) != std::string::npos) return c;
    }
    return ' ';
}

inline std::vector<std::string> split_fields(const std::string& line, char delim) {
    std::vector<std::string> out;
    if (delim == ' ') {
        std::istringstream is(line);
        std::string tok;
        while (is >> tok) out.push_back(tok);
        return out;
    }
    std::string cur;
    for (char c : line) {
        if (c == delim) {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

inline double parse_double(const std::string& s, std::size_t row, std::size_t col) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    auto rest = s.substr(used);
    rest.erase(std::remove_if(rest.begin(), rest.end(), [](unsigned char c) { return std::isspace(c); }),
               rest.end());
    if (used == 0 || !rest.empty() || !std::isfinite(v)) {
        throw ConstructionError("table row " + std::to_string(row) + ", column " + std::to_string(col) +
                                ": cannot parse '" + s + "' as a number");
    }
    return v;
}

}  // namespace detail

/// Parses the delimiter-separated table format: a header row (f1,...,fd,outcome),
/// then one record per row. The delimiter (comma, tab, semicolon or whitespace)
/// is taken from the header.
inline FeatureOutcomeTable read_table(std::istream& in) {
    std::string header;
    while (std::getline(in, header)) {
        if (header.find_first_not_of(" \t\r") != std::string::npos) break;
    }
    if (header.empty()) throw ConstructionError("table: missing header row");
    const char delim = detail::detect_delimiter(header);
    const auto names = detail::split_fields(header, delim);
    if (names.size() < 2) throw ConstructionError("table: header needs at least one feature and an outcome");
    const std::size_t d = names.size() - 1;

    std::vector<double> values;
    std::vector<double> outcomes;
    std::string line;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto fields = detail::split_fields(line, delim);
        if (fields.size() != d + 1) {
            throw ConstructionError("table row " + std::to_string(row) + ": expected " +
                                    std::to_string(d + 1) + " fields, got " + std::to_string(fields.size()));
        }
        for (std::size_t k = 0; k < d; ++k) values.push_back(detail::parse_double(fields[k], row, k + 1));
        const double r = detail::parse_double(fields[d], row, d + 1);
        if (r != 1.0 && r != -1.0) {
            throw ConstructionError("table row " + std::to_string(row) + ": outcome must be -1 or +1");
        }
        outcomes.push_back(r);
    }
    if (outcomes.empty()) throw ConstructionError("table: no data rows");

    FeatureOutcomeTable t;
    const auto n = static_cast<Eigen::Index>(outcomes.size());
    t.features.resize(n, static_cast<Eigen::Index>(d));
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index k = 0; k < static_cast<Eigen::Index>(d); ++k) {
            t.features(i, k) = values[static_cast<std::size_t>(i) * d + static_cast<std::size_t>(k)];
        }
    }
    t.outcomes = Eigen::Map<const Vector>(outcomes.data(), n);
    return t;
}

inline FeatureOutcomeTable read_table_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConstructionError("cannot open table '" + path + "'");
    return read_table(in);
}

inline void write_table(std::ostream& out, const FeatureOutcomeTable& t) {
    for (std::size_t k = 0; k < t.dim(); ++k) out << 'f' << (k + 1) << ',';
    out << "outcome\n";
    out << std::setprecision(17);
    for (Eigen::Index i = 0; i < t.features.rows(); ++i) {
        for (Eigen::Index k = 0; k < t.features.cols(); ++k) out << t.features(i, k) << ',';
        out << (t.outcomes(i) > 0 ? "1" : "-1") << '\n';
    }
}

/// Ridge fit of outcomes on features: (F^T F + lambda I)^{-1} F^T r.
inline Vector fit_ridge(const FeatureOutcomeTable& t, double lambda) {
    if (t.rows() == 0) throw ConstructionError("fit_ridge: empty table");
    if (!(lambda > 0.0)) throw InvalidInput("fit_ridge: lambda must be positive");
    Matrix gram = t.features.transpose() * t.features;
    gram.diagonal().array() += lambda;
    return gram.ldlt().solve(t.features.transpose() * t.outcomes);
}

// Rounds up to two significant digits, e.g. 0.7312 -> 0.74.
inline double round_up_two_digits(double v) {
    if (!(v > 0.0)) return v;
    const double scale = std::pow(10.0, std::floor(std::log10(v)) - 1.0);
    return std::ceil(v / scale - 1e-9) * scale;
}

struct SurrogateTable {
    FeatureOutcomeTable table;
    Vector theta;  // parameter the outcomes were drawn from
};

/// Synthetic stand-in for a click log: each feature is the Kronecker product of two
/// vectors (1, u_1..u_{m-1}) with u_k ~ U[0,1) when `dim` is a perfect square m^2,
/// i.i.d. U[0,1) entries otherwise. Outcomes are sign-flip draws from a random theta
/// scaled so every generated row has |x^T theta| <= 0.6.
inline SurrogateTable generate_surrogate_table(std::size_t rows, std::size_t dim, std::uint64_t seed) {
    if (rows == 0 || dim == 0) throw InvalidInput("generate_surrogate_table: rows and dim must be positive");
    Rng rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);

    const auto m = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(dim))));
    const bool kron = m * m == dim && m >= 2;

    SurrogateTable s;
    auto& f = s.table.features;
    f.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(dim));
    for (std::size_t i = 0; i < rows; ++i) {
        if (kron) {
            Vector a(static_cast<Eigen::Index>(m)), b(static_cast<Eigen::Index>(m));
            a(0) = b(0) = 1.0;
            for (std::size_t k = 1; k < m; ++k) {
                a(static_cast<Eigen::Index>(k)) = unif(rng);
                b(static_cast<Eigen::Index>(k)) = unif(rng);
            }
            for (std::size_t p = 0; p < m; ++p)
                for (std::size_t q = 0; q < m; ++q)
                    f(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(p * m + q)) =
                        a(static_cast<Eigen::Index>(p)) * b(static_cast<Eigen::Index>(q));
        } else {
            for (std::size_t k = 0; k < dim; ++k) f(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = unif(rng);
        }
    }

    Vector theta(static_cast<Eigen::Index>(dim));
    for (Eigen::Index k = 0; k < theta.size(); ++k) theta(k) = normal(rng);
    const Vector raw = f * theta;
    // center the rewards before scaling so both signs occur
    const double shift = raw.mean();
    const Vector col_mean = f.colwise().mean().transpose();
    theta -= (shift / col_mean.squaredNorm()) * col_mean;
    const double peak = (f * theta).cwiseAbs().maxCoeff();
    theta *= 0.6 / peak;

    s.table.outcomes.resize(static_cast<Eigen::Index>(rows));
    const Vector means = f * theta;
    for (Eigen::Index i = 0; i < means.size(); ++i) {
        s.table.outcomes(i) = unif(rng) < 0.5 * (1.0 + means(i)) ? 1.0 : -1.0;
    }
    s.theta = std::move(theta);
    return s;
}

struct RealInstance {
    Instance instance;
    Vector fitted_theta;
    std::vector<std::size_t> rows;  // table rows the arms were drawn from (0-based)
    std::size_t attempts = 0;
};

/// Builds a sign-flip instance from a feature/outcome table: theta* is the ridge fit
/// (lambda_fit), arms are K distinct rows sampled without replacement, redrawn until
/// every gap is at least `min_gap` (at most `max_attempts` draws). R = 2 and S is
/// ||theta*|| rounded up to two significant digits.
inline RealInstance build_real_instance(const FeatureOutcomeTable& table, std::size_t K, double lambda_fit,
                                        double min_gap, Rng& rng, std::size_t max_attempts = 1000) {
    if (table.rows() == 0) throw ConstructionError("build_real_instance: empty table");
    if (K < 2) throw InvalidInput("build_real_instance: K must be at least 2");
    if (K > table.rows()) {
        throw ConstructionError("build_real_instance: K = " + std::to_string(K) + " exceeds the " +
                                std::to_string(table.rows()) + " table rows");
    }
    if (!(min_gap >= 0.0)) throw InvalidInput("build_real_instance: min_gap must be nonnegative");

    Vector theta = fit_ridge(table, lambda_fit);
    const Vector fitted = table.features * theta;
    for (Eigen::Index i = 0; i < fitted.size(); ++i) {
        if (std::abs(fitted(i)) > 1.0) {
            std::ostringstream msg;
            msg << "build_real_instance: fitted reward " << fitted(i) << " of table row " << (i + 2)
                << " (data row " << (i + 1) << ") lies outside [-1, 1]";
            throw ConstructionError(msg.str());
        }
    }
    const double S = round_up_two_digits(std::max(theta.norm(), 1e-12));

    std::vector<std::size_t> index(table.rows());
    for (std::size_t attempt = 1; attempt <= max_attempts; ++attempt) {
        std::iota(index.begin(), index.end(), std::size_t{0});
        // partial Fisher-Yates
        for (std::size_t k = 0; k < K; ++k) {
            std::uniform_int_distribution<std::size_t> pick(k, index.size() - 1);
            std::swap(index[k], index[pick(rng)]);
        }
        std::vector<std::size_t> chosen(index.begin(), index.begin() + static_cast<std::ptrdiff_t>(K));

        Vector means(static_cast<Eigen::Index>(K));
        for (std::size_t k = 0; k < K; ++k) means(static_cast<Eigen::Index>(k)) = fitted(static_cast<Eigen::Index>(chosen[k]));
        Eigen::Index best = 0;
        const double top = means.maxCoeff(&best);
        double min_sep = std::numeric_limits<double>::infinity();
        for (Eigen::Index k = 0; k < means.size(); ++k) {
            if (k != best) min_sep = std::min(min_sep, top - means(k));
        }
        if (min_sep <= Instance::kBestArmTolerance || min_sep < min_gap) continue;

        Matrix x(static_cast<Eigen::Index>(K), table.features.cols());
        for (std::size_t k = 0; k < K; ++k) x.row(static_cast<Eigen::Index>(k)) = table.features.row(static_cast<Eigen::Index>(chosen[k]));
        return RealInstance{Instance(ArmSet(std::move(x)), theta, SignFlipNoise{}, 2.0, S), theta,
                            std::move(chosen), attempt};
    }
    throw ConstructionError("build_real_instance: no draw of " + std::to_string(K) +
                            " arms met the gap requirement " + std::to_string(min_gap) + " within " +
                            std::to_string(max_attempts) + " attempts");
}

}  // namespace lingape
