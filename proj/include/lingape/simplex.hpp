#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "lingape/linalg.hpp"

namespace lingape {

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpResult {
    LpStatus status = LpStatus::Infeasible;
    Vector x;                      // primal solution (size n) when optimal
    std::vector<std::size_t> basis;  // basic columns of the final tableau (original indices < n)
    double objective = 0.0;
    double phase_one_residual = 0.0;
    std::size_t pivots = 0;
};

namespace detail {

// Dense tableau over columns [original n | artificial m | rhs].
class SimplexTableau {
public:
    SimplexTableau(const Matrix& A, const Vector& b, double tol) : m_(A.rows()), n_(A.cols()), tol_(tol) {
        t_ = Matrix::Zero(m_ + 1, n_ + m_ + 1);
        basis_.resize(static_cast<std::size_t>(m_));
        for (Eigen::Index r = 0; r < m_; ++r) {
            const double sign = b(r) < 0.0 ? -1.0 : 1.0;
            t_.row(r).head(n_) = sign * A.row(r);
            t_(r, n_ + r) = 1.0;
            t_(r, n_ + m_) = sign * b(r);
            basis_[static_cast<std::size_t>(r)] = n_ + r;
        }
    }

    Eigen::Index rows() const { return m_; }
    Eigen::Index cols() const { return n_; }
    double rhs(Eigen::Index r) const { return t_(r, n_ + m_); }
    double at(Eigen::Index r, Eigen::Index c) const { return t_(r, c); }
    Eigen::Index basic(Eigen::Index r) const { return basis_[static_cast<std::size_t>(r)]; }
    bool is_artificial(Eigen::Index c) const { return c >= n_; }

    // Installs the reduced-cost row for costs c over all n + m columns.
    void set_costs(const Vector& c) {
        t_.row(m_).setZero();
        t_.row(m_).head(n_ + m_) = c.transpose();
        for (Eigen::Index r = 0; r < m_; ++r) {
            const double cb = c(basic(r));
            if (cb != 0.0) t_.row(m_) -= cb * t_.row(r);
        }
    }

    double objective() const { return -t_(m_, n_ + m_); }

    void pivot(Eigen::Index row, Eigen::Index col) {
        t_.row(row) /= t_(row, col);
        for (Eigen::Index r = 0; r <= m_; ++r) {
            if (r == row) continue;
            const double f = t_(r, col);
            if (f != 0.0) t_.row(r) -= f * t_.row(row);
        }
        basis_[static_cast<std::size_t>(row)] = col;
        ++pivots_;
    }

    // Bland's rule: lowest-index improving column enters; the min-ratio row with the
    // lowest basic index leaves. Returns false if unbounded.
    bool optimize(bool allow_artificial) {
        const Eigen::Index limit = allow_artificial ? n_ + m_ : n_;
        for (;;) {
            Eigen::Index enter = -1;
            for (Eigen::Index c = 0; c < limit; ++c) {
                if (t_(m_, c) < -tol_) {
                    enter = c;
                    break;
                }
            }
            if (enter < 0) return true;

            Eigen::Index leave = -1;
            double best_ratio = std::numeric_limits<double>::infinity();
            for (Eigen::Index r = 0; r < m_; ++r) {
                const double a = t_(r, enter);
                if (a <= tol_) continue;
                const double ratio = std::max(0.0, rhs(r)) / a;
                const double slack = 1e-12 * std::max(1.0, std::abs(best_ratio));
                if (leave < 0 || ratio < best_ratio - slack) {
                    best_ratio = ratio;
                    leave = r;
                } else if (ratio <= best_ratio + slack && basic(r) < basic(leave)) {
                    leave = r;
                }
            }
            if (leave < 0) return false;
            pivot(leave, enter);
        }
    }

    // After phase one: pivot basic artificials (at level zero) out where a structural
    // column can replace them; rows where none can are redundant and stay inert.
    void expel_artificials() {
        for (Eigen::Index r = 0; r < m_; ++r) {
            if (!is_artificial(basic(r))) continue;
            for (Eigen::Index c = 0; c < n_; ++c) {
                if (std::abs(t_(r, c)) > 1e3 * tol_) {
                    pivot(r, c);
                    break;
                }
            }
        }
    }

    std::size_t pivots() const { return pivots_; }

private:
    Eigen::Index m_;
    Eigen::Index n_;
    double tol_;
    Matrix t_;
    std::vector<Eigen::Index> basis_;
    std::size_t pivots_ = 0;
};

}  // namespace detail

/// Dense two-phase primal simplex for  min c^T x  s.t.  A x = b, x >= 0,
/// pivoting by Bland's rule so the pivot sequence (and hence the answer among
/// tied optima) is deterministic. Meant for small problems (tens of rows/columns).
inline LpResult solve_lp(const Matrix& A, const Vector& b, const Vector& c, double tol = 1e-11) {
    const Eigen::Index m = A.rows(), n = A.cols();
    if (b.size() != m || c.size() != n) throw InvalidInput("solve_lp: inconsistent dimensions");

    detail::SimplexTableau tab(A, b, tol);
    LpResult res;

    Vector phase_one = Vector::Zero(n + m);
    phase_one.tail(m).setOnes();
    tab.set_costs(phase_one);
    tab.optimize(true);
    res.phase_one_residual = std::max(0.0, tab.objective());
    const double scale = std::max(1.0, b.cwiseAbs().maxCoeff());
    if (res.phase_one_residual > 1e-9 * scale) {
        res.status = LpStatus::Infeasible;
        res.pivots = tab.pivots();
        return res;
    }
    tab.expel_artificials();

    Vector phase_two = Vector::Zero(n + m);
    phase_two.head(n) = c;
    tab.set_costs(phase_two);
    if (!tab.optimize(false)) {
        res.status = LpStatus::Unbounded;
        res.pivots = tab.pivots();
        return res;
    }

    res.status = LpStatus::Optimal;
    res.x = Vector::Zero(n);
    for (Eigen::Index r = 0; r < m; ++r) {
        const Eigen::Index col = tab.basic(r);
        if (tab.is_artificial(col)) continue;
        res.x(col) = std::max(0.0, tab.rhs(r));
        res.basis.push_back(static_cast<std::size_t>(col));
    }
    res.objective = c.dot(res.x);
    res.pivots = tab.pivots();
    return res;
}

}  // namespace lingape
