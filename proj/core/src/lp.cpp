#include "cascade/lp.hpp"

#include <cmath>
#include <vector>

namespace cascade {

namespace {

constexpr double kTol = 1e-9;

struct Tableau {
    Eigen::MatrixXd a; // m x ncols, basis columns kept as identity
    Eigen::VectorXd b; // m, nonnegative
    std::vector<int> basis;

    void pivot(int row, int col) {
        const double piv = a(row, col);
        a.row(row) /= piv;
        b(row) /= piv;
        for (int i = 0; i < a.rows(); ++i) {
            if (i == row) continue;
            const double f = a(i, col);
            if (f != 0.0) {
                a.row(i) -= f * a.row(row);
                b(i) -= f * b(row);
            }
        }
        basis[static_cast<size_t>(row)] = col;
    }
};

/// Runs simplex on the tableau for the given cost vector. Columns with
/// allowed[j] == false never enter the basis. Returns the objective.
double run_simplex(Tableau& t, const Eigen::VectorXd& cost, const std::vector<bool>& allowed) {
    const int m = static_cast<int>(t.a.rows());
    const int n = static_cast<int>(t.a.cols());

    Eigen::VectorXd costrow = cost;
    double obj = 0.0;
    for (int i = 0; i < m; ++i) {
        const double cb = cost(t.basis[static_cast<size_t>(i)]);
        if (cb != 0.0) {
            costrow -= cb * t.a.row(i).transpose();
            obj += cb * t.b(i);
        }
    }

    const long max_iters = 20000L + 50L * (m + n);
    for (long iter = 0; iter < max_iters; ++iter) {
        // Bland: smallest-index entering column with negative reduced cost.
        int enter = -1;
        for (int j = 0; j < n; ++j) {
            if (allowed[static_cast<size_t>(j)] && costrow(j) < -kTol) {
                enter = j;
                break;
            }
        }
        if (enter < 0) return obj;

        int leave = -1;
        double best_ratio = 0.0;
        for (int i = 0; i < m; ++i) {
            if (t.a(i, enter) > kTol) {
                const double ratio = t.b(i) / t.a(i, enter);
                if (leave < 0 || ratio < best_ratio - kTol ||
                    (ratio < best_ratio + kTol &&
                     t.basis[static_cast<size_t>(i)] < t.basis[static_cast<size_t>(leave)])) {
                    leave = i;
                    best_ratio = ratio;
                }
            }
        }
        if (leave < 0) throw SolverFailure("lp: unbounded");

        const double delta = costrow(enter);
        t.pivot(leave, enter);
        obj += delta * t.b(leave);
        costrow -= delta * t.a.row(leave).transpose();
        costrow(enter) = 0.0;
    }
    throw SolverFailure("lp: iteration limit exceeded");
}

} // namespace

LpResult solve_lp(const LpProblem& p) {
    const int n = static_cast<int>(p.c.size());
    const int m_eq = static_cast<int>(p.b_eq.size());
    const int m_ub = static_cast<int>(p.b_ub.size());
    for (int j = 0; j < n; ++j) {
        if (!std::isfinite(p.lower(j)))
            throw SolverFailure("lp: lower bounds must be finite");
        if (p.upper(j) < p.lower(j) - kTol) return {};
    }

    // Shift to y = x - lower >= 0 and turn finite upper bounds into rows.
    std::vector<int> bound_rows;
    for (int j = 0; j < n; ++j)
        if (std::isfinite(p.upper(j))) bound_rows.push_back(j);

    const int m = m_eq + m_ub + static_cast<int>(bound_rows.size());
    Eigen::MatrixXd rows = Eigen::MatrixXd::Zero(m, n);
    Eigen::VectorXd rhs(m);
    std::vector<bool> is_eq(static_cast<size_t>(m), false);

    for (int i = 0; i < m_eq; ++i) {
        rows.row(i) = p.a_eq.row(i);
        rhs(i) = p.b_eq(i) - p.a_eq.row(i).dot(p.lower);
        is_eq[static_cast<size_t>(i)] = true;
    }
    for (int i = 0; i < m_ub; ++i) {
        rows.row(m_eq + i) = p.a_ub.row(i);
        rhs(m_eq + i) = p.b_ub(i) - p.a_ub.row(i).dot(p.lower);
    }
    for (size_t k = 0; k < bound_rows.size(); ++k) {
        const int i = m_eq + m_ub + static_cast<int>(k);
        const int j = bound_rows[k];
        rows(i, j) = 1.0;
        rhs(i) = p.upper(j) - p.lower(j);
    }

    // One slack per inequality row; artificials where the slack cannot seed
    // the basis (equalities and rows with negative rhs).
    std::vector<int> slack_col(static_cast<size_t>(m), -1);
    int ncols = n;
    for (int i = 0; i < m; ++i)
        if (!is_eq[static_cast<size_t>(i)]) slack_col[static_cast<size_t>(i)] = ncols++;
    const int n_slack_end = ncols;

    std::vector<int> art_col(static_cast<size_t>(m), -1);
    for (int i = 0; i < m; ++i) {
        const bool neg = rhs(i) < 0.0;
        if (is_eq[static_cast<size_t>(i)] || neg) art_col[static_cast<size_t>(i)] = ncols++;
    }

    Tableau t;
    t.a = Eigen::MatrixXd::Zero(m, ncols);
    t.b = Eigen::VectorXd::Zero(m);
    t.basis.resize(static_cast<size_t>(m));
    for (int i = 0; i < m; ++i) {
        double sign = rhs(i) < 0.0 ? -1.0 : 1.0;
        t.a.block(i, 0, 1, n) = sign * rows.row(i);
        t.b(i) = sign * rhs(i);
        if (slack_col[static_cast<size_t>(i)] >= 0) t.a(i, slack_col[static_cast<size_t>(i)]) = sign;
        if (art_col[static_cast<size_t>(i)] >= 0) {
            t.a(i, art_col[static_cast<size_t>(i)]) = 1.0;
            t.basis[static_cast<size_t>(i)] = art_col[static_cast<size_t>(i)];
        } else {
            t.basis[static_cast<size_t>(i)] = slack_col[static_cast<size_t>(i)];
        }
    }

    // Phase 1.
    bool any_art = false;
    Eigen::VectorXd c1 = Eigen::VectorXd::Zero(ncols);
    for (int i = 0; i < m; ++i) {
        if (art_col[static_cast<size_t>(i)] >= 0) {
            c1(art_col[static_cast<size_t>(i)]) = 1.0;
            any_art = true;
        }
    }
    if (any_art) {
        std::vector<bool> all_allowed(static_cast<size_t>(ncols), true);
        const double infeas = run_simplex(t, c1, all_allowed);
        if (infeas > 1e-7) return {}; // infeasible
        // Pivot lingering zero-level artificials out of the basis.
        for (int i = 0; i < m; ++i) {
            if (t.basis[static_cast<size_t>(i)] >= n_slack_end) {
                for (int j = 0; j < n_slack_end; ++j) {
                    if (std::abs(t.a(i, j)) > 1e-7) {
                        t.pivot(i, j);
                        break;
                    }
                }
            }
        }
    }

    // Phase 2: original costs; artificial columns may not re-enter.
    Eigen::VectorXd c2 = Eigen::VectorXd::Zero(ncols);
    c2.head(n) = p.c;
    std::vector<bool> allowed(static_cast<size_t>(ncols), true);
    for (int j = n_slack_end; j < ncols; ++j) allowed[static_cast<size_t>(j)] = false;
    run_simplex(t, c2, allowed);

    LpResult res;
    res.feasible = true;
    res.x = p.lower;
    for (int i = 0; i < m; ++i) {
        const int col = t.basis[static_cast<size_t>(i)];
        if (col < n) res.x(col) += t.b(i);
    }
    res.objective = p.c.dot(res.x);
    return res;
}

} // namespace cascade
