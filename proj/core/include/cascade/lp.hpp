#pragma once

#include <Eigen/Dense>
#include <limits>

#include "cascade/errors.hpp"

namespace cascade {

/// minimize c'x  s.t.  a_eq x = b_eq,  a_ub x <= b_ub,  lower <= x <= upper.
/// Lower bounds must be finite; upper bounds may be +infinity.
struct LpProblem {
    Eigen::VectorXd c;
    Eigen::MatrixXd a_eq; // may be 0 x n
    Eigen::VectorXd b_eq;
    Eigen::MatrixXd a_ub; // may be 0 x n
    Eigen::VectorXd b_ub;
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;

    static constexpr double kInf = std::numeric_limits<double>::infinity();
};

struct LpResult {
    bool feasible = false;
    Eigen::VectorXd x;
    double objective = 0.0;
};

/// Dense two-phase primal simplex with Bland's rule. Deterministic.
/// Throws SolverFailure on iteration-limit or an unbounded problem.
LpResult solve_lp(const LpProblem& p);

} // namespace cascade
