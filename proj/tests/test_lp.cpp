#include <doctest.h>

#include <random>

#include "cascade/lp.hpp"

using namespace cascade;

namespace {

LpProblem box_problem(int n) {
    LpProblem p;
    p.c = Eigen::VectorXd::Zero(n);
    p.a_eq = Eigen::MatrixXd::Zero(0, n);
    p.b_eq = Eigen::VectorXd::Zero(0);
    p.a_ub = Eigen::MatrixXd::Zero(0, n);
    p.b_ub = Eigen::VectorXd::Zero(0);
    p.lower = Eigen::VectorXd::Zero(n);
    p.upper = Eigen::VectorXd::Constant(n, LpProblem::kInf);
    return p;
}

} // namespace

TEST_CASE("two-variable LP lands on the known vertex") {
    // min -x1 - 2*x2  s.t.  x1 + x2 <= 4,  x1 <= 3,  x2 <= 2
    LpProblem p = box_problem(2);
    p.c << -1.0, -2.0;
    p.a_ub = Eigen::MatrixXd(1, 2);
    p.a_ub << 1.0, 1.0;
    p.b_ub = Eigen::VectorXd::Constant(1, 4.0);
    p.upper << 3.0, 2.0;
    const LpResult r = solve_lp(p);
    REQUIRE(r.feasible);
    CHECK(r.x(0) == doctest::Approx(2.0));
    CHECK(r.x(1) == doctest::Approx(2.0));
    CHECK(r.objective == doctest::Approx(-6.0));
}

TEST_CASE("equality constraints are honoured") {
    LpProblem p = box_problem(2);
    p.c << 3.0, 1.0;
    p.a_eq = Eigen::MatrixXd(1, 2);
    p.a_eq << 1.0, 1.0;
    p.b_eq = Eigen::VectorXd::Constant(1, 2.0);
    p.upper << 5.0, 5.0;
    const LpResult r = solve_lp(p);
    REQUIRE(r.feasible);
    CHECK(r.x(0) == doctest::Approx(0.0));
    CHECK(r.x(1) == doctest::Approx(2.0));
    CHECK(r.objective == doctest::Approx(2.0));
}

TEST_CASE("nonzero lower bounds shift the optimum") {
    LpProblem p = box_problem(1);
    p.c << 5.0;
    p.lower << -3.0;
    p.upper << 10.0;
    const LpResult r = solve_lp(p);
    REQUIRE(r.feasible);
    CHECK(r.x(0) == doctest::Approx(-3.0));
}

TEST_CASE("infeasible equality is reported, not thrown") {
    LpProblem p = box_problem(2);
    p.c << 1.0, 1.0;
    p.a_eq = Eigen::MatrixXd(1, 2);
    p.a_eq << 1.0, 1.0;
    p.b_eq = Eigen::VectorXd::Constant(1, 5.0);
    p.upper << 2.0, 2.0;
    CHECK_FALSE(solve_lp(p).feasible);
}

TEST_CASE("unbounded problem throws SolverFailure") {
    LpProblem p = box_problem(1);
    p.c << -1.0;
    CHECK_THROWS_AS(solve_lp(p), SolverFailure);
}

TEST_CASE("degenerate ties stay deterministic") {
    LpProblem p = box_problem(3);
    p.c << -1.0, -1.0, -1.0;
    p.a_ub = Eigen::MatrixXd(2, 3);
    p.a_ub << 1.0, 1.0, 0.0, 0.0, 1.0, 1.0;
    p.b_ub = Eigen::VectorXd::Constant(2, 1.0);
    p.upper << 1.0, 1.0, 1.0;
    const LpResult a = solve_lp(p);
    const LpResult b = solve_lp(p);
    REQUIRE(a.feasible);
    CHECK(a.objective == doctest::Approx(-2.0));
    CHECK((a.x - b.x).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("random feasible problems: returned point is feasible and no sampled point beats it") {
    std::mt19937_64 rng(1234);
    std::uniform_real_distribution<double> coef(-2.0, 2.0);
    std::uniform_real_distribution<double> width(0.5, 3.0);

    for (int trial = 0; trial < 150; ++trial) {
        const int n = 2 + static_cast<int>(rng() % 5);
        const int m_ub = static_cast<int>(rng() % 4);
        const int m_eq = static_cast<int>(rng() % 2);

        LpProblem p = box_problem(n);
        p.upper = Eigen::VectorXd::Zero(n);
        Eigen::VectorXd x0(n);
        for (int i = 0; i < n; ++i) {
            p.lower(i) = coef(rng);
            p.upper(i) = p.lower(i) + width(rng);
            std::uniform_real_distribution<double> inside(p.lower(i), p.upper(i));
            x0(i) = inside(rng);
            p.c(i) = coef(rng);
        }
        p.a_ub = Eigen::MatrixXd(m_ub, n);
        p.b_ub = Eigen::VectorXd(m_ub);
        for (int r = 0; r < m_ub; ++r) {
            for (int i = 0; i < n; ++i) p.a_ub(r, i) = coef(rng);
            p.b_ub(r) = p.a_ub.row(r).dot(x0) + 0.1; // feasible by construction
        }
        p.a_eq = Eigen::MatrixXd(m_eq, n);
        p.b_eq = Eigen::VectorXd(m_eq);
        for (int r = 0; r < m_eq; ++r) {
            for (int i = 0; i < n; ++i) p.a_eq(r, i) = coef(rng);
            p.b_eq(r) = p.a_eq.row(r).dot(x0);
        }

        const LpResult res = solve_lp(p);
        REQUIRE(res.feasible);

        const double tol = 1e-6;
        for (int i = 0; i < n; ++i) {
            CHECK(res.x(i) >= p.lower(i) - tol);
            CHECK(res.x(i) <= p.upper(i) + tol);
        }
        for (int r = 0; r < m_ub; ++r) CHECK(p.a_ub.row(r).dot(res.x) <= p.b_ub(r) + tol);
        for (int r = 0; r < m_eq; ++r)
            CHECK(p.a_eq.row(r).dot(res.x) == doctest::Approx(p.b_eq(r)).epsilon(1e-6));

        CHECK(res.objective <= p.c.dot(x0) + tol);

        // optimality spot-check against random feasible candidates
        for (int s = 0; s < 40; ++s) {
            Eigen::VectorXd cand(n);
            for (int i = 0; i < n; ++i) {
                std::uniform_real_distribution<double> inside(p.lower(i), p.upper(i));
                cand(i) = inside(rng);
            }
            if (m_eq > 0) continue; // random points will not hit equalities
            bool ok = true;
            for (int r = 0; r < m_ub; ++r)
                if (p.a_ub.row(r).dot(cand) > p.b_ub(r)) ok = false;
            if (ok) CHECK(res.objective <= p.c.dot(cand) + tol);
        }
    }
}
