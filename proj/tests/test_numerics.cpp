#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "wasslip/lp.hpp"
#include "wasslip/models.hpp"
#include "wasslip/numerics.hpp"

using namespace wasslip;

TEST(Norm, Basics) {
    EXPECT_EQ(norm(Vector{0, 0, 0}, NormTag::L2), 0.0);
    EXPECT_DOUBLE_EQ(norm(Vector{3, 4}, NormTag::L2), 5.0);
    EXPECT_DOUBLE_EQ(norm(Vector{1, -2, 3}, NormTag::LINF), 3.0);
    EXPECT_DOUBLE_EQ(norm(Vector{1, -2, 3}, NormTag::L1), 6.0);
    EXPECT_THROW(norm(Vector{}, NormTag::L2), DimensionError);
}

TEST(Norm, DualPairingSampled) {
    Rng rng(11);
    for (int t = 0; t < 200; ++t) {
        Vector v(5);
        for (double& e : v) e = rng.normal();
        for (NormTag tag : {NormTag::L1, NormTag::L2, NormTag::LINF}) {
            // closed-form maximizer of u.v over the unit dual ball
            Vector u(5, 0.0);
            switch (tag) {
                case NormTag::L1:
                    for (std::size_t i = 0; i < 5; ++i) u[i] = v[i] > 0 ? 1.0 : -1.0;
                    break;
                case NormTag::L2:
                    u = scaled(v, 1.0 / norm(v, NormTag::L2));
                    break;
                case NormTag::LINF: {
                    std::size_t arg = 0;
                    for (std::size_t i = 1; i < 5; ++i)
                        if (std::abs(v[i]) > std::abs(v[arg])) arg = i;
                    u[arg] = v[arg] > 0 ? 1.0 : -1.0;
                    break;
                }
            }
            EXPECT_NEAR(norm(u, dual(tag)), 1.0, 1e-12);
            EXPECT_NEAR(dot(u, v), norm(v, tag), 1e-9);
            Vector w(5);
            for (double& e : w) e = rng.normal();
            w = scaled(w, 1.0 / norm(w, dual(tag)));
            EXPECT_LE(dot(w, v), norm(v, tag) + 1e-9);
        }
    }
}

TEST(OperatorNorm, ClosedForms) {
    EXPECT_NEAR(operator_norm(Matrix::identity(3), NormTag::L2), 1.0, 1e-12);
    EXPECT_NEAR(operator_norm(Matrix::diagonal(Vector{3, 1}), NormTag::L2), 3.0, 1e-12);
    const Matrix A(2, 2, Vector{1, -2, 3, 4});
    EXPECT_DOUBLE_EQ(operator_norm(A, NormTag::L1), 6.0);
    EXPECT_DOUBLE_EQ(operator_norm(A, NormTag::LINF), 7.0);
    EXPECT_THROW(operator_norm(A, NormTag::L1, NormTag::L2), UnsupportedNormError);
}

TEST(OperatorNorm, MatchesJacobi) {
    Rng rng(5);
    const Matrix W = Matrix::gaussian(5, 4, rng);
    const double want = oracle::jacobi_sigma_max(W);
    EXPECT_LE(std::abs(operator_norm(W, NormTag::L2) - want), 1e-8 * want);
}

TEST(OperatorNorm, SampledRatioIsLowerBound) {
    Rng rng(21);
    const Matrix W = Matrix::gaussian(4, 6, rng);
    for (NormTag tag : {NormTag::L1, NormTag::L2, NormTag::LINF}) {
        const double op = operator_norm(W, tag);
        for (int s = 0; s < 1000; ++s) {
            Vector x(6);
            for (double& e : x) e = rng.normal();
            EXPECT_LE(norm(W.apply(x), tag) / norm(x, tag), op + 1e-9);
        }
    }
}

TEST(OperatorNorm, Submultiplicative) {
    Rng rng(8);
    for (int t = 0; t < 50; ++t) {
        const Matrix A = Matrix::gaussian(4, 5, rng), B = Matrix::gaussian(5, 3, rng);
        for (NormTag tag : {NormTag::L1, NormTag::L2, NormTag::LINF})
            EXPECT_LE(operator_norm(A * B, tag), operator_norm(A, tag) * operator_norm(B, tag) + 1e-9);
    }
}

TEST(PowerIteration, Diagonal) {
    const SingularTriple t = power_iteration(Matrix::diagonal(Vector{2, 5}));
    EXPECT_NEAR(t.sigma, 5.0, 1e-12);
    EXPECT_NEAR(std::abs(t.v[1]), 1.0, 1e-9);
    EXPECT_NEAR(t.v[0], 0.0, 1e-6);
}

TEST(PowerIteration, RankOne) {
    const Vector a{1, 2, -2}, b{3, 4};
    const SingularTriple t = power_iteration(Matrix::outer(a, b));
    EXPECT_NEAR(t.sigma, 3.0 * 5.0, 1e-10);
}

TEST(PowerIteration, ZeroMatrix) {
    const SingularTriple t = power_iteration(Matrix(3, 2));
    EXPECT_EQ(t.sigma, 0.0);
    EXPECT_DOUBLE_EQ(norm(t.u, NormTag::L2), 1.0);
    EXPECT_DOUBLE_EQ(norm(t.v, NormTag::L2), 1.0);
}

TEST(PowerIteration, JacobiSixBySix) {
    Rng rng(66);
    const Matrix W = Matrix::gaussian(6, 6, rng);
    PowerIterationOptions o;
    o.tol = 1e-10;
    const SingularTriple t = power_iteration(W, o);
    const double want = oracle::jacobi_sigma_max(W);
    EXPECT_LE(std::abs(t.sigma - want), 1e-8 * want);
    EXPECT_NEAR(norm(t.u, NormTag::L2), 1.0, 1e-12);
    EXPECT_NEAR(norm(t.v, NormTag::L2), 1.0, 1e-12);
}

TEST(PowerIteration, MonotoneHistory) {
    Rng rng(3);
    for (int k = 0; k < 20; ++k) {
        const Matrix W = Matrix::gaussian(7, 5, rng);
        PowerIterationOptions o;
        o.record_history = true;
        const SingularTriple t = power_iteration(W, o);
        for (std::size_t i = 1; i < t.history.size(); ++i) EXPECT_GE(t.history[i], t.history[i - 1] - 1e-12);
    }
}

TEST(PowerIteration, RejectsZeroIters) {
    PowerIterationOptions o;
    o.max_iters = 0;
    EXPECT_THROW(power_iteration(Matrix::identity(2), o), std::invalid_argument);
}

TEST(SolveLp, Trivial) {
    LPProblem p;
    p.objective = {1.0};
    p.ineq_constraints.push_back({{1.0}, 1.0});
    const LPSolution s = solve_lp(p);
    ASSERT_EQ(s.status, LPStatus::Optimal);
    EXPECT_NEAR(s.value, 1.0, 1e-12);
}

TEST(SolveLp, DegenerateOptimumSet) {
    LPProblem p;
    p.objective = {1.0, 1.0};
    p.ineq_constraints.push_back({{1.0, 1.0}, 1.0});
    const LPSolution s = solve_lp(p);
    ASSERT_EQ(s.status, LPStatus::Optimal);
    EXPECT_NEAR(s.value, 1.0, 1e-12);
    EXPECT_LE(lp_violation(p, s.point), 1e-9);
}

TEST(SolveLp, InfeasibleAndUnbounded) {
    LPProblem inf;
    inf.objective = {1.0};
    inf.eq_constraints.push_back({{1.0}, -1.0});
    EXPECT_EQ(solve_lp(inf).status, LPStatus::Infeasible);
    LPProblem unb;
    unb.objective = {1.0, 0.0};
    unb.ineq_constraints.push_back({{-1.0, 1.0}, 1.0});
    EXPECT_EQ(solve_lp(unb).status, LPStatus::Unbounded);
}

TEST(SolveLp, DimensionMismatch) {
    LPProblem p;
    p.objective = {1.0, 2.0};
    p.ineq_constraints.push_back({{1.0}, 1.0});
    EXPECT_THROW(solve_lp(p), DimensionError);
}

namespace {

LPProblem random_transport(Rng& rng, std::size_t m, std::size_t n) {
    Vector a(m), b(n);
    for (double& e : a) e = rng.uniform(0.1, 1.0);
    for (double& e : b) e = rng.uniform(0.1, 1.0);
    double sa = 0, sb = 0;
    for (double e : a) sa += e;
    for (double e : b) sb += e;
    for (double& e : a) e /= sa;
    for (double& e : b) e /= sb;
    LPProblem p;
    p.objective.resize(m * n);
    for (double& e : p.objective) e = -rng.uniform(0.0, 3.0);  // maximize -cost
    for (std::size_t i = 0; i < m; ++i) {
        Vector r(m * n, 0.0);
        for (std::size_t j = 0; j < n; ++j) r[i * n + j] = 1.0;
        p.eq_constraints.push_back({r, a[i]});
    }
    for (std::size_t j = 0; j < n; ++j) {
        Vector r(m * n, 0.0);
        for (std::size_t i = 0; i < m; ++i) r[i * n + j] = 1.0;
        p.eq_constraints.push_back({r, b[j]});
    }
    return p;
}

}  // namespace

TEST(SolveLp, TransportMatchesVertexEnumeration) {
    Rng rng(33);
    for (int t = 0; t < 25; ++t) {
        const LPProblem p = random_transport(rng, 3, 3);
        const LPSolution s = solve_lp(p);
        ASSERT_EQ(s.status, LPStatus::Optimal);
        const auto want = oracle::vertex_enumeration(p);
        ASSERT_TRUE(want.has_value());
        EXPECT_NEAR(s.value, *want, 1e-9);
        EXPECT_LE(lp_violation(p, s.point), 1e-9);
        EXPECT_NEAR(dot(p.objective, s.point), s.value, 1e-9);
    }
}

TEST(SolveLp, RandomInequalityLpsMatchEnumeration) {
    Rng rng(34);
    for (int t = 0; t < 25; ++t) {
        LPProblem p;
        p.objective = {rng.uniform(-1, 2), rng.uniform(-1, 2), rng.uniform(-1, 2)};
        for (int k = 0; k < 4; ++k)
            p.ineq_constraints.push_back({{rng.uniform(0.1, 2), rng.uniform(0.1, 2), rng.uniform(0.1, 2)}, rng.uniform(0.5, 2)});
        const LPSolution s = solve_lp(p);
        ASSERT_EQ(s.status, LPStatus::Optimal);
        EXPECT_NEAR(s.value, *oracle::vertex_enumeration(p), 1e-9);
        // weak duality on sampled feasible points
        for (int k = 0; k < 50; ++k) {
            Vector x{rng.uniform(0, 1), rng.uniform(0, 1), rng.uniform(0, 1)};
            if (lp_violation(p, x) > 0) continue;
            EXPECT_LE(dot(p.objective, x), s.value + 1e-9);
        }
    }
}

TEST(FiniteDifference, Quadratic) {
    const auto f = [](const Vector& x) { return dot(x, x); };
    const Vector g = finite_difference_gradient(f, Vector{1, 2}, 1e-5);
    EXPECT_NEAR(g[0], 2.0, 1e-6);
    EXPECT_NEAR(g[1], 4.0, 1e-6);
}

TEST(FiniteDifference, Constant) {
    const Vector g = finite_difference_gradient([](const Vector&) { return 7.0; }, Vector{1, 2, 3});
    for (double e : g) EXPECT_EQ(e, 0.0);
    EXPECT_THROW(finite_difference_gradient([](const Vector&) { return 0.0; }, Vector{1}, 0.0), std::invalid_argument);
}

TEST(FiniteDifference, SoftmaxCe) {
    Rng rng(9);
    const LinearSoftmax m(Matrix::gaussian(3, 4, rng));
    const Vector x{0.3, -0.2, 1.1, 0.5};
    const Vector fd = finite_difference_gradient([&](const Vector& p) { return loss_value(m, p, 1); }, x);
    EXPECT_LE(relative_error(fd, softmax_ce_loss(m, x, 1).grad_x), 1e-4);
}

TEST(Subgradient, MatchesDirectionalDerivative) {
    Rng rng(41);
    const Matrix W = Matrix::gaussian(4, 3, rng);
    for (NormTag tag : {NormTag::L1, NormTag::L2, NormTag::LINF}) {
        const NormSubgradient sg = operator_norm_subgradient(W, tag);
        EXPECT_NEAR(sg.value, operator_norm(W, tag), 1e-10);
        // subgradient inequality |||W + D||| >= |||W||| + <G, D>
        for (int k = 0; k < 20; ++k) {
            Matrix D = Matrix::gaussian(4, 3, rng, 0.1);
            Matrix P = W;
            P += D;
            double ip = 0.0;
            for (std::size_t i = 0; i < 12; ++i) ip += sg.grad.data()[i] * D.data()[i];
            EXPECT_GE(operator_norm(P, tag), sg.value + ip - 1e-9);
        }
    }
}

TEST(Subgradient, ZeroMatrixGivesZero) {
    const NormSubgradient sg = operator_norm_subgradient(Matrix(2, 2), NormTag::L2);
    EXPECT_EQ(sg.value, 0.0);
    EXPECT_TRUE(sg.grad.is_zero());
}
