#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "wasslip/adversarial.hpp"

using namespace wasslip;

namespace {

DiscreteMeasure sample_data(Rng& rng, std::size_t n, std::size_t dim, std::size_t k) {
    std::vector<LabeledPoint> pts;
    for (std::size_t i = 0; i < n; ++i) {
        LabeledPoint p{Vector(dim), i % k};
        for (double& e : p.x) e = rng.uniform(-1.5, 1.5);
        pts.push_back(p);
    }
    return empirical_from_samples(make_point_set(std::move(pts), k));
}

}  // namespace

TEST(Projection, L1BallProperties) {
    Rng rng(1);
    for (int t = 0; t < 200; ++t) {
        Vector v(4);
        for (double& e : v) e = rng.normal(0, 2);
        const double r = rng.uniform(0.1, 3);
        const Vector p = project_l1_ball(v, r);
        EXPECT_LE(norm(p, NormTag::L1), r + 1e-12);
        if (norm(v, NormTag::L1) <= r) {
            EXPECT_EQ(p, v);
        }
        // no feasible point is closer
        for (int k = 0; k < 20; ++k) {
            Vector q(4);
            for (double& e : q) e = rng.normal();
            q = scaled(q, rng.uniform() * r / norm(q, NormTag::L1));
            EXPECT_LE(norm(subtract(v, p), NormTag::L2), norm(subtract(v, q), NormTag::L2) + 1e-12);
        }
    }
}

TEST(Projection, ClosedForms) {
    const Vector v{3.0, -4.0};
    EXPECT_EQ(project_to_ball(v, BallSpec(NormTag::LINF, 1.0)), (Vector{1.0, -1.0}));
    const Vector p = project_to_ball(v, BallSpec(NormTag::L2, 1.0));
    EXPECT_NEAR(p[0], 0.6, 1e-15);
    EXPECT_NEAR(p[1], -0.8, 1e-15);
    EXPECT_EQ(project_to_ball(Vector{0.1, 0.1}, BallSpec(NormTag::L2, 1.0)), (Vector{0.1, 0.1}));
    EXPECT_THROW(BallSpec(NormTag::L2, -1.0), std::invalid_argument);
}

TEST(Pgd, ZeroEpsilon) {
    Rng rng(2);
    const LinearSoftmax m(Matrix::gaussian(3, 2, rng));
    const Vector x{0.5, -0.5};
    const AttackPoint a = pgd_attack(m, x, 1, BallSpec(NormTag::L2, 0.0));
    EXPECT_EQ(a.delta, (Vector{0.0, 0.0}));
    EXPECT_EQ(a.loss, loss_value(m, x, 1));
}

TEST(Fgsm, ExactForBinaryLinearLinf) {
    Rng rng(3);
    for (std::size_t dim = 1; dim <= 10; ++dim) {
        const LinearSoftmax m(Matrix::gaussian(2, dim, rng), Vector{rng.normal(), rng.normal()});
        Vector x(dim);
        for (double& e : x) e = rng.normal();
        const std::size_t y = rng.below(2);
        const BallSpec ball(NormTag::LINF, 0.3);
        const double want = oracle::corner_max([&](const Vector& p) { return loss_value(m, p, y); }, x, 0.3);
        EXPECT_NEAR(fgsm_attack(m, x, y, ball).loss, want, 1e-6);
        EXPECT_NEAR(pgd_attack(m, x, y, ball).loss, want, 1e-6);
    }
}

TEST(Pgd, BetweenCleanAndGridMaximum) {
    Rng rng(4);
    for (NormTag tag : {NormTag::L1, NormTag::L2, NormTag::LINF}) {
        for (int t = 0; t < 5; ++t) {
            const LinearSoftmax m(Matrix::gaussian(3, 2, rng, 2.0));
            const Vector x{rng.normal(), rng.normal()};
            const std::size_t y = rng.below(3);
            const BallSpec ball(tag, 0.4);
            const AttackPoint a = pgd_attack(m, x, y, ball);
            GridOptions fine;
            fine.per_axis = 201;
            fine.boundary = 20000;
            const double grid = grid_attack(m, x, y, ball, fine).loss;
            EXPECT_GE(a.loss, loss_value(m, x, y) - 1e-12);
            EXPECT_LE(a.loss, grid + 1e-6);
            EXPECT_LE(norm(a.delta, tag), 0.4 + 1e-9);
        }
    }
}

TEST(Pgd, ExtraStartDimensionChecked) {
    const LinearSoftmax m(Matrix::identity(2));
    PGDOptions o;
    o.extra_starts.push_back(Vector{1.0});
    EXPECT_THROW(pgd_attack(m, Vector{0.0, 0.0}, 0, BallSpec(NormTag::L2, 0.1), o), DimensionError);
}

TEST(AdversarialRisk, ZeroEpsilonIsEmpiricalRisk) {
    Rng rng(5);
    const LinearSoftmax m(Matrix::gaussian(3, 2, rng));
    const DiscreteMeasure mu = sample_data(rng, 6, 2, 3);
    for (AttackMethod meth : {AttackMethod::FGSM, AttackMethod::PGD, AttackMethod::GRID}) {
        AttackConfig c;
        c.method = meth;
        EXPECT_NEAR(adversarial_risk(m, mu, BallSpec(NormTag::L2, 0.0), c).adversarial_risk, empirical_risk(m, mu), 1e-15);
    }
}

TEST(AdversarialRisk, SingleAtom) {
    Rng rng(6);
    const LinearSoftmax m(Matrix::gaussian(3, 2, rng));
    const DiscreteMeasure mu = sample_data(rng, 1, 2, 3);
    AttackConfig c;
    c.seed = 99;
    const AttackResult r = adversarial_risk(m, mu, BallSpec(NormTag::L2, 0.3), c);
    PGDOptions o;
    o.seed = SeedSplitter(99).derive("pgd", 0);
    EXPECT_EQ(r.adversarial_risk, pgd_attack(m, mu.atom(0).x, mu.atom(0).y, BallSpec(NormTag::L2, 0.3), o).loss);
}

TEST(AdversarialRisk, GridMatchesPgdIn2d) {
    Rng rng(7);
    const MLP net = [&] {
        const std::vector<std::size_t> d{2, 6, 3};
        return random_mlp(d, ActivationTag::TANH, rng);
    }();
    const DiscreteMeasure mu = sample_data(rng, 10, 2, 3);
    for (NormTag tag : {NormTag::L2, NormTag::LINF}) {
        AttackConfig pg, gr;
        gr.method = AttackMethod::GRID;
        const BallSpec ball(tag, 0.2);
        const AttackResult a = adversarial_risk(net, mu, ball, pg), b = adversarial_risk(net, mu, ball, gr);
        EXPECT_NEAR(a.adversarial_risk, b.adversarial_risk, 1e-3);
        for (const auto* r : {&a, &b}) {
            EXPECT_LE(r->max_perturbation_norm(), 0.2 + 1e-9);
            for (std::size_t i = 0; i < mu.size(); ++i) EXPECT_GE(r->losses[i], r->clean_losses[i] - 1e-9);
        }
    }
}

TEST(AdversarialRisk, GridRejectsHighDimensions) {
    const LinearSoftmax m(Matrix(2, 3));
    Rng rng(1);
    AttackConfig c;
    c.method = AttackMethod::GRID;
    EXPECT_THROW(adversarial_risk(m, sample_data(rng, 2, 3, 2), BallSpec(NormTag::L2, 0.1), c), DimensionError);
}

TEST(AdversarialRisk, SweepIsMonotone) {
    Rng rng(8);
    const std::vector<std::size_t> d{3, 8, 3};
    const MLP net = random_mlp(d, ActivationTag::RELU, rng, 2.0);
    const DiscreteMeasure mu = sample_data(rng, 12, 3, 3);
    for (NormTag tag : {NormTag::L1, NormTag::L2, NormTag::LINF}) {
        const auto sweep = adversarial_risk_sweep(net, mu, tag, {0.5, 0.0, 0.05, 0.2, 0.1});
        ASSERT_EQ(sweep.size(), 5u);
        for (std::size_t k = 1; k < sweep.size(); ++k) {
            EXPECT_GT(sweep[k].ball.epsilon, sweep[k - 1].ball.epsilon);
            EXPECT_GE(sweep[k].adversarial_risk, sweep[k - 1].adversarial_risk);
        }
    }
}

TEST(AdversarialBound, ZeroEpsilonBothSidesEqual) {
    Rng rng(9);
    const LinearSoftmax m(Matrix::gaussian(3, 2, rng));
    const DiscreteMeasure mu = sample_data(rng, 5, 2, 3);
    const RobustInstance inst(mu, MetricSpec(NormTag::L2, kInf, 3), 0.0);
    const Theorem52Verdict v = verify_theorem52(m, inst, BallSpec(NormTag::L2, 0.0));
    EXPECT_NEAR(v.adversarial_risk, empirical_risk(m, mu), 1e-12);
    EXPECT_NEAR(v.robust_value, empirical_risk(m, mu), 1e-12);
    EXPECT_TRUE(v.passed());
}

TEST(AdversarialBound, LargeKappaClosedFormAndStrict) {
    Rng rng(10);
    for (int t = 0; t < 5; ++t) {
        const LinearSoftmax m(Matrix::gaussian(3, 2, rng));
        const DiscreteMeasure mu = sample_data(rng, 6, 2, 3);
        const double eps = 0.1;
        const RobustInstance inst(mu, MetricSpec(NormTag::L2, 1e8, 3), eps);
        const Theorem52Verdict v = verify_theorem52(m, inst, BallSpec(NormTag::L2, eps));
        EXPECT_TRUE(v.passed());
        const double L = ce_lipschitz_bound(m, NormTag::L2);
        EXPECT_NEAR(v.robust_value, empirical_risk(m, mu) + eps * L, 1e-9);
        EXPECT_LT(v.adversarial_risk, v.robust_value);
    }
}

TEST(AdversarialBound, AttackPushforwardInBall) {
    Rng rng(11);
    const std::vector<std::size_t> d{2, 5, 2};
    const MLP net = random_mlp(d, ActivationTag::RELU, rng);
    const DiscreteMeasure mu = sample_data(rng, 8, 2, 2);
    for (NormTag tag : {NormTag::L2, NormTag::LINF}) {
        for (double eps : {0.01, 0.1, 0.5}) {
            const RobustInstance inst(mu, MetricSpec(tag, 1.0, 2), eps);
            const Theorem52Verdict v = verify_theorem52(net, inst, BallSpec(tag, eps));
            for (const auto& c : v.checks) EXPECT_TRUE(c.passed) << c.name << " " << c.detail;
            EXPECT_LE(v.max_attack_norm, eps + 1e-9);
            EXPECT_LE(v.attack_transport_cost, eps + 1e-9);
            EXPECT_GE(v.lp_value, v.adversarial_risk - 1e-8);
        }
    }
}

TEST(AdversarialBound, MismatchedInstanceRejected) {
    const LinearSoftmax m(Matrix::identity(2));
    Rng rng(1);
    const RobustInstance inst(sample_data(rng, 2, 2, 2), MetricSpec(NormTag::L2, 1.0, 2), 0.2);
    EXPECT_THROW(verify_theorem52(m, inst, BallSpec(NormTag::L2, 0.1)), std::invalid_argument);
    EXPECT_THROW(verify_theorem52(m, inst, BallSpec(NormTag::LINF, 0.2)), std::invalid_argument);
}

TEST(AttackMethod, ParseRoundTrip) {
    for (AttackMethod m : {AttackMethod::FGSM, AttackMethod::PGD, AttackMethod::GRID})
        EXPECT_EQ(parse_attack_method(to_string(m)), m);
    EXPECT_FALSE(parse_attack_method("cw").has_value());
}
