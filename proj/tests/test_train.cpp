#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "wasslip/data.hpp"
#include "wasslip/train.hpp"

using namespace wasslip;

namespace {

DiscreteMeasure blobs(std::size_t n, std::uint64_t seed) {
    DataSpec s;
    s.n = n;
    s.seed = seed;
    return empirical_from_samples(gen_data(s));
}

MLP net(std::vector<std::size_t> dims, std::uint64_t seed, ActivationTag act = ActivationTag::TANH) {
    Rng rng(seed);
    return random_mlp(dims, act, rng);
}

TrainConfig config(ObjectiveKind k, double rho) {
    TrainConfig c;
    c.objective = k;
    c.rho = rho;
    c.epochs = 10;
    c.learning_rate = 0.05;
    return c;
}

}  // namespace

TEST(Penalty, ZeroRhoIsPureErm) {
    const MLP m = net({2, 5, 2}, 1);
    const DiscreteMeasure d = blobs(20, 1);
    for (ObjectiveKind k : {ObjectiveKind::PRODUCT, ObjectiveKind::SPECTRAL}) {
        const ObjectiveEval e = objective_and_grad(m, d, config(k, 0.0));
        EXPECT_EQ(e.penalty, 0.0);
        EXPECT_EQ(e.value, e.erm);
        EXPECT_NEAR(e.erm, empirical_risk(m, d), 1e-12);
    }
}

TEST(Penalty, ZeroWeights) {
    MLP m = net({2, 4, 3}, 2);
    m.set_parameters(Vector(m.parameter_count(), 0.0));
    for (ObjectiveKind k : {ObjectiveKind::PRODUCT, ObjectiveKind::SPECTRAL}) {
        const PenaltyEval p = lipschitz_penalty(m, config(k, 1.0));
        EXPECT_EQ(p.value, 0.0);
        for (double g : p.grad) EXPECT_EQ(g, 0.0);
    }
}

TEST(Penalty, ClosedForms) {
    // two layers with norms 2 and 0.5
    std::vector<DenseLayer> hidden{{Matrix::diagonal(Vector{2.0, 1.0}), Vector{0.0, 0.0}, ActivationTag::RELU}};
    const MLP m(hidden, LinearSoftmax(Matrix::diagonal(Vector{0.5, 0.25})));
    const double c = std::sqrt(2.0);
    EXPECT_NEAR(lipschitz_penalty(m, config(ObjectiveKind::PRODUCT, 0.3)).value, 0.3 * c * 1.0, 1e-10);
    EXPECT_NEAR(lipschitz_penalty(m, config(ObjectiveKind::SPECTRAL, 0.3)).value, 0.3 * c * (4.0 + 0.25) / 2.0, 1e-10);
    EXPECT_THROW(lipschitz_penalty(m, config(ObjectiveKind::DUAL_LINEAR, 0.3)), std::invalid_argument);

    const MLP lin(LinearSoftmax(Matrix::diagonal(Vector{3.0, 1.0})));
    for (ObjectiveKind k : {ObjectiveKind::DUAL_LINEAR, ObjectiveKind::PRODUCT, ObjectiveKind::SPECTRAL})
        EXPECT_NEAR(lipschitz_penalty(lin, config(k, 0.5)).value, 0.5 * c * 3.0, 1e-10);
}

TEST(Penalty, SpectralDominatesProduct) {
    for (std::uint64_t s = 0; s < 20; ++s) {
        const MLP m = net({3, 6, 5, 2}, s);
        EXPECT_GE(lipschitz_penalty(m, config(ObjectiveKind::SPECTRAL, 0.7)).value,
                  lipschitz_penalty(m, config(ObjectiveKind::PRODUCT, 0.7)).value * (1 - 1e-12));
    }
}

TEST(Penalty, GradientMatchesFiniteDifferences) {
    for (ObjectiveKind k : {ObjectiveKind::PRODUCT, ObjectiveKind::SPECTRAL}) {
        for (NormTag tag : {NormTag::L1, NormTag::L2, NormTag::LINF}) {
            const MLP m = net({3, 4, 2}, 7);
            TrainConfig c = config(k, 0.8);
            c.norm = tag;
            const PenaltyEval p = lipschitz_penalty(m, c);
            const Vector x0 = m.parameters();
            const Vector fd = finite_difference_gradient(
                [&](std::span<const double> x) {
                    MLP t = m;
                    t.set_parameters(Vector(x.begin(), x.end()));
                    return lipschitz_penalty(t, c).value;
                },
                x0, 1e-6);
            ASSERT_EQ(fd.size(), p.grad.size());
            for (std::size_t i = 0; i < fd.size(); ++i) EXPECT_NEAR(p.grad[i], fd[i], 1e-4 * (1 + std::abs(fd[i])));
        }
    }
}

TEST(Objective, DecomposesAndBatchesRenormalize) {
    const MLP m = net({2, 5, 2}, 3);
    const DiscreteMeasure d = blobs(30, 3);
    const TrainConfig c = config(ObjectiveKind::SPECTRAL, 0.4);
    const ObjectiveEval e = objective_and_grad(m, d, c);
    EXPECT_DOUBLE_EQ(e.value, e.erm + e.penalty);
    EXPECT_NEAR(e.penalty, lipschitz_penalty(m, c).value, 1e-12);

    const std::vector<std::size_t> one{4};
    const ObjectiveEval b = objective_and_grad(m, d, c, one);
    EXPECT_NEAR(b.erm, loss_value(m, d.atom(4).x, d.atom(4).y), 1e-12);
}

TEST(Objective, DataWithMoreClassesRejected) {
    DataSpec s;
    s.k = 3;
    s.n = 9;
    EXPECT_THROW(objective_and_grad(net({2, 2}, 1), empirical_from_samples(gen_data(s)), TrainConfig{}), DimensionError);
}

TEST(ProjectLayer, Examples) {
    const Matrix W = Matrix::diagonal(Vector{3.0, 1.0});
    const Matrix P = project_layer_lipschitz(W, 1.5);
    EXPECT_NEAR(P(0, 0), 1.5, 1e-12);
    EXPECT_NEAR(P(1, 1), 0.5, 1e-12);
    const Matrix same = project_layer_lipschitz(W, 5.0);
    EXPECT_TRUE(std::equal(same.data().begin(), same.data().end(), W.data().begin(), W.data().end()));
    EXPECT_THROW(project_layer_lipschitz(W, 0.0), std::invalid_argument);
    EXPECT_NEAR(operator_norm(project_layer_lipschitz(Matrix{2, 2, {1, 1, 1, 1}}, 1.0, NormTag::L1), NormTag::L1), 1.0, 1e-12);
}

TEST(TrainLoop, ZeroRhoTrajectoriesAgree) {
    const DiscreteMeasure d = blobs(40, 4);
    auto run = [&](std::vector<std::size_t> dims, ObjectiveKind k) {
        MLP m = net(dims, 5);
        train_loop(m, d, config(k, 0.0));
        return m.parameters();
    };
    EXPECT_EQ(run({2, 2}, ObjectiveKind::DUAL_LINEAR), run({2, 2}, ObjectiveKind::SPECTRAL));
    EXPECT_EQ(run({2, 2}, ObjectiveKind::PRODUCT), run({2, 2}, ObjectiveKind::SPECTRAL));
    EXPECT_EQ(run({2, 6, 2}, ObjectiveKind::PRODUCT), run({2, 6, 2}, ObjectiveKind::SPECTRAL));
}

TEST(TrainLoop, FullBatchDescent) {
    const DiscreteMeasure d = blobs(40, 5);
    for (ObjectiveKind k : {ObjectiveKind::PRODUCT, ObjectiveKind::SPECTRAL}) {
        MLP m = net({2, 6, 2}, 6);
        TrainConfig c = config(k, 0.1);
        c.learning_rate = 0.02;
        const TrainReport r = train_loop(m, d, c);
        ASSERT_EQ(r.epochs.size(), 11u);
        for (std::size_t e = 1; e < r.epochs.size(); ++e)
            EXPECT_LE(r.epochs[e].objective, r.epochs[e - 1].objective + 1e-12) << "epoch " << e;
        EXPECT_FALSE(r.diverged);
        ASSERT_TRUE(r.certificate.has_value());
        EXPECT_GE(r.certificate->robust_value, r.epochs.back().erm - 1e-12);
    }
}

TEST(TrainLoop, LargeRhoShrinksLipschitzBound) {
    const DiscreteMeasure d = blobs(40, 6);
    auto final_product = [&](double rho) {
        MLP m = net({2, 8, 2}, 7);
        TrainConfig c = config(ObjectiveKind::SPECTRAL, rho);
        c.epochs = 60;
        return train_loop(m, d, c).epochs.back().product_bound;
    };
    EXPECT_LT(final_product(2.0), final_product(0.0));
}

TEST(TrainLoop, CapKeepsLayerNormsBounded) {
    const DiscreteMeasure d = blobs(40, 7);
    MLP m = net({2, 8, 8, 2}, 8);
    TrainConfig c = config(ObjectiveKind::SPECTRAL, 0.0);
    c.lipschitz_cap = 0.9;
    c.learning_rate = 0.5;
    const TrainReport r = train_loop(m, d, c);
    for (std::size_t j = 0; j < m.depth(); ++j) EXPECT_LE(operator_norm(m.weight(j), NormTag::L2), 0.9 + 1e-9);
    for (std::size_t e = 1; e < r.epochs.size(); ++e)
        for (double a : r.epochs[e].layer_norms) EXPECT_LE(a, 0.9 + 1e-9);
}

TEST(TrainLoop, MiniBatchDeterministic) {
    const DiscreteMeasure d = blobs(50, 8);
    auto run = [&](std::uint64_t seed) {
        MLP m = net({2, 5, 2}, 9);
        TrainConfig c = config(ObjectiveKind::SPECTRAL, 0.2);
        c.batch_size = 7;
        c.momentum = 0.5;
        c.seed = seed;
        train_loop(m, d, c);
        return m.parameters();
    };
    EXPECT_EQ(run(11), run(11));
    EXPECT_NE(run(11), run(12));
}

TEST(TrainLoop, DivergenceStopsEarly) {
    const DiscreteMeasure d = blobs(20, 9);
    MLP m = net({2, 4, 2}, 10);
    TrainConfig c = config(ObjectiveKind::SPECTRAL, 1.0);
    c.learning_rate = 100.0;
    c.divergence_threshold = 5.0;
    const TrainReport r = train_loop(m, d, c);
    EXPECT_TRUE(r.diverged);
    EXPECT_FALSE(r.certificate.has_value());
    EXPECT_LT(r.epochs.size(), 11u);
}

TEST(TrainConfig, Validation) {
    MLP m = net({2, 2}, 1);
    const DiscreteMeasure d = blobs(4, 1);
    TrainConfig c;
    c.rho = -1;
    EXPECT_THROW(train_loop(m, d, c), std::invalid_argument);
    c = TrainConfig{};
    c.momentum = 1.0;
    EXPECT_THROW(train_loop(m, d, c), std::invalid_argument);
    c = TrainConfig{};
    c.lipschitz_cap = 0.0;
    EXPECT_THROW(train_loop(m, d, c), std::invalid_argument);
}

TEST(Accuracy, CountsArgmaxHits) {
    const MLP m(LinearSoftmax(Matrix::identity(2)));
    const std::vector<LabeledPoint> pts{{{1.0, 0.0}, 0}, {{0.0, 1.0}, 1}, {{1.0, 0.0}, 1}, {{0.2, 0.1}, 0}};
    EXPECT_DOUBLE_EQ(accuracy(m, empirical_from_samples(make_point_set(pts, 2))), 0.75);
}
