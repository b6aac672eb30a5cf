#pragma once

// Seeded oracle checks run by `wasslip verify`. Each check builds its own
// instances from named seed streams, so checks are independent of each other
// and of the order they run in.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "wasslip/adversarial.hpp"
#include "wasslip/data.hpp"
#include "wasslip/measures.hpp"
#include "wasslip/models.hpp"
#include "wasslip/rng.hpp"
#include "wasslip/robust.hpp"
#include "wasslip/train.hpp"

namespace wasslip::suite {

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
    std::vector<std::pair<std::string, double>> metrics;
    double seconds = 0.0;
};

struct SuiteConfig {
    std::uint64_t seed = 20240601;
    std::size_t duality_instances = 100;
    std::size_t refinement_instances = 20;
    std::size_t threshold_instances = 20;
    std::size_t ce_slices = 5;
    std::size_t pushforward_triples = 50;
    std::size_t theorem52_seeds = 5;  // times 3 epsilons times 2 norms
    std::size_t chain_networks = 50;
    std::size_t gradient_checks = 200;
    std::size_t monotonicity_instances = 20;
    bool training = true;
};

namespace detail {

inline Rng stream(const SuiteConfig& c, std::string_view name, std::uint64_t i) {
    return Rng(SeedSplitter(c.seed).derive(name, i));
}

inline std::vector<LabeledPoint> random_points(Rng& r, std::size_t n, std::size_t dim, std::size_t k, double scale = 1.0) {
    std::vector<LabeledPoint> pts;
    for (std::size_t i = 0; i < n; ++i) {
        Vector x(dim);
        for (double& e : x) e = scale * r.normal();
        pts.push_back({std::move(x), static_cast<std::size_t>(r.below(k))});
    }
    return pts;
}

inline Vector random_weights(Rng& r, std::size_t n) {
    Vector w(n);
    for (double& e : w) e = 0.1 + r.uniform();
    return normalized_weights(std::move(w));
}

inline NormTag random_norm(Rng& r) { return static_cast<NormTag>(r.below(3)); }

inline std::string fmt(double v) { return format_double(v); }

}  // namespace detail

// Dual minimization vs. the primal LP on arbitrary finite loss tables.
inline CheckResult strong_duality(const SuiteConfig& cfg) {
    CheckResult res;
    res.name = "strong_duality";
    double worst = 0.0;
    std::size_t worst_at = 0;
    for (std::size_t s = 0; s < cfg.duality_instances; ++s) {
        Rng r = detail::stream(cfg, "duality", s);
        const std::size_t n = 1 + r.below(8);
        const std::size_t k = 2 + r.below(3);
        const std::size_t m = n + r.below(21 - n);
        const std::size_t dim = 1 + r.below(3);
        const PointSetPtr support = make_point_set(detail::random_points(r, n, dim, k), k);
        const PointSetPtr targets =
            m > n ? concat(*support, *make_point_set(detail::random_points(r, m - n, dim, k), k)) : support;
        const double kappa = r.below(5) == 0 ? kInf : 0.1 + 2.0 * r.uniform();
        const RobustInstance inst(DiscreteMeasure(support, detail::random_weights(r, n)),
                                  MetricSpec(detail::random_norm(r), kappa, k), 2.0 * r.uniform(), targets);
        Vector losses(m);
        for (double& e : losses) e = r.uniform(-1.0, 3.0);
        const double dv = minimize_dual_on_targets(inst, losses).value;
        const double pv = primal_robust_risk_lp(inst, losses);
        const double err = std::abs(dv - pv) / (1.0 + std::abs(dv));
        if (err > worst) {
            worst = err;
            worst_at = s;
        }
    }
    res.passed = worst <= 1e-6;
    res.metrics = {{"instances", static_cast<double>(cfg.duality_instances)}, {"worst_relative_gap", worst}};
    res.detail = "worst relative gap " + detail::fmt(worst) + " at instance " + std::to_string(worst_at);
    return res;
}

// Dual value upper-bounds the LP on nested input grids, and the gap shrinks as they refine.
inline CheckResult grid_refinement(const SuiteConfig& cfg) {
    CheckResult res;
    res.name = "grid_refinement";
    bool ok = true;
    double min_slack = kInf;
    std::string why;
    for (std::size_t s = 0; s < cfg.refinement_instances && ok; ++s) {
        Rng r = detail::stream(cfg, "refinement", s);
        const std::size_t k = 3;
        const PointSetPtr support = make_point_set(detail::random_points(r, 8, 2, k, 0.6), k);
        const LinearSoftmax model(Matrix::gaussian(k, 2, r), Vector{r.normal(), r.normal(), r.normal()});
        const NormTag tag = s % 2 ? NormTag::LINF : NormTag::L2;
        const RobustInstance inst(empirical_from_samples(support), MetricSpec(tag, 0.5 + r.uniform(), k),
                                  0.1 + 0.4 * r.uniform());
        double prev_gap = kInf;
        for (std::size_t per_axis : {5, 9, 17}) {
            CertifyOptions o;
            o.oracle_grid = lattice(2, per_axis, -2.0, 2.0);
            const RobustCertificate c = robust_risk_theorem31(inst, model, o);
            min_slack = std::min(min_slack, *c.oracle_gap);
            if (*c.oracle_gap < -1e-9) {
                ok = false;
                why = "instance " + std::to_string(s) + ": oracle exceeds dual by " + detail::fmt(-*c.oracle_gap);
            } else if (*c.oracle_gap > prev_gap + 1e-9) {
                ok = false;
                why = "instance " + std::to_string(s) + ": gap grew under refinement";
            }
            prev_gap = *c.oracle_gap;
        }
    }
    res.passed = ok;
    res.metrics = {{"instances", static_cast<double>(cfg.refinement_instances)}, {"min_gap", min_slack}};
    res.detail = ok ? "min dual - oracle gap " + detail::fmt(min_slack) : why;
    return res;
}

// At kappa = 2 kappa_0 every label sup collapses and the dual equals empirical + rho L.
inline CheckResult collapse_threshold(const SuiteConfig& cfg) {
    CheckResult res;
    res.name = "collapse_threshold";
    double worst = 0.0;
    bool labels_ok = true;
    for (std::size_t s = 0; s < cfg.threshold_instances; ++s) {
        Rng r = detail::stream(cfg, "threshold", s);
        const std::size_t k = 2 + r.below(3);
        const std::size_t dim = 1 + r.below(4);
        const PointSetPtr support = make_point_set(detail::random_points(r, 10, dim, k), k);
        const LinearSoftmax model(Matrix::gaussian(k, dim, r));
        const NormTag tag = detail::random_norm(r);
        const double rho = 0.05 + r.uniform();
        const double L = ce_lipschitz_bound(model, tag);
        const LossTable table = label_loss_table(model, *support);
        const RobustInstance probe(empirical_from_samples(support), MetricSpec(tag, 1.0, k), rho);
        const double k0 = label_collapse_threshold(probe, table, L);
        const double kappa = k0 > 0.0 ? 2.0 * k0 : 1.0;
        const RobustInstance inst(probe.empirical, MetricSpec(tag, kappa, k), rho);
        const DualSolution d = minimize_dual(inst, model, L);
        const double emp = empirical_risk(model, inst.empirical);
        worst = std::max(worst, std::abs(d.value - (emp + rho * L)));
        for (std::size_t i = 0; i < support->size(); ++i) labels_ok = labels_ok && d.active_labels[i] == (*support)[i].y;
    }
    res.passed = worst <= 1e-9 && labels_ok;
    res.metrics = {{"instances", static_cast<double>(cfg.threshold_instances)}, {"worst_abs_error", worst}};
    res.detail = "worst |value - (empirical + rho L)| " + detail::fmt(worst) + (labels_ok ? "" : "; an active label moved");
    return res;
}

// Penalized sup equality above lip, unbounded growth below.
inline CheckResult lemma_a1(const SuiteConfig& cfg) {
    CheckResult res;
    res.name = "lemma_a1";
    std::vector<std::string> failures;
    std::size_t cases = 0;
    auto run = [&](const std::string& label, const std::function<double(const Vector&)>& psi, double lip, double gamma,
                   const Vector& z, std::size_t per_axis) {
        LemmaA1Options o;
        o.points_per_axis = per_axis;
        const LemmaA1Verdict v = verify_lemma_A1(psi, lip, gamma, z, o);
        ++cases;
        if (!v.passed) failures.push_back(label + " (" + v.detail + ")");
    };
    auto abs1 = [](const Vector& x) { return std::abs(x[0]); };
    auto huber = [](const Vector& x) { return std::abs(x[0]) <= 1.0 ? 0.5 * x[0] * x[0] : std::abs(x[0]) - 0.5; };
    run("abs equality", abs1, 1.0, 2.0, {0.0}, 2001);
    run("abs growth", abs1, 1.0, 0.5, {0.0}, 2001);
    run("huber equality", huber, 1.0, 1.0 + 1e-5, {0.3}, 2001);
    run("huber growth", huber, 1.0, 0.5, {0.3}, 2001);
    for (std::size_t s = 0; s < cfg.ce_slices; ++s) {
        Rng r = detail::stream(cfg, "lemma_a1", s);
        const LinearSoftmax model(Matrix::gaussian(3, 2, r), Vector{r.normal(), r.normal(), r.normal()});
        const std::size_t y = r.below(3);
        const Vector z{r.normal(), r.normal()};
        auto psi = [model, y](const Vector& x) { return loss_value(model, x, y); };
        const double lip = ce_slice_lipschitz(model, y, NormTag::L2);
        const std::string tag = "ce slice " + std::to_string(s);
        run(tag + " certified", psi, lip, ce_lipschitz_bound(model, NormTag::L2), z, 101);
        run(tag + " equality", psi, lip, lip * (1.0 + 1e-5), z, 101);
        run(tag + " growth", psi, lip, 0.5 * lip, z, 101);
    }
    res.passed = failures.empty();
    res.metrics = {{"cases", static_cast<double>(cases)}, {"failures", static_cast<double>(failures.size())}};
    res.detail = failures.empty() ? std::to_string(cases) + " cases" : failures.front();
    return res;
}

// Feature-space transport contraction and the pushforward upper bound.
inline CheckResult pushforward(const SuiteConfig& cfg) {
    CheckResult res;
    res.name = "pushforward";
    double worst_contraction = -kInf;
    double worst_bound = -kInf;
    bool membership = true;
    for (std::size_t s = 0; s < cfg.pushforward_triples; ++s) {
        Rng r = detail::stream(cfg, "pushforward", s);
        const std::size_t k = 2 + r.below(2);
        const NormTag tag = detail::random_norm(r);
        const ActivationTag act = s % 2 ? ActivationTag::TANH : ActivationTag::RELU;
        const std::vector<std::size_t> dims{2, 2 + r.below(6), k};
        const MLP model = random_mlp(dims, act, r);
        const double kappa = 0.2 + r.uniform();
        const MetricSpec metric(tag, kappa, k);
        const double rho = 0.05 + 0.5 * r.uniform();

        const PointSetPtr sup_mu = make_point_set(detail::random_points(r, 5, 2, k), k);
        const DiscreteMeasure mu(sup_mu, detail::random_weights(r, 5));
        const PointSetPtr sup_nu = make_point_set(detail::random_points(r, 4, 2, k), k);
        const DiscreteMeasure nu_prime(sup_nu, detail::random_weights(r, 4));
        const double C = transport_cost(mu, nu_prime, metric);
        const double t = C > 0.0 ? std::min(1.0, rho / C) : 1.0;
        // nu = t nu' + (1 - t) mu on the concatenated support
        Vector w;
        for (double e : mu.weights()) w.push_back((1.0 - t) * e);
        for (double e : nu_prime.weights()) w.push_back(t * e);
        const DiscreteMeasure nu(concat(*sup_mu, *sup_nu), normalized_weights(w));
        membership = membership && transport_cost(mu, nu, metric) <= rho + 1e-9;

        const double lphi = feature_lipschitz_bound(model, tag);
        auto phi = [&model](const LabeledPoint& p) { return LabeledPoint{feature_map(model, p.x), p.y}; };
        const double pushed = transport_cost(pushforward(mu, phi, k), pushforward(nu, phi, k), metric.with_kappa(kappa * lphi));
        worst_contraction = std::max(worst_contraction, pushed - lphi * rho);

        CertifyOptions o;
        o.oracle_grid = lattice(2, 7, -2.5, 2.5);
        const RobustCertificate c = pushforward_risk(RobustInstance(mu, metric, rho), model, o);
        worst_bound = std::max(worst_bound, *c.oracle_value - c.robust_value);
    }
    res.passed = membership && worst_contraction <= 1e-8 && worst_bound <= 1e-8;
    res.metrics = {{"triples", static_cast<double>(cfg.pushforward_triples)},
                   {"worst_contraction_excess", worst_contraction},
                   {"worst_oracle_excess", worst_bound}};
    res.detail = "max C(phi#mu, phi#nu) - L rho " + detail::fmt(worst_contraction) + ", max oracle - pushforward " +
                 detail::fmt(worst_bound) + (membership ? "" : "; constructed nu left the ball");
    return res;
}

// Adversarial risk (PGD, GRID) below the robust risk at rho = epsilon, with the LP checks.
inline CheckResult theorem52(const SuiteConfig& cfg) {
    CheckResult res;
    res.name = "theorem52";
    std::string why;
    std::size_t tuples = 0;
    double worst = -kInf;
    for (std::size_t s = 0; s < cfg.theorem52_seeds; ++s) {
        for (double eps : {0.01, 0.1, 0.5}) {
            for (NormTag tag : {NormTag::L2, NormTag::LINF}) {
                Rng r = detail::stream(cfg, "theorem52", tuples++);
                const std::size_t k = 3;
                const PointSetPtr support = make_point_set(detail::random_points(r, 10, 2, k), k);
                const RobustInstance inst(empirical_from_samples(support), MetricSpec(tag, s % 2 ? kInf : 1.0, k), eps);
                AttackConfig ac;
                ac.seed = r.below(1u << 30);
                auto check = [&](const auto& model) {
                    const Theorem52Verdict v = verify_theorem52(model, inst, BallSpec(tag, eps), ac);
                    worst = std::max(worst, v.adversarial_risk - v.robust_value);
                    if (!v.passed() && why.empty()) {
                        for (const auto& c : v.checks)
                            if (!c.passed) why = "tuple " + std::to_string(tuples - 1) + ": " + c.name + " " + c.detail;
                    }
                    AttackConfig gc = ac;
                    gc.method = AttackMethod::GRID;
                    const double grid = adversarial_risk(model, inst.empirical, BallSpec(tag, eps), gc).adversarial_risk;
                    worst = std::max(worst, grid - v.robust_value);
                    if (grid > v.robust_value + 1e-8 && why.empty())
                        why = "tuple " + std::to_string(tuples - 1) + ": GRID adversarial risk above robust value";
                };
                if (s % 2 == 0) {
                    check(LinearSoftmax(Matrix::gaussian(k, 2, r)));
                } else {
                    const std::vector<std::size_t> dims{2, 8, k};
                    check(random_mlp(dims, ActivationTag::TANH, r));
                }
            }
        }
    }
    res.passed = why.empty();
    res.metrics = {{"tuples", static_cast<double>(tuples)}, {"max_adversarial_minus_robust", worst}};
    res.detail = why.empty() ? "max adversarial - robust " + detail::fmt(worst) : why;
    return res;
}

// empirical Lipschitz <= layerwise product <= Young bound.
inline CheckResult lipschitz_chain(const SuiteConfig& cfg) {
    CheckResult res;
    res.name = "lipschitz_chain";
    std::string why;
    double worst_ratio = 0.0;
    for (std::size_t s = 0; s < cfg.chain_networks; ++s) {
        Rng r = detail::stream(cfg, "chain", s);
        const std::size_t layers = 1 + r.below(4);
        std::vector<std::size_t> dims;
        for (std::size_t i = 0; i <= layers; ++i) dims.push_back(1 + r.below(16));
        const ActivationTag act = static_cast<ActivationTag>(r.below(3));
        const MLP model = random_mlp(dims, act, r, 0.5 + r.uniform());
        const NormTag tag = detail::random_norm(r);
        const NetworkLipschitz nl = network_lipschitz_bound(model, tag);
        EmpiricalLipschitzOptions eo;
        eo.pairs = 400;
        eo.seed = SeedSplitter(cfg.seed).derive("chain-pairs", s);
        const double emp = empirical_lipschitz([&model](const Vector& x) { return mlp_forward(model, x).logits; },
                                               box_sampler(dims.front(), -2.0, 2.0), tag, tag, eo);
        if (nl.product > 0.0) worst_ratio = std::max(worst_ratio, emp / nl.product);
        if (emp > nl.product * (1.0 + 1e-9) + 1e-12 && why.empty())
            why = "network " + std::to_string(s) + ": empirical " + detail::fmt(emp) + " > product " + detail::fmt(nl.product);
        if (nl.product > nl.young + 1e-9 && why.empty())
            why = "network " + std::to_string(s) + ": product above Young bound";
    }
    res.passed = why.empty();
    res.metrics = {{"networks", static_cast<double>(cfg.chain_networks)}, {"max_empirical_over_product", worst_ratio}};
    res.detail = why.empty() ? "max empirical/product " + detail::fmt(worst_ratio) : why;
    return res;
}

// Analytic gradients vs. central differences.
inline CheckResult gradient_checks(const SuiteConfig& cfg) {
    CheckResult res;
    res.name = "gradient_checks";
    double worst_loss = 0.0, worst_penalty = 0.0;
    std::size_t done = 0, penalty_checks = 0;
    std::string why;
    for (std::size_t s = 0; done < cfg.gradient_checks; ++s) {
        Rng r = detail::stream(cfg, "gradients", s);
        const std::size_t kind = s % 4;
        const std::size_t k = 2 + r.below(3);
        const std::size_t n = 1 + r.below(4);
        if (kind < 3) {
            const std::size_t depth = kind == 0 ? 0 : 1 + r.below(2);
            std::vector<std::size_t> dims{n};
            for (std::size_t i = 0; i < depth; ++i) dims.push_back(2 + r.below(5));
            dims.push_back(k);
            const MLP model = random_mlp(dims, ActivationTag::TANH, r);
            Vector x(n);
            for (double& e : x) e = r.normal();
            const std::size_t y = r.below(k);
            const LossEval le = mlp_backprop(model, x, y);
            const Vector fx = finite_difference_gradient([&](const Vector& p) { return loss_value(model, p, y); }, x);
            const double ex = relative_error(le.grad_x, fx);
            MLP probe = model;
            const Vector fp = finite_difference_gradient(
                [&](const Vector& p) {
                    probe.set_parameters(p);
                    return loss_value(probe, x, y);
                },
                model.parameters());
            const double ep = relative_error(le.grad_params, fp);
            worst_loss = std::max({worst_loss, ex, ep});
            if (std::max(ex, ep) > 1e-4 && why.empty()) why = "loss gradient check " + std::to_string(s) + " rel err " + detail::fmt(std::max(ex, ep));
            done += 2;
        } else {
            std::vector<std::size_t> dims{n};
            const std::size_t depth = r.below(3);
            for (std::size_t i = 0; i < depth; ++i) dims.push_back(2 + r.below(5));
            dims.push_back(k);
            const MLP model = random_mlp(dims, ActivationTag::TANH, r);
            bool gap_ok = true;
            for (std::size_t j = 0; j < model.depth(); ++j) {
                const SingularTriple top = power_iteration(model.weight(j));
                const double s2 = second_singular_value(model.weight(j), top);
                gap_ok = gap_ok && top.sigma - s2 > 1e-2 * top.sigma;
            }
            if (!gap_ok) continue;
            TrainConfig tc;
            tc.rho = 0.1 + r.uniform();
            tc.objective = r.below(2) ? ObjectiveKind::SPECTRAL : ObjectiveKind::PRODUCT;
            if (model.depth() == 1 && r.below(2)) tc.objective = ObjectiveKind::DUAL_LINEAR;
            const PenaltyEval pe = lipschitz_penalty(model, tc);
            MLP probe = model;
            const Vector fp = finite_difference_gradient(
                [&](const Vector& p) {
                    probe.set_parameters(p);
                    return lipschitz_penalty(probe, tc).value;
                },
                model.parameters());
            const double e = relative_error(pe.grad, fp);
            worst_penalty = std::max(worst_penalty, e);
            if (e > 1e-3 && why.empty()) why = "penalty gradient check " + std::to_string(s) + " rel err " + detail::fmt(e);
            ++done;
            ++penalty_checks;
        }
    }
    res.passed = why.empty();
    res.metrics = {{"checks", static_cast<double>(done)},
                   {"penalty_checks", static_cast<double>(penalty_checks)},
                   {"worst_loss_rel_err", worst_loss},
                   {"worst_penalty_rel_err", worst_penalty}};
    res.detail = why.empty() ? "worst rel err loss " + detail::fmt(worst_loss) + ", penalty " + detail::fmt(worst_penalty) : why;
    return res;
}

inline DiscreteMeasure training_blobs(std::uint64_t seed) {
    DataSpec ds;
    ds.kind = DataKind::BLOBS;
    ds.n = 200;
    ds.k = 2;
    ds.dim = 2;
    ds.seed = seed;
    return empirical_from_samples(gen_data(ds));
}

inline bool same_trajectory(const TrainReport& a, const TrainReport& b) {
    if (a.epochs.size() != b.epochs.size()) return false;
    for (std::size_t e = 0; e < a.epochs.size(); ++e)
        if (a.epochs[e].erm != b.epochs[e].erm || a.epochs[e].objective != b.epochs[e].objective) return false;
    return true;
}

// Spectral penalty shrinks the Young sum at rho = 0.5 without losing accuracy;
// the three objectives coincide at rho = 0.
inline CheckResult training_behavior(const SuiteConfig& cfg) {
    CheckResult res;
    res.name = "training_behavior";
    const DiscreteMeasure data = training_blobs(SeedSplitter(cfg.seed).derive("training-data"));
    const std::vector<std::size_t> dims{2, 16, 2};
    auto run = [&](ObjectiveKind obj, double rho, const std::vector<std::size_t>& d, MLP* out = nullptr) {
        Rng r(SeedSplitter(cfg.seed).derive("training-init"));
        MLP m = random_mlp(d, ActivationTag::RELU, r);
        TrainConfig tc;
        tc.objective = obj;
        tc.rho = rho;
        tc.epochs = 100;
        tc.learning_rate = 0.1;
        TrainReport rep = train_loop(m, data, tc);
        if (out) *out = m;
        return rep;
    };
    MLP m0, m5;
    const TrainReport r0 = run(ObjectiveKind::SPECTRAL, 0.0, dims, &m0);
    const TrainReport r5 = run(ObjectiveKind::SPECTRAL, 0.5, dims, &m5);
    auto young_sum = [](const TrainReport& r) { return r.epochs.back().young_bound * static_cast<double>(r.epochs.back().layer_norms.size()); };
    const double s0 = young_sum(r0), s5 = young_sum(r5);
    const bool shrinks = s5 < s0;
    const bool accurate = r5.final_accuracy >= 0.9;

    const std::vector<std::size_t> lin{2, 2};
    MLP a, b, c;
    const TrainReport la = run(ObjectiveKind::DUAL_LINEAR, 0.0, lin, &a);
    const TrainReport lb = run(ObjectiveKind::PRODUCT, 0.0, lin, &b);
    const TrainReport lc = run(ObjectiveKind::SPECTRAL, 0.0, lin, &c);
    MLP mp;
    const TrainReport rp = run(ObjectiveKind::PRODUCT, 0.0, dims, &mp);
    const bool identical = same_trajectory(la, lb) && same_trajectory(la, lc) && a.parameters() == b.parameters() &&
                           a.parameters() == c.parameters() && same_trajectory(r0, rp) && m0.parameters() == mp.parameters();
    bool descent = true;
    for (std::size_t e = 1; e <= 10 && e < la.epochs.size(); ++e) descent = descent && la.epochs[e].erm < la.epochs[e - 1].erm;

    res.passed = shrinks && accurate && identical && descent;
    res.metrics = {{"young_sum_rho0", s0}, {"young_sum_rho05", s5}, {"accuracy_rho05", r5.final_accuracy}};
    res.detail = "sum |||W|||^l " + detail::fmt(s0) + " -> " + detail::fmt(s5) + ", accuracy " + detail::fmt(r5.final_accuracy) +
                 (identical ? "" : "; rho=0 trajectories differ") + (descent ? "" : "; ERM not decreasing");
    return res;
}

// Robust value nondecreasing in rho, nonincreasing in kappa, equal to the
// empirical risk at rho = 0, and convex in lambda along the feasible ray.
inline CheckResult robust_monotonicity(const SuiteConfig& cfg) {
    CheckResult res;
    res.name = "robust_monotonicity";
    std::string why;
    for (std::size_t s = 0; s < cfg.monotonicity_instances && why.empty(); ++s) {
        Rng r = detail::stream(cfg, "monotonicity", s);
        const std::size_t k = 2 + r.below(3);
        const std::size_t dim = 1 + r.below(3);
        const PointSetPtr support = make_point_set(detail::random_points(r, 8, dim, k), k);
        const LinearSoftmax model(Matrix::gaussian(k, dim, r));
        const NormTag tag = detail::random_norm(r);
        const DiscreteMeasure mu = empirical_from_samples(support);
        const double L = ce_lipschitz_bound(model, tag);
        auto value = [&](double rho, double kappa) {
            return minimize_dual(RobustInstance(mu, MetricSpec(tag, kappa, k), rho), model, L).value;
        };
        const double emp = empirical_risk(model, mu);
        if (std::abs(value(0.0, 1.0) - emp) > 1e-9) why = "instance " + std::to_string(s) + ": rho = 0 differs from empirical risk";
        double prev = -kInf;
        for (double rho : {0.0, 0.1, 0.3, 0.7, 1.5}) {
            const double v = value(rho, 1.0);
            if (v < prev - 1e-9 && why.empty()) why = "instance " + std::to_string(s) + ": decreased in rho";
            prev = v;
        }
        prev = kInf;
        for (double kappa : {0.05, 0.2, 1.0, 5.0, kInf}) {
            const double v = value(0.4, kappa);
            if (v > prev + 1e-9 && why.empty()) why = "instance " + std::to_string(s) + ": increased in kappa";
            prev = v;
        }
        const RobustInstance inst(mu, MetricSpec(tag, 0.5, k), 0.4);
        for (int t = 0; t < 20; ++t) {
            const double a = L + 3.0 * r.uniform(), b = L + 3.0 * r.uniform();
            const double fa = dual_objective(inst, model, a, L), fb = dual_objective(inst, model, b, L);
            const double fm = dual_objective(inst, model, 0.5 * (a + b), L);
            if (0.5 * (fa + fb) - fm < -1e-9 && why.empty()) why = "instance " + std::to_string(s) + ": midpoint convexity failed";
        }
    }
    res.passed = why.empty();
    res.metrics = {{"instances", static_cast<double>(cfg.monotonicity_instances)}};
    res.detail = why.empty() ? std::to_string(cfg.monotonicity_instances) + " instances" : why;
    return res;
}

struct NamedCheck {
    std::string_view name;
    CheckResult (*run)(const SuiteConfig&);
};

inline const std::vector<NamedCheck>& all_checks() {
    static const std::vector<NamedCheck> checks{
        {"strong_duality", strong_duality},   {"grid_refinement", grid_refinement},
        {"collapse_threshold", collapse_threshold}, {"lemma_a1", lemma_a1},
        {"pushforward", pushforward},         {"theorem52", theorem52},
        {"lipschitz_chain", lipschitz_chain}, {"gradient_checks", gradient_checks},
        {"training_behavior", training_behavior}, {"robust_monotonicity", robust_monotonicity},
    };
    return checks;
}

// Runs one check; exceptions become failed results carrying the message.
inline CheckResult run_check(const NamedCheck& c, const SuiteConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    CheckResult r;
    try {
        r = c.run(cfg);
    } catch (const std::exception& e) {
        r = CheckResult{};
        r.name = std::string(c.name);
        r.detail = std::string("exception: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

}  // namespace wasslip::suite
