#pragma once

// Adversarial risk: E_mu max_{||d|| <= eps} loss(x + d, y), with the label held fixed.
// Inner maximization by FGSM, PGD (best-of restarts) or exhaustive grid in <= 2 dims.
// FGSM and PGD give lower bounds on the inner max; GRID is exact up to resolution.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "wasslip/error.hpp"
#include "wasslip/measures.hpp"
#include "wasslip/models.hpp"
#include "wasslip/rng.hpp"
#include "wasslip/robust.hpp"

namespace wasslip {

struct BallSpec {
    NormTag norm = NormTag::LINF;
    double epsilon = 0.0;

    BallSpec() = default;
    BallSpec(NormTag n, double eps) : norm(n), epsilon(eps) {
        if (!(eps >= 0.0) || !std::isfinite(eps)) throw std::invalid_argument("BallSpec: epsilon must be finite and >= 0");
    }
};

enum class AttackMethod { FGSM, PGD, GRID };

inline std::string_view to_string(AttackMethod m) noexcept {
    switch (m) {
        case AttackMethod::FGSM: return "FGSM";
        case AttackMethod::PGD: return "PGD";
        case AttackMethod::GRID: return "GRID";
    }
    return "?";
}

inline std::optional<AttackMethod> parse_attack_method(std::string_view s) {
    if (s == "FGSM" || s == "fgsm") return AttackMethod::FGSM;
    if (s == "PGD" || s == "pgd") return AttackMethod::PGD;
    if (s == "GRID" || s == "grid") return AttackMethod::GRID;
    return std::nullopt;
}

// Euclidean projection of v onto {w : ||w||_1 <= radius} (sort-based).
inline Vector project_l1_ball(std::span<const double> v, double radius) {
    Vector out(v.begin(), v.end());
    if (radius <= 0.0) {
        std::fill(out.begin(), out.end(), 0.0);
        return out;
    }
    if (norm(v, NormTag::L1) <= radius) return out;
    Vector u(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) u[i] = std::abs(v[i]);
    std::sort(u.begin(), u.end(), std::greater<>());
    double cum = 0.0, theta = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j) {
        cum += u[j];
        const double t = (cum - radius) / static_cast<double>(j + 1);
        if (u[j] - t > 0.0) theta = t;
    }
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double a = std::max(std::abs(v[i]) - theta, 0.0);
        out[i] = v[i] < 0.0 ? -a : a;
    }
    // Guard against rounding pushing the result a hair outside.
    const double n1 = norm(out, NormTag::L1);
    if (n1 > radius) out = scaled(out, radius / n1);
    return out;
}

inline Vector project_to_ball(std::span<const double> delta, const BallSpec& ball) {
    Vector out(delta.begin(), delta.end());
    if (out.empty()) throw DimensionError("project_to_ball: empty perturbation");
    const double eps = ball.epsilon;
    switch (ball.norm) {
        case NormTag::LINF:
            for (double& e : out) e = std::clamp(e, -eps, eps);
            return out;
        case NormTag::L2: {
            const double n = norm(out, NormTag::L2);
            if (n > eps) out = n > 0.0 ? scaled(out, eps / n) : Vector(out.size(), 0.0);
            if (norm(out, NormTag::L2) > eps) out = scaled(out, std::nextafter(1.0, 0.0));
            return out;
        }
        case NormTag::L1: return project_l1_ball(out, eps);
    }
    return out;
}

// Steepest-ascent direction of unit `norm` length for gradient g.
inline Vector ascent_direction(std::span<const double> g, NormTag tag) {
    Vector d(g.size(), 0.0);
    switch (tag) {
        case NormTag::LINF:
            for (std::size_t i = 0; i < g.size(); ++i) d[i] = g[i] > 0.0 ? 1.0 : (g[i] < 0.0 ? -1.0 : 0.0);
            return d;
        case NormTag::L2: {
            const double n = norm(g, NormTag::L2);
            if (n > 0.0) d = scaled(g, 1.0 / n);
            return d;
        }
        case NormTag::L1: {
            std::size_t arg = 0;
            for (std::size_t i = 1; i < g.size(); ++i)
                if (std::abs(g[i]) > std::abs(g[arg])) arg = i;
            if (g[arg] != 0.0) d[arg] = g[arg] > 0.0 ? 1.0 : -1.0;
            return d;
        }
    }
    return d;
}

struct AttackPoint {
    Vector delta;
    double loss = 0.0;
};

struct PGDOptions {
    std::size_t steps = 40;
    double step_size = 0.0;  // 0 -> 2.5 eps / steps
    std::size_t restarts = 3;
    std::uint64_t seed = 0;
    std::vector<Vector> extra_starts;  // evaluated and used as additional starts
};

template <ClassifierModel Model>
AttackPoint fgsm_attack(const Model& model, std::span<const double> x, std::size_t y, const BallSpec& ball) {
    AttackPoint best{Vector(x.size(), 0.0), loss_value(model, x, y)};
    if (ball.epsilon == 0.0) return best;
    const LossEval g = loss_and_grad(model, x, y);
    const Vector d = project_to_ball(scaled(ascent_direction(g.grad_x, ball.norm), ball.epsilon), ball);
    const double l = loss_value(model, add(x, d), y);
    if (l > best.loss) best = {d, l};
    return best;
}

template <ClassifierModel Model>
AttackPoint pgd_attack(const Model& model, std::span<const double> x, std::size_t y, const BallSpec& ball,
                       const PGDOptions& opts = {}) {
    if (opts.steps < 1) throw std::invalid_argument("pgd_attack: steps must be >= 1");
    if (opts.step_size < 0.0) throw std::invalid_argument("pgd_attack: step_size must be > 0");
    const std::size_t n = x.size();
    AttackPoint best{Vector(n, 0.0), loss_value(model, x, y)};
    if (ball.epsilon == 0.0) return best;
    const double step = opts.step_size > 0.0 ? opts.step_size : 2.5 * ball.epsilon / static_cast<double>(opts.steps);

    auto consider = [&](const Vector& d) {
        const double l = loss_value(model, add(x, d), y);
        if (l > best.loss) best = {d, l};
    };

    std::vector<Vector> starts;
    starts.emplace_back(n, 0.0);
    for (const auto& s : opts.extra_starts) {
        if (s.size() != n) throw DimensionError("pgd_attack: extra start has wrong dimension");
        starts.push_back(project_to_ball(s, ball));
    }
    Rng rng(opts.seed);
    for (std::size_t r = 0; r < opts.restarts; ++r) {
        Vector s(n);
        for (double& e : s) e = rng.uniform(-ball.epsilon, ball.epsilon);
        starts.push_back(project_to_ball(s, ball));
    }

    for (const auto& s0 : starts) {
        Vector d = s0;
        consider(d);
        for (std::size_t t = 0; t < opts.steps; ++t) {
            const LossEval g = loss_and_grad(model, add(x, d), y);
            const Vector dir = ascent_direction(g.grad_x, ball.norm);
            if (norm(dir, NormTag::LINF) == 0.0) break;
            d = project_to_ball(add(d, scaled(dir, step)), ball);
            consider(d);
        }
    }
    return best;
}

struct GridOptions {
    std::size_t per_axis = 61;
    std::size_t boundary = 4096;
};

// Candidate perturbations: interior lattice on [-eps, eps]^d filtered to the
// ball plus dense samples of its boundary (and the vertices of polytope balls).
inline std::vector<Vector> ball_grid(std::size_t dim, const BallSpec& ball, const GridOptions& g = {}) {
    if (dim == 0 || dim > 2) throw DimensionError("ball_grid: GRID attacks support 1 or 2 dimensions");
    const double eps = ball.epsilon;
    std::vector<Vector> out;
    if (eps == 0.0) return {Vector(dim, 0.0)};
    for (auto& p : lattice(dim, g.per_axis, -eps, eps))
        if (norm(p, ball.norm) <= eps) out.push_back(std::move(p));
    if (dim == 1) {
        out.push_back({eps});
        out.push_back({-eps});
        return out;
    }
    for (std::size_t k = 0; k < g.boundary; ++k) {
        const double t = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(g.boundary);
        Vector dir{std::cos(t), std::sin(t)};
        const double n = norm(dir, ball.norm);
        out.push_back(project_to_ball(scaled(dir, eps / n), ball));
    }
    if (ball.norm == NormTag::LINF) {
        for (double a : {-eps, eps})
            for (double b : {-eps, eps}) out.push_back({a, b});
    } else if (ball.norm == NormTag::L1) {
        out.push_back({eps, 0.0});
        out.push_back({-eps, 0.0});
        out.push_back({0.0, eps});
        out.push_back({0.0, -eps});
    }
    return out;
}

template <ClassifierModel Model>
AttackPoint grid_attack(const Model& model, std::span<const double> x, std::size_t y, const BallSpec& ball,
                        const GridOptions& g = {}) {
    AttackPoint best{Vector(x.size(), 0.0), loss_value(model, x, y)};
    for (const auto& d : ball_grid(x.size(), ball, g)) {
        const double l = loss_value(model, add(x, d), y);
        if (l > best.loss) best = {d, l};
    }
    return best;
}

struct AttackConfig {
    AttackMethod method = AttackMethod::PGD;
    std::size_t steps = 40;
    double step_size = 0.0;
    std::size_t restarts = 3;
    std::uint64_t seed = 0;
    GridOptions grid;
};

struct AttackResult {
    BallSpec ball;
    AttackMethod method = AttackMethod::PGD;
    std::vector<Vector> deltas;
    Vector losses;
    Vector clean_losses;
    std::vector<std::uint64_t> seeds;
    double adversarial_risk = 0.0;
    double clean_risk = 0.0;

    double max_perturbation_norm() const {
        double m = 0.0;
        for (const auto& d : deltas) m = std::max(m, norm(d, ball.norm));
        return m;
    }
};

namespace detail {

template <ClassifierModel Model>
AttackResult adversarial_risk_impl(const Model& model, const DiscreteMeasure& mu, const BallSpec& ball,
                                   const AttackConfig& cfg, const AttackResult* previous) {
    AttackResult r;
    r.ball = ball;
    r.method = cfg.method;
    const SeedSplitter split(cfg.seed);
    double risk = 0.0, clean = 0.0;
    for (std::size_t i = 0; i < mu.size(); ++i) {
        const LabeledPoint& s = mu.atom(i);
        const double l0 = loss_value(model, s.x, s.y);
        AttackPoint a;
        std::uint64_t seed = 0;
        switch (cfg.method) {
            case AttackMethod::FGSM: a = fgsm_attack(model, s.x, s.y, ball); break;
            case AttackMethod::GRID: a = grid_attack(model, s.x, s.y, ball, cfg.grid); break;
            case AttackMethod::PGD: {
                PGDOptions o;
                o.steps = cfg.steps;
                o.step_size = cfg.step_size;
                o.restarts = cfg.restarts;
                o.seed = seed = split.derive("pgd", i);
                if (previous) {
                    const Vector& pd = previous->deltas[i];
                    o.extra_starts.push_back(pd);
                    if (previous->ball.epsilon > 0.0)
                        o.extra_starts.push_back(scaled(pd, ball.epsilon / previous->ball.epsilon));
                }
                a = pgd_attack(model, s.x, s.y, ball, o);
                break;
            }
        }
        if (previous && cfg.method != AttackMethod::PGD) {
            // Keep the earlier optimum when it is still feasible and better.
            const Vector& pd = previous->deltas[i];
            if (norm(pd, ball.norm) <= ball.epsilon) {
                const double l = loss_value(model, add(s.x, pd), s.y);
                if (l > a.loss) a = {pd, l};
            }
        }
        r.deltas.push_back(a.delta);
        r.losses.push_back(a.loss);
        r.clean_losses.push_back(l0);
        r.seeds.push_back(seed);
        risk += mu.weights()[i] * a.loss;
        clean += mu.weights()[i] * l0;
    }
    r.adversarial_risk = risk;
    r.clean_risk = clean;
    return r;
}

}  // namespace detail

template <ClassifierModel Model>
AttackResult adversarial_risk(const Model& model, const DiscreteMeasure& mu, const BallSpec& ball,
                              const AttackConfig& cfg = {}) {
    return detail::adversarial_risk_impl(model, mu, ball, cfg, nullptr);
}

// Attacks at increasing epsilons; each run also starts from the previous optimum
// (as is and rescaled), so the reported risks are nondecreasing in epsilon.
template <ClassifierModel Model>
std::vector<AttackResult> adversarial_risk_sweep(const Model& model, const DiscreteMeasure& mu, NormTag tag,
                                                 std::vector<double> epsilons, const AttackConfig& cfg = {}) {
    std::sort(epsilons.begin(), epsilons.end());
    std::vector<AttackResult> out;
    for (double eps : epsilons) {
        out.push_back(detail::adversarial_risk_impl(model, mu, BallSpec(tag, eps), cfg, out.empty() ? nullptr : &out.back()));
    }
    return out;
}

// ---- adversarial risk <= robust risk at rho = eps ----------------------------

inline RobustCertificate certify(const RobustInstance& inst, const LinearSoftmax& model, const CertifyOptions& o = {}) {
    return robust_risk_theorem31(inst, model, o);
}
inline RobustCertificate certify(const RobustInstance& inst, const MLP& model, const CertifyOptions& o = {}) {
    return pushforward_risk(inst, model, o);
}

struct Theorem52Verdict {
    double adversarial_risk = 0.0;
    double robust_value = 0.0;
    double lp_value = 0.0;
    double max_attack_norm = 0.0;
    double attack_transport_cost = 0.0;
    AttackResult attack;
    RobustCertificate certificate;
    std::vector<Verdict> checks;

    bool passed() const {
        return std::all_of(checks.begin(), checks.end(), [](const Verdict& v) { return v.passed; });
    }
};

// Checks a finished attack against the robust value at rho = epsilon.
template <class Model>
Theorem52Verdict check_theorem52(const Model& model, const RobustInstance& inst, AttackResult attack,
                                 BoundMode mode = BoundMode::CERTIFIED) {
    const BallSpec& ball = attack.ball;
    if (inst.rho != ball.epsilon) throw std::invalid_argument("verify_theorem52: instance radius must equal ball epsilon");
    if (inst.metric.x_norm() != ball.norm) throw std::invalid_argument("verify_theorem52: metric norm must match ball norm");
    if (attack.deltas.size() != inst.empirical.size()) throw DimensionError("verify_theorem52: one perturbation per atom");

    Theorem52Verdict v;
    v.attack = std::move(attack);
    v.adversarial_risk = v.attack.adversarial_risk;
    CertifyOptions co;
    co.mode = mode;
    v.certificate = certify(inst, model, co);
    v.robust_value = v.certificate.robust_value;
    v.max_attack_norm = v.attack.max_perturbation_norm();

    v.checks.push_back({"adversarial_le_robust", v.adversarial_risk <= v.robust_value + 1e-8,
                        "adversarial " + format_double(v.adversarial_risk) + ", robust " + format_double(v.robust_value)});

    const PointSet& support = inst.empirical.support();
    std::vector<LabeledPoint> moved;
    for (std::size_t i = 0; i < support.size(); ++i) moved.push_back({add(support[i].x, v.attack.deltas[i]), support[i].y});
    const PointSetPtr moved_set = make_point_set(std::move(moved), support.label_count());
    const DiscreteMeasure attacked(moved_set, inst.empirical.weights());
    v.attack_transport_cost = transport_cost(inst.empirical, attacked, inst.metric);
    v.checks.push_back({"attack_pushforward_in_ball", v.attack_transport_cost <= v.max_attack_norm + 1e-9,
                        "transport " + format_double(v.attack_transport_cost) + ", max norm " +
                            format_double(v.max_attack_norm)});

    const RobustInstance oi(inst.empirical, inst.metric, inst.rho, concat(support, *moved_set));
    v.lp_value = primal_robust_risk_lp(oi, target_losses(model, *oi.candidate_targets));
    v.checks.push_back({"lp_oracle_ge_adversarial", v.lp_value >= v.adversarial_risk - 1e-8,
                        "lp " + format_double(v.lp_value)});
    v.checks.push_back({"lp_oracle_le_robust", v.lp_value <= v.robust_value + 1e-8, "lp " + format_double(v.lp_value)});
    return v;
}

template <class Model>
Theorem52Verdict verify_theorem52(const Model& model, const RobustInstance& inst, const BallSpec& ball,
                                  const AttackConfig& cfg = {}, BoundMode mode = BoundMode::CERTIFIED) {
    if (inst.rho != ball.epsilon) throw std::invalid_argument("verify_theorem52: instance radius must equal ball epsilon");
    return check_theorem52(model, inst, adversarial_risk(model, inst.empirical, ball, cfg), mode);
}

}  // namespace wasslip
