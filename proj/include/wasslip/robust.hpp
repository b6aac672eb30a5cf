#pragma once

// Distributionally robust risk over a transport-cost ball around an empirical
// measure.
//
// The dual is a one-dimensional convex program in the multiplier lambda:
//
//   value(lambda) = lambda * rho + sum_i w_i max_j (a_ij - lambda * c_ij),   lambda >= lambda_lo
//
// where each sample i carries a finite family of lines (a_ij, c_ij). Two
// families are built here:
//
//   * label collapse: one line per label y', a = loss(x_i, y'), c = kappa d_Y(y', y_i);
//     the sup over inputs is removed analytically by requiring lambda >= the
//     Lipschitz constant of the per-label loss.
//   * finite support: one line per candidate target t_j, a = loss(t_j),
//     c = d(s_i, t_j), lambda_lo = 0. This is the exact LP dual of the
//     restricted primal and is what the strong-duality checks compare against.
//
// Being a max of lines, value() is piecewise linear and convex, so it is
// minimized exactly by evaluating at the endpoints and at every pairwise
// crossing inside the search interval.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "wasslip/error.hpp"
#include "wasslip/lp.hpp"
#include "wasslip/measures.hpp"
#include "wasslip/models.hpp"

namespace wasslip {

struct RobustInstance {
    DiscreteMeasure empirical;
    MetricSpec metric;
    double rho = 0.0;
    // Finite surrogate for the input-label space, used by LP oracles only.
    PointSetPtr candidate_targets;

    RobustInstance(DiscreteMeasure mu, MetricSpec spec, double radius, PointSetPtr targets = nullptr)
        : empirical(std::move(mu)), metric(std::move(spec)), rho(radius), candidate_targets(std::move(targets)) {
        if (!(rho >= 0.0) || !std::isfinite(rho)) throw std::invalid_argument("RobustInstance: rho must be finite and >= 0");
        if (empirical.support().label_count() > metric.label_count()) {
            throw DimensionError("RobustInstance: label metric smaller than the label universe");
        }
    }
};

struct DualLine {
    double intercept = 0.0;
    double cost = 0.0;     // slope is -cost
    std::size_t tag = 0;   // label id or target index
};

struct PiecewiseDual {
    Vector weights;
    std::vector<std::vector<DualLine>> lines;
    double rho = 0.0;
    double lambda_lo = 0.0;
};

struct DualSolution {
    double lambda_star = 0.0;
    double value = 0.0;
    Vector envelopes;                        // l_i = max_j (a_ij - lambda* c_ij)
    std::vector<std::size_t> active_labels;  // argmax tag per sample (smallest tag on ties)
    double lambda_hi = 0.0;                  // right end of the search interval
    std::size_t candidates = 0;              // number of lambda values evaluated
    bool exact = true;                       // false when the ternary fallback ran
};

namespace detail {

struct EnvelopeEval {
    double value = 0.0;
    Vector envelopes;
    std::vector<std::size_t> argmax;
};

inline double line_max(const std::vector<DualLine>& ls, double lambda, std::size_t* arg) {
    double best = -kInf;
    std::size_t best_tag = 0;
    for (const auto& l : ls) {
        const double v = l.intercept - lambda * l.cost;
        if (v > best || (v == best && l.tag < best_tag)) {
            best = v;
            best_tag = l.tag;
        }
    }
    if (arg) *arg = best_tag;
    return best;
}

inline EnvelopeEval evaluate_envelopes(const PiecewiseDual& pd, double lambda) {
    EnvelopeEval e;
    e.envelopes.resize(pd.lines.size());
    e.argmax.resize(pd.lines.size());
    double s = 0.0;
    for (std::size_t i = 0; i < pd.lines.size(); ++i) {
        e.envelopes[i] = line_max(pd.lines[i], lambda, &e.argmax[i]);
        s += pd.weights[i] * e.envelopes[i];
    }
    e.value = s + lambda * pd.rho;
    return e;
}

}  // namespace detail

inline double evaluate_dual(const PiecewiseDual& pd, double lambda) {
    if (lambda < pd.lambda_lo) return kInf;
    return detail::evaluate_envelopes(pd, lambda).value;
}

inline constexpr std::size_t kMaxBreakpoints = 100'000;

inline DualSolution minimize_piecewise_dual(const PiecewiseDual& pd) {
    if (pd.lines.size() != pd.weights.size()) throw DimensionError("minimize_dual: one line family per sample");
    if (!(pd.rho >= 0.0)) throw std::invalid_argument("minimize_dual: rho must be >= 0");

    double amin = kInf, amax = -kInf, cmin = kInf;
    for (std::size_t i = 0; i < pd.lines.size(); ++i) {
        bool has_zero_cost = false;
        for (const auto& l : pd.lines[i]) {
            if (!std::isfinite(l.intercept) || !(l.cost >= 0.0) || !std::isfinite(l.cost)) {
                throw NumericalError("minimize_dual: lines must have finite intercepts and costs");
            }
            amin = std::min(amin, l.intercept);
            amax = std::max(amax, l.intercept);
            if (l.cost == 0.0) has_zero_cost = true;
            if (l.cost > 0.0) cmin = std::min(cmin, l.cost);
        }
        if (!has_zero_cost) {
            throw std::invalid_argument("minimize_dual: sample " + std::to_string(i) +
                                        " has no zero-cost candidate (support must lie in the candidate set)");
        }
    }

    // Past lambda_hi every positive-cost line lies strictly below every zero-cost
    // line, so the objective is affine with slope rho >= 0 there.
    const double lo = pd.lambda_lo;
    const double hi = std::isfinite(cmin) ? lo + (amax - amin + 1.0) / cmin : lo;

    std::vector<double> candidates{lo, hi};
    std::size_t crossings = 0;
    for (const auto& ls : pd.lines)
        for (std::size_t a = 0; a < ls.size(); ++a)
            for (std::size_t b = a + 1; b < ls.size(); ++b)
                if (ls[a].cost != ls[b].cost) ++crossings;

    DualSolution sol;
    sol.lambda_hi = hi;
    if (crossings <= kMaxBreakpoints) {
        for (const auto& ls : pd.lines)
            for (std::size_t a = 0; a < ls.size(); ++a)
                for (std::size_t b = a + 1; b < ls.size(); ++b) {
                    const double dc = ls[a].cost - ls[b].cost;
                    if (dc == 0.0) continue;
                    const double lam = (ls[a].intercept - ls[b].intercept) / dc;
                    if (lam > lo && lam < hi) candidates.push_back(lam);
                }
        std::sort(candidates.begin(), candidates.end());
        candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
    } else {
        // Golden-section search on the convex function, then keep the bracket ends as candidates.
        sol.exact = false;
        const double g = (std::sqrt(5.0) - 1.0) / 2.0;
        double a = lo, b = hi;
        double c = b - g * (b - a), d = a + g * (b - a);
        double fc = evaluate_dual(pd, c), fd = evaluate_dual(pd, d);
        for (int it = 0; it < 200 && b - a > 1e-14 * (1.0 + std::abs(b)); ++it) {
            if (fc <= fd) {
                b = d;
                d = c;
                fd = fc;
                c = b - g * (b - a);
                fc = evaluate_dual(pd, c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + g * (b - a);
                fd = evaluate_dual(pd, d);
            }
        }
        candidates = {lo, a, c, d, b, hi};
        std::sort(candidates.begin(), candidates.end());
    }

    double best_value = kInf;
    double best_lambda = lo;
    for (double lam : candidates) {
        const double v = evaluate_dual(pd, lam);
        if (v < best_value) {
            best_value = v;
            best_lambda = lam;
        }
    }
    sol.candidates = candidates.size();
    const auto e = detail::evaluate_envelopes(pd, best_lambda);
    sol.lambda_star = best_lambda;
    sol.value = e.value;
    sol.envelopes = e.envelopes;
    sol.active_labels = e.argmax;
    return sol;
}

// ---- label-collapse dual (model losses) ------------------------------------

// losses[i][y'] = loss(x_i, y').
using LossTable = std::vector<Vector>;

template <ClassifierModel Model>
LossTable label_loss_table(const Model& model, const PointSet& points) {
    const std::size_t k = label_count_of(model);
    if (points.label_count() > k) throw DimensionError("label_loss_table: model has fewer classes than the data");
    LossTable t(points.size(), Vector(k));
    for (std::size_t i = 0; i < points.size(); ++i)
        for (std::size_t y = 0; y < k; ++y) t[i][y] = loss_value(model, points[i].x, y);
    return t;
}

inline PiecewiseDual label_collapse_dual(const RobustInstance& inst, const LossTable& losses, double lipschitz_bound) {
    const PointSet& pts = inst.empirical.support();
    if (losses.size() != pts.size()) throw DimensionError("label_collapse_dual: one loss row per atom");
    PiecewiseDual pd;
    pd.weights = inst.empirical.weights();
    pd.rho = inst.rho;
    pd.lambda_lo = lipschitz_bound;
    pd.lines.resize(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const std::size_t yi = pts[i].y;
        for (std::size_t y = 0; y < losses[i].size(); ++y) {
            if (y == yi) {
                pd.lines[i].push_back({losses[i][y], 0.0, y});
            } else if (!inst.metric.forbids_label_change()) {
                pd.lines[i].push_back({losses[i][y], inst.metric.kappa() * inst.metric.label_distance(y, yi), y});
            }
        }
    }
    return pd;
}

struct InnerSup {
    double value = 0.0;
    std::size_t argmax_label = 0;
};

// max_{y'} loss(x_i, y') - lambda kappa d_Y(y', y_i), ties to the smallest label.
inline InnerSup inner_label_sup(std::span<const double> losses_by_label, std::size_t y_i, double lambda,
                                const MetricSpec& metric) {
    if (!(lambda >= 0.0)) throw std::invalid_argument("inner_label_sup: lambda must be >= 0");
    if (y_i >= losses_by_label.size()) throw DimensionError("inner_label_sup: label out of range");
    InnerSup out{-kInf, 0};
    for (std::size_t y = 0; y < losses_by_label.size(); ++y) {
        double v;
        if (y == y_i) {
            v = losses_by_label[y];
        } else if (metric.forbids_label_change()) {
            continue;
        } else {
            v = losses_by_label[y] - lambda * metric.kappa() * metric.label_distance(y, y_i);
        }
        if (v > out.value) out = {v, y};
    }
    return out;
}

template <ClassifierModel Model>
InnerSup inner_label_sup(const Model& model, std::span<const double> x_i, std::size_t y_i, double lambda,
                         const MetricSpec& metric) {
    Vector losses(label_count_of(model));
    for (std::size_t y = 0; y < losses.size(); ++y) losses[y] = loss_value(model, x_i, y);
    return inner_label_sup(losses, y_i, lambda, metric);
}

template <ClassifierModel Model>
double dual_objective(const RobustInstance& inst, const Model& model, double lambda, double lipschitz_bound) {
    if (lambda < lipschitz_bound) return kInf;
    return evaluate_dual(label_collapse_dual(inst, label_loss_table(model, inst.empirical.support()), lipschitz_bound),
                         lambda);
}

template <ClassifierModel Model>
DualSolution minimize_dual(const RobustInstance& inst, const Model& model, double lipschitz_bound) {
    return minimize_piecewise_dual(
        label_collapse_dual(inst, label_loss_table(model, inst.empirical.support()), lipschitz_bound));
}

// ---- finite-support dual and primal LP oracle --------------------------------

// One line per candidate target with finite cost; lambda_lo = 0.
inline PiecewiseDual finite_support_dual(const RobustInstance& inst, std::span<const double> target_losses) {
    if (!inst.candidate_targets) throw std::invalid_argument("finite_support_dual: instance has no candidate targets");
    const PointSet& targets = *inst.candidate_targets;
    if (target_losses.size() != targets.size()) throw DimensionError("finite_support_dual: one loss per target");
    const CostMatrix c = cost_matrix(inst.metric, inst.empirical.support(), targets);
    PiecewiseDual pd;
    pd.weights = inst.empirical.weights();
    pd.rho = inst.rho;
    pd.lambda_lo = 0.0;
    pd.lines.resize(inst.empirical.size());
    for (std::size_t i = 0; i < inst.empirical.size(); ++i)
        for (std::size_t j = 0; j < targets.size(); ++j)
            if (std::isfinite(c(i, j))) pd.lines[i].push_back({target_losses[j], c(i, j), j});
    return pd;
}

inline DualSolution minimize_dual_on_targets(const RobustInstance& inst, std::span<const double> target_losses) {
    return minimize_piecewise_dual(finite_support_dual(inst, target_losses));
}

struct PrimalOracleResult {
    double value = 0.0;
    std::vector<double> coupling;  // rows: atoms, cols: targets
    double transport_used = 0.0;
};

// max sum_ij pi_ij loss(t_j)  s.t.  sum_j pi_ij = w_i,  sum_ij c_ij pi_ij <= rho,  pi >= 0.
inline PrimalOracleResult primal_robust_risk_lp_detailed(const RobustInstance& inst, std::span<const double> target_losses) {
    if (!inst.candidate_targets) throw std::invalid_argument("primal_robust_risk_lp: instance has no candidate targets");
    const PointSet& targets = *inst.candidate_targets;
    if (target_losses.size() != targets.size()) throw DimensionError("primal_robust_risk_lp: one loss per target");
    const CostMatrix c = cost_matrix(inst.metric, inst.empirical.support(), targets);
    const std::size_t n = inst.empirical.size();
    const std::size_t m = targets.size();

    std::vector<std::size_t> vi, vj;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j)
            if (std::isfinite(c(i, j))) {
                vi.push_back(i);
                vj.push_back(j);
            }
    const std::size_t nv = vi.size();
    if (nv == 0) throw InfeasibleError("primal_robust_risk_lp: no finite-cost targets");

    LPProblem lp;
    lp.objective.resize(nv);
    for (std::size_t v = 0; v < nv; ++v) lp.objective[v] = target_losses[vj[v]];
    for (std::size_t i = 0; i < n; ++i) {
        LinearConstraint row{Vector(nv, 0.0), inst.empirical.weights()[i]};
        for (std::size_t v = 0; v < nv; ++v)
            if (vi[v] == i) row.row[v] = 1.0;
        lp.eq_constraints.push_back(std::move(row));
    }
    LinearConstraint budget{Vector(nv, 0.0), inst.rho};
    for (std::size_t v = 0; v < nv; ++v) budget.row[v] = c(vi[v], vj[v]);
    lp.ineq_constraints.push_back(std::move(budget));

    const LPSolution sol = solve_lp(lp);
    if (sol.status != LPStatus::Optimal) {
        throw InfeasibleError("primal_robust_risk_lp: LP reported " + std::string(to_string(sol.status)) +
                              " (empirical support must lie in the candidate set)");
    }
    PrimalOracleResult out;
    out.value = sol.value;
    out.coupling.assign(n * m, 0.0);
    for (std::size_t v = 0; v < nv; ++v) {
        out.coupling[vi[v] * m + vj[v]] = sol.point[v];
        out.transport_used += sol.point[v] * c(vi[v], vj[v]);
    }
    return out;
}

inline double primal_robust_risk_lp(const RobustInstance& inst, std::span<const double> target_losses) {
    return primal_robust_risk_lp_detailed(inst, target_losses).value;
}

template <ClassifierModel Model>
Vector target_losses(const Model& model, const PointSet& targets) {
    Vector out(targets.size());
    for (std::size_t j = 0; j < targets.size(); ++j) out[j] = loss_value(model, targets[j].x, targets[j].y);
    return out;
}

// Each input of `inputs` paired with every label in [0, label_count).
inline PointSetPtr with_all_labels(const std::vector<Vector>& inputs, std::size_t label_count) {
    std::vector<LabeledPoint> pts;
    pts.reserve(inputs.size() * label_count);
    for (const auto& x : inputs)
        for (std::size_t y = 0; y < label_count; ++y) pts.push_back({x, y});
    return make_point_set(std::move(pts), label_count);
}

// Empirical support followed by every grid input under every label.
inline PointSetPtr oracle_targets(const PointSet& support, const std::vector<Vector>& grid, std::size_t label_count) {
    return concat(support, *with_all_labels(grid, label_count));
}

// ---- risks and certificates ----------------------------------------------------

inline double empirical_risk(const std::function<double(const LabeledPoint&)>& loss, const DiscreteMeasure& mu) {
    double s = 0.0;
    for (std::size_t i = 0; i < mu.size(); ++i) {
        const double l = loss(mu.atom(i));
        if (!std::isfinite(l)) throw NumericalError("empirical_risk: non-finite loss at atom " + std::to_string(i));
        s += mu.weights()[i] * l;
    }
    return s;
}

template <ClassifierModel Model>
double empirical_risk(const Model& model, const DiscreteMeasure& mu) {
    return empirical_risk([&model](const LabeledPoint& s) { return loss_value(model, s.x, s.y); }, mu);
}

struct Verdict {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct RobustCertificate {
    double empirical_risk = 0.0;
    double robust_value = 0.0;
    double lambda_star = 0.0;
    double rho = 0.0;
    double kappa = 0.0;
    double lipschitz_bound_used = 0.0;
    BoundMode bound_mode = BoundMode::CERTIFIED;
    NormTag norm = NormTag::L2;
    std::optional<double> oracle_value;
    std::optional<double> oracle_gap;
    std::optional<double> feature_lipschitz;  // set by pushforward_risk
    std::vector<Verdict> verdicts;

    bool all_passed() const {
        return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.passed; });
    }
};

struct CertifyOptions {
    BoundMode mode = BoundMode::CERTIFIED;
    // Input-space lattice for the LP cross-check; every point is paired with every label.
    std::optional<std::vector<Vector>> oracle_grid;
};

namespace detail {

inline void add_oracle(RobustCertificate& cert, const RobustInstance& inst, const Vector& losses_on_targets) {
    const double oracle = primal_robust_risk_lp(inst, losses_on_targets);
    cert.oracle_value = oracle;
    cert.oracle_gap = cert.robust_value - oracle;
    cert.verdicts.push_back({"robust_value_ge_lp_oracle", cert.robust_value >= oracle - 1e-6,
                             "gap " + format_double(cert.robust_value - oracle)});
}

}  // namespace detail

// Dual robust risk of a linear-softmax model with lambda >= ce_lipschitz_bound.
inline RobustCertificate robust_risk_theorem31(const RobustInstance& inst, const LinearSoftmax& model,
                                               const CertifyOptions& opts = {}) {
    RobustCertificate cert;
    cert.rho = inst.rho;
    cert.kappa = inst.metric.kappa();
    cert.norm = inst.metric.x_norm();
    cert.bound_mode = opts.mode;
    cert.lipschitz_bound_used = ce_lipschitz_bound(model, inst.metric.x_norm(), opts.mode);
    cert.empirical_risk = empirical_risk(model, inst.empirical);
    const DualSolution dual = minimize_dual(inst, model, cert.lipschitz_bound_used);
    cert.robust_value = dual.value;
    cert.lambda_star = dual.lambda_star;
    cert.verdicts.push_back({"robust_value_ge_empirical_risk", cert.robust_value >= cert.empirical_risk - 1e-9, ""});
    if (opts.oracle_grid) {
        const RobustInstance oi(inst.empirical, inst.metric, inst.rho,
                                oracle_targets(inst.empirical.support(), *opts.oracle_grid, model.label_count()));
        detail::add_oracle(cert, oi, target_losses(model, *oi.candidate_targets));
    }
    return cert;
}

// Robust risk of the head over the pushed-forward ball: features phi(x_i), label
// weight kappa * L_phi, radius rho * L_phi, lambda' >= lip(head loss). The
// certificate reports lambda_star = lambda' * L_phi so that
// robust_value = sum_i w_i l_i + lambda_star * rho in input units.
inline RobustCertificate pushforward_risk(const RobustInstance& inst, const MLP& model, const CertifyOptions& opts = {}) {
    const NormTag tag = inst.metric.x_norm();
    if (model.hidden().empty()) {
        RobustCertificate c = robust_risk_theorem31(inst, model.head(), opts);
        c.feature_lipschitz = 1.0;
        return c;
    }
    const double lphi = feature_lipschitz_bound(model, tag);
    if (!(lphi > 0.0)) throw NumericalError("pushforward_risk: feature map has zero Lipschitz bound");

    std::vector<LabeledPoint> feats;
    feats.reserve(inst.empirical.size());
    for (const auto& s : inst.empirical.support()) feats.push_back({feature_map(model, s.x), s.y});
    const DiscreteMeasure pushed(make_point_set(std::move(feats), inst.empirical.support().label_count()),
                                 inst.empirical.weights());
    const RobustInstance feature_inst(pushed, inst.metric.with_kappa(inst.metric.kappa() * lphi), inst.rho * lphi);

    RobustCertificate cert;
    cert.rho = inst.rho;
    cert.kappa = inst.metric.kappa();
    cert.norm = tag;
    cert.bound_mode = opts.mode;
    cert.feature_lipschitz = lphi;
    const double head_bound = ce_lipschitz_bound(model.head(), tag, opts.mode);
    cert.lipschitz_bound_used = head_bound * lphi;
    cert.empirical_risk = empirical_risk(model, inst.empirical);
    const DualSolution dual = minimize_dual(feature_inst, model.head(), head_bound);
    cert.robust_value = dual.value;
    cert.lambda_star = dual.lambda_star * lphi;
    cert.verdicts.push_back({"robust_value_ge_empirical_risk", cert.robust_value >= cert.empirical_risk - 1e-9, ""});
    if (opts.oracle_grid) {
        const RobustInstance oi(inst.empirical, inst.metric, inst.rho,
                                oracle_targets(inst.empirical.support(), *opts.oracle_grid, model.label_count()));
        detail::add_oracle(cert, oi, target_losses(model, *oi.candidate_targets));
    }
    return cert;
}

// Smallest kappa above which every per-sample label sup picks y_i for all
// lambda >= lipschitz_bound: max over i, y' != y_i of (loss(x_i,y') - loss(x_i,y_i))_+ / (L d_Y(y', y_i)).
// Returns +inf when a positive gap meets L == 0.
inline double label_collapse_threshold(const RobustInstance& inst, const LossTable& losses, double lipschitz_bound) {
    double k0 = 0.0;
    const PointSet& pts = inst.empirical.support();
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const std::size_t yi = pts[i].y;
        for (std::size_t y = 0; y < losses[i].size(); ++y) {
            if (y == yi) continue;
            const double gap = losses[i][y] - losses[i][yi];
            if (gap <= 0.0) continue;
            if (lipschitz_bound <= 0.0) return kInf;
            k0 = std::max(k0, gap / (lipschitz_bound * inst.metric.label_distance(y, yi)));
        }
    }
    return k0;
}

// ---- sup_x Psi(x) - gamma ||x - z|| on expanding grids -----------------------

struct LemmaA1Options {
    double half_width = 1.0;           // initial grid half-width around z
    std::size_t points_per_axis = 201;  // odd, so z is a grid point
    std::size_t doublings = 3;       // equality: radii checked; growth: trailing increases required
    std::size_t max_doublings = 12;  // growth branch search limit
    NormTag norm = NormTag::L2;
    double tolerance = 1e-3;
};

struct LemmaA1Verdict {
    enum class Branch { Equality, Unbounded };
    Branch branch = Branch::Equality;
    bool passed = false;
    double psi_at_z = 0.0;
    std::vector<double> half_widths;
    std::vector<double> sups;
    std::string detail;
};

// Equality branch (gamma >= lip (1 + 1e-6)): the penalized sup equals Psi(z)
// on every grid. Growth branch (gamma <= lip (1 - 1e-2)): over the last
// `doublings` doublings of the grid extent the sup strictly increases with
// non-shrinking increments.
inline LemmaA1Verdict verify_lemma_A1(const std::function<double(const Vector&)>& psi, double psi_lipschitz,
                                      double gamma, const Vector& z, const LemmaA1Options& opts = {}) {
    if (z.empty() || z.size() > 3) throw DimensionError("verify_lemma_A1: grid search supports 1 to 3 dimensions");
    if (opts.points_per_axis < 3 || opts.points_per_axis % 2 == 0)
        throw std::invalid_argument("verify_lemma_A1: points_per_axis must be odd and >= 3");
    LemmaA1Verdict out;
    if (gamma >= psi_lipschitz * (1.0 + 1e-6)) {
        out.branch = LemmaA1Verdict::Branch::Equality;
    } else if (gamma <= psi_lipschitz * (1.0 - 1e-2)) {
        out.branch = LemmaA1Verdict::Branch::Unbounded;
    } else {
        throw std::invalid_argument("verify_lemma_A1: gamma too close to lip(Psi) to classify");
    }
    out.psi_at_z = psi(z);
    if (!std::isfinite(out.psi_at_z)) throw NumericalError("verify_lemma_A1: Psi(z) is not finite");

    auto grid_sup = [&](double R) {
        double best = -kInf;
        for (const auto& o : lattice(z.size(), opts.points_per_axis, -R, R)) {
            const double v = psi(add(z, o));
            if (!std::isfinite(v)) throw NumericalError("verify_lemma_A1: Psi not finite on the grid");
            best = std::max(best, v - gamma * norm(o, opts.norm));
        }
        return best;
    };

    if (out.branch == LemmaA1Verdict::Branch::Equality) {
        double R = opts.half_width;
        double worst = 0.0;
        for (std::size_t r = 0; r <= opts.doublings; ++r, R *= 2.0) {
            out.half_widths.push_back(R);
            out.sups.push_back(grid_sup(R));
            worst = std::max(worst, std::abs(out.sups.back() - out.psi_at_z));
        }
        out.passed = worst <= opts.tolerance;
        out.detail = "max |sup - Psi(z)| = " + format_double(worst);
        return out;
    }

    // Growth: double until the last `doublings` steps all increase strictly with non-shrinking increments.
    auto trailing_growth = [&]() {
        const std::size_t m = out.sups.size();
        if (m < opts.doublings + 1) return false;
        for (std::size_t r = m - opts.doublings; r < m; ++r) {
            const double inc = out.sups[r] - out.sups[r - 1];
            if (!(inc > 0.0)) return false;
            if (r > m - opts.doublings && inc < (out.sups[r - 1] - out.sups[r - 2]) * (1.0 - 1e-9)) return false;
        }
        return true;
    };
    double R = opts.half_width;
    for (std::size_t r = 0; r <= opts.max_doublings && !trailing_growth(); ++r, R *= 2.0) {
        out.half_widths.push_back(R);
        out.sups.push_back(grid_sup(R));
    }
    out.passed = opts.doublings >= 3 && trailing_growth();
    const std::size_t m = out.sups.size();
    out.detail = "sup at half-width " + format_double(out.half_widths.back()) + " is " + format_double(out.sups.back()) +
                 " after " + std::to_string(m - 1) + " doublings";
    return out;
}

}  // namespace wasslip
