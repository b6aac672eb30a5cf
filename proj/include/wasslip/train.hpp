#pragma once

// Gradient descent on empirical risk plus a Lipschitz penalty whose weight is
// fixed by rho and the logit-loss Lipschitz constant c:
//
//   DUAL_LINEAR  rho c |||W|||                        (no hidden layers)
//   PRODUCT      rho c prod_j |||W_j|||
//   SPECTRAL     (rho c / l) sum_j |||W_j|||^l         (l = number of layers incl. head)
//
// By AM-GM the SPECTRAL penalty dominates the PRODUCT one.

#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "wasslip/error.hpp"
#include "wasslip/measures.hpp"
#include "wasslip/models.hpp"
#include "wasslip/rng.hpp"
#include "wasslip/robust.hpp"

namespace wasslip {

enum class ObjectiveKind { DUAL_LINEAR, PRODUCT, SPECTRAL };

inline std::string_view to_string(ObjectiveKind k) noexcept {
    switch (k) {
        case ObjectiveKind::DUAL_LINEAR: return "DUAL_LINEAR";
        case ObjectiveKind::PRODUCT: return "PRODUCT";
        case ObjectiveKind::SPECTRAL: return "SPECTRAL";
    }
    return "?";
}

inline std::optional<ObjectiveKind> parse_objective(std::string_view s) {
    if (s == "DUAL_LINEAR" || s == "dual_linear") return ObjectiveKind::DUAL_LINEAR;
    if (s == "PRODUCT" || s == "product") return ObjectiveKind::PRODUCT;
    if (s == "SPECTRAL" || s == "spectral") return ObjectiveKind::SPECTRAL;
    return std::nullopt;
}

struct TrainConfig {
    ObjectiveKind objective = ObjectiveKind::SPECTRAL;
    double rho = 0.0;
    double kappa = kInf;  // used by the final certificate only
    NormTag norm = NormTag::L2;
    BoundMode bound_mode = BoundMode::CERTIFIED;
    double learning_rate = 0.1;
    std::size_t epochs = 100;
    std::size_t batch_size = 0;  // 0 -> full batch
    double momentum = 0.0;
    std::uint64_t seed = 0;
    bool warm_start = true;
    std::optional<double> lipschitz_cap;
    double divergence_threshold = 1e12;

    void validate() const {
        if (!(rho >= 0.0) || !std::isfinite(rho)) throw std::invalid_argument("TrainConfig: rho must be finite and >= 0");
        if (!(learning_rate > 0.0)) throw std::invalid_argument("TrainConfig: learning_rate must be > 0");
        if (!(momentum >= 0.0 && momentum < 1.0)) throw std::invalid_argument("TrainConfig: momentum must be in [0, 1)");
        if (!(kappa > 0.0)) throw std::invalid_argument("TrainConfig: kappa must be > 0 or inf");
        if (lipschitz_cap && !(*lipschitz_cap > 0.0)) throw std::invalid_argument("TrainConfig: lipschitz_cap must be > 0");
    }
};

// Persisted right singular vectors, one per layer.
struct PenaltyState {
    std::vector<std::optional<Vector>> warm;
};

struct ObjectiveEval {
    double value = 0.0;
    double erm = 0.0;
    double penalty = 0.0;
    Vector grad;  // MLP::parameters() layout
    std::vector<double> layer_norms;
};

struct PenaltyEval {
    double value = 0.0;
    Vector grad;
    std::vector<double> layer_norms;
};

inline PenaltyEval lipschitz_penalty(const MLP& model, const TrainConfig& cfg, PenaltyState* state = nullptr) {
    const std::size_t l = model.depth();
    if (cfg.objective == ObjectiveKind::DUAL_LINEAR && l != 1)
        throw std::invalid_argument("objective DUAL_LINEAR requires a model without hidden layers");
    PenaltyEval out;
    out.grad.assign(model.parameter_count(), 0.0);
    if (cfg.rho == 0.0) return out;

    const double c = logit_loss_lipschitz(cfg.norm, cfg.bound_mode);
    if (state && state->warm.size() != l) state->warm.assign(l, std::nullopt);
    std::vector<NormSubgradient> subs;
    for (std::size_t j = 0; j < l; ++j) {
        PowerIterationOptions po;
        if (cfg.warm_start && state) po.initial = state->warm[j];
        SingularTriple top;
        subs.push_back(operator_norm_subgradient(model.weight(j), cfg.norm, 1e-8, po, &top));
        if (state && cfg.norm == NormTag::L2 && top.sigma > 0.0) state->warm[j] = top.v;
        out.layer_norms.push_back(subs.back().value);
    }

    const double lf = static_cast<double>(l);
    std::vector<double> coef(l, 0.0);
    switch (cfg.objective) {
        case ObjectiveKind::DUAL_LINEAR:
            out.value = cfg.rho * c * out.layer_norms[0];
            coef[0] = cfg.rho * c;
            break;
        case ObjectiveKind::PRODUCT: {
            double prod = 1.0;
            for (double a : out.layer_norms) prod *= a;
            out.value = cfg.rho * c * prod;
            for (std::size_t j = 0; j < l; ++j) {
                double others = 1.0;
                for (std::size_t i = 0; i < l; ++i)
                    if (i != j) others *= out.layer_norms[i];
                coef[j] = cfg.rho * c * others;
            }
            break;
        }
        case ObjectiveKind::SPECTRAL: {
            double s = 0.0;
            for (double a : out.layer_norms) s += std::pow(a, lf);
            out.value = cfg.rho * c / lf * s;
            for (std::size_t j = 0; j < l; ++j) coef[j] = cfg.rho * c * std::pow(out.layer_norms[j], lf - 1.0);
            break;
        }
    }
    for (std::size_t j = 0; j < l; ++j) {
        const std::size_t off = model.weight_offset(j);
        const auto& g = subs[j].grad.data();
        for (std::size_t k = 0; k < g.size(); ++k) out.grad[off + k] = coef[j] * g[k];
    }
    return out;
}

// ERM over the atoms listed in `batch` (all atoms when empty), weights renormalized.
inline ObjectiveEval objective_and_grad(const MLP& model, const DiscreteMeasure& data, const TrainConfig& cfg,
                                        std::span<const std::size_t> batch = {}, PenaltyState* state = nullptr) {
    if (data.support().label_count() > model.label_count())
        throw DimensionError("objective_and_grad: model has fewer classes than the data");
    ObjectiveEval out;
    out.grad.assign(model.parameter_count(), 0.0);
    std::vector<std::size_t> all;
    if (batch.empty()) {
        all.resize(data.size());
        for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
        batch = all;
    }
    double wsum = 0.0;
    for (std::size_t i : batch) wsum += data.weights()[i];
    if (!(wsum > 0.0)) throw std::invalid_argument("objective_and_grad: batch has zero weight");
    for (std::size_t i : batch) {
        const LabeledPoint& s = data.atom(i);
        const LossEval le = mlp_backprop(model, s.x, s.y);
        const double w = batch.size() == data.size() ? data.weights()[i] : data.weights()[i] / wsum;
        out.erm += w * le.value;
        for (std::size_t k = 0; k < out.grad.size(); ++k) out.grad[k] += w * le.grad_params[k];
    }
    PenaltyEval pen = lipschitz_penalty(model, cfg, state);
    out.penalty = pen.value;
    out.layer_norms = std::move(pen.layer_norms);
    for (std::size_t k = 0; k < out.grad.size(); ++k) out.grad[k] += pen.grad[k];
    out.value = out.erm + out.penalty;
    return out;
}

// Rescale W so that |||W||| <= cap.
inline Matrix project_layer_lipschitz(const Matrix& W, double cap, NormTag tag = NormTag::L2) {
    if (!(cap > 0.0)) throw std::invalid_argument("project_layer_lipschitz: cap must be > 0");
    const double n = operator_norm(W, tag);
    if (n <= cap) return W;
    Matrix out = W;
    out *= cap / n;
    return out;
}

inline double accuracy(const MLP& model, const DiscreteMeasure& data) {
    double acc = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const Vector z = mlp_forward(model, data.atom(i).x).logits;
        std::size_t arg = 0;
        for (std::size_t k = 1; k < z.size(); ++k)
            if (z[k] > z[arg]) arg = k;
        if (arg == data.atom(i).y) acc += data.weights()[i];
    }
    return acc;
}

struct EpochRecord {
    std::size_t epoch = 0;
    double erm = 0.0;
    double penalty = 0.0;
    double objective = 0.0;
    double product_bound = 0.0;
    double young_bound = 0.0;
    std::vector<double> layer_norms;
};

struct TrainReport {
    ObjectiveKind objective = ObjectiveKind::SPECTRAL;
    std::vector<EpochRecord> epochs;
    bool diverged = false;
    double final_accuracy = 0.0;
    std::optional<RobustCertificate> certificate;
    double wall_seconds = 0.0;
};

namespace detail {

inline EpochRecord record_epoch(const MLP& model, const DiscreteMeasure& data, const TrainConfig& cfg, std::size_t epoch,
                                PenaltyState* state) {
    const ObjectiveEval e = objective_and_grad(model, data, cfg, {}, state);
    const NetworkLipschitz nl = network_lipschitz_bound(model, cfg.norm);
    return {epoch, e.erm, e.penalty, e.value, nl.product, nl.young, nl.layer_norms};
}

}  // namespace detail

// Epoch 0 records the initial model; each further record follows one pass over the data.
inline TrainReport train_loop(MLP& model, const DiscreteMeasure& data, const TrainConfig& cfg) {
    cfg.validate();
    if (data.size() == 0) throw std::invalid_argument("train_loop: empty dataset");
    const auto t0 = std::chrono::steady_clock::now();
    TrainReport rep;
    rep.objective = cfg.objective;
    PenaltyState state;
    Rng rng(SeedSplitter(cfg.seed).derive("batches"));
    Vector velocity(model.parameter_count(), 0.0);

    auto diverged = [&](const EpochRecord& r) {
        return !std::isfinite(r.objective) || r.objective > cfg.divergence_threshold;
    };

    rep.epochs.push_back(detail::record_epoch(model, data, cfg, 0, &state));
    const std::size_t n = data.size();
    const std::size_t bs = cfg.batch_size == 0 || cfg.batch_size >= n ? n : cfg.batch_size;
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;

    for (std::size_t epoch = 1; epoch <= cfg.epochs && !diverged(rep.epochs.back()); ++epoch) {
        if (bs < n) {
            for (std::size_t i = n - 1; i > 0; --i) std::swap(order[i], order[rng.below(i + 1)]);
        }
        for (std::size_t start = 0; start < n; start += bs) {
            const std::span<const std::size_t> batch =
                bs == n ? std::span<const std::size_t>{} : std::span<const std::size_t>(order).subspan(start, std::min(bs, n - start));
            const ObjectiveEval e = objective_and_grad(model, data, cfg, batch, &state);
            Vector p = model.parameters();
            for (std::size_t k = 0; k < p.size(); ++k) {
                velocity[k] = cfg.momentum * velocity[k] + e.grad[k];
                p[k] -= cfg.learning_rate * velocity[k];
            }
            model.set_parameters(p);
            if (cfg.lipschitz_cap) {
                for (std::size_t j = 0; j < model.depth(); ++j)
                    model.weight(j) = project_layer_lipschitz(model.weight(j), *cfg.lipschitz_cap, cfg.norm);
            }
        }
        rep.epochs.push_back(detail::record_epoch(model, data, cfg, epoch, &state));
    }
    rep.diverged = diverged(rep.epochs.back());
    rep.final_accuracy = accuracy(model, data);
    if (!rep.diverged) {
        const RobustInstance inst(data, MetricSpec(cfg.norm, cfg.kappa, model.label_count()), cfg.rho);
        CertifyOptions co;
        co.mode = cfg.bound_mode;
        rep.certificate = pushforward_risk(inst, model, co);
    }
    rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

}  // namespace wasslip
