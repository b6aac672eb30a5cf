#pragma once

// Linear-softmax and MLP classifiers with cross-entropy loss, exact
// reverse-mode gradients, and Lipschitz bounds for the loss and the network.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wasslip/error.hpp"
#include "wasslip/numerics.hpp"
#include "wasslip/rng.hpp"

namespace wasslip {

enum class ActivationTag { RELU, TANH, IDENTITY };

// All supported activations are 1-Lipschitz in every norm (componentwise, slope <= 1).
constexpr double lip_bound(ActivationTag) noexcept { return 1.0; }

constexpr std::string_view to_string(ActivationTag a) noexcept {
    switch (a) {
        case ActivationTag::RELU: return "relu";
        case ActivationTag::TANH: return "tanh";
        case ActivationTag::IDENTITY: return "identity";
    }
    return "?";
}

inline std::optional<ActivationTag> parse_activation(std::string_view s) {
    if (s == "relu" || s == "RELU") return ActivationTag::RELU;
    if (s == "tanh" || s == "TANH") return ActivationTag::TANH;
    if (s == "identity" || s == "IDENTITY") return ActivationTag::IDENTITY;
    return std::nullopt;
}

inline double activate(ActivationTag a, double z) {
    switch (a) {
        case ActivationTag::RELU: return z > 0.0 ? z : 0.0;
        case ActivationTag::TANH: return std::tanh(z);
        case ActivationTag::IDENTITY: return z;
    }
    return z;
}

// ReLU'(0) = 0.
inline double activate_derivative(ActivationTag a, double z) {
    switch (a) {
        case ActivationTag::RELU: return z > 0.0 ? 1.0 : 0.0;
        case ActivationTag::TANH: {
            const double t = std::tanh(z);
            return 1.0 - t * t;
        }
        case ActivationTag::IDENTITY: return 1.0;
    }
    return 1.0;
}

struct LinearSoftmax {
    Matrix W;     // k x n
    Vector bias;  // k; zeros when absent

    LinearSoftmax() = default;
    explicit LinearSoftmax(Matrix w, Vector b = {}) : W(std::move(w)), bias(std::move(b)) {
        if (bias.empty()) bias.assign(W.rows(), 0.0);
        if (bias.size() != W.rows()) throw DimensionError("LinearSoftmax: bias must have one entry per class");
        require_finite(bias, "LinearSoftmax bias");
    }

    std::size_t label_count() const noexcept { return W.rows(); }
    std::size_t input_dim() const noexcept { return W.cols(); }

    Vector logits(std::span<const double> x) const {
        Vector z = W.apply(x);
        for (std::size_t i = 0; i < z.size(); ++i) z[i] += bias[i];
        return z;
    }
};

struct DenseLayer {
    Matrix W;
    Vector bias;
    ActivationTag activation = ActivationTag::RELU;
};

// phi = hidden layers (possibly none), h = linear-softmax head. depth() counts
// the head, so a network with no hidden layers is a 1-layer model.
class MLP {
public:
    MLP() = default;
    MLP(std::vector<DenseLayer> hidden, LinearSoftmax head) : hidden_(std::move(hidden)), head_(std::move(head)) {
        for (auto& layer : hidden_) {
            if (layer.bias.empty()) layer.bias.assign(layer.W.rows(), 0.0);
            if (layer.bias.size() != layer.W.rows()) throw DimensionError("MLP: bias size mismatch");
            require_finite(layer.bias, "MLP bias");
        }
        for (std::size_t i = 1; i < hidden_.size(); ++i) {
            if (hidden_[i].W.cols() != hidden_[i - 1].W.rows()) {
                throw DimensionError("MLP: layer " + std::to_string(i) + " input dim does not chain");
            }
        }
        if (!hidden_.empty() && head_.W.cols() != hidden_.back().W.rows()) {
            throw DimensionError("MLP: head input dim does not match last hidden layer");
        }
    }

    explicit MLP(LinearSoftmax head) : MLP({}, std::move(head)) {}

    const std::vector<DenseLayer>& hidden() const noexcept { return hidden_; }
    std::vector<DenseLayer>& hidden() noexcept { return hidden_; }
    const LinearSoftmax& head() const noexcept { return head_; }
    LinearSoftmax& head() noexcept { return head_; }

    std::size_t depth() const noexcept { return hidden_.size() + 1; }
    std::size_t input_dim() const { return hidden_.empty() ? head_.input_dim() : hidden_.front().W.cols(); }
    std::size_t feature_dim() const { return head_.input_dim(); }
    std::size_t label_count() const { return head_.label_count(); }

    // Weight matrix of layer j, the head being the last.
    const Matrix& weight(std::size_t j) const { return j < hidden_.size() ? hidden_[j].W : head_.W; }
    Matrix& weight(std::size_t j) { return j < hidden_.size() ? hidden_[j].W : head_.W; }

    std::size_t parameter_count() const {
        std::size_t n = head_.W.rows() * head_.W.cols() + head_.bias.size();
        for (const auto& l : hidden_) n += l.W.rows() * l.W.cols() + l.bias.size();
        return n;
    }

    // Layout: for each hidden layer W (row-major) then b, then head W and b.
    Vector parameters() const {
        Vector p;
        p.reserve(parameter_count());
        auto push = [&](const Matrix& W, const Vector& b) {
            p.insert(p.end(), W.data().begin(), W.data().end());
            p.insert(p.end(), b.begin(), b.end());
        };
        for (const auto& l : hidden_) push(l.W, l.bias);
        push(head_.W, head_.bias);
        return p;
    }

    void set_parameters(std::span<const double> p) {
        if (p.size() != parameter_count()) throw DimensionError("MLP::set_parameters: wrong size");
        std::size_t k = 0;
        auto pull = [&](Matrix& W, Vector& b) {
            for (double& e : W.data()) e = p[k++];
            for (double& e : b) e = p[k++];
        };
        for (auto& l : hidden_) pull(l.W, l.bias);
        pull(head_.W, head_.bias);
    }

    // Offset of layer j's weight block in parameters().
    std::size_t weight_offset(std::size_t j) const {
        std::size_t off = 0;
        for (std::size_t i = 0; i < j; ++i) {
            const Matrix& W = weight(i);
            off += W.rows() * W.cols() + W.rows();
        }
        return off;
    }

private:
    std::vector<DenseLayer> hidden_;
    LinearSoftmax head_;
};

// Weights ~ N(0, scale^2 / fan_in), biases zero.
inline MLP random_mlp(std::span<const std::size_t> dims, ActivationTag activation, Rng& rng, double scale = 1.0) {
    if (dims.size() < 2) throw DimensionError("random_mlp: need at least input and output dims");
    std::vector<DenseLayer> hidden;
    for (std::size_t i = 0; i + 2 < dims.size(); ++i) {
        const double sd = scale / std::sqrt(static_cast<double>(dims[i]));
        hidden.push_back({Matrix::gaussian(dims[i + 1], dims[i], rng, sd), Vector(dims[i + 1], 0.0), activation});
    }
    const std::size_t n = dims[dims.size() - 2];
    const double sd = scale / std::sqrt(static_cast<double>(n));
    return MLP(std::move(hidden), LinearSoftmax(Matrix::gaussian(dims.back(), n, rng, sd)));
}

struct LossEval {
    double value = 0.0;
    Vector grad_x;
    Vector grad_params;
};

inline double log_sum_exp(std::span<const double> z) {
    const double m = *std::max_element(z.begin(), z.end());
    double s = 0.0;
    for (double v : z) s += std::exp(v - m);
    return m + std::log(s);
}

inline Vector softmax(std::span<const double> z) {
    const double lse = log_sum_exp(z);
    Vector p(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) p[i] = std::exp(z[i] - lse);
    return p;
}

// -z_y + log sum exp z
inline double cross_entropy(std::span<const double> logits, std::size_t y) {
    if (y >= logits.size()) throw DimensionError("cross_entropy: label out of range");
    return log_sum_exp(logits) - logits[y];
}

inline LossEval softmax_ce_loss(const LinearSoftmax& model, std::span<const double> x, std::size_t y) {
    if (x.size() != model.input_dim()) throw DimensionError("softmax_ce_loss: input dimension mismatch");
    if (y >= model.label_count()) throw DimensionError("softmax_ce_loss: label out of range");
    const Vector z = model.logits(x);
    LossEval out;
    out.value = cross_entropy(z, y);
    Vector r = softmax(z);  // p - e_y
    r[y] -= 1.0;
    out.grad_x = model.W.apply_transpose(r);
    const std::size_t k = model.label_count();
    const std::size_t n = model.input_dim();
    out.grad_params.assign(k * n + k, 0.0);
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < n; ++j) out.grad_params[i * n + j] = r[i] * x[j];
        out.grad_params[k * n + i] = r[i];
    }
    return out;
}

struct ForwardTape {
    std::vector<Vector> inputs;           // input to each layer (inputs[0] = x)
    std::vector<Vector> pre_activations;  // W x + b for each hidden layer
    Vector features;                      // phi(x)
};

struct ForwardResult {
    Vector logits;
    ForwardTape tape;
};

inline ForwardResult mlp_forward(const MLP& model, std::span<const double> x) {
    if (x.size() != model.input_dim()) throw DimensionError("mlp_forward: input dimension mismatch");
    ForwardResult out;
    Vector a(x.begin(), x.end());
    for (const auto& layer : model.hidden()) {
        out.tape.inputs.push_back(a);
        Vector z = layer.W.apply(a);
        for (std::size_t i = 0; i < z.size(); ++i) z[i] += layer.bias[i];
        a.resize(z.size());
        for (std::size_t i = 0; i < z.size(); ++i) a[i] = activate(layer.activation, z[i]);
        out.tape.pre_activations.push_back(std::move(z));
    }
    out.tape.inputs.push_back(a);
    out.tape.features = a;
    out.logits = model.head().logits(a);
    return out;
}

inline Vector feature_map(const MLP& model, std::span<const double> x) { return mlp_forward(model, x).tape.features; }

inline LossEval mlp_backprop(const MLP& model, std::span<const double> x, std::size_t y) {
    if (y >= model.label_count()) throw DimensionError("mlp_backprop: label out of range");
    const ForwardResult fwd = mlp_forward(model, x);
    LossEval out;
    out.value = cross_entropy(fwd.logits, y);
    out.grad_params.assign(model.parameter_count(), 0.0);

    Vector delta = softmax(fwd.logits);
    delta[y] -= 1.0;

    auto write_block = [&](std::size_t layer_index, const Matrix& W, const Vector& dz, const Vector& input) {
        std::size_t off = model.weight_offset(layer_index);
        for (std::size_t i = 0; i < W.rows(); ++i)
            for (std::size_t j = 0; j < W.cols(); ++j) out.grad_params[off + i * W.cols() + j] = dz[i] * input[j];
        off += W.rows() * W.cols();
        for (std::size_t i = 0; i < W.rows(); ++i) out.grad_params[off + i] = dz[i];
    };

    const std::size_t L = model.hidden().size();
    write_block(L, model.head().W, delta, fwd.tape.inputs[L]);
    Vector upstream = model.head().W.apply_transpose(delta);
    for (std::size_t l = L; l-- > 0;) {
        const DenseLayer& layer = model.hidden()[l];
        Vector dz(upstream.size());
        for (std::size_t i = 0; i < dz.size(); ++i)
            dz[i] = upstream[i] * activate_derivative(layer.activation, fwd.tape.pre_activations[l][i]);
        write_block(l, layer.W, dz, fwd.tape.inputs[l]);
        upstream = layer.W.apply_transpose(dz);
    }
    out.grad_x = std::move(upstream);
    return out;
}

// ---- loss-model concept used by the robust and adversarial layers -----------

inline double loss_value(const LinearSoftmax& m, std::span<const double> x, std::size_t y) {
    return cross_entropy(m.logits(x), y);
}
inline double loss_value(const MLP& m, std::span<const double> x, std::size_t y) {
    return cross_entropy(mlp_forward(m, x).logits, y);
}
inline LossEval loss_and_grad(const LinearSoftmax& m, std::span<const double> x, std::size_t y) {
    return softmax_ce_loss(m, x, y);
}
inline LossEval loss_and_grad(const MLP& m, std::span<const double> x, std::size_t y) { return mlp_backprop(m, x, y); }
inline std::size_t label_count_of(const LinearSoftmax& m) { return m.label_count(); }
inline std::size_t label_count_of(const MLP& m) { return m.label_count(); }
inline std::size_t input_dim_of(const LinearSoftmax& m) { return m.input_dim(); }
inline std::size_t input_dim_of(const MLP& m) { return m.input_dim(); }

template <class M>
concept ClassifierModel = requires(const M& m, std::span<const double> x, std::size_t y) {
    { loss_value(m, x, y) } -> std::convertible_to<double>;
    { loss_and_grad(m, x, y) } -> std::same_as<LossEval>;
    { label_count_of(m) } -> std::convertible_to<std::size_t>;
    { input_dim_of(m) } -> std::convertible_to<std::size_t>;
};

// ---- Lipschitz bounds -------------------------------------------------------

enum class BoundMode { PAPER, CERTIFIED };

constexpr std::string_view to_string(BoundMode m) noexcept { return m == BoundMode::PAPER ? "paper" : "certified"; }

inline std::optional<BoundMode> parse_bound_mode(std::string_view s) {
    if (s == "paper" || s == "PAPER") return BoundMode::PAPER;
    if (s == "certified" || s == "CERTIFIED") return BoundMode::CERTIFIED;
    return std::nullopt;
}

// Lipschitz constant of z -> CE(z, y) in the logits, w.r.t. `tag` on the logits.
// The gradient is p - e_y, whose dual norm is at most 1 (LINF dual of L1 input),
// sqrt(2) (L2) or 2 (L1 dual of LINF input). PAPER mode takes the constant 1.
inline double logit_loss_lipschitz(NormTag tag, BoundMode mode) {
    if (mode == BoundMode::PAPER) return 1.0;
    switch (tag) {
        case NormTag::L1: return 1.0;
        case NormTag::L2: return std::numbers::sqrt2;
        case NormTag::LINF: return 2.0;
    }
    return 2.0;
}

// Label-independent bound on lip(x -> CE(Wx + b, y)).
// PAPER: |||W|||; CERTIFIED: logit_loss_lipschitz(tag) * |||W|||.
inline double ce_lipschitz_bound(const LinearSoftmax& model, NormTag tag, BoundMode mode = BoundMode::CERTIFIED) {
    return logit_loss_lipschitz(tag, mode) * operator_norm(model.W, tag);
}

// Exact lip of the slice x -> CE(Wx + b, y): max_k ||w_k - w_y||_* (dual norm).
// The gradient is a convex combination of the rows (w_k - w_y), and the slope
// is attained asymptotically.
inline double ce_slice_lipschitz(const LinearSoftmax& model, std::size_t y, NormTag tag) {
    if (y >= model.label_count()) throw DimensionError("ce_slice_lipschitz: label out of range");
    double best = 0.0;
    for (std::size_t k = 0; k < model.label_count(); ++k) {
        if (k == y) continue;
        best = std::max(best, norm(subtract(model.W.row(k), model.W.row(y)), dual(tag)));
    }
    return best;
}

struct NetworkLipschitz {
    double product = 0.0;  // prod_i lip(alpha_i) |||W_i|||
    double young = 0.0;    // (1/l) sum_i |||W_i|||^l
    std::vector<double> layer_norms;
};

inline NetworkLipschitz network_lipschitz_bound(const MLP& model, NormTag tag) {
    NetworkLipschitz out;
    const std::size_t l = model.depth();
    out.product = 1.0;
    for (std::size_t j = 0; j < l; ++j) {
        const double a = operator_norm(model.weight(j), tag);
        out.layer_norms.push_back(a);
        const double act = j < model.hidden().size() ? lip_bound(model.hidden()[j].activation) : 1.0;
        out.product *= act * a;
        out.young += std::pow(a, static_cast<double>(l));
    }
    out.young /= static_cast<double>(l);
    return out;
}

// Product bound on lip(phi) over the hidden layers only (1 when there are none).
inline double feature_lipschitz_bound(const MLP& model, NormTag tag) {
    double p = 1.0;
    for (const auto& layer : model.hidden()) p *= lip_bound(layer.activation) * operator_norm(layer.W, tag);
    return p;
}

// ---- empirical (sampled) Lipschitz lower bound -----------------------------

using DomainSampler = std::function<Vector(Rng&)>;

inline DomainSampler box_sampler(std::size_t dim, double lo, double hi) {
    return [dim, lo, hi](Rng& rng) {
        Vector x(dim);
        for (double& e : x) e = rng.uniform(lo, hi);
        return x;
    };
}

struct EmpiricalLipschitzOptions {
    std::size_t pairs = 1000;
    std::uint64_t seed = 1;
    double perturbation = 1e-5;  // step for the (x, x + eps e_i) pairs
};

// Max difference quotient over sampled pairs plus axis perturbation pairs: a lower bound on lip(f).
inline double empirical_lipschitz(const std::function<Vector(const Vector&)>& f, const DomainSampler& sampler,
                                  NormTag in_tag, NormTag out_tag, const EmpiricalLipschitzOptions& opts = {}) {
    if (opts.pairs < 1) throw std::invalid_argument("empirical_lipschitz: pairs must be >= 1");
    Rng rng(opts.seed);
    double best = 0.0;
    std::size_t used = 0;
    auto consider = [&](const Vector& a, const Vector& b) {
        const double din = norm(subtract(a, b), in_tag);
        if (!(din > 0.0)) return;
        const double dout = norm(subtract(f(a), f(b)), out_tag);
        best = std::max(best, dout / din);
        ++used;
    };
    for (std::size_t p = 0; p < opts.pairs; ++p) {
        const Vector a = sampler(rng);
        const Vector b = sampler(rng);
        consider(a, b);
        Vector c = a;
        c[p % c.size()] += opts.perturbation;
        consider(a, c);
    }
    if (used == 0) throw SamplingError("empirical_lipschitz: all sampled pairs were degenerate");
    return best;
}

inline double empirical_lipschitz(const std::function<double(const Vector&)>& f, const DomainSampler& sampler,
                                  NormTag in_tag, const EmpiricalLipschitzOptions& opts = {}) {
    return empirical_lipschitz([&f](const Vector& x) { return Vector{f(x)}; }, sampler, in_tag, NormTag::L2, opts);
}

}  // namespace wasslip
