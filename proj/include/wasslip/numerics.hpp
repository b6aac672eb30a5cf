#pragma once

// Dense linear algebra at desk scale: vectors, row-major matrices, the three
// supported norms and their induced operator norms, power iteration, and
// central finite differences.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "wasslip/error.hpp"
#include "wasslip/rng.hpp"

namespace wasslip {

using Vector = std::vector<double>;

inline void require_finite(std::span<const double> v, std::string_view what) {
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!std::isfinite(v[i])) {
            throw NumericalError(std::string(what) + ": non-finite entry at index " + std::to_string(i));
        }
    }
}

enum class NormTag { L1, L2, LINF };

constexpr NormTag dual(NormTag tag) noexcept {
    switch (tag) {
        case NormTag::L1: return NormTag::LINF;
        case NormTag::L2: return NormTag::L2;
        case NormTag::LINF: return NormTag::L1;
    }
    return NormTag::L2;
}

constexpr std::string_view to_string(NormTag tag) noexcept {
    switch (tag) {
        case NormTag::L1: return "L1";
        case NormTag::L2: return "L2";
        case NormTag::LINF: return "LINF";
    }
    return "?";
}

inline std::optional<NormTag> parse_norm_tag(std::string_view s) {
    if (s == "L1" || s == "l1") return NormTag::L1;
    if (s == "L2" || s == "l2") return NormTag::L2;
    if (s == "LINF" || s == "linf" || s == "Linf") return NormTag::LINF;
    return std::nullopt;
}

inline double norm(std::span<const double> v, NormTag tag) {
    if (v.empty()) throw DimensionError("norm of an empty vector");
    switch (tag) {
        case NormTag::L1: {
            double s = 0.0;
            for (double e : v) s += std::abs(e);
            return s;
        }
        case NormTag::L2: {
            // scaled to avoid overflow on large entries
            double scale = 0.0;
            for (double e : v) scale = std::max(scale, std::abs(e));
            if (scale == 0.0) return 0.0;
            double s = 0.0;
            for (double e : v) {
                const double r = e / scale;
                s += r * r;
            }
            return scale * std::sqrt(s);
        }
        case NormTag::LINF: {
            double m = 0.0;
            for (double e : v) m = std::max(m, std::abs(e));
            return m;
        }
    }
    return 0.0;
}

inline double dot(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw DimensionError("dot: size mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline Vector subtract(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw DimensionError("subtract: size mismatch");
    Vector out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
    return out;
}

inline Vector add(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw DimensionError("add: size mismatch");
    Vector out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
    return out;
}

inline Vector scaled(std::span<const double> a, double s) {
    Vector out(a.begin(), a.end());
    for (double& e : out) e *= s;
    return out;
}

class Matrix {
public:
    Matrix() = default;

    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {
        if (rows == 0 || cols == 0) throw DimensionError("matrix dimensions must be positive");
        require_finite(data_, "Matrix");
    }

    Matrix(std::size_t rows, std::size_t cols, std::vector<double> entries)
        : rows_(rows), cols_(cols), data_(std::move(entries)) {
        if (rows == 0 || cols == 0) throw DimensionError("matrix dimensions must be positive");
        if (data_.size() != rows * cols) {
            throw DimensionError("matrix entry count " + std::to_string(data_.size()) + " != " +
                                 std::to_string(rows) + "x" + std::to_string(cols));
        }
        require_finite(data_, "Matrix");
    }

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    static Matrix diagonal(std::span<const double> d) {
        Matrix m(d.size(), d.size());
        for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
        return m;
    }

    static Matrix outer(std::span<const double> a, std::span<const double> b) {
        Matrix m(a.size(), b.size());
        for (std::size_t i = 0; i < a.size(); ++i)
            for (std::size_t j = 0; j < b.size(); ++j) m(i, j) = a[i] * b[j];
        return m;
    }

    static Matrix gaussian(std::size_t rows, std::size_t cols, Rng& rng, double stddev = 1.0) {
        Matrix m(rows, cols);
        for (double& e : m.data_) e = rng.normal(0.0, stddev);
        return m;
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool empty() const noexcept { return data_.empty(); }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
    std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

    std::span<double> data() noexcept { return data_; }
    std::span<const double> data() const noexcept { return data_; }

    // W x
    Vector apply(std::span<const double> x) const {
        if (x.size() != cols_) throw DimensionError("Matrix::apply: expected " + std::to_string(cols_) +
                                                    " inputs, got " + std::to_string(x.size()));
        Vector out(rows_, 0.0);
        for (std::size_t i = 0; i < rows_; ++i) {
            double s = 0.0;
            const double* r = data_.data() + i * cols_;
            for (std::size_t j = 0; j < cols_; ++j) s += r[j] * x[j];
            out[i] = s;
        }
        return out;
    }

    // W^T y
    Vector apply_transpose(std::span<const double> y) const {
        if (y.size() != rows_) throw DimensionError("Matrix::apply_transpose: size mismatch");
        Vector out(cols_, 0.0);
        for (std::size_t i = 0; i < rows_; ++i) {
            const double* r = data_.data() + i * cols_;
            for (std::size_t j = 0; j < cols_; ++j) out[j] += r[j] * y[i];
        }
        return out;
    }

    Matrix transpose() const {
        Matrix t(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
        return t;
    }

    Matrix& operator*=(double s) {
        for (double& e : data_) e *= s;
        return *this;
    }

    Matrix& operator+=(const Matrix& o) {
        if (o.rows_ != rows_ || o.cols_ != cols_) throw DimensionError("Matrix += shape mismatch");
        for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
        return *this;
    }

    bool is_zero() const {
        return std::all_of(data_.begin(), data_.end(), [](double e) { return e == 0.0; });
    }

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

inline Matrix operator*(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) throw DimensionError("matmul: inner dimensions differ");
    Matrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
        }
    return c;
}

inline Matrix operator*(double s, Matrix m) {
    m *= s;
    return m;
}

struct PowerIterationOptions {
    std::size_t max_iters = 10'000;
    double tol = 1e-13;  // relative change in sigma
    std::uint64_t seed = 0x5eedULL;
    // Warm start for the right singular vector; ignored if its size is wrong or it is zero.
    std::optional<Vector> initial;
    // Record sigma after every iteration (for monotonicity checks).
    bool record_history = false;
};

struct SingularTriple {
    double sigma = 0.0;
    Vector u;  // left, unit L2
    Vector v;  // right, unit L2
    std::size_t iterations = 0;
    bool converged = false;
    std::vector<double> history;
};

namespace detail {

inline bool normalize_in_place(Vector& v) {
    const double n = norm(v, NormTag::L2);
    if (n == 0.0 || !std::isfinite(n)) return false;
    for (double& e : v) e /= n;
    return true;
}

inline Vector canonical(std::size_t n, std::size_t k) {
    Vector e(n, 0.0);
    e[k % n] = 1.0;
    return e;
}

// Fix the sign so the largest-magnitude entry of v is positive.
inline void orient(Vector& u, Vector& v) {
    std::size_t arg = 0;
    for (std::size_t j = 1; j < v.size(); ++j)
        if (std::abs(v[j]) > std::abs(v[arg])) arg = j;
    if (v[arg] < 0.0) {
        for (double& e : v) e = -e;
        for (double& e : u) e = -e;
    }
}

}  // namespace detail

// Deterministic start: (1, 1/2, ..., 1/n) plus seeded noise of magnitude 1e-3, normalized.
inline Vector power_iteration_start(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    Vector v(n);
    for (std::size_t j = 0; j < n; ++j) v[j] = 1.0 / static_cast<double>(j + 1) + 1e-3 * rng.uniform(-1.0, 1.0);
    detail::normalize_in_place(v);
    return v;
}

// Largest singular value of W by power iteration on W^T W. The estimate
// sigma_k = ||W v_k|| is a Rayleigh quotient of a PSD matrix and therefore
// nondecreasing in k.
inline SingularTriple power_iteration(const Matrix& W, const PowerIterationOptions& opts = {}) {
    if (opts.max_iters < 1) throw std::invalid_argument("power_iteration: max_iters must be >= 1");
    SingularTriple out;
    if (W.is_zero()) {
        out.u = detail::canonical(W.rows(), 0);
        out.v = detail::canonical(W.cols(), 0);
        out.converged = true;
        return out;
    }

    Vector v;
    if (opts.initial && opts.initial->size() == W.cols()) {
        v = *opts.initial;
        if (!detail::normalize_in_place(v)) v = power_iteration_start(W.cols(), opts.seed);
    } else {
        v = power_iteration_start(W.cols(), opts.seed);
    }

    Vector wv = W.apply(v);
    double sigma = norm(wv, NormTag::L2);
    // Start orthogonal to the row space: walk canonical vectors until W v != 0.
    for (std::size_t k = 0; sigma == 0.0 && k < W.cols(); ++k) {
        v = detail::canonical(W.cols(), k);
        wv = W.apply(v);
        sigma = norm(wv, NormTag::L2);
    }
    if (opts.record_history) out.history.push_back(sigma);

    std::size_t it = 0;
    for (; it < opts.max_iters; ++it) {
        Vector z = W.apply_transpose(wv);
        if (!detail::normalize_in_place(z)) break;
        v = std::move(z);
        wv = W.apply(v);
        const double next = norm(wv, NormTag::L2);
        if (opts.record_history) out.history.push_back(next);
        const double delta = std::abs(next - sigma);
        sigma = next;
        if (delta <= opts.tol * sigma) {
            out.converged = true;
            ++it;
            break;
        }
    }
    out.iterations = it;
    out.sigma = sigma;
    out.u = wv;
    for (double& e : out.u) e /= sigma;
    out.v = std::move(v);
    detail::orient(out.u, out.v);
    return out;
}

// Second singular value by power iteration on W^T W - sigma_1^2 v_1 v_1^T.
inline double second_singular_value(const Matrix& W, const SingularTriple& top,
                                    const PowerIterationOptions& opts = {}) {
    if (std::min(W.rows(), W.cols()) < 2) return 0.0;
    const double s1sq = top.sigma * top.sigma;
    auto apply_deflated = [&](const Vector& x) {
        Vector y = W.apply_transpose(W.apply(x));
        const double c = s1sq * dot(top.v, x);
        for (std::size_t j = 0; j < y.size(); ++j) y[j] -= c * top.v[j];
        return y;
    };
    Vector x = power_iteration_start(W.cols(), opts.seed ^ 0x2ULL);
    const double proj = dot(top.v, x);
    for (std::size_t j = 0; j < x.size(); ++j) x[j] -= proj * top.v[j];
    if (!detail::normalize_in_place(x)) return 0.0;
    double lambda = 0.0;
    for (std::size_t it = 0; it < opts.max_iters; ++it) {
        Vector y = apply_deflated(x);
        const double next = std::max(0.0, dot(x, y));
        // re-orthogonalize against v1 to suppress round-off drift
        const double p = dot(top.v, y);
        for (std::size_t j = 0; j < y.size(); ++j) y[j] -= p * top.v[j];
        const bool ok = detail::normalize_in_place(y);
        const double delta = std::abs(std::sqrt(next) - std::sqrt(lambda));
        lambda = next;
        if (!ok) break;
        x = std::move(y);
        if (delta <= opts.tol * top.sigma) break;
    }
    return std::sqrt(lambda);
}

// Induced operator norm. Only matching input/output norms are supported.
inline double operator_norm(const Matrix& W, NormTag in_tag, NormTag out_tag) {
    if (in_tag != out_tag) {
        throw UnsupportedNormError("operator_norm: mixed norms " + std::string(to_string(in_tag)) + "->" +
                                   std::string(to_string(out_tag)) + " are not supported");
    }
    switch (in_tag) {
        case NormTag::L1: {
            double best = 0.0;
            for (std::size_t j = 0; j < W.cols(); ++j) {
                double s = 0.0;
                for (std::size_t i = 0; i < W.rows(); ++i) s += std::abs(W(i, j));
                best = std::max(best, s);
            }
            return best;
        }
        case NormTag::LINF: {
            double best = 0.0;
            for (std::size_t i = 0; i < W.rows(); ++i) best = std::max(best, norm(W.row(i), NormTag::L1));
            return best;
        }
        case NormTag::L2: return power_iteration(W).sigma;
    }
    return 0.0;
}

inline double operator_norm(const Matrix& W, NormTag tag) { return operator_norm(W, tag, tag); }

// A subgradient of W -> |||W||| for the given induced norm.
//   L2:   u v^T from the top singular pair; zero when W == 0 or sigma_1 - sigma_2 < gap_tol.
//   L1:   sign pattern of the first column attaining the max abs column sum.
//   LINF: sign pattern of the first row attaining the max abs row sum.
struct NormSubgradient {
    double value = 0.0;
    Matrix grad;
};

inline NormSubgradient operator_norm_subgradient(const Matrix& W, NormTag tag, double gap_tol = 1e-8,
                                                 const PowerIterationOptions& opts = {},
                                                 SingularTriple* top_out = nullptr) {
    NormSubgradient out{0.0, Matrix(W.rows(), W.cols())};
    auto sgn = [](double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); };
    switch (tag) {
        case NormTag::L2: {
            SingularTriple top = power_iteration(W, opts);
            out.value = top.sigma;
            if (top.sigma > 0.0) {
                const double s2 = second_singular_value(W, top, opts);
                if (top.sigma - s2 >= gap_tol) out.grad = Matrix::outer(top.u, top.v);
            }
            if (top_out) *top_out = std::move(top);
            return out;
        }
        case NormTag::L1: {
            std::size_t arg = 0;
            double best = -1.0;
            for (std::size_t j = 0; j < W.cols(); ++j) {
                double s = 0.0;
                for (std::size_t i = 0; i < W.rows(); ++i) s += std::abs(W(i, j));
                if (s > best) {
                    best = s;
                    arg = j;
                }
            }
            out.value = best;
            for (std::size_t i = 0; i < W.rows(); ++i) out.grad(i, arg) = sgn(W(i, arg));
            return out;
        }
        case NormTag::LINF: {
            std::size_t arg = 0;
            double best = -1.0;
            for (std::size_t i = 0; i < W.rows(); ++i) {
                const double s = norm(W.row(i), NormTag::L1);
                if (s > best) {
                    best = s;
                    arg = i;
                }
            }
            out.value = best;
            for (std::size_t j = 0; j < W.cols(); ++j) out.grad(arg, j) = sgn(W(arg, j));
            return out;
        }
    }
    return out;
}

// Central differences, one coordinate at a time.
inline Vector finite_difference_gradient(const std::function<double(const Vector&)>& f, const Vector& x,
                                         double h = 1e-5) {
    if (!(h > 0.0)) throw std::invalid_argument("finite_difference_gradient: h must be positive");
    Vector g(x.size(), 0.0);
    Vector probe = x;
    for (std::size_t i = 0; i < x.size(); ++i) {
        probe[i] = x[i] + h;
        const double fp = f(probe);
        probe[i] = x[i] - h;
        const double fm = f(probe);
        probe[i] = x[i];
        g[i] = (fp - fm) / (2.0 * h);
    }
    return g;
}

// ||a - b||_2 / max(||a||_2, ||b||_2, floor)
inline double relative_error(std::span<const double> a, std::span<const double> b, double floor = 1e-8) {
    const Vector d = subtract(a, b);
    if (d.empty()) return 0.0;
    const double denom = std::max({norm(a, NormTag::L2), norm(b, NormTag::L2), floor});
    return norm(d, NormTag::L2) / denom;
}

}  // namespace wasslip
