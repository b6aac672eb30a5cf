#pragma once

// Independent reference computations used only by the tests.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

#include "wasslip/lp.hpp"
#include "wasslip/models.hpp"
#include "wasslip/numerics.hpp"

namespace oracle {

using wasslip::Matrix;
using wasslip::Vector;

// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, sorted descending.
inline std::vector<double> jacobi_eigenvalues(Matrix a, double tol = 1e-15, int max_sweeps = 100) {
    const std::size_t n = a.rows();
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0, total = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                total += a(i, j) * a(i, j);
                if (i != j) off += a(i, j) * a(i, j);
            }
        if (off <= tol * tol * std::max(total, 1e-300)) break;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                if (a(p, q) == 0.0) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
                const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
            }
        }
    }
    std::vector<double> ev(n);
    for (std::size_t i = 0; i < n; ++i) ev[i] = a(i, i);
    std::sort(ev.begin(), ev.end(), std::greater<>());
    return ev;
}

// Largest singular value as sqrt of the top eigenvalue of W^T W.
inline double jacobi_sigma_max(const Matrix& W) {
    const Matrix g = W.transpose() * W;
    return std::sqrt(std::max(jacobi_eigenvalues(g).front(), 0.0));
}

namespace detail {

// Solves the square system M z = r by Gaussian elimination with partial pivoting; nullopt if singular.
inline std::optional<Vector> solve_square(std::vector<Vector> M, Vector r) {
    const std::size_t n = r.size();
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        for (std::size_t i = c + 1; i < n; ++i)
            if (std::abs(M[i][c]) > std::abs(M[piv][c])) piv = i;
        if (std::abs(M[piv][c]) < 1e-10) return std::nullopt;
        std::swap(M[piv], M[c]);
        std::swap(r[piv], r[c]);
        for (std::size_t i = c + 1; i < n; ++i) {
            const double f = M[i][c] / M[c][c];
            for (std::size_t j = c; j < n; ++j) M[i][j] -= f * M[c][j];
            r[i] -= f * r[c];
        }
    }
    Vector z(n);
    for (std::size_t i = n; i-- > 0;) {
        double s = r[i];
        for (std::size_t j = i + 1; j < n; ++j) s -= M[i][j] * z[j];
        z[i] = s / M[i][i];
    }
    return z;
}

}  // namespace detail

// Max of a bounded, feasible LP by enumerating every basic solution of the
// slack form [A_eq 0; A_ineq I] z = b, z >= 0. Redundant rows are removed first.
inline std::optional<double> vertex_enumeration(const wasslip::LPProblem& p) {
    const std::size_t nv = p.num_vars();
    const std::size_t ns = p.ineq_constraints.size();
    const std::size_t N = nv + ns;
    std::vector<Vector> rows;
    Vector rhs;
    for (const auto& c : p.eq_constraints) {
        Vector r(N, 0.0);
        std::copy(c.row.begin(), c.row.end(), r.begin());
        rows.push_back(r);
        rhs.push_back(c.rhs);
    }
    for (std::size_t k = 0; k < ns; ++k) {
        Vector r(N, 0.0);
        std::copy(p.ineq_constraints[k].row.begin(), p.ineq_constraints[k].row.end(), r.begin());
        r[nv + k] = 1.0;
        rows.push_back(r);
        rhs.push_back(p.ineq_constraints[k].rhs);
    }
    // row echelon form to drop dependent rows
    std::size_t rank = 0;
    for (std::size_t c = 0; c < N && rank < rows.size(); ++c) {
        std::size_t piv = rank;
        for (std::size_t i = rank; i < rows.size(); ++i)
            if (std::abs(rows[i][c]) > std::abs(rows[piv][c])) piv = i;
        if (std::abs(rows[piv][c]) < 1e-12) continue;
        std::swap(rows[piv], rows[rank]);
        std::swap(rhs[piv], rhs[rank]);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (i == rank) continue;
            const double f = rows[i][c] / rows[rank][c];
            for (std::size_t j = 0; j < N; ++j) rows[i][j] -= f * rows[rank][j];
            rhs[i] -= f * rhs[rank];
        }
        ++rank;
    }
    for (std::size_t i = rank; i < rows.size(); ++i)
        if (std::abs(rhs[i]) > 1e-9) return std::nullopt;
    rows.resize(rank);
    rhs.resize(rank);

    std::optional<double> best;
    std::vector<std::size_t> basis(rank);
    for (std::size_t i = 0; i < rank; ++i) basis[i] = i;
    for (;;) {
        std::vector<Vector> M(rank, Vector(rank));
        for (std::size_t i = 0; i < rank; ++i)
            for (std::size_t j = 0; j < rank; ++j) M[i][j] = rows[i][basis[j]];
        if (auto z = detail::solve_square(M, rhs)) {
            if (std::all_of(z->begin(), z->end(), [](double e) { return e >= -1e-9; })) {
                double obj = 0.0;
                for (std::size_t j = 0; j < rank; ++j)
                    if (basis[j] < nv) obj += p.objective[basis[j]] * (*z)[j];
                if (!best || obj > *best) best = obj;
            }
        }
        // next combination
        std::size_t i = rank;
        while (i > 0 && basis[i - 1] == N - rank + i - 1) --i;
        if (i == 0) break;
        ++basis[i - 1];
        for (std::size_t j = i; j < rank; ++j) basis[j] = basis[j - 1] + 1;
    }
    return best;
}

// MLP logits evaluated with explicit loops, no library calls except the activation.
inline Vector straight_line_logits(const wasslip::MLP& m, const Vector& x) {
    Vector h = x;
    for (const auto& layer : m.hidden()) {
        Vector next(layer.W.rows());
        for (std::size_t i = 0; i < layer.W.rows(); ++i) {
            double s = layer.bias.empty() ? 0.0 : layer.bias[i];
            for (std::size_t j = 0; j < layer.W.cols(); ++j) s += layer.W(i, j) * h[j];
            switch (layer.activation) {
                case wasslip::ActivationTag::RELU: s = s > 0.0 ? s : 0.0; break;
                case wasslip::ActivationTag::TANH: s = std::tanh(s); break;
                case wasslip::ActivationTag::IDENTITY: break;
            }
            next[i] = s;
        }
        h = next;
    }
    const auto& W = m.head().W;
    Vector z(W.rows());
    for (std::size_t i = 0; i < W.rows(); ++i) {
        double s = m.head().bias.empty() ? 0.0 : m.head().bias[i];
        for (std::size_t j = 0; j < W.cols(); ++j) s += W(i, j) * h[j];
        z[i] = s;
    }
    return z;
}

// Cross entropy by the textbook formula, no max shift.
inline double naive_ce(const Vector& z, std::size_t y) {
    double s = 0.0;
    for (double e : z) s += std::exp(e);
    return std::log(s) - z[y];
}

// Max of f over all 2^n sign corners of the LINF ball of radius eps around x.
template <class F>
double corner_max(F f, const Vector& x, double eps) {
    const std::size_t n = x.size();
    double best = -INFINITY;
    for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
        Vector p = x;
        for (std::size_t i = 0; i < n; ++i) p[i] += (mask >> i & 1) ? eps : -eps;
        best = std::max(best, f(p));
    }
    return best;
}

}  // namespace oracle
