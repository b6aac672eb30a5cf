#pragma once

// Dense two-phase primal simplex with Bland's anti-cycling rule.
//
//   maximize  c^T x
//   s.t.      A_eq x  = b_eq
//             A_le x <= b_le
//             x >= 0
//
// Instances here are small (a few thousand columns, tens of rows), so the
// tableau is kept dense and reduced costs are recomputed from scratch every
// pivot. Artificial variables are added only for rows that have no usable slack.

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "wasslip/error.hpp"
#include "wasslip/numerics.hpp"

namespace wasslip {

struct LinearConstraint {
    Vector row;
    double rhs = 0.0;
};

struct LPProblem {
    Vector objective;  // maximized
    std::vector<LinearConstraint> eq_constraints;
    std::vector<LinearConstraint> ineq_constraints;  // row . x <= rhs

    std::size_t num_vars() const noexcept { return objective.size(); }
};

enum class LPStatus { Optimal, Infeasible, Unbounded };

inline std::string_view to_string(LPStatus s) noexcept {
    switch (s) {
        case LPStatus::Optimal: return "Optimal";
        case LPStatus::Infeasible: return "Infeasible";
        case LPStatus::Unbounded: return "Unbounded";
    }
    return "?";
}

struct LPSolution {
    LPStatus status = LPStatus::Infeasible;
    double value = 0.0;
    Vector point;
    std::size_t pivots = 0;
};

struct LPOptions {
    double feasibility_tol = 1e-9;
    double pivot_tol = 1e-11;
    double reduced_cost_tol = 1e-11;
    std::size_t max_pivots = 2'000'000;
};

namespace detail {

class SimplexTableau {
public:
    SimplexTableau(std::size_t rows, std::size_t cols) : m_(rows), n_(cols), t_(rows * (cols + 1), 0.0), basis_(rows) {}

    double& at(std::size_t i, std::size_t j) { return t_[i * (n_ + 1) + j]; }
    double at(std::size_t i, std::size_t j) const { return t_[i * (n_ + 1) + j]; }
    double& rhs(std::size_t i) { return at(i, n_); }
    double rhs(std::size_t i) const { return at(i, n_); }

    std::size_t rows() const noexcept { return m_; }
    std::size_t cols() const noexcept { return n_; }
    std::vector<std::size_t>& basis() noexcept { return basis_; }
    const std::vector<std::size_t>& basis() const noexcept { return basis_; }

    void pivot(std::size_t r, std::size_t s) {
        const double inv = 1.0 / at(r, s);
        for (std::size_t j = 0; j <= n_; ++j) at(r, j) *= inv;
        at(r, s) = 1.0;
        for (std::size_t i = 0; i < m_; ++i) {
            if (i == r) continue;
            const double f = at(i, s);
            if (f == 0.0) continue;
            for (std::size_t j = 0; j <= n_; ++j) at(i, j) -= f * at(r, j);
            at(i, s) = 0.0;
        }
        basis_[r] = s;
    }

    void drop_row(std::size_t r) {
        t_.erase(t_.begin() + static_cast<std::ptrdiff_t>(r * (n_ + 1)),
                 t_.begin() + static_cast<std::ptrdiff_t>((r + 1) * (n_ + 1)));
        basis_.erase(basis_.begin() + static_cast<std::ptrdiff_t>(r));
        --m_;
    }

private:
    std::size_t m_;
    std::size_t n_;
    std::vector<double> t_;
    std::vector<std::size_t> basis_;
};

enum class PhaseResult { Optimal, Unbounded };

// Maximizes cost . x over the columns flagged in `allowed`, starting from the
// current (feasible, canonical) basis. Bland: lowest-index improving column,
// ratio ties broken by lowest basic index.
inline PhaseResult run_phase(SimplexTableau& T, const std::vector<double>& cost, const std::vector<char>& allowed,
                             const LPOptions& opts, std::size_t& pivots) {
    const std::size_t m = T.rows();
    const std::size_t n = T.cols();
    for (;;) {
        std::size_t enter = n;
        for (std::size_t j = 0; j < n; ++j) {
            if (!allowed[j]) continue;
            double reduced = cost[j];
            for (std::size_t i = 0; i < m; ++i) reduced -= cost[T.basis()[i]] * T.at(i, j);
            if (reduced > opts.reduced_cost_tol) {
                enter = j;
                break;
            }
        }
        if (enter == n) return PhaseResult::Optimal;

        std::size_t leave = m;
        double best_ratio = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < m; ++i) {
            const double a = T.at(i, enter);
            if (a <= opts.pivot_tol) continue;
            const double ratio = std::max(T.rhs(i), 0.0) / a;
            if (leave == m || ratio < best_ratio - 1e-15 ||
                (ratio <= best_ratio + 1e-15 && T.basis()[i] < T.basis()[leave])) {
                if (leave == m || ratio < best_ratio - 1e-15) best_ratio = ratio;
                leave = i;
            }
        }
        if (leave == m) return PhaseResult::Unbounded;
        T.pivot(leave, enter);
        if (++pivots > opts.max_pivots) throw NumericalError("solve_lp: pivot limit exceeded");
    }
}

}  // namespace detail

inline LPSolution solve_lp(const LPProblem& p, const LPOptions& opts = {}) {
    const std::size_t n = p.num_vars();
    if (n == 0) throw DimensionError("solve_lp: no variables");
    for (const auto& c : p.eq_constraints)
        if (c.row.size() != n) throw DimensionError("solve_lp: equality row has wrong dimension");
    for (const auto& c : p.ineq_constraints)
        if (c.row.size() != n) throw DimensionError("solve_lp: inequality row has wrong dimension");

    const std::size_t m_eq = p.eq_constraints.size();
    const std::size_t m_le = p.ineq_constraints.size();
    const std::size_t m = m_eq + m_le;

    if (m == 0) {
        // Only x >= 0: optimum at 0 unless some objective coefficient is positive.
        LPSolution sol;
        for (double c : p.objective) {
            if (c > 0.0) {
                sol.status = LPStatus::Unbounded;
                sol.value = std::numeric_limits<double>::infinity();
                return sol;
            }
        }
        sol.status = LPStatus::Optimal;
        sol.point.assign(n, 0.0);
        return sol;
    }

    // Column layout: [original n][slacks m_le][artificials].
    std::vector<char> needs_artificial(m, 1);
    std::vector<double> sign(m, 1.0);
    for (std::size_t r = 0; r < m_eq; ++r)
        if (p.eq_constraints[r].rhs < 0.0) sign[r] = -1.0;
    for (std::size_t r = 0; r < m_le; ++r) {
        if (p.ineq_constraints[r].rhs < 0.0) {
            sign[m_eq + r] = -1.0;
        } else {
            needs_artificial[m_eq + r] = 0;
        }
    }
    std::size_t n_art = 0;
    for (char a : needs_artificial) n_art += a ? 1 : 0;
    const std::size_t slack0 = n;
    const std::size_t art0 = n + m_le;
    const std::size_t cols = n + m_le + n_art;

    detail::SimplexTableau T(m, cols);
    std::size_t next_art = art0;
    for (std::size_t r = 0; r < m; ++r) {
        const LinearConstraint& c = r < m_eq ? p.eq_constraints[r] : p.ineq_constraints[r - m_eq];
        for (std::size_t j = 0; j < n; ++j) T.at(r, j) = sign[r] * c.row[j];
        if (r >= m_eq) T.at(r, slack0 + (r - m_eq)) = sign[r];
        T.rhs(r) = sign[r] * c.rhs;
        if (needs_artificial[r]) {
            T.at(r, next_art) = 1.0;
            T.basis()[r] = next_art++;
        } else {
            T.basis()[r] = slack0 + (r - m_eq);
        }
    }

    LPSolution sol;
    std::vector<char> allowed(cols, 1);

    if (n_art > 0) {
        std::vector<double> phase1(cols, 0.0);
        for (std::size_t j = art0; j < cols; ++j) phase1[j] = -1.0;
        detail::run_phase(T, phase1, allowed, opts, sol.pivots);
        double infeasibility = 0.0;
        for (std::size_t i = 0; i < T.rows(); ++i)
            if (T.basis()[i] >= art0) infeasibility += std::abs(T.rhs(i));
        if (infeasibility > opts.feasibility_tol) {
            sol.status = LPStatus::Infeasible;
            return sol;
        }
        // Drive remaining (zero-level) artificials out; drop redundant rows.
        for (std::size_t i = 0; i < T.rows();) {
            if (T.basis()[i] < art0) {
                ++i;
                continue;
            }
            std::size_t col = art0;
            for (std::size_t j = 0; j < art0; ++j) {
                if (std::abs(T.at(i, j)) > 1e-9) {
                    col = j;
                    break;
                }
            }
            if (col == art0) {
                T.drop_row(i);
            } else {
                T.pivot(i, col);
                ++i;
            }
        }
        for (std::size_t j = art0; j < cols; ++j) allowed[j] = 0;
    }

    std::vector<double> phase2(cols, 0.0);
    for (std::size_t j = 0; j < n; ++j) phase2[j] = p.objective[j];
    if (detail::run_phase(T, phase2, allowed, opts, sol.pivots) == detail::PhaseResult::Unbounded) {
        sol.status = LPStatus::Unbounded;
        sol.value = std::numeric_limits<double>::infinity();
        return sol;
    }

    sol.status = LPStatus::Optimal;
    sol.point.assign(n, 0.0);
    for (std::size_t i = 0; i < T.rows(); ++i) {
        const std::size_t b = T.basis()[i];
        if (b < n) sol.point[b] = std::max(T.rhs(i), 0.0);
    }
    sol.value = dot(p.objective, sol.point);
    return sol;
}

// Largest violation of the constraints (and of x >= 0) at `x`.
inline double lp_violation(const LPProblem& p, std::span<const double> x) {
    double worst = 0.0;
    for (double e : x) worst = std::max(worst, -e);
    for (const auto& c : p.eq_constraints) worst = std::max(worst, std::abs(dot(c.row, x) - c.rhs));
    for (const auto& c : p.ineq_constraints) worst = std::max(worst, dot(c.row, x) - c.rhs);
    return worst;
}

}  // namespace wasslip
