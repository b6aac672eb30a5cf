#pragma once

// Finitely supported probability measures over input-label points, the
// kappa-product metric ||x - x'|| + kappa * d_Y(y, y'), pushforwards, and
// exact transport costs through the simplex solver.

#include <charconv>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "wasslip/error.hpp"
#include "wasslip/lp.hpp"
#include "wasslip/numerics.hpp"

namespace wasslip {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct LabeledPoint {
    Vector x;
    std::size_t y = 0;

    friend bool operator==(const LabeledPoint&, const LabeledPoint&) = default;
};

class PointSet {
public:
    PointSet(std::vector<LabeledPoint> points, std::size_t label_count)
        : points_(std::move(points)), label_count_(label_count) {
        if (points_.empty()) throw DimensionError("PointSet: empty");
        if (label_count_ == 0) throw DimensionError("PointSet: label_count must be positive");
        const std::size_t d = points_.front().x.size();
        if (d == 0) throw DimensionError("PointSet: zero-dimensional points");
        for (std::size_t i = 0; i < points_.size(); ++i) {
            if (points_[i].x.size() != d) {
                throw DimensionError("PointSet: point " + std::to_string(i) + " has dimension " +
                                     std::to_string(points_[i].x.size()) + ", expected " + std::to_string(d));
            }
            if (points_[i].y >= label_count_) {
                throw DimensionError("PointSet: label " + std::to_string(points_[i].y) + " out of range at point " +
                                     std::to_string(i));
            }
            require_finite(points_[i].x, "PointSet");
        }
    }

    std::size_t size() const noexcept { return points_.size(); }
    std::size_t dimension() const noexcept { return points_.front().x.size(); }
    std::size_t label_count() const noexcept { return label_count_; }
    const LabeledPoint& operator[](std::size_t i) const { return points_[i]; }
    const std::vector<LabeledPoint>& points() const noexcept { return points_; }
    auto begin() const noexcept { return points_.begin(); }
    auto end() const noexcept { return points_.end(); }

private:
    std::vector<LabeledPoint> points_;
    std::size_t label_count_;
};

using PointSetPtr = std::shared_ptr<const PointSet>;

inline PointSetPtr make_point_set(std::vector<LabeledPoint> points, std::size_t label_count) {
    return std::make_shared<const PointSet>(std::move(points), label_count);
}

// Concatenation, index order preserved: a's points then b's.
inline PointSetPtr concat(const PointSet& a, const PointSet& b) {
    if (a.dimension() != b.dimension()) throw DimensionError("concat: dimension mismatch");
    std::vector<LabeledPoint> pts(a.points());
    pts.insert(pts.end(), b.begin(), b.end());
    return make_point_set(std::move(pts), std::max(a.label_count(), b.label_count()));
}

// Regular lattice of `per_axis` points per coordinate on [lo, hi]^dim.
inline std::vector<Vector> lattice(std::size_t dim, std::size_t per_axis, double lo, double hi) {
    if (dim == 0 || per_axis == 0) throw DimensionError("lattice: empty");
    std::size_t total = 1;
    for (std::size_t d = 0; d < dim; ++d) total *= per_axis;
    std::vector<Vector> out;
    out.reserve(total);
    std::vector<std::size_t> idx(dim, 0);
    for (std::size_t t = 0; t < total; ++t) {
        Vector x(dim);
        for (std::size_t d = 0; d < dim; ++d) {
            x[d] = per_axis == 1 ? 0.5 * (lo + hi)
                                 : lo + (hi - lo) * static_cast<double>(idx[d]) / static_cast<double>(per_axis - 1);
        }
        out.push_back(std::move(x));
        for (std::size_t d = dim; d-- > 0;) {
            if (++idx[d] < per_axis) break;
            idx[d] = 0;
        }
    }
    return out;
}

class DiscreteMeasure {
public:
    DiscreteMeasure(PointSetPtr support, Vector weights) : support_(std::move(support)), weights_(std::move(weights)) {
        if (!support_) throw DimensionError("DiscreteMeasure: null support");
        if (weights_.size() != support_->size()) throw DimensionError("DiscreteMeasure: one weight per atom required");
        double total = 0.0;
        for (double w : weights_) {
            if (!(w >= 0.0) || !std::isfinite(w)) throw std::invalid_argument("DiscreteMeasure: weights must be finite and >= 0");
            total += w;
        }
        if (std::abs(total - 1.0) > 1e-12) {
            throw std::invalid_argument("DiscreteMeasure: weights sum to " + std::to_string(total) + ", not 1");
        }
    }

    const PointSet& support() const noexcept { return *support_; }
    const PointSetPtr& support_ptr() const noexcept { return support_; }
    const Vector& weights() const noexcept { return weights_; }
    std::size_t size() const noexcept { return weights_.size(); }
    const LabeledPoint& atom(std::size_t i) const { return (*support_)[i]; }

private:
    PointSetPtr support_;
    Vector weights_;
};

inline DiscreteMeasure dirac(const LabeledPoint& s, std::size_t label_count) {
    return DiscreteMeasure(make_point_set({s}, label_count), Vector{1.0});
}

// Rescales nonnegative masses to sum to exactly one (up to rounding).
inline Vector normalized_weights(Vector w) {
    double total = 0.0;
    for (double e : w) total += e;
    if (!(total > 0.0)) throw std::invalid_argument("normalized_weights: total mass must be positive");
    for (double& e : w) e /= total;
    return w;
}

class MetricSpec {
public:
    // Discrete label metric 1[y != y'].
    MetricSpec(NormTag x_norm, double kappa, std::size_t label_count)
        : MetricSpec(x_norm, kappa, discrete_metric(label_count)) {}

    MetricSpec(NormTag x_norm, double kappa, Matrix label_metric)
        : x_norm_(x_norm), kappa_(kappa), label_metric_(std::move(label_metric)) {
        if (!(kappa_ > 0.0)) throw std::invalid_argument("MetricSpec: kappa must be positive (or infinite)");
        validate_label_metric(label_metric_);
    }

    static Matrix discrete_metric(std::size_t k) {
        if (k == 0) throw DimensionError("discrete_metric: no labels");
        Matrix m(k, k, 1.0);
        for (std::size_t i = 0; i < k; ++i) m(i, i) = 0.0;
        return m;
    }

    // Exhaustive O(k^3) check.
    static void validate_label_metric(const Matrix& d) {
        if (d.rows() != d.cols()) throw DimensionError("label metric must be square");
        const std::size_t k = d.rows();
        constexpr double tol = 1e-12;
        for (std::size_t a = 0; a < k; ++a) {
            if (d(a, a) != 0.0) throw std::invalid_argument("label metric: nonzero diagonal");
            for (std::size_t b = 0; b < k; ++b) {
                if (d(a, b) < 0.0) throw std::invalid_argument("label metric: negative entry");
                if (std::abs(d(a, b) - d(b, a)) > tol) throw std::invalid_argument("label metric: not symmetric");
                if (a != b && d(a, b) == 0.0) throw std::invalid_argument("label metric: distinct labels at distance 0");
                for (std::size_t c = 0; c < k; ++c) {
                    if (d(a, c) > d(a, b) + d(b, c) + tol) {
                        throw std::invalid_argument("label metric: triangle inequality fails for (" + std::to_string(a) +
                                                    "," + std::to_string(b) + "," + std::to_string(c) + ")");
                    }
                }
            }
        }
    }

    NormTag x_norm() const noexcept { return x_norm_; }
    double kappa() const noexcept { return kappa_; }
    bool forbids_label_change() const noexcept { return std::isinf(kappa_); }
    const Matrix& label_metric() const noexcept { return label_metric_; }
    std::size_t label_count() const noexcept { return label_metric_.rows(); }
    double label_distance(std::size_t a, std::size_t b) const { return label_metric_(a, b); }

    // Same label metric with a different kappa (d_T|gamma in feature space).
    MetricSpec with_kappa(double kappa) const { return MetricSpec(x_norm_, kappa, label_metric_); }

    // Smallest positive label distance.
    double min_label_distance() const {
        double m = kInf;
        for (std::size_t a = 0; a < label_count(); ++a)
            for (std::size_t b = 0; b < label_count(); ++b)
                if (a != b) m = std::min(m, label_metric_(a, b));
        return m;
    }

private:
    NormTag x_norm_;
    double kappa_;
    Matrix label_metric_;
};

// ||x - x'|| + kappa d_Y(y, y'); +inf when kappa is infinite and the labels differ.
inline double metric_eval(const MetricSpec& spec, const LabeledPoint& s, const LabeledPoint& t) {
    if (s.x.size() != t.x.size()) throw DimensionError("metric_eval: input dimensions differ");
    if (s.y >= spec.label_count() || t.y >= spec.label_count()) throw DimensionError("metric_eval: label out of range");
    const double dx = norm(subtract(s.x, t.x), spec.x_norm());
    if (s.y == t.y) return dx;
    if (spec.forbids_label_change()) return kInf;
    return dx + spec.kappa() * spec.label_distance(s.y, t.y);
}

// c_ij between a source and a target point set. Entries may be +inf.
class CostMatrix {
public:
    CostMatrix(std::size_t rows, std::size_t cols, std::vector<double> entries)
        : rows_(rows), cols_(cols), entries_(std::move(entries)) {
        if (entries_.size() != rows_ * cols_) throw DimensionError("CostMatrix: entry count mismatch");
        for (double c : entries_)
            if (!(c >= 0.0)) throw std::invalid_argument("CostMatrix: entries must be >= 0");
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    double operator()(std::size_t i, std::size_t j) const { return entries_[i * cols_ + j]; }

private:
    std::size_t rows_;
    std::size_t cols_;
    std::vector<double> entries_;
};

inline CostMatrix cost_matrix(const MetricSpec& spec, const PointSet& source, const PointSet& target) {
    std::vector<double> c(source.size() * target.size());
    for (std::size_t i = 0; i < source.size(); ++i)
        for (std::size_t j = 0; j < target.size(); ++j) c[i * target.size() + j] = metric_eval(spec, source[i], target[j]);
    return CostMatrix(source.size(), target.size(), std::move(c));
}

// |x - y| style cost from an arbitrary function of two points.
inline CostMatrix cost_matrix(const PointSet& source, const PointSet& target,
                              const std::function<double(const LabeledPoint&, const LabeledPoint&)>& cost) {
    std::vector<double> c(source.size() * target.size());
    for (std::size_t i = 0; i < source.size(); ++i)
        for (std::size_t j = 0; j < target.size(); ++j) c[i * target.size() + j] = cost(source[i], target[j]);
    return CostMatrix(source.size(), target.size(), std::move(c));
}

// Uniform 1/n weights, duplicates kept as separate atoms.
inline DiscreteMeasure empirical_from_samples(PointSetPtr points) {
    if (!points || points->size() == 0) throw DimensionError("empirical_from_samples: empty sample");
    const std::size_t n = points->size();
    return DiscreteMeasure(std::move(points), Vector(n, 1.0 / static_cast<double>(n)));
}

// Index-aligned image; coincident image atoms are not merged.
inline DiscreteMeasure pushforward(const DiscreteMeasure& mu, const std::function<LabeledPoint(const LabeledPoint&)>& map,
                                   std::size_t label_count = 0) {
    std::vector<LabeledPoint> image;
    image.reserve(mu.size());
    for (const auto& s : mu.support()) image.push_back(map(s));
    const std::size_t k = label_count == 0 ? mu.support().label_count() : label_count;
    return DiscreteMeasure(make_point_set(std::move(image), k), mu.weights());
}

struct TransportPlan {
    double cost = 0.0;
    // Dense coupling, rows index mu's atoms and columns nu's; entries with infinite cost are 0.
    std::vector<double> coupling;
    std::size_t rows = 0;
    std::size_t cols = 0;
};

// Exact min sum pi_ij c_ij over couplings of (mu, nu). Infinite-cost pairs are
// excluded from the program rather than penalized.
inline TransportPlan optimal_transport(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const CostMatrix& costs) {
    const std::size_t m = mu.size();
    const std::size_t n = nu.size();
    if (costs.rows() != m || costs.cols() != n) throw DimensionError("transport_cost: cost matrix shape mismatch");

    std::vector<std::size_t> var_i, var_j;
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (std::isfinite(costs(i, j))) {
                var_i.push_back(i);
                var_j.push_back(j);
            }
    if (var_i.empty()) throw InfeasibleError("transport_cost: every pair has infinite cost");

    const std::size_t nv = var_i.size();
    LPProblem lp;
    lp.objective.resize(nv);
    for (std::size_t v = 0; v < nv; ++v) lp.objective[v] = -costs(var_i[v], var_j[v]);
    for (std::size_t i = 0; i < m; ++i) {
        LinearConstraint row{Vector(nv, 0.0), mu.weights()[i]};
        for (std::size_t v = 0; v < nv; ++v)
            if (var_i[v] == i) row.row[v] = 1.0;
        lp.eq_constraints.push_back(std::move(row));
    }
    for (std::size_t j = 0; j < n; ++j) {
        LinearConstraint col{Vector(nv, 0.0), nu.weights()[j]};
        for (std::size_t v = 0; v < nv; ++v)
            if (var_j[v] == j) col.row[v] = 1.0;
        lp.eq_constraints.push_back(std::move(col));
    }
    const LPSolution sol = solve_lp(lp);
    if (sol.status != LPStatus::Optimal) throw InfeasibleError("transport_cost: no finite-cost coupling exists");

    TransportPlan plan;
    plan.rows = m;
    plan.cols = n;
    plan.coupling.assign(m * n, 0.0);
    for (std::size_t v = 0; v < nv; ++v) plan.coupling[var_i[v] * n + var_j[v]] = sol.point[v];
    plan.cost = -sol.value;
    return plan;
}

inline double transport_cost(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const CostMatrix& costs) {
    return optimal_transport(mu, nu, costs).cost;
}

inline double transport_cost(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const MetricSpec& spec) {
    return transport_cost(mu, nu, cost_matrix(spec, mu.support(), nu.support()));
}

inline bool ball_contains(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const CostMatrix& costs, double rho) {
    if (!(rho >= 0.0)) throw std::invalid_argument("ball_contains: rho must be >= 0");
    return transport_cost(mu, nu, costs) <= rho + 1e-9;
}

// ---- CSV: header `weight,label,x0,...`, one row per atom -----------------

inline std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s, const std::string& where) {
    // strtod accepts "inf"/"nan" spellings that from_chars also handles; trim spaces first.
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw ConfigError(where, "cannot parse number '" + std::string(s) + "'");
    }
    return v;
}

inline std::vector<std::string_view> split_csv_line(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

inline std::string measure_to_csv(const DiscreteMeasure& mu) {
    std::ostringstream os;
    os << "weight,label";
    for (std::size_t d = 0; d < mu.support().dimension(); ++d) os << ",x" << d;
    os << '\n';
    for (std::size_t i = 0; i < mu.size(); ++i) {
        os << format_double(mu.weights()[i]) << ',' << mu.atom(i).y;
        for (double v : mu.atom(i).x) os << ',' << format_double(v);
        os << '\n';
    }
    return os.str();
}

inline DiscreteMeasure measure_from_csv(std::string_view text, std::size_t label_count) {
    std::vector<LabeledPoint> pts;
    Vector w;
    std::size_t line_no = 0;
    std::size_t width = 0;
    while (!text.empty()) {
        const std::size_t nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        const std::string where = "line " + std::to_string(line_no);
        if (line_no == 1) {
            if (fields.size() < 3 || fields[0] != "weight" || fields[1] != "label") {
                throw ConfigError(where, "expected header 'weight,label,x0,...'");
            }
            width = fields.size();
            continue;
        }
        if (fields.size() != width) throw ConfigError(where, "inconsistent row width");
        w.push_back(parse_double(fields[0], where));
        const double lab = parse_double(fields[1], where);
        if (lab < 0.0 || lab != std::floor(lab)) throw ConfigError(where, "label must be a non-negative integer");
        LabeledPoint p;
        p.y = static_cast<std::size_t>(lab);
        for (std::size_t f = 2; f < fields.size(); ++f) p.x.push_back(parse_double(fields[f], where));
        pts.push_back(std::move(p));
    }
    if (pts.empty()) throw ConfigError("", "measure CSV has no atoms");
    return DiscreteMeasure(make_point_set(std::move(pts), label_count), std::move(w));
}

}  // namespace wasslip
