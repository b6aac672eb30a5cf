#pragma once

// Synthetic datasets and the dataset CSV format (header `label,x0,x1,...`).

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wasslip/error.hpp"
#include "wasslip/measures.hpp"
#include "wasslip/rng.hpp"

namespace wasslip {

enum class DataKind { BLOBS, TWO_MOONS, GRID };

inline std::string_view to_string(DataKind k) noexcept {
    switch (k) {
        case DataKind::BLOBS: return "gaussian-blobs";
        case DataKind::TWO_MOONS: return "two-moons";
        case DataKind::GRID: return "grid";
    }
    return "?";
}

inline std::optional<DataKind> parse_data_kind(std::string_view s) {
    if (s == "gaussian-blobs" || s == "blobs") return DataKind::BLOBS;
    if (s == "two-moons" || s == "moons") return DataKind::TWO_MOONS;
    if (s == "grid") return DataKind::GRID;
    return std::nullopt;
}

struct DataSpec {
    DataKind kind = DataKind::BLOBS;
    std::size_t n = 200;
    std::size_t k = 2;
    std::size_t dim = 2;
    std::uint64_t seed = 0;
    double separation = 4.0;  // blobs: minimum distance between centers
    double spread = 1.0;      // blobs: per-coordinate standard deviation
    double noise = 0.1;       // two-moons
    std::size_t per_axis = 5;  // grid
    double low = -1.0;         // grid
    double high = 1.0;         // grid
};

// Blobs: k centers drawn in [-s, s]^dim with pairwise distance >= s (s = separation),
// point i has label i mod k. Two-moons: interleaved half circles, first half label 0.
// Grid: per_axis^dim lattice on [low, high]^dim, all labelled 0.
inline PointSetPtr gen_data(const DataSpec& spec) {
    Rng rng(spec.seed);
    std::vector<LabeledPoint> pts;
    switch (spec.kind) {
        case DataKind::BLOBS: {
            if (spec.k < 2 || spec.n < spec.k) throw std::invalid_argument("gen_data: need n >= k >= 2");
            if (spec.dim < 1) throw std::invalid_argument("gen_data: dim must be >= 1");
            if (!(spec.separation > 0.0) || !(spec.spread >= 0.0))
                throw std::invalid_argument("gen_data: separation must be > 0 and spread >= 0");
            std::vector<Vector> centers;
            for (std::size_t c = 0; c < spec.k; ++c) {
                Vector best;
                for (int attempt = 0; attempt < 1000; ++attempt) {
                    Vector cand(spec.dim);
                    for (double& e : cand) e = rng.uniform(-spec.separation, spec.separation);
                    bool ok = true;
                    for (const auto& o : centers)
                        if (norm(subtract(cand, o), NormTag::L2) < spec.separation) ok = false;
                    best = std::move(cand);
                    if (ok) break;
                }
                centers.push_back(std::move(best));
            }
            for (std::size_t i = 0; i < spec.n; ++i) {
                const std::size_t y = i % spec.k;
                Vector x = centers[y];
                for (double& e : x) e += spec.spread * rng.normal();
                pts.push_back({std::move(x), y});
            }
            return make_point_set(std::move(pts), spec.k);
        }
        case DataKind::TWO_MOONS: {
            if (spec.k != 2) throw std::invalid_argument("gen_data: two-moons has exactly 2 labels");
            if (spec.dim != 2) throw std::invalid_argument("gen_data: two-moons is 2-dimensional");
            if (spec.n < 2) throw std::invalid_argument("gen_data: need n >= k >= 2");
            if (!(spec.noise >= 0.0)) throw std::invalid_argument("gen_data: noise must be >= 0");
            const std::size_t n0 = (spec.n + 1) / 2;
            const std::size_t n1 = spec.n - n0;
            auto t_at = [](std::size_t j, std::size_t m) {
                return m <= 1 ? 0.0 : std::numbers::pi * static_cast<double>(j) / static_cast<double>(m - 1);
            };
            for (std::size_t j = 0; j < n0; ++j) {
                const double t = t_at(j, n0);
                pts.push_back({{std::cos(t) + spec.noise * rng.normal(), std::sin(t) + spec.noise * rng.normal()}, 0});
            }
            for (std::size_t j = 0; j < n1; ++j) {
                const double t = t_at(j, n1);
                pts.push_back(
                    {{1.0 - std::cos(t) + spec.noise * rng.normal(), 0.5 - std::sin(t) + spec.noise * rng.normal()}, 1});
            }
            return make_point_set(std::move(pts), 2);
        }
        case DataKind::GRID: {
            if (spec.per_axis < 1 || spec.dim < 1) throw std::invalid_argument("gen_data: grid needs per_axis, dim >= 1");
            if (!(spec.low < spec.high)) throw std::invalid_argument("gen_data: grid needs low < high");
            for (auto& x : lattice(spec.dim, spec.per_axis, spec.low, spec.high)) pts.push_back({std::move(x), 0});
            return make_point_set(std::move(pts), std::max<std::size_t>(spec.k, 1));
        }
    }
    throw std::invalid_argument("gen_data: unknown kind");
}

inline std::string dataset_to_csv(const PointSet& pts) {
    std::string out = "label";
    for (std::size_t d = 0; d < pts.dimension(); ++d) out += ",x" + std::to_string(d);
    out += '\n';
    for (const auto& p : pts) {
        out += std::to_string(p.y);
        for (double e : p.x) {
            out += ',';
            out += format_double(e);
        }
        out += '\n';
    }
    return out;
}

// label_count 0 -> max label + 1 (at least 2).
inline PointSetPtr dataset_from_csv(std::string_view text, std::size_t label_count = 0, const std::string& where = "dataset") {
    std::vector<std::string_view> lines;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (!line.empty()) lines.push_back(line);
        if (nl == std::string_view::npos) break;
        text.remove_prefix(nl + 1);
    }
    if (lines.empty()) throw ConfigError(where, "empty dataset file");
    const auto header = split_csv_line(lines[0]);
    if (header.size() < 2 || header[0] != "label") throw ConfigError(where, "header must be label,x0,x1,...");
    for (std::size_t d = 1; d < header.size(); ++d)
        if (header[d] != "x" + std::to_string(d - 1)) throw ConfigError(where, "header must be label,x0,x1,...");
    const std::size_t dim = header.size() - 1;
    std::vector<LabeledPoint> pts;
    std::size_t max_label = 0;
    for (std::size_t r = 1; r < lines.size(); ++r) {
        const auto cells = split_csv_line(lines[r]);
        const std::string at = where + ":" + std::to_string(r + 1);
        if (cells.size() != dim + 1) throw ConfigError(at, "row width differs from header");
        const double yl = parse_double(cells[0], at);
        if (!(yl >= 0.0) || yl != std::floor(yl) || yl > 1e9) throw ConfigError(at, "label must be a nonnegative integer");
        LabeledPoint p{Vector(dim), static_cast<std::size_t>(yl)};
        for (std::size_t d = 0; d < dim; ++d) p.x[d] = parse_double(cells[d + 1], at);
        max_label = std::max(max_label, p.y);
        pts.push_back(std::move(p));
    }
    if (pts.empty()) throw ConfigError(where, "dataset has no rows");
    const std::size_t k = label_count ? label_count : std::max<std::size_t>(max_label + 1, 2);
    if (max_label >= k) throw ConfigError(where, "label " + std::to_string(max_label) + " outside [0, " + std::to_string(k) + ")");
    return make_point_set(std::move(pts), k);
}

}  // namespace wasslip
