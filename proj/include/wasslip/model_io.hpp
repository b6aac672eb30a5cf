#pragma once

// Plain-text model format, version 1:
//
//   wasslip-model 1
//   hidden <count>
//   layer <rows> <cols> <activation>     (per hidden layer, followed by rows of W and one bias line)
//   head <rows> <cols>                   (followed by rows of W and one bias line)
//
// Numbers are written with 17 significant digits so a save/load round trip is exact.

#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "wasslip/error.hpp"
#include "wasslip/measures.hpp"
#include "wasslip/models.hpp"

namespace wasslip {

namespace detail {

inline void write_block(std::ostringstream& os, const Matrix& W, const Vector& b) {
    for (std::size_t i = 0; i < W.rows(); ++i) {
        for (std::size_t j = 0; j < W.cols(); ++j) os << (j ? " " : "") << format_double(W(i, j));
        os << '\n';
    }
    for (std::size_t i = 0; i < b.size(); ++i) os << (i ? " " : "") << format_double(b[i]);
    os << '\n';
}

class TokenReader {
public:
    TokenReader(std::string_view text, std::string where) : is_(std::string(text)), where_(std::move(where)) {}

    std::string word(const char* what) {
        std::string s;
        if (!(is_ >> s)) throw ConfigError(where_, std::string("unexpected end of file, expected ") + what);
        return s;
    }
    void expect(std::string_view kw) {
        const std::string s = word(std::string(kw).c_str());
        if (s != kw) throw ConfigError(where_, "expected '" + std::string(kw) + "', found '" + s + "'");
    }
    std::size_t count(const char* what) {
        const std::string s = word(what);
        const double v = parse_double(s, where_);
        if (!(v >= 0.0) || v != static_cast<double>(static_cast<std::size_t>(v)) || v > 1e7)
            throw ConfigError(where_, std::string("bad ") + what + " '" + s + "'");
        return static_cast<std::size_t>(v);
    }
    double number() { return parse_double(word("number"), where_); }
    bool at_end() {
        std::string s;
        return !(is_ >> s);
    }

private:
    std::istringstream is_;
    std::string where_;
};

inline std::pair<Matrix, Vector> read_block(TokenReader& r, std::size_t rows, std::size_t cols) {
    if (rows == 0 || cols == 0) throw DimensionError("model file: zero-sized layer");
    Matrix W(rows, cols);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) W(i, j) = r.number();
    Vector b(rows);
    for (double& e : b) e = r.number();
    return {std::move(W), std::move(b)};
}

}  // namespace detail

inline std::string model_to_text(const MLP& model) {
    std::ostringstream os;
    os << "wasslip-model 1\n";
    os << "hidden " << model.hidden().size() << '\n';
    for (const auto& l : model.hidden()) {
        os << "layer " << l.W.rows() << ' ' << l.W.cols() << ' ' << to_string(l.activation) << '\n';
        detail::write_block(os, l.W, l.bias);
    }
    os << "head " << model.head().W.rows() << ' ' << model.head().W.cols() << '\n';
    detail::write_block(os, model.head().W, model.head().bias);
    return os.str();
}

inline MLP model_from_text(std::string_view text, const std::string& where = "model") {
    detail::TokenReader r(text, where);
    r.expect("wasslip-model");
    const std::size_t version = r.count("version");
    if (version != 1) throw ConfigError(where, "unsupported model format version " + std::to_string(version));
    r.expect("hidden");
    const std::size_t nh = r.count("hidden layer count");
    std::vector<DenseLayer> hidden;
    for (std::size_t h = 0; h < nh; ++h) {
        r.expect("layer");
        const std::size_t rows = r.count("rows");
        const std::size_t cols = r.count("cols");
        const std::string act = r.word("activation");
        const auto a = parse_activation(act);
        if (!a) throw ConfigError(where, "unknown activation '" + act + "'");
        auto [W, b] = detail::read_block(r, rows, cols);
        hidden.push_back({std::move(W), std::move(b), *a});
    }
    r.expect("head");
    const std::size_t rows = r.count("rows");
    const std::size_t cols = r.count("cols");
    auto [W, b] = detail::read_block(r, rows, cols);
    if (!r.at_end()) throw ConfigError(where, "trailing content after head");
    try {
        return MLP(std::move(hidden), LinearSoftmax(std::move(W), std::move(b)));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(where, e.what());
    }
}

}  // namespace wasslip
