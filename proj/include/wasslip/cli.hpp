#pragma once

// Command implementations behind the `wasslip` tool. Every command reads one
// JSON config, writes deterministic outputs under the output directory, and
// puts wall-clock data in metadata.json only.
//
// Config schema (unknown keys are errors; all sections optional unless the
// command needs them):
//
//   seed      u64 master seed (overridden by --seed), default 0
//   output    output directory (overridden by --out), default "."
//   dataset   { path, labels } | { generator, n, k, dim, seed, separation, spread, noise, per_axis, low, high }
//   model     { path } | { dims: [in, hidden..., classes], activation, init_scale }
//   robust    { rho, kappa, norm, bound_mode, oracle_grid: { per_axis, low, high } }
//   attack    { epsilons: [...] | epsilon, norm, method, steps, step_size, restarts, kappa, bound_mode,
//               lp_check_max_atoms, grid_per_axis, grid_boundary }
//   train     { objective, rho, kappa, norm, bound_mode, learning_rate, epochs, batch_size, momentum,
//               warm_start, lipschitz_cap, divergence_threshold }
//   verify    { seed, checks: [...], duality_instances, refinement_instances, threshold_instances, ce_slices,
//               pushforward_triples, theorem52_seeds, chain_networks, gradient_checks, monotonicity_instances }
//
// kappa accepts a positive number or the string "inf".

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wasslip/adversarial.hpp"
#include "wasslip/data.hpp"
#include "wasslip/error.hpp"
#include "wasslip/model_io.hpp"
#include "wasslip/report.hpp"
#include "wasslip/robust.hpp"
#include "wasslip/suite.hpp"
#include "wasslip/train.hpp"

namespace wasslip::cli {

enum ExitCode : int { kOk = 0, kVerificationFailed = 1, kUsageError = 2, kNumericalFailure = 3 };

namespace fs = std::filesystem;

// ---- schema-checked JSON access ---------------------------------------------

class ConfigReader {
public:
    ConfigReader(const Json& node, std::string path) : node_(&node), path_(std::move(path)) {
        if (!node.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
    }

    bool has(const std::string& key) const { return node_->contains(key); }

    double number(const std::string& key) {
        const Json& v = take(key);
        if (!v.is_number()) throw ConfigError(at(key), "expected a number");
        const double d = v.get<double>();
        if (!std::isfinite(d)) throw ConfigError(at(key), "must be finite");
        return d;
    }
    double number_or(const std::string& key, double def) { return has(key) ? number(key) : def; }

    // Positive number or "inf".
    double kappa_or(const std::string& key, double def) {
        if (!has(key)) return def;
        const Json& v = take(key);
        double k;
        if (v.is_string()) {
            if (v.get<std::string>() != "inf") throw ConfigError(at(key), "expected a positive number or \"inf\"");
            k = kInf;
        } else if (v.is_number()) {
            k = v.get<double>();
        } else {
            throw ConfigError(at(key), "expected a positive number or \"inf\"");
        }
        if (!(k > 0.0)) throw ConfigError(at(key), "must be > 0");
        return k;
    }

    std::uint64_t uint(const std::string& key) {
        const Json& v = take(key);
        if (v.is_number_unsigned()) return v.get<std::uint64_t>();
        if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(v.get<std::int64_t>());
        throw ConfigError(at(key), "expected a nonnegative integer");
    }
    std::uint64_t uint_or(const std::string& key, std::uint64_t def) { return has(key) ? uint(key) : def; }

    bool boolean_or(const std::string& key, bool def) {
        if (!has(key)) return def;
        const Json& v = take(key);
        if (!v.is_boolean()) throw ConfigError(at(key), "expected true or false");
        return v.get<bool>();
    }

    std::string string(const std::string& key) {
        const Json& v = take(key);
        if (!v.is_string()) throw ConfigError(at(key), "expected a string");
        return v.get<std::string>();
    }
    std::string string_or(const std::string& key, const std::string& def) { return has(key) ? string(key) : def; }

    std::vector<double> numbers(const std::string& key) {
        const Json& v = take(key);
        if (!v.is_array() || v.empty()) throw ConfigError(at(key), "expected a nonempty array of numbers");
        std::vector<double> out;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!v[i].is_number()) throw ConfigError(at(key) + "[" + std::to_string(i) + "]", "expected a number");
            out.push_back(v[i].get<double>());
        }
        return out;
    }

    std::vector<std::size_t> sizes(const std::string& key) {
        const Json& v = take(key);
        if (!v.is_array() || v.empty()) throw ConfigError(at(key), "expected a nonempty array of integers");
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!v[i].is_number_integer() || v[i].get<std::int64_t>() <= 0)
                throw ConfigError(at(key) + "[" + std::to_string(i) + "]", "expected a positive integer");
            out.push_back(static_cast<std::size_t>(v[i].get<std::int64_t>()));
        }
        return out;
    }

    std::vector<std::string> strings(const std::string& key) {
        const Json& v = take(key);
        if (!v.is_array()) throw ConfigError(at(key), "expected an array of strings");
        std::vector<std::string> out;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!v[i].is_string()) throw ConfigError(at(key) + "[" + std::to_string(i) + "]", "expected a string");
            out.push_back(v[i].get<std::string>());
        }
        return out;
    }

    ConfigReader section(const std::string& key) { return ConfigReader(take(key), at(key)); }

    template <class T, class Parse>
    T parsed_or(const std::string& key, T def, Parse parse, const char* allowed) {
        if (!has(key)) return def;
        const std::string s = string(key);
        const auto v = parse(s);
        if (!v) throw ConfigError(at(key), "unknown value '" + s + "' (allowed: " + allowed + ")");
        return *v;
    }

    // Every key must have been read.
    void finish() const {
        for (auto it = node_->begin(); it != node_->end(); ++it)
            if (!seen_.count(it.key())) throw ConfigError(at(it.key()), "unknown key");
    }

    std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

private:
    const Json& take(const std::string& key) {
        if (!node_->contains(key)) throw ConfigError(at(key), "required key missing");
        seen_.insert(key);
        return node_->at(key);
    }

    const Json* node_;
    std::string path_;
    std::set<std::string> seen_;
};

// ---- parsed configuration ------------------------------------------------------

struct DatasetSection {
    std::optional<fs::path> path;
    std::size_t labels = 0;
    std::optional<DataSpec> generator;
    bool generator_seed_given = false;
};

struct ModelSection {
    std::optional<fs::path> path;
    std::vector<std::size_t> dims;
    ActivationTag activation = ActivationTag::RELU;
    double init_scale = 1.0;
};

struct OracleGrid {
    std::size_t per_axis = 9;
    double low = -2.0;
    double high = 2.0;
};

struct RobustSection {
    double rho = 0.0;
    double kappa = kInf;
    NormTag norm = NormTag::L2;
    BoundMode mode = BoundMode::CERTIFIED;
    std::optional<OracleGrid> oracle_grid;
};

struct AttackSection {
    std::vector<double> epsilons;
    NormTag norm = NormTag::LINF;
    AttackConfig config;
    double kappa = kInf;
    BoundMode mode = BoundMode::CERTIFIED;
    std::size_t lp_check_max_atoms = 50;
};

struct VerifySection {
    suite::SuiteConfig suite;
    bool seed_given = false;
    std::vector<std::string> checks;  // empty -> all
};

struct ExperimentConfig {
    std::uint64_t seed = 0;
    fs::path output = ".";
    fs::path base_dir = ".";
    std::optional<DatasetSection> dataset;
    std::optional<ModelSection> model;
    std::optional<RobustSection> robust;
    std::optional<AttackSection> attack;
    std::optional<TrainConfig> train;
    std::optional<VerifySection> verify;
};

namespace detail {

inline const char* kNorms = "L1, L2, LINF";
inline const char* kModes = "PAPER, CERTIFIED";

inline DatasetSection parse_dataset(ConfigReader r) {
    DatasetSection d;
    if (r.has("path")) {
        d.path = r.string("path");
        d.labels = r.uint_or("labels", 0);
        r.finish();
        return d;
    }
    DataSpec s;
    if (!r.has("generator")) throw ConfigError(r.at("generator"), "required unless path is given");
    s.kind = r.parsed_or("generator", DataKind::BLOBS, parse_data_kind, "gaussian-blobs, two-moons, grid");
    s.n = r.uint_or("n", s.n);
    s.k = r.uint_or("k", s.k);
    s.dim = r.uint_or("dim", s.dim);
    if (r.has("seed")) {
        s.seed = r.uint("seed");
        d.generator_seed_given = true;
    }
    s.separation = r.number_or("separation", s.separation);
    s.spread = r.number_or("spread", s.spread);
    s.noise = r.number_or("noise", s.noise);
    s.per_axis = r.uint_or("per_axis", s.per_axis);
    s.low = r.number_or("low", s.low);
    s.high = r.number_or("high", s.high);
    r.finish();
    d.generator = s;
    return d;
}

inline ModelSection parse_model(ConfigReader r) {
    ModelSection m;
    if (r.has("path")) {
        m.path = r.string("path");
        r.finish();
        return m;
    }
    m.dims = r.sizes("dims");
    if (m.dims.size() < 2) throw ConfigError(r.at("dims"), "need at least input and output dims");
    if (m.dims.back() < 2) throw ConfigError(r.at("dims"), "need at least 2 classes");
    m.activation = r.parsed_or("activation", m.activation, parse_activation, "relu, tanh, identity");
    m.init_scale = r.number_or("init_scale", m.init_scale);
    if (!(m.init_scale > 0.0)) throw ConfigError(r.at("init_scale"), "must be > 0");
    r.finish();
    return m;
}

inline RobustSection parse_robust(ConfigReader r) {
    RobustSection s;
    s.rho = r.number_or("rho", s.rho);
    if (s.rho < 0.0) throw ConfigError(r.at("rho"), "must be >= 0");
    s.kappa = r.kappa_or("kappa", s.kappa);
    s.norm = r.parsed_or("norm", s.norm, parse_norm_tag, kNorms);
    s.mode = r.parsed_or("bound_mode", s.mode, parse_bound_mode, kModes);
    if (r.has("oracle_grid")) {
        ConfigReader g = r.section("oracle_grid");
        OracleGrid og;
        og.per_axis = g.uint_or("per_axis", og.per_axis);
        og.low = g.number_or("low", og.low);
        og.high = g.number_or("high", og.high);
        if (og.per_axis < 2) throw ConfigError(g.at("per_axis"), "must be >= 2");
        if (!(og.low < og.high)) throw ConfigError(g.at("high"), "must exceed low");
        g.finish();
        s.oracle_grid = og;
    }
    r.finish();
    return s;
}

inline AttackSection parse_attack(ConfigReader r) {
    AttackSection a;
    if (r.has("epsilons") && r.has("epsilon")) throw ConfigError(r.at("epsilon"), "give either epsilon or epsilons");
    if (r.has("epsilons")) {
        a.epsilons = r.numbers("epsilons");
    } else {
        a.epsilons = {r.number("epsilon")};
    }
    for (double e : a.epsilons)
        if (!(e >= 0.0)) throw ConfigError(r.at("epsilons"), "epsilons must be >= 0");
    a.norm = r.parsed_or("norm", a.norm, parse_norm_tag, kNorms);
    a.config.method = r.parsed_or("method", a.config.method, parse_attack_method, "FGSM, PGD, GRID");
    a.config.steps = r.uint_or("steps", a.config.steps);
    if (a.config.steps < 1) throw ConfigError(r.at("steps"), "must be >= 1");
    a.config.step_size = r.number_or("step_size", a.config.step_size);
    if (a.config.step_size < 0.0) throw ConfigError(r.at("step_size"), "must be > 0 (or 0 for the default)");
    a.config.restarts = r.uint_or("restarts", a.config.restarts);
    a.config.grid.per_axis = r.uint_or("grid_per_axis", a.config.grid.per_axis);
    a.config.grid.boundary = r.uint_or("grid_boundary", a.config.grid.boundary);
    a.kappa = r.kappa_or("kappa", a.kappa);
    a.mode = r.parsed_or("bound_mode", a.mode, parse_bound_mode, kModes);
    a.lp_check_max_atoms = r.uint_or("lp_check_max_atoms", a.lp_check_max_atoms);
    r.finish();
    return a;
}

inline TrainConfig parse_train(ConfigReader r) {
    TrainConfig t;
    t.objective = r.parsed_or("objective", t.objective, parse_objective, "DUAL_LINEAR, PRODUCT, SPECTRAL");
    t.rho = r.number_or("rho", t.rho);
    if (t.rho < 0.0) throw ConfigError(r.at("rho"), "must be >= 0");
    t.kappa = r.kappa_or("kappa", t.kappa);
    t.norm = r.parsed_or("norm", t.norm, parse_norm_tag, kNorms);
    t.bound_mode = r.parsed_or("bound_mode", t.bound_mode, parse_bound_mode, kModes);
    t.learning_rate = r.number_or("learning_rate", t.learning_rate);
    if (!(t.learning_rate > 0.0)) throw ConfigError(r.at("learning_rate"), "must be > 0");
    t.epochs = r.uint_or("epochs", t.epochs);
    t.batch_size = r.uint_or("batch_size", t.batch_size);
    t.momentum = r.number_or("momentum", t.momentum);
    if (!(t.momentum >= 0.0 && t.momentum < 1.0)) throw ConfigError(r.at("momentum"), "must be in [0, 1)");
    t.warm_start = r.boolean_or("warm_start", t.warm_start);
    if (r.has("lipschitz_cap")) {
        t.lipschitz_cap = r.number("lipschitz_cap");
        if (!(*t.lipschitz_cap > 0.0)) throw ConfigError(r.at("lipschitz_cap"), "must be > 0");
    }
    t.divergence_threshold = r.number_or("divergence_threshold", t.divergence_threshold);
    r.finish();
    return t;
}

inline VerifySection parse_verify(ConfigReader r) {
    VerifySection v;
    auto& s = v.suite;
    if (r.has("seed")) {
        s.seed = r.uint("seed");
        v.seed_given = true;
    }
    if (r.has("checks")) {
        v.checks = r.strings("checks");
        for (std::size_t i = 0; i < v.checks.size(); ++i) {
            bool known = false;
            for (const auto& c : suite::all_checks()) known = known || c.name == v.checks[i];
            if (!known) throw ConfigError(r.at("checks") + "[" + std::to_string(i) + "]", "unknown check '" + v.checks[i] + "'");
        }
    }
    s.duality_instances = r.uint_or("duality_instances", s.duality_instances);
    s.refinement_instances = r.uint_or("refinement_instances", s.refinement_instances);
    s.threshold_instances = r.uint_or("threshold_instances", s.threshold_instances);
    s.ce_slices = r.uint_or("ce_slices", s.ce_slices);
    s.pushforward_triples = r.uint_or("pushforward_triples", s.pushforward_triples);
    s.theorem52_seeds = r.uint_or("theorem52_seeds", s.theorem52_seeds);
    s.chain_networks = r.uint_or("chain_networks", s.chain_networks);
    s.gradient_checks = r.uint_or("gradient_checks", s.gradient_checks);
    s.monotonicity_instances = r.uint_or("monotonicity_instances", s.monotonicity_instances);
    r.finish();
    return v;
}

}  // namespace detail

inline ExperimentConfig parse_config(const Json& root, const fs::path& base_dir = ".") {
    ConfigReader r(root, "");
    ExperimentConfig c;
    c.base_dir = base_dir;
    c.seed = r.uint_or("seed", 0);
    c.output = r.string_or("output", ".");
    if (r.has("dataset")) c.dataset = detail::parse_dataset(r.section("dataset"));
    if (r.has("model")) c.model = detail::parse_model(r.section("model"));
    if (r.has("robust")) c.robust = detail::parse_robust(r.section("robust"));
    if (r.has("attack")) c.attack = detail::parse_attack(r.section("attack"));
    if (r.has("train")) c.train = detail::parse_train(r.section("train"));
    if (r.has("verify")) c.verify = detail::parse_verify(r.section("verify"));
    r.finish();
    return c;
}

inline std::string read_file(const fs::path& p, const std::string& what) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw ConfigError(what, "cannot read '" + p.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline ExperimentConfig load_config(const fs::path& path) {
    const std::string text = read_file(path, "--config");
    Json root;
    try {
        root = Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("--config", std::string("invalid JSON: ") + e.what());
    }
    return parse_config(root, path.parent_path().empty() ? fs::path(".") : path.parent_path());
}

// ---- shared pieces -----------------------------------------------------------

struct RunContext {
    ExperimentConfig config;
    std::string command;
    std::ostream* log = &std::cout;

    SeedSplitter seeds() const { return SeedSplitter(config.seed); }
    fs::path resolve(const fs::path& p) const { return p.is_absolute() ? p : config.base_dir / p; }
};

inline void write_file(const fs::path& p, const std::string& content) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("output", "cannot write '" + p.string() + "'");
    out << content;
    if (!out) throw ConfigError("output", "write failed for '" + p.string() + "'");
}

inline void ensure_output_dir(const RunContext& ctx) {
    std::error_code ec;
    fs::create_directories(ctx.config.output, ec);
    if (ec) throw ConfigError("output", "cannot create '" + ctx.config.output.string() + "': " + ec.message());
}

inline void write_metadata(const RunContext& ctx, double seconds) {
    Json j;
    j["command"] = ctx.command;
    j["seed"] = ctx.config.seed;
    j["wall_seconds"] = seconds;
    const std::time_t now = std::time(nullptr);
    std::ostringstream ts;
    ts << std::put_time(std::gmtime(&now), "%Y-%m-%dT%H:%M:%SZ");
    j["finished_utc"] = ts.str();
    write_file(ctx.config.output / "metadata.json", dump_json(j));
}

inline PointSetPtr load_dataset(const RunContext& ctx) {
    if (!ctx.config.dataset) throw ConfigError("dataset", "section required by '" + ctx.command + "'");
    const DatasetSection& d = *ctx.config.dataset;
    if (d.path) {
        const fs::path p = ctx.resolve(*d.path);
        return dataset_from_csv(read_file(p, "dataset.path"), d.labels, p.string());
    }
    DataSpec s = *d.generator;
    if (!d.generator_seed_given) s.seed = ctx.seeds().derive("dataset");
    try {
        return gen_data(s);
    } catch (const std::invalid_argument& e) {
        throw ConfigError("dataset", e.what());
    }
}

inline MLP load_model(const RunContext& ctx, const PointSet& data) {
    if (!ctx.config.model) throw ConfigError("model", "section required by '" + ctx.command + "'");
    const ModelSection& m = *ctx.config.model;
    MLP model;
    if (m.path) {
        const fs::path p = ctx.resolve(*m.path);
        model = model_from_text(read_file(p, "model.path"), p.string());
    } else {
        Rng rng(ctx.seeds().derive("model"));
        model = random_mlp(m.dims, m.activation, rng, m.init_scale);
    }
    if (model.input_dim() != data.dimension())
        throw ConfigError("model", "input dimension " + std::to_string(model.input_dim()) + " does not match dataset dimension " +
                                       std::to_string(data.dimension()));
    if (model.label_count() < data.label_count())
        throw ConfigError("model", "model has " + std::to_string(model.label_count()) + " classes, dataset has " +
                                       std::to_string(data.label_count()));
    return model;
}

inline std::uint64_t dataset_hash(const PointSet& pts) { return fnv1a64(dataset_to_csv(pts)); }

// ---- commands ----------------------------------------------------------------------

inline int cmd_gen_data(const RunContext& ctx) {
    const PointSetPtr pts = load_dataset(ctx);
    ensure_output_dir(ctx);
    write_file(ctx.config.output / "dataset.csv", dataset_to_csv(*pts));
    *ctx.log << "wrote " << pts->size() << " rows to " << (ctx.config.output / "dataset.csv").string() << "\n";
    return kOk;
}

inline int cmd_train(const RunContext& ctx) {
    if (!ctx.config.train) throw ConfigError("train", "section required by 'train'");
    const PointSetPtr pts = load_dataset(ctx);
    MLP model = load_model(ctx, *pts);
    TrainConfig tc = *ctx.config.train;
    tc.seed = ctx.seeds().derive("train");
    if (tc.objective == ObjectiveKind::DUAL_LINEAR && model.depth() != 1)
        throw ConfigError("train.objective", "DUAL_LINEAR needs a model without hidden layers");
    ensure_output_dir(ctx);
    const TrainReport rep = train_loop(model, empirical_from_samples(pts), tc);

    Json j = to_json(rep);
    Json f;
    f["dataset_hash"] = dataset_hash(*pts);
    f["seed"] = ctx.config.seed;
    f["rho"] = json_number(tc.rho);
    f["kappa"] = json_number(tc.kappa);
    f["norm"] = to_string(tc.norm);
    f["bound_mode"] = to_string(tc.bound_mode);
    j["instance"] = f;
    write_file(ctx.config.output / "train_report.json", dump_json(j));
    write_file(ctx.config.output / "train_curves.csv", train_curves_csv(rep));
    write_file(ctx.config.output / "model.txt", model_to_text(model));
    const EpochRecord& last = rep.epochs.back();
    *ctx.log << "epochs " << last.epoch << ", objective " << format_double(last.objective) << ", accuracy "
             << format_double(rep.final_accuracy) << "\n";
    if (rep.diverged) {
        *ctx.log << "training diverged (objective above " << format_double(tc.divergence_threshold) << ")\n";
        return kNumericalFailure;
    }
    return rep.certificate->all_passed() ? kOk : kVerificationFailed;
}

inline int cmd_certify(const RunContext& ctx) {
    if (!ctx.config.robust) throw ConfigError("robust", "section required by 'certify'");
    const RobustSection& rs = *ctx.config.robust;
    const PointSetPtr pts = load_dataset(ctx);
    const MLP model = load_model(ctx, *pts);
    const RobustInstance inst(empirical_from_samples(pts), MetricSpec(rs.norm, rs.kappa, model.label_count()), rs.rho);
    CertifyOptions co;
    co.mode = rs.mode;
    if (rs.oracle_grid) {
        const double total = std::pow(static_cast<double>(rs.oracle_grid->per_axis), static_cast<double>(pts->dimension()));
        if (total * static_cast<double>(model.label_count() * pts->size()) > 2e6)
            throw ConfigError("robust.oracle_grid", "LP oracle too large for this dataset; use a coarser grid");
        co.oracle_grid = lattice(pts->dimension(), rs.oracle_grid->per_axis, rs.oracle_grid->low, rs.oracle_grid->high);
    }
    ensure_output_dir(ctx);
    const RobustCertificate cert = model.depth() == 1 ? robust_risk_theorem31(inst, model.head(), co) : pushforward_risk(inst, model, co);
    Json j = to_json(cert, Fingerprint{dataset_hash(*pts), ctx.config.seed});
    j["method"] = model.depth() == 1 ? "dual" : "pushforward";
    write_file(ctx.config.output / "certificate.json", dump_json(j));
    *ctx.log << "empirical risk " << format_double(cert.empirical_risk) << ", robust value " << format_double(cert.robust_value)
             << ", lambda* " << format_double(cert.lambda_star) << "\n";
    for (const auto& v : cert.verdicts)
        if (!v.passed) *ctx.log << "FAILED " << v.name << " " << v.detail << "\n";
    return cert.all_passed() ? kOk : kVerificationFailed;
}

inline int cmd_attack(const RunContext& ctx) {
    if (!ctx.config.attack) throw ConfigError("attack", "section required by 'attack'");
    const AttackSection& as = *ctx.config.attack;
    const PointSetPtr pts = load_dataset(ctx);
    const MLP model = load_model(ctx, *pts);
    if (as.config.method == AttackMethod::GRID && pts->dimension() > 2)
        throw ConfigError("attack.method", "GRID needs inputs of dimension <= 2");
    const DiscreteMeasure mu = empirical_from_samples(pts);
    AttackConfig ac = as.config;
    ac.seed = ctx.seeds().derive("attack");
    ensure_output_dir(ctx);
    const std::vector<AttackResult> sweep = adversarial_risk_sweep(model, mu, as.norm, as.epsilons, ac);
    const bool lp_checks = pts->size() <= as.lp_check_max_atoms;

    Json runs = Json::array();
    std::string curve = "epsilon,adversarial_risk,robust_value\n";
    bool all_ok = true;
    for (const AttackResult& r : sweep) {
        const RobustInstance inst(mu, MetricSpec(as.norm, as.kappa, model.label_count()), r.ball.epsilon);
        CertifyOptions co;
        co.mode = as.mode;
        RobustCertificate cert;
        std::vector<Verdict> checks;
        if (lp_checks) {
            const Theorem52Verdict v = model.depth() == 1 ? check_theorem52(model.head(), inst, r, as.mode)
                                                          : check_theorem52(model, inst, r, as.mode);
            cert = v.certificate;
            checks = v.checks;
        } else {
            cert = model.depth() == 1 ? certify(inst, model.head(), co) : certify(inst, model, co);
            checks.push_back({"adversarial_le_robust", r.adversarial_risk <= cert.robust_value + 1e-8, ""});
        }
        Json j = to_json(r);
        j["robust_value"] = json_number(cert.robust_value);
        j["checks"] = to_json(checks);
        j["lp_checks"] = lp_checks ? "run" : "skipped: dataset larger than attack.lp_check_max_atoms";
        runs.push_back(j);
        curve += format_double(r.ball.epsilon) + ',' + format_double(r.adversarial_risk) + ',' + format_double(cert.robust_value) + '\n';
        for (const auto& c : checks) {
            if (!c.passed) {
                all_ok = false;
                *ctx.log << "FAILED eps=" << format_double(r.ball.epsilon) << " " << c.name << " " << c.detail << "\n";
            }
        }
        *ctx.log << "eps " << format_double(r.ball.epsilon) << ": adversarial " << format_double(r.adversarial_risk)
                 << ", robust " << format_double(cert.robust_value) << "\n";
    }
    Json report;
    report["method"] = to_string(ac.method);
    report["norm"] = to_string(as.norm);
    report["kappa"] = json_number(as.kappa);
    report["bound_mode"] = to_string(as.mode);
    report["dataset_hash"] = dataset_hash(*pts);
    report["seed"] = ctx.config.seed;
    report["runs"] = runs;
    report["passed"] = all_ok;
    write_file(ctx.config.output / "attack_report.json", dump_json(report));
    write_file(ctx.config.output / "bound_curve.csv", curve);
    return all_ok ? kOk : kVerificationFailed;
}

inline int cmd_verify(const RunContext& ctx) {
    VerifySection v = ctx.config.verify.value_or(VerifySection{});
    if (!v.seed_given) v.suite.seed = ctx.seeds().derive("verify");
    ensure_output_dir(ctx);
    Json checks = Json::array();
    bool all_ok = true;
    for (const auto& c : suite::all_checks()) {
        if (!v.checks.empty() && std::find(v.checks.begin(), v.checks.end(), c.name) == v.checks.end()) continue;
        const suite::CheckResult r = suite::run_check(c, v.suite);
        Json j;
        j["name"] = r.name;
        j["passed"] = r.passed;
        j["detail"] = r.detail;
        Json m = Json::object();
        for (const auto& [k, val] : r.metrics) m[k] = json_number(val);
        j["metrics"] = m;
        checks.push_back(j);
        all_ok = all_ok && r.passed;
        *ctx.log << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << "\n";
    }
    Json report;
    report["suite_seed"] = v.suite.seed;
    report["checks"] = checks;
    report["passed"] = all_ok;
    write_file(ctx.config.output / "verify_report.json", dump_json(report));
    return all_ok ? kOk : kVerificationFailed;
}

// Runs `command` with exceptions mapped to exit codes. Diagnostics go to `err`.
inline int run_command(const std::string& command, const fs::path& config_path, const std::optional<fs::path>& out,
                       const std::optional<std::uint64_t>& seed, std::ostream& log = std::cout, std::ostream& err = std::cerr) {
    const auto t0 = std::chrono::steady_clock::now();
    try {
        RunContext ctx;
        ctx.command = command;
        ctx.log = &log;
        ctx.config = load_config(config_path);
        if (out) ctx.config.output = *out;
        if (seed) ctx.config.seed = *seed;
        int code;
        if (command == "gen-data") {
            code = cmd_gen_data(ctx);
        } else if (command == "train") {
            code = cmd_train(ctx);
        } else if (command == "certify") {
            code = cmd_certify(ctx);
        } else if (command == "attack") {
            code = cmd_attack(ctx);
        } else if (command == "verify") {
            code = cmd_verify(ctx);
        } else {
            err << "unknown command '" << command << "'\n";
            return kUsageError;
        }
        write_metadata(ctx, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
        return code;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kUsageError;
    } catch (const std::invalid_argument& e) {
        err << "invalid input: " << e.what() << "\n";
        return kUsageError;
    } catch (const fs::filesystem_error& e) {
        err << "file error: " << e.what() << "\n";
        return kUsageError;
    } catch (const std::exception& e) {
        err << "numerical failure: " << e.what() << "\n";
        return kNumericalFailure;
    }
}

}  // namespace wasslip::cli
