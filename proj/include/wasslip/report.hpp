#pragma once

// JSON and CSV emitters for certificates, attacks and training runs.
// Non-finite numbers are written as the strings "inf", "-inf", "nan".

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wasslip/adversarial.hpp"
#include "wasslip/measures.hpp"
#include "wasslip/robust.hpp"
#include "wasslip/train.hpp"

namespace wasslip {

using Json = nlohmann::ordered_json;

inline Json json_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

inline Json json_numbers(std::span<const double> v) {
    Json a = Json::array();
    for (double e : v) a.push_back(json_number(e));
    return a;
}

inline Json to_json(const Verdict& v) {
    Json j;
    j["name"] = v.name;
    j["passed"] = v.passed;
    if (!v.detail.empty()) j["detail"] = v.detail;
    return j;
}

inline Json to_json(const std::vector<Verdict>& vs) {
    Json a = Json::array();
    for (const auto& v : vs) a.push_back(to_json(v));
    return a;
}

struct Fingerprint {
    std::uint64_t dataset_hash = 0;
    std::uint64_t seed = 0;
};

inline Json to_json(const RobustCertificate& c) {
    Json j;
    j["empirical_risk"] = json_number(c.empirical_risk);
    j["robust_value"] = json_number(c.robust_value);
    j["lambda_star"] = json_number(c.lambda_star);
    j["rho"] = json_number(c.rho);
    j["kappa"] = json_number(c.kappa);
    j["norm"] = to_string(c.norm);
    j["bound_mode"] = to_string(c.bound_mode);
    j["lipschitz_bound_used"] = json_number(c.lipschitz_bound_used);
    if (c.feature_lipschitz) j["feature_lipschitz"] = json_number(*c.feature_lipschitz);
    if (c.oracle_value) j["oracle_value"] = json_number(*c.oracle_value);
    if (c.oracle_gap) j["oracle_gap"] = json_number(*c.oracle_gap);
    j["verdicts"] = to_json(c.verdicts);
    j["passed"] = c.all_passed();
    return j;
}

inline Json to_json(const RobustCertificate& c, const Fingerprint& fp) {
    Json j = to_json(c);
    Json f;
    f["dataset_hash"] = fp.dataset_hash;
    f["seed"] = fp.seed;
    f["rho"] = json_number(c.rho);
    f["kappa"] = json_number(c.kappa);
    f["norm"] = to_string(c.norm);
    f["bound_mode"] = to_string(c.bound_mode);
    j["instance"] = f;
    return j;
}

inline Json to_json(const AttackResult& r) {
    Json j;
    j["method"] = to_string(r.method);
    j["norm"] = to_string(r.ball.norm);
    j["epsilon"] = json_number(r.ball.epsilon);
    j["adversarial_risk"] = json_number(r.adversarial_risk);
    j["clean_risk"] = json_number(r.clean_risk);
    j["max_perturbation_norm"] = json_number(r.max_perturbation_norm());
    Json samples = Json::array();
    for (std::size_t i = 0; i < r.deltas.size(); ++i) {
        Json s;
        s["perturbation_norm"] = json_number(norm(r.deltas[i], r.ball.norm));
        s["loss"] = json_number(r.losses[i]);
        s["clean_loss"] = json_number(r.clean_losses[i]);
        s["seed"] = r.seeds[i];
        samples.push_back(s);
    }
    j["samples"] = samples;
    return j;
}

inline Json to_json(const EpochRecord& e) {
    Json j;
    j["epoch"] = e.epoch;
    j["erm"] = json_number(e.erm);
    j["penalty"] = json_number(e.penalty);
    j["objective"] = json_number(e.objective);
    j["product_bound"] = json_number(e.product_bound);
    j["young_bound"] = json_number(e.young_bound);
    j["layer_norms"] = json_numbers(e.layer_norms);
    return j;
}

// wall_seconds is left out on purpose; it goes to the metadata file.
inline Json to_json(const TrainReport& r) {
    Json j;
    j["objective"] = to_string(r.objective);
    j["diverged"] = r.diverged;
    j["final_accuracy"] = json_number(r.final_accuracy);
    Json ep = Json::array();
    for (const auto& e : r.epochs) ep.push_back(to_json(e));
    j["epochs"] = ep;
    if (r.certificate) j["certificate"] = to_json(*r.certificate);
    return j;
}

inline std::string train_curves_csv(const TrainReport& r) {
    std::string out = "epoch,erm,penalty,objective,product_bound,young_bound\n";
    for (const auto& e : r.epochs) {
        out += std::to_string(e.epoch) + ',' + format_double(e.erm) + ',' + format_double(e.penalty) + ',' +
               format_double(e.objective) + ',' + format_double(e.product_bound) + ',' + format_double(e.young_bound) +
               '\n';
    }
    return out;
}

inline std::string dump_json(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace wasslip
