// Copyright 2026 The rope Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "rope/records.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

namespace rope {

using nlohmann::json;

namespace {

json number(double x) {
    if (std::isfinite(x)) return x;
    if (std::isnan(x)) return nullptr;
    return x > 0 ? "inf" : "-inf";
}

json vec(const Vector& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(number(v(i)));
    return out;
}

json mat(const Matrix& m) {
    json out = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) out.push_back(vec(m.row(r).transpose()));
    return out;
}

json ci_json(const ConfidenceInterval& ci) {
    return {{"lower", number(ci.lower)},
            {"upper", number(ci.upper)},
            {"correction", number(ci.correction)},
            {"nominal_level", number(ci.nominal_level)},
            {"corrected", ci.corrected}};
}

json schedule_json(const RadiusSchedule& s) {
    return {{"mode", to_string(s.mode)}, {"rho", vec(s.rho)},       {"tau", vec(s.tau)},
            {"counts", vec(s.counts)},   {"base_tau", s.base_tau},   {"alpha", s.alpha},
            {"value_bound", s.value_bound}, {"diam", s.diam}};
}

json contraction_json(const ContractionReport& c) {
    json states = json::array();
    for (const auto& s : c.states)
        states.push_back({{"lipschitz", number(s.lipschitz)},
                          {"epsilon", s.epsilon},
                          {"margin", number(s.margin)},
                          {"pass", s.pass}});
    return {{"pass", c.pass},
            {"states", states},
            {"min_ratio", number(c.min_ratio)},
            {"required_ratio", number(c.required_ratio)},
            {"sample_size_ok", c.sample_size_ok}};
}

json estimate_json(const RobustEstimate& e) {
    return {{"bound", number(e.bound)},         {"v", vec(e.v)},
            {"lambda", vec(e.lambda)},          {"iterations", e.iterations},
            {"residual", number(e.residual)},   {"projected", e.projected},
            {"value_bound", e.value_bound},     {"contraction", contraction_json(e.contraction)},
            {"warnings", e.warnings}};
}

json batch_json(const BatchResult& b) {
    std::vector<int> actions;
    for (int s = 0; s < b.policy.n_states(); ++s) actions.push_back(b.policy.action(s));
    return {{"policy", actions},
            {"value", number(b.value)},
            {"v", vec(b.v)},
            {"iterations", b.iterations},
            {"residual", number(b.residual)},
            {"projected", b.projected},
            {"contraction", {{"pass", b.contraction.pass},
                             {"lipschitz", mat(b.contraction.lipschitz)},
                             {"margin", mat(b.contraction.margin)}}},
            {"warnings", b.warnings}};
}

json parse(const std::string& text, const std::string& what) {
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw InputError(what + ": " + e.what());
    }
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

ExperimentConfig config_from_json(const std::string& text, ExperimentConfig cfg) {
    const json j = parse(text, "config");
    if (!j.is_object()) throw InputError("config must be a JSON object");
    try {
        for (const auto& [key, value] : j.items()) {
            if (key == "env") cfg.env = value.get<std::string>();
            else if (key == "behavior") cfg.behavior = value.get<std::string>();
            else if (key == "epsilon") cfg.epsilon = value.get<double>();
            else if (key == "gamma") cfg.gamma = value.get<double>();
            else if (key == "alpha") cfg.alpha = value.get<double>();
            else if (key == "episodes") cfg.episodes = value.get<std::vector<int>>();
            else if (key == "horizons") cfg.horizons = value.get<std::vector<int>>();
            else if (key == "totals") cfg.totals = value.get<std::vector<long>>();
            else if (key == "paired") cfg.paired = value.get<bool>();
            else if (key == "trials") cfg.trials = value.get<int>();
            else if (key == "seed") cfg.seed = value.get<std::uint64_t>();
            else if (key == "radii") cfg.radii = value.get<std::string>();
            else if (key == "fixed_rho") cfg.fixed_rho = value.get<std::vector<double>>();
            else if (key == "rho_scale") cfg.rho_scale = value.get<double>();
            else if (key == "corrected") cfg.corrected = value.get<bool>();
            else if (key == "value_bound") cfg.value_bound = value.get<double>();
            else if (key == "missing_bound") cfg.missing_bound = value.get<bool>();
            else if (key == "project") cfg.project = value.get<bool>();
            else if (key == "tune_grid") cfg.tune_grid = value.get<int>();
            else if (key == "threads") cfg.threads = value.get<int>();
            else throw InputError("unknown config key '" + key + "'");
        }
    } catch (const json::exception& e) {
        throw InputError(std::string("config: ") + e.what());
    }
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base) {
    return config_from_json(read_file(path), std::move(base));
}

std::string config_to_json(const ExperimentConfig& cfg) {
    const json j = {{"env", cfg.env},
                    {"behavior", cfg.behavior},
                    {"epsilon", cfg.epsilon},
                    {"gamma", cfg.gamma},
                    {"alpha", cfg.alpha},
                    {"episodes", cfg.episodes},
                    {"horizons", cfg.horizons},
                    {"totals", cfg.totals},
                    {"paired", cfg.paired},
                    {"trials", cfg.trials},
                    {"seed", cfg.seed},
                    {"radii", cfg.radii},
                    {"fixed_rho", cfg.fixed_rho},
                    {"rho_scale", cfg.rho_scale},
                    {"corrected", cfg.corrected},
                    {"value_bound", cfg.value_bound},
                    {"missing_bound", cfg.missing_bound},
                    {"project", cfg.project},
                    {"tune_grid", cfg.tune_grid}};
    return j.dump(2);
}

Vector load_radii(const std::filesystem::path& path, int n_states) {
    const json j = parse(read_file(path), "radii file " + path.string());
    if (!j.is_object()) throw InputError("radii file must hold a JSON object {state: rho}");
    Vector rho = Vector::Constant(n_states, std::nan(""));
    for (const auto& [key, value] : j.items()) {
        const long long s = parse_int(key);
        if (s < 0 || s >= n_states) throw InputError("radii file: state " + key + " out of range");
        if (!value.is_number()) throw InputError("radii file: radius for state " + key + " is not a number");
        rho(s) = value.get<double>();
        if (!(rho(s) >= 0.0)) throw InputError("radii file: negative radius for state " + key);
    }
    for (int s = 0; s < n_states; ++s)
        if (std::isnan(rho(s))) throw InputError("radii file: missing state " + std::to_string(s));
    return rho;
}

void save_radii(const std::filesystem::path& path, const Vector& rho) {
    json j = json::object();
    for (Eigen::Index s = 0; s < rho.size(); ++s) j[std::to_string(s)] = rho(s);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

std::vector<std::string> modeling_notes(const std::string& env) {
    std::vector<std::string> notes;
    if (env == "mrp") {
        notes.emplace_back("initial distribution is uniform over all states (modeling choice)");
        notes.emplace_back("Repair at R1 and R2 copies the DoNothing rows (modeling choice)");
    } else if (env == "hmp") {
        notes.emplace_back("initial distribution is uniform over states 1-5 (modeling choice)");
        notes.emplace_back("behavior policy epsilon-greedy softening is a modeling choice");
    }
    notes.emplace_back("correction term uses the plug-in transition in place of the true one");
    notes.emplace_back("iterates are projected onto |v| <= M unless project=false");
    return notes;
}

std::string sidecar_json(const std::string& experiment, const ExperimentConfig& cfg, std::size_t rows) {
    const json j = {{"experiment", experiment},
                    {"version", kVersion},
                    {"rows", rows},
                    {"config", json::parse(config_to_json(cfg))},
                    {"notes", modeling_notes(cfg.env)}};
    return j.dump(2);
}

std::string to_json(const OpeRecord& r) {
    json j = {{"kind", "ope"},
              {"version", kVersion},
              {"env", r.env},
              {"lower", estimate_json(r.lower)},
              {"upper", estimate_json(r.upper)},
              {"ci", ci_json(r.ci)},
              {"schedule", schedule_json(r.schedule)},
              {"notes", modeling_notes(r.env)}};
    j["plug_in"] = r.plug_in ? number(*r.plug_in) : json(nullptr);
    j["true_value"] = r.true_value ? number(*r.true_value) : json(nullptr);
    return j.dump(2);
}

std::string to_json(const AdversarialRecord& r) {
    json j = {{"kind", "adversarial"},
              {"version", kVersion},
              {"env", r.env},
              {"estimate", estimate_json(r.estimate.estimate)},
              {"sigma2", number(r.estimate.sigma2)},
              {"total", r.estimate.total},
              {"ci", ci_json(r.estimate.ci)},
              {"rho", vec(r.rho)},
              {"notes", modeling_notes(r.env)}};
    j["reference"] = r.reference ? number(*r.reference) : json(nullptr);
    return j.dump(2);
}

std::string to_json(const BatchRecord& r) {
    json j = {{"kind", "batch"},
              {"version", kVersion},
              {"env", r.env},
              {"robust", batch_json(r.robust)},
              {"schedule", schedule_json(r.schedule)},
              {"optimal_value", number(r.optimal_value)},
              {"robust_policy_value", number(r.robust_policy_value)},
              {"robust_gap", number(relative_gap(r.optimal_value, r.robust_policy_value))},
              {"correction", number(r.correction)},
              {"notes", modeling_notes(r.env)}};
    j["saa"] = r.saa ? batch_json(*r.saa) : json(nullptr);
    if (r.saa_policy_value) {
        j["saa_policy_value"] = number(*r.saa_policy_value);
        j["saa_gap"] = number(relative_gap(r.optimal_value, *r.saa_policy_value));
    }
    return j.dump(2);
}

} // namespace rope
