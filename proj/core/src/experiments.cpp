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

#include "rope/experiments.hpp"

#include "rope/records.hpp"
#include "rope/rng.hpp"
#include "rope/stats.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <numeric>
#include <optional>
#include <sstream>
#include <thread>

namespace rope {

void ExperimentConfig::validate() const {
    parse_env(env);
    if (episodes.empty() || horizons.empty()) throw InputError("episode and horizon grids must be nonempty");
    for (int j : episodes)
        if (j < 1) throw InputError("episode counts must be positive");
    for (int t : horizons)
        if (t < 1) throw InputError("horizons must be positive");
    for (long t : totals)
        if (t < 1) throw InputError("transition totals must be positive");
    if (paired && episodes.size() != horizons.size())
        throw InputError("paired grids need equally many episode counts and horizons");
    if (trials < 1) throw InputError("trial count must be at least 1");
    if (!(gamma > 0.0 && gamma < 1.0)) throw InputError("gamma must lie in (0, 1)");
    if (!(alpha > 0.0 && alpha < 1.0)) throw InputError("alpha must lie in (0, 1)");
    if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw InputError("epsilon must lie in [0, 1]");
    if (radii != "formula" && radii != "fixed") throw InputError("radii must be 'formula' or 'fixed'");
    if (radii == "fixed" && fixed_rho.empty()) throw InputError("fixed radii need a radius list or radii file");
    if (!(rho_scale >= 0.0)) throw InputError("rho scale must be nonnegative");
    if (tune_grid < 1) throw InputError("tuning grid must have at least one step");
    if (behavior != "default" && behavior != "uniform" &&
        !(behavior.size() > 1 && behavior[0] == 'q' &&
          std::all_of(behavior.begin() + 1, behavior.end(), [](char c) { return c >= '0' && c <= '9'; })))
        throw InputError("behavior must be 'default', 'uniform' or q<k>");
}

ResultTable::ResultTable(std::string experiment, std::vector<std::string> columns)
    : experiment_(std::move(experiment)), columns_(std::move(columns)) {}

void ResultTable::add_row(std::vector<long long> key, std::vector<std::string> cells) {
    if (cells.size() != columns_.size()) throw InternalError("row does not match the table schema");
    rows_.push_back({std::move(key), std::move(cells)});
}

void ResultTable::sort() {
    std::stable_sort(rows_.begin(), rows_.end(), [](const Row& a, const Row& b) { return a.key < b.key; });
}

const std::string& ResultTable::cell(std::size_t i, const std::string& column) const {
    const auto it = std::find(columns_.begin(), columns_.end(), column);
    if (it == columns_.end()) throw InputError("no column '" + column + "'");
    return rows_.at(i).cells[static_cast<std::size_t>(it - columns_.begin())];
}

double ResultTable::number(std::size_t i, const std::string& column) const {
    const std::string& c = cell(i, column);
    if (c.empty()) return std::nan("");
    return parse_double(c);
}

void ResultTable::write_csv(std::ostream& out) const {
    for (std::size_t i = 0; i < columns_.size(); ++i) out << (i ? "," : "") << columns_[i];
    out << '\n';
    for (const auto& r : rows_) {
        for (std::size_t i = 0; i < r.cells.size(); ++i) out << (i ? "," : "") << r.cells[i];
        out << '\n';
    }
}

void write_results(const ResultTable& table, const ExperimentConfig& cfg, const std::filesystem::path& path) {
    {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw InputError("cannot write " + path.string());
        table.write_csv(out);
        if (!out) throw InputError("write failed for " + path.string());
    }
    std::filesystem::path side = path;
    side += ".json";
    std::ofstream out(side, std::ios::binary);
    if (!out) throw InputError("cannot write " + side.string());
    out << sidecar_json(table.experiment(), cfg, table.size()) << '\n';
}

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& body) {
    std::size_t workers = threads > 0 ? static_cast<std::size_t>(threads) : std::thread::hardware_concurrency();
    workers = std::max<std::size_t>(1, std::min(workers, n));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::size_t i = next++; i < n; i = next++) body(i);
            } catch (...) {
                errors[w] = std::current_exception();
                next = n;
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

Policy make_behavior(const ExperimentConfig& cfg, EnvId env, const FiniteMdp& mdp) {
    if (cfg.behavior == "default") return default_behavior(env, mdp, cfg.epsilon);
    if (cfg.behavior == "uniform") return Policy::uniform(mdp.n_states(), mdp.n_actions());
    return q_iteration_policy(mdp, static_cast<int>(parse_int(std::string_view(cfg.behavior).substr(1))), cfg.epsilon);
}

IterationOptions iteration_options(const ExperimentConfig& cfg) {
    IterationOptions o;
    o.value_bound = cfg.value_bound;
    o.bounds = cfg.project ? BoundHandling::kProject : BoundHandling::kCheck;
    o.missing = cfg.missing_bound ? MissingStateMode::kBound : MissingStateMode::kError;
    return o;
}

std::vector<std::pair<int, int>> grid_cells(const ExperimentConfig& cfg) {
    std::vector<std::pair<int, int>> out;
    if (cfg.paired) {
        for (std::size_t i = 0; i < cfg.episodes.size(); ++i) out.emplace_back(cfg.episodes[i], cfg.horizons[i]);
    } else {
        for (int j : cfg.episodes)
            for (int t : cfg.horizons) out.emplace_back(j, t);
    }
    return out;
}

Vector fixed_radius_vector(const ExperimentConfig& cfg, int n_states) {
    if (cfg.fixed_rho.size() == 1) return Vector::Constant(n_states, cfg.fixed_rho[0]);
    if (cfg.fixed_rho.size() != static_cast<std::size_t>(n_states))
        throw InputError("fixed radii need one value per state");
    return Eigen::Map<const Vector>(cfg.fixed_rho.data(), n_states);
}

namespace {

std::string fmt(double x) { return format_double(x); }
std::string fmt(long long x) { return std::to_string(x); }
std::string fmt_bool(bool b) { return b ? "1" : "0"; }

std::uint64_t cell_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t trial) {
    return derive_seed(derive_seed(derive_seed(seed, a), b), trial);
}

std::string error_status(const std::exception& e) {
    std::string msg = e.what();
    std::replace(msg.begin(), msg.end(), ',', ';');
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    return "error: " + msg;
}

std::string policy_string(const Policy& p) {
    std::string out;
    for (int s = 0; s < p.n_states(); ++s) {
        if (s) out += '-';
        out += p.deterministic() ? std::to_string(p.action(s)) : "?";
    }
    return out;
}

struct OpeTrial {
    int episodes = 0;
    int horizon = 0;
    int trial = 0;
    std::uint64_t seed = 0;
    long long transitions = 0;
    double lower = 0.0, upper = 0.0, plug_in = 0.0, correction = 0.0;
    ConfidenceInterval ci;
    double rho_mean = 0.0;
    bool projected = false;
    std::string status = "ok";
};

struct OpeSetup {
    EnvId env;
    FiniteMdp mdp;
    Policy behavior;
    Policy target;
    double true_value;
    double value_bound;
};

OpeSetup ope_setup(const ExperimentConfig& cfg) {
    cfg.validate();
    const EnvId env = parse_env(cfg.env);
    FiniteMdp mdp = make_env(env, cfg.gamma);
    Policy behavior = make_behavior(cfg, env, mdp);
    Policy target = optimal_policy(mdp).policy;
    const double r = exact_policy_value(mdp, target);
    const double m = cfg.value_bound > 0.0 ? cfg.value_bound : default_value_bound(mdp.rewards(), cfg.gamma);
    return {env, std::move(mdp), std::move(behavior), std::move(target), r, m};
}

OpeTrial run_ope_trial(const ExperimentConfig& cfg, const OpeSetup& setup, int episodes, int horizon, int trial) {
    OpeTrial out;
    out.episodes = episodes;
    out.horizon = horizon;
    out.trial = trial;
    out.seed = cell_seed(cfg.seed, static_cast<std::uint64_t>(episodes), static_cast<std::uint64_t>(horizon),
                         static_cast<std::uint64_t>(trial));
    try {
        const Dataset ds = simulate(setup.mdp, setup.behavior, episodes, horizon, out.seed, env_name(setup.env));
        out.transitions = static_cast<long long>(ds.total_transitions());
        const IterationOptions opts = iteration_options(cfg);
        EmpiricalConditional emp = build_empirical(ds, setup.mdp.n_states(), setup.mdp.n_actions(), opts.missing);
        const EvaluationProblem problem = make_problem(setup.mdp, setup.target, setup.behavior, std::move(emp));
        RadiusSchedule schedule = cfg.radii == "fixed"
                                      ? fixed_radii(fixed_radius_vector(cfg, setup.mdp.n_states()), problem.cost.diameter())
                                      : radius_for_ci(problem.emp, cfg.alpha, setup.value_bound,
                                                      problem.cost.diameter(), opts.missing);
        schedule.rho *= cfg.rho_scale;
        out.rho_mean = schedule.rho.mean();
        const RobustEstimate lo = robust_value_iteration(problem, schedule, opts);
        const RobustEstimate hi = optimistic_value_iteration(problem, schedule, opts);
        out.lower = lo.bound;
        out.upper = hi.bound;
        out.projected = lo.projected || hi.projected;
        if (problem.emp.uncovered_states().empty()) {
            out.plug_in = plug_in_value(problem.emp, problem.ratio, problem.target_rewards, problem.initial_dist,
                                        problem.discount);
            out.correction = correction_term(problem.emp, problem.ratio, problem.discount, problem.initial_dist);
        } else {
            out.plug_in = std::nan("");
            out.correction = 0.0;
            out.status = "ok: uncovered states bounded";
        }
        out.ci = confidence_interval(out.lower, out.upper, out.correction, cfg.alpha, cfg.corrected);
    } catch (const InputError& e) {
        out.status = error_status(e);
    } catch (const EstimatorError& e) {
        out.status = error_status(e);
    }
    return out;
}

std::vector<OpeTrial> run_ope_trials(const ExperimentConfig& cfg, const OpeSetup& setup) {
    const auto cells = grid_cells(cfg);
    const std::size_t n = cells.size() * static_cast<std::size_t>(cfg.trials);
    std::vector<OpeTrial> out(n);
    parallel_for(n, cfg.threads, [&](std::size_t i) {
        const auto& [j, t] = cells[i / static_cast<std::size_t>(cfg.trials)];
        out[i] = run_ope_trial(cfg, setup, j, t, static_cast<int>(i % static_cast<std::size_t>(cfg.trials)));
    });
    return out;
}

bool ok(const std::string& status) { return status.rfind("ok", 0) == 0; }

} // namespace

ResultTable run_ci_sweep(const ExperimentConfig& cfg) {
    const OpeSetup setup = ope_setup(cfg);
    ResultTable table("ci-sweep", {"env", "episodes", "horizon", "trial", "seed", "transitions", "true_value",
                                   "lower", "upper", "plug_in", "correction", "ci_lower", "ci_upper", "lower_norm",
                                   "upper_norm", "width", "covered", "rho_mean", "projected", "status"});
    for (const OpeTrial& t : run_ope_trials(cfg, setup)) {
        std::vector<std::string> row{env_name(setup.env), fmt(static_cast<long long>(t.episodes)),
                                     fmt(static_cast<long long>(t.horizon)), fmt(static_cast<long long>(t.trial)),
                                     std::to_string(t.seed), fmt(t.transitions), fmt(setup.true_value)};
        if (ok(t.status)) {
            for (double x : {t.lower, t.upper, t.plug_in, t.correction, t.ci.lower, t.ci.upper,
                             t.ci.lower / setup.true_value, t.ci.upper / setup.true_value, t.ci.width()})
                row.push_back(fmt(x));
            row.push_back(fmt_bool(t.ci.covers(setup.true_value)));
            row.push_back(fmt(t.rho_mean));
            row.push_back(fmt_bool(t.projected));
        } else {
            row.resize(row.size() + 12);
        }
        row.push_back(t.status);
        table.add_row({t.episodes, t.horizon, t.trial}, std::move(row));
    }
    table.sort();
    return table;
}

ResultTable run_coverage(const ExperimentConfig& cfg) {
    const OpeSetup setup = ope_setup(cfg);
    const auto trials = run_ope_trials(cfg, setup);
    ResultTable table("coverage", {"env", "episodes", "horizon", "trials", "valid", "covered", "coverage",
                                   "miss_rate", "mean_width", "corrected", "nominal_level", "true_value"});
    const auto cells = grid_cells(cfg);
    const auto per = static_cast<std::size_t>(cfg.trials);
    for (std::size_t c = 0; c < cells.size(); ++c) {
        long long valid = 0;
        long long covered = 0;
        double width = 0.0;
        for (std::size_t k = 0; k < per; ++k) {
            const OpeTrial& t = trials[c * per + k];
            if (!ok(t.status)) continue;
            ++valid;
            covered += t.ci.covers(setup.true_value) ? 1 : 0;
            width += t.ci.width();
        }
        const double cov = valid ? static_cast<double>(covered) / static_cast<double>(valid) : std::nan("");
        table.add_row({cells[c].first, cells[c].second},
                      {env_name(setup.env), fmt(static_cast<long long>(cells[c].first)),
                       fmt(static_cast<long long>(cells[c].second)), fmt(static_cast<long long>(cfg.trials)),
                       fmt(valid), fmt(covered), valid ? fmt(cov) : "", valid ? fmt(1.0 - cov) : "",
                       valid ? fmt(width / static_cast<double>(valid)) : "", fmt_bool(cfg.corrected),
                       fmt(1.0 - cfg.alpha), fmt(setup.true_value)});
    }
    table.sort();
    return table;
}

TunedRadius tune_adversarial_radius(const FiniteMdp& future_env, const FiniteMdp& data_env, const Policy& target,
                                    const Policy& behavior, const ExperimentConfig& cfg) {
    const double future = exact_policy_value(future_env, target);
    const EvaluationProblem problem =
        make_problem(future_env, target, behavior, population_conditional(data_env, behavior));
    const IterationOptions opts = iteration_options(cfg);
    const double diam = problem.cost.diameter();
    const int n = cfg.tune_grid;
    auto value_at = [&](int k) {
        const double rho = diam * k / n;
        return adversarial_estimate(problem, Vector::Constant(problem.emp.n_states(), rho), opts).bound;
    };
    const double tol = 1e-9 * std::max(1.0, std::abs(future));
    // Radius zero is plain plug-in evaluation, so the search starts at the first positive grid point.
    const double at_first = value_at(1);
    if (at_first <= future + tol) return {diam / n, 1, at_first, future};
    const double at_max = value_at(n);
    if (at_max > future + tol) {
        std::ostringstream os;
        os << "adversarial value " << at_max << " at rho = diam still exceeds the deployment value " << future;
        throw EstimatorError(os.str());
    }
    int lo = 1;  // fails
    int hi = n;  // achieves
    double hi_value = at_max;
    while (hi - lo > 1) {
        const int mid = lo + (hi - lo) / 2;
        const double v = value_at(mid);
        if (v <= future + tol) {
            hi = mid;
            hi_value = v;
        } else {
            lo = mid;
        }
    }
    return {diam * hi / n, hi, hi_value, future};
}

Vector adversarial_radii(const ExperimentConfig& cfg) {
    cfg.validate();
    const EnvId env = parse_env(cfg.env);
    const FiniteMdp future = make_env(env, cfg.gamma);
    if (!cfg.fixed_rho.empty()) return fixed_radius_vector(cfg, future.n_states());
    const FiniteMdp data = perturbed_variant(env, cfg.gamma);
    const Policy behavior = make_behavior(cfg, env, data);
    const Policy target = optimal_policy(future).policy;
    return Vector::Constant(future.n_states(), tune_adversarial_radius(future, data, target, behavior, cfg).rho);
}

ResultTable run_adversarial(const ExperimentConfig& cfg) {
    cfg.validate();
    if (cfg.totals.empty()) throw InputError("the adversarial study needs a nonempty totals grid");
    const EnvId env = parse_env(cfg.env);
    const FiniteMdp future = make_env(env, cfg.gamma);
    const FiniteMdp data = perturbed_variant(env, cfg.gamma);
    const Policy behavior = make_behavior(cfg, env, data);
    const Policy target = optimal_policy(future).policy;
    const Vector rho = adversarial_radii(cfg);
    const IterationOptions opts = iteration_options(cfg);
    const double future_value = exact_policy_value(future, target);
    const EvaluationProblem reference =
        make_problem(future, target, behavior, population_conditional(data, behavior));
    const double l_adv = adversarial_estimate(reference, rho, opts).bound;
    const int horizon = cfg.horizons.front();

    ResultTable table("adversarial", {"env", "total", "transitions", "trial", "seed", "rho_mean", "estimate",
                                      "adversarial_value", "ratio", "abs_error", "sigma2", "std_error",
                                      "ci_lower", "ci_upper", "covered", "future_value", "status"});
    const std::size_t per = static_cast<std::size_t>(cfg.trials);
    const std::size_t n = cfg.totals.size() * per;
    std::vector<std::vector<std::string>> rows(n);
    parallel_for(n, cfg.threads, [&](std::size_t i) {
        const long total = cfg.totals[i / per];
        const int trial = static_cast<int>(i % per);
        const std::uint64_t seed = cell_seed(cfg.seed, static_cast<std::uint64_t>(total),
                                             static_cast<std::uint64_t>(horizon), static_cast<std::uint64_t>(trial));
        const int episodes = static_cast<int>((total + horizon - 1) / horizon);
        std::vector<std::string> row{env_name(env), fmt(static_cast<long long>(total)), "",
                                     fmt(static_cast<long long>(trial)), std::to_string(seed), fmt(rho.mean())};
        try {
            const Dataset ds = simulate(data, behavior, episodes, horizon, seed, env_name(env));
            row[2] = fmt(static_cast<long long>(ds.total_transitions()));
            EmpiricalConditional emp = build_empirical(ds, data.n_states(), data.n_actions());
            const EvaluationProblem problem = make_problem(future, target, behavior, std::move(emp));
            const AdversarialEstimate est = adversarial_analysis(problem, rho, cfg.alpha, opts);
            const double se = std::sqrt(est.sigma2 / est.total);
            for (double x : {est.estimate.bound, l_adv, est.estimate.bound / l_adv, std::abs(est.estimate.bound - l_adv),
                             est.sigma2, se, est.ci.lower, est.ci.upper})
                row.push_back(fmt(x));
            row.push_back(fmt_bool(est.ci.covers(l_adv)));
            row.push_back(fmt(future_value));
            row.push_back("ok");
        } catch (const std::exception& e) {
            if (!dynamic_cast<const InputError*>(&e) && !dynamic_cast<const EstimatorError*>(&e)) throw;
            row.resize(table.columns().size() - 1);
            row.push_back(error_status(e));
        }
        rows[i] = std::move(row);
    });
    for (std::size_t i = 0; i < n; ++i)
        table.add_row({cfg.totals[i / per], static_cast<long long>(i % per)}, std::move(rows[i]));
    table.sort();
    return table;
}

ResultTable run_batch_compare(const ExperimentConfig& cfg) {
    cfg.validate();
    const EnvId env = parse_env(cfg.env);
    const FiniteMdp mdp = make_env(env, cfg.gamma);
    const Policy behavior = make_behavior(cfg, env, mdp);
    const double optimal = optimal_policy(mdp).value;
    const IterationOptions opts = iteration_options(cfg);
    const double m = cfg.value_bound > 0.0 ? cfg.value_bound : default_value_bound(mdp.rewards(), cfg.gamma);

    ResultTable table("batch-compare",
                      {"env", "episodes", "horizon", "trial", "seed", "optimal_value", "robust_value",
                       "robust_policy_value", "robust_gap", "correction", "bound_holds", "policy_bound_holds",
                       "saa_value", "saa_policy_value", "saa_gap", "robust_le_saa", "robust_policy", "saa_policy",
                       "precondition", "rho_mean", "status"});
    const auto cells = grid_cells(cfg);
    const std::size_t per = static_cast<std::size_t>(cfg.trials);
    const std::size_t n = cells.size() * per;
    std::vector<std::vector<std::string>> rows(n);
    parallel_for(n, cfg.threads, [&](std::size_t i) {
        const auto [j, t] = cells[i / per];
        const int trial = static_cast<int>(i % per);
        const std::uint64_t seed = cell_seed(cfg.seed, static_cast<std::uint64_t>(j), static_cast<std::uint64_t>(t),
                                             static_cast<std::uint64_t>(trial));
        std::vector<std::string> row{env_name(env), fmt(static_cast<long long>(j)), fmt(static_cast<long long>(t)),
                                     fmt(static_cast<long long>(trial)), std::to_string(seed), fmt(optimal)};
        try {
            const Dataset ds = simulate(mdp, behavior, j, t, seed, env_name(env));
            EmpiricalConditional emp = build_empirical(ds, mdp.n_states(), mdp.n_actions(), opts.missing);
            const BatchProblem problem = make_batch_problem(mdp, behavior, emp);
            RadiusSchedule schedule =
                cfg.radii == "fixed"
                    ? fixed_radii(fixed_radius_vector(cfg, mdp.n_states()), problem.cost.diameter())
                    : batch_radius(problem.emp, cfg.alpha, m, problem.cost.diameter(), mdp.n_actions(), opts.missing);
            schedule.rho *= cfg.rho_scale;
            const BatchResult robust = robust_policy_optimization(problem, schedule, opts);
            const double robust_policy_value = exact_policy_value(mdp, robust.policy);
            const double corr = problem.emp.uncovered_states().empty()
                                    ? correction_term(problem.emp, importance_ratios(robust.policy, behavior),
                                                      cfg.gamma, mdp.initial_dist())
                                    : 0.0;
            for (double x : {robust.value, robust_policy_value, relative_gap(optimal, robust_policy_value), corr})
                row.push_back(fmt(x));
            row.push_back(fmt_bool(optimal >= robust.value - corr));
            row.push_back(fmt_bool(robust_policy_value >= robust.value - corr));
            std::string status = "ok";
            std::string saa_policy;
            try {
                const BatchResult saa = saa_policy_optimization(problem, opts);
                const double saa_policy_value = exact_policy_value(mdp, saa.policy);
                row.push_back(fmt(saa.value));
                row.push_back(fmt(saa_policy_value));
                row.push_back(fmt(relative_gap(optimal, saa_policy_value)));
                row.push_back(fmt_bool(robust.value <= saa.value + 1e-9));
                saa_policy = policy_string(saa.policy);
            } catch (const EstimatorError& e) {
                row.resize(row.size() + 4);
                status = "ok: saa " + error_status(e);
            }
            row.push_back(policy_string(robust.policy));
            row.push_back(saa_policy);
            row.push_back(fmt_bool(robust.contraction.pass));
            row.push_back(fmt(schedule.rho.mean()));
            row.push_back(status);
        } catch (const std::exception& e) {
            if (!dynamic_cast<const InputError*>(&e) && !dynamic_cast<const EstimatorError*>(&e)) throw;
            row.resize(table.columns().size() - 1);
            row.push_back(error_status(e));
        }
        rows[i] = std::move(row);
    });
    for (std::size_t i = 0; i < n; ++i)
        table.add_row({cells[i / per].first, cells[i / per].second, static_cast<long long>(i % per)},
                      std::move(rows[i]));
    table.sort();
    return table;
}

} // namespace rope
