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

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>

namespace {

using namespace rope;

struct Flags {
    std::string env = "mrp";
    std::string behavior = "default";
    double epsilon = 0.3;
    double gamma = 0.95;
    double alpha = 0.05;
    std::vector<int> episodes{300};
    std::vector<int> horizons{300};
    std::vector<long> totals{};
    bool paired = false;
    int trials = 1;
    std::uint64_t seed = 7;
    std::string radii_file;
    std::vector<double> rho;
    double rho_scale = 1.0;
    bool corrected = true;
    double value_bound = 0.0;
    bool missing_bound = false;
    bool no_project = false;
    int tune_grid = 400;
    int threads = 0;
    std::string out;
    std::string config;
    std::string data;
    bool perturbed = false;
    bool study = false;
};

void add_common(CLI::App* cmd, Flags& f) {
    cmd->add_option("--env", f.env, "Environment: mrp or hmp")->capture_default_str();
    cmd->add_option("--behavior", f.behavior, "Behavior policy: default, uniform or q<k>")->capture_default_str();
    cmd->add_option("--epsilon", f.epsilon, "Epsilon-greedy softening for q<k> behavior")->capture_default_str();
    cmd->add_option("--gamma", f.gamma, "Discount factor")->capture_default_str();
    cmd->add_option("--alpha", f.alpha, "Nominal error level")->capture_default_str();
    cmd->add_option("--episodes", f.episodes, "Number of trajectories J (grid)")->capture_default_str();
    cmd->add_option("--horizon", f.horizons, "Trajectory length T (grid)")->capture_default_str();
    cmd->add_option("--seed", f.seed, "Master seed")->capture_default_str();
    cmd->add_option("--value-bound", f.value_bound, "Value bound M (default 2 r_max / (1 - gamma))");
    cmd->add_flag("--missing-state-bound", f.missing_bound, "Pin uncovered states instead of failing");
    cmd->add_flag("--no-project", f.no_project, "Do not project iterates onto |v| <= M; warn instead");
    cmd->add_option("--threads", f.threads, "Worker threads (0 = all cores)");
    cmd->add_option("--out", f.out, "Output file (stdout when omitted for JSON records)");
    cmd->add_option("--config", f.config, "JSON config file; its keys override flags");
}

void add_radii(CLI::App* cmd, Flags& f) {
    cmd->add_option("--radii-file", f.radii_file, "Per-state radii JSON {state: rho}");
    cmd->add_option("--rho", f.rho, "Fixed radius (one value, or one per state)");
    cmd->add_option("--rho-scale", f.rho_scale, "Multiplier on formula radii")->capture_default_str();
}

ExperimentConfig to_config(const Flags& f) {
    ExperimentConfig cfg;
    cfg.env = f.env;
    cfg.behavior = f.behavior;
    cfg.epsilon = f.epsilon;
    cfg.gamma = f.gamma;
    cfg.alpha = f.alpha;
    cfg.episodes = f.episodes;
    cfg.horizons = f.horizons;
    cfg.totals = f.totals;
    cfg.paired = f.paired;
    cfg.trials = f.trials;
    cfg.seed = f.seed;
    cfg.rho_scale = f.rho_scale;
    cfg.corrected = f.corrected;
    cfg.value_bound = f.value_bound;
    cfg.missing_bound = f.missing_bound;
    cfg.project = !f.no_project;
    cfg.tune_grid = f.tune_grid;
    cfg.threads = f.threads;
    if (!f.rho.empty()) {
        cfg.radii = "fixed";
        cfg.fixed_rho = f.rho;
    }
    if (!f.radii_file.empty()) {
        const int ns = make_env(parse_env(f.env), f.gamma).n_states();
        const Vector r = load_radii(f.radii_file, ns);
        cfg.radii = "fixed";
        cfg.fixed_rho.assign(r.data(), r.data() + r.size());
    }
    if (!f.config.empty()) cfg = load_config(f.config, cfg);
    cfg.validate();
    return cfg;
}

void emit(const std::string& text, const std::string& out) {
    if (out.empty()) {
        std::cout << text << '\n';
        return;
    }
    std::ofstream file(out, std::ios::binary);
    if (!file) throw InputError("cannot write " + out);
    file << text << '\n';
}

void emit_table(const ResultTable& table, const ExperimentConfig& cfg, const std::string& out) {
    if (out.empty()) {
        table.write_csv(std::cout);
        return;
    }
    write_results(table, cfg, out);
}

Dataset obtain_data(const Flags& f, const ExperimentConfig& cfg, const FiniteMdp& mdp, const Policy& behavior) {
    if (!f.data.empty()) {
        Dataset ds = load_dataset(f.data);
        if (ds.meta.n_states != mdp.n_states() || ds.meta.n_actions != mdp.n_actions())
            throw InputError("dataset dimensions do not match environment " + cfg.env);
        return ds;
    }
    return simulate(mdp, behavior, cfg.episodes.front(), cfg.horizons.front(), cfg.seed, cfg.env);
}

int cmd_gen_data(const Flags& f) {
    const ExperimentConfig cfg = to_config(f);
    const EnvId env = parse_env(cfg.env);
    const FiniteMdp mdp = f.perturbed ? perturbed_variant(env, cfg.gamma) : make_env(env, cfg.gamma);
    const Policy behavior = make_behavior(cfg, env, mdp);
    const Dataset ds = simulate(mdp, behavior, cfg.episodes.front(), cfg.horizons.front(), cfg.seed,
                                f.perturbed ? cfg.env + "-perturbed" : cfg.env);
    if (f.out.empty()) {
        write_dataset(std::cout, ds);
    } else {
        save_dataset(ds, f.out);
    }
    return 0;
}

int cmd_ope(const Flags& f) {
    const ExperimentConfig cfg = to_config(f);
    const EnvId env = parse_env(cfg.env);
    const FiniteMdp mdp = make_env(env, cfg.gamma);
    const Policy behavior = make_behavior(cfg, env, mdp);
    const Policy target = optimal_policy(mdp).policy;
    const IterationOptions opts = iteration_options(cfg);
    const Dataset ds = obtain_data(f, cfg, mdp, behavior);
    const EvaluationProblem problem = make_problem(
        mdp, target, behavior, build_empirical(ds, mdp.n_states(), mdp.n_actions(), opts.missing));
    const double m = cfg.value_bound > 0.0 ? cfg.value_bound : default_value_bound(mdp.rewards(), cfg.gamma);
    RadiusSchedule schedule =
        cfg.radii == "fixed"
            ? fixed_radii(fixed_radius_vector(cfg, mdp.n_states()), problem.cost.diameter())
            : radius_for_ci(problem.emp, cfg.alpha, m, problem.cost.diameter(), opts.missing);
    schedule.rho *= cfg.rho_scale;

    OpeRecord rec{cfg.env, robust_value_iteration(problem, schedule, opts),
                  optimistic_value_iteration(problem, schedule, opts), std::nullopt,
                  exact_policy_value(mdp, target), {}, schedule};
    double corr = 0.0;
    if (problem.emp.uncovered_states().empty()) {
        rec.plug_in = plug_in_value(problem.emp, problem.ratio, problem.target_rewards, problem.initial_dist,
                                    problem.discount);
        corr = correction_term(problem.emp, problem.ratio, problem.discount, problem.initial_dist);
    }
    rec.ci = confidence_interval(rec.lower.bound, rec.upper.bound, corr, cfg.alpha, cfg.corrected);
    emit(to_json(rec), f.out);
    return 0;
}

int cmd_adversarial(const Flags& f) {
    ExperimentConfig cfg = to_config(f);
    if (f.study) {
        emit_table(run_adversarial(cfg), cfg, f.out);
        return 0;
    }
    const EnvId env = parse_env(cfg.env);
    const FiniteMdp future = make_env(env, cfg.gamma);
    const FiniteMdp data = perturbed_variant(env, cfg.gamma);
    const Policy behavior = make_behavior(cfg, env, data);
    const Policy target = optimal_policy(future).policy;
    const IterationOptions opts = iteration_options(cfg);
    const Vector rho = adversarial_radii(cfg);
    const Dataset ds = obtain_data(f, cfg, data, behavior);
    const EvaluationProblem problem =
        make_problem(future, target, behavior, build_empirical(ds, data.n_states(), data.n_actions()));
    const EvaluationProblem reference =
        make_problem(future, target, behavior, population_conditional(data, behavior));
    AdversarialRecord rec{cfg.env, adversarial_analysis(problem, rho, cfg.alpha, opts), rho,
                          adversarial_estimate(reference, rho, opts).bound};
    emit(to_json(rec), f.out);
    return 0;
}

int cmd_batch(const Flags& f) {
    const ExperimentConfig cfg = to_config(f);
    if (f.study) {
        emit_table(run_batch_compare(cfg), cfg, f.out);
        return 0;
    }
    const EnvId env = parse_env(cfg.env);
    const FiniteMdp mdp = make_env(env, cfg.gamma);
    const Policy behavior = make_behavior(cfg, env, mdp);
    const IterationOptions opts = iteration_options(cfg);
    const Dataset ds = obtain_data(f, cfg, mdp, behavior);
    const BatchProblem problem =
        make_batch_problem(mdp, behavior, build_empirical(ds, mdp.n_states(), mdp.n_actions(), opts.missing));
    const double m = cfg.value_bound > 0.0 ? cfg.value_bound : default_value_bound(mdp.rewards(), cfg.gamma);
    RadiusSchedule schedule =
        cfg.radii == "fixed"
            ? fixed_radii(fixed_radius_vector(cfg, mdp.n_states()), problem.cost.diameter())
            : batch_radius(problem.emp, cfg.alpha, m, problem.cost.diameter(), mdp.n_actions(), opts.missing);
    schedule.rho *= cfg.rho_scale;
    BatchRecord rec{cfg.env, robust_policy_optimization(problem, schedule, opts), std::nullopt, schedule,
                    optimal_policy(mdp).value, 0.0, std::nullopt, 0.0};
    rec.robust_policy_value = exact_policy_value(mdp, rec.robust.policy);
    if (problem.emp.uncovered_states().empty())
        rec.correction = correction_term(problem.emp, importance_ratios(rec.robust.policy, behavior), cfg.gamma,
                                         mdp.initial_dist());
    try {
        rec.saa = saa_policy_optimization(problem, opts);
        rec.saa_policy_value = exact_policy_value(mdp, rec.saa->policy);
    } catch (const EstimatorError& e) {
        std::cerr << "warning: plug-in optimization failed: " << e.what() << '\n';
    }
    emit(to_json(rec), f.out);
    return 0;
}

int cmd_tune(const Flags& f) {
    const ExperimentConfig cfg = to_config(f);
    const EnvId env = parse_env(cfg.env);
    const FiniteMdp future = make_env(env, cfg.gamma);
    const FiniteMdp data = perturbed_variant(env, cfg.gamma);
    const Policy behavior = make_behavior(cfg, env, data);
    const Policy target = optimal_policy(future).policy;
    const TunedRadius t = tune_adversarial_radius(future, data, target, behavior, cfg);
    std::cerr << "tuned rho " << t.rho << " (grid index " << t.grid_index << "): L_adv " << t.adversarial_value
              << " <= R_pi " << t.future_value << '\n';
    const Vector rho = Vector::Constant(future.n_states(), t.rho);
    if (f.out.empty()) {
        for (Eigen::Index s = 0; s < rho.size(); ++s) std::cout << s << ' ' << format_double(rho(s)) << '\n';
    } else {
        save_radii(f.out, rho);
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Distributionally robust off-policy evaluation and batch policy optimization"};
    app.require_subcommand(1);
    app.set_version_flag("--version", rope::kVersion);
    Flags f;

    auto* gen = app.add_subcommand("gen-data", "Simulate logged trajectories under the behavior policy");
    add_common(gen, f);
    gen->add_flag("--perturbed", f.perturbed, "Simulate the perturbed data-collection environment");

    auto* ope = app.add_subcommand("ope", "Robust and optimistic bounds with a confidence interval");
    add_common(ope, f);
    add_radii(ope, f);
    ope->add_option("--data", f.data, "Dataset file (simulated from --episodes/--horizon/--seed otherwise)");
    ope->add_flag("--corrected,!--uncorrected", f.corrected, "Widen the interval by the correction term");

    auto* adv = app.add_subcommand("adversarial", "Adversarial value with asymptotic error bars");
    add_common(adv, f);
    add_radii(adv, f);
    adv->add_option("--data", f.data, "Dataset file from the perturbed environment");
    adv->add_option("--totals", f.totals, "Total transition counts for --study");
    adv->add_option("--trials", f.trials, "Datasets per grid cell for --study");
    adv->add_option("--tune-grid", f.tune_grid, "Grid steps on [0, diam] for radius tuning");
    adv->add_flag("--study", f.study, "Run the replication study and write a result table");

    auto* batch = app.add_subcommand("batch-opt", "Robust batch policy optimization against the plug-in baseline");
    add_common(batch, f);
    add_radii(batch, f);
    batch->add_option("--data", f.data, "Dataset file");
    batch->add_option("--trials", f.trials, "Datasets per grid cell for --study");
    batch->add_flag("--paired", f.paired, "Zip the episode and horizon grids");
    batch->add_flag("--study", f.study, "Run the comparison study and write a result table");

    auto* cov = app.add_subcommand("coverage", "Empirical coverage of the confidence interval");
    add_common(cov, f);
    add_radii(cov, f);
    cov->add_option("--trials", f.trials, "Datasets per grid cell");
    cov->add_flag("--paired", f.paired, "Zip the episode and horizon grids");
    cov->add_flag("--corrected,!--uncorrected", f.corrected, "Widen the interval by the correction term");

    auto* sweep = app.add_subcommand("ci-sweep", "Normalized bounds across episode and horizon grids");
    add_common(sweep, f);
    add_radii(sweep, f);
    sweep->add_option("--trials", f.trials, "Datasets per grid cell");
    sweep->add_flag("--paired", f.paired, "Zip the episode and horizon grids");
    sweep->add_flag("--corrected,!--uncorrected", f.corrected, "Widen the interval by the correction term");

    auto* tune = app.add_subcommand("tune-rho", "Tune a uniform adversarial radius by bisection");
    add_common(tune, f);
    tune->add_option("--tune-grid", f.tune_grid, "Grid steps on [0, diam]");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*gen) return cmd_gen_data(f);
        if (*ope) return cmd_ope(f);
        if (*adv) return cmd_adversarial(f);
        if (*batch) return cmd_batch(f);
        if (*tune) return cmd_tune(f);
        const ExperimentConfig cfg = to_config(f);
        if (*cov) emit_table(run_coverage(cfg), cfg, f.out);
        if (*sweep) emit_table(run_ci_sweep(cfg), cfg, f.out);
        return 0;
    } catch (const rope::InputError& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return 2;
    } catch (const rope::EstimatorError& e) {
        std::cerr << "estimator failure: " << e.what() << '\n';
        for (const auto& line : e.diagnostics()) std::cerr << "  " << line << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 1;
    }
}
