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

// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include "oracles.hpp"

#include "rope/adversarial.hpp"
#include "rope/batch_rl.hpp"
#include "rope/environments.hpp"
#include "rope/experiments.hpp"
#include "rope/stats.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>

namespace rope {
namespace {

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void check(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << "[fail] " << what << "; ";
        }
    }
    template <class T>
    Outcome& note(const std::string& key, const T& value) {
        detail << key << "=" << value << "; ";
        return *this;
    }
};

std::string g_cli;

struct EnvCase {
    EnvId id;
    FiniteMdp mdp;
    Policy behavior;
    Policy target;
};

EnvCase env_case(EnvId id) {
    FiniteMdp mdp = make_env(id);
    Policy behavior = default_behavior(id, mdp);
    Policy target = optimal_policy(mdp).policy;
    return {id, std::move(mdp), std::move(behavior), std::move(target)};
}

// 1. Zero radius reduces to the plug-in estimator.
void zero_radius(Outcome& out) {
    for (EnvId id : {EnvId::kMachineReplacement, EnvId::kHealthcare}) {
        const EnvCase c = env_case(id);
        const std::string tag = env_name(id);
        const double truth = exact_policy_value(c.mdp, c.target);
        const auto pop = make_problem(c.mdp, c.target, c.behavior, population_conditional(c.mdp, c.behavior));
        const auto zero = uniform_radii(c.mdp.n_states(), 0.0, pop.cost.diameter());
        const double lo = robust_value_iteration(pop, zero).bound;
        const double hi = optimistic_value_iteration(pop, zero).bound;
        const double plug = plug_in_value(pop.emp, pop.ratio, pop.target_rewards, pop.initial_dist, pop.discount);
        const double err = std::max({std::abs(lo - truth), std::abs(hi - truth), std::abs(plug - truth)});
        out.note(tag + "_population_max_err", err);
        out.check(err <= 1e-8, tag + " population L/U/plug-in differ from R_pi");

        const Dataset ds = simulate(c.mdp, c.behavior, 300, 300, 7, tag);
        const auto data = make_problem(c.mdp, c.target, c.behavior,
                                       build_empirical(ds, c.mdp.n_states(), c.mdp.n_actions()));
        const double m = default_value_bound(c.mdp.rewards(), c.mdp.discount());
        const auto sch = radius_for_ci(data.emp, 0.05, m, data.cost.diameter());
        const double l = robust_value_iteration(data, sch).bound;
        const double u = optimistic_value_iteration(data, sch).bound;
        const double p = plug_in_value(data.emp, data.ratio, data.target_rewards, data.initial_dist, data.discount);
        out.note(tag + "_seed7_L", l).note(tag + "_seed7_plugin", p).note(tag + "_seed7_U", u);
        out.check(l <= p + 1e-8 && p <= u + 1e-8, tag + " seed-7 ordering L <= plug-in <= U");
    }
}

// 2. Inner solver against the dense dual grid.
void dual_exactness(Outcome& out) {
    Rng rng(2);
    double worst_value = 0.0;
    double worst_primal = 0.0;
    double worst_budget = -kInf;
    for (int rep = 0; rep < 500; ++rep) {
        const testing::InnerInstance in = testing::random_inner_instance(rng, rep % 2 == 1);
        const double rob = robust_inner(in.f, in.atoms, in.rho, in.cost).value;
        const double opt = optimistic_inner(in.f, in.atoms, in.rho, in.cost).value;
        const double rob_oracle = testing::grid_dual_oracle(in, 1.0);
        const double opt_oracle = -testing::grid_dual_oracle(in, -1.0);
        worst_value = std::max({worst_value, std::abs(rob - rob_oracle) / (1.0 + std::abs(rob_oracle)),
                                std::abs(opt - opt_oracle) / (1.0 + std::abs(opt_oracle))});
        const WorstCase wc = worst_case_distribution(in.f, in.atoms, in.rho, in.cost);
        double primal = 0.0;
        for (int z = 0; z < in.cost.n_points(); ++z) primal += wc.mu(z) * in.f[static_cast<std::size_t>(z)];
        worst_primal = std::max(worst_primal, std::abs(primal - rob));
        worst_budget = std::max(worst_budget, wc.plan_cost - in.rho);
    }
    out.note("max_rel_value_err", worst_value).note("max_primal_gap", worst_primal).note("max_budget_excess",
                                                                                           worst_budget);
    out.check(worst_value <= 1e-4, "inner value differs from grid oracle");
    out.check(worst_primal <= 1e-8, "worst-case distribution misses the dual value");
    out.check(worst_budget <= 1e-10, "worst-case plan exceeds the radius");
}

// 3. Regularizer bound and its small-radius equality.
void regularizer(Outcome& out) {
    Rng rng(3);
    double worst_excess = -kInf;
    double worst_eq = 0.0;
    int eq_checks = 0;
    for (int rep = 0; rep < 200; ++rep) {
        const testing::InnerInstance in = testing::random_inner_instance(rng, rep % 2 == 1);
        const double lip = std::max(0.0, lipschitz_norm(in.f, in.atoms, in.cost));
        const double diam = in.cost.diameter();
        auto gap = [&](double rho) { return rho * lip - regularizer_value(in.f, in.atoms, rho, in.cost); };
        // Equality region [0, rho_bar] located by bisection.
        double lo = 0.0;
        double hi = 2.0 * diam;
        if (gap(hi) <= 1e-12 * (1.0 + hi * lip)) {
            lo = hi;
        } else {
            for (int it = 0; it < 100; ++it) {
                const double mid = 0.5 * (lo + hi);
                (gap(mid) <= 1e-12 * (1.0 + mid * lip) ? lo : hi) = mid;
            }
        }
        const double rho_bar = lo;
        for (int k = 1; k <= 20; ++k) {
            const double rho = 2.0 * diam * k / 20.0;
            worst_excess = std::max(worst_excess, -gap(rho));
            if (k <= 2 && rho <= rho_bar) {
                ++eq_checks;
                worst_eq = std::max(worst_eq, std::abs(gap(rho)));
            }
        }
    }
    out.note("max_excess", worst_excess).note("equality_checks", eq_checks).note("max_equality_err", worst_eq);
    out.check(worst_excess <= 1e-10, "regularizer exceeds rho * Lipschitz norm");
    out.check(worst_eq <= 1e-8, "equality fails below the threshold");
}

// 4. Contraction with formula radii on MRP at J = T = 300.
void contraction(Outcome& out) {
    const EnvCase c = env_case(EnvId::kMachineReplacement);
    const Dataset ds = simulate(c.mdp, c.behavior, 300, 300, 7, "mrp");
    const auto p = make_problem(c.mdp, c.target, c.behavior, build_empirical(ds, 10, 2));
    const double m = default_value_bound(c.mdp.rewards(), c.mdp.discount());
    const auto sch = radius_for_ci(p.emp, 0.05, m, p.cost.diameter());
    const auto rep = contraction_diagnostics(p.ratio, p.emp, sch, p.discount, p.cost);
    int passing = 0;
    double min_margin = kInf;
    double max_lip = 0.0;
    for (const auto& s : rep.states) {
        passing += s.pass ? 1 : 0;
        min_margin = std::min(min_margin, s.margin);
        max_lip = std::max(max_lip, s.lipschitz);
    }
    out.note("states_passing", std::to_string(passing) + "/10").note("min_margin", min_margin);
    out.note("max_lipschitz", max_lip).note("rho_range", std::to_string(sch.rho.minCoeff()) + ".." +
                                                              std::to_string(sch.rho.maxCoeff()));
    out.check(rep.pass, "contraction condition fails at some state");

    Rng rng(4);
    const double factor = (1.0 + p.discount) / 2.0;
    double worst = 0.0;
    int violations = 0;
    for (int k = 0; k < 1000; ++k) {
        Vector v1(10), v2(10);
        for (int s = 0; s < 10; ++s) {
            v1(s) = testing::uniform(rng, 0.0, m);
            v2(s) = testing::uniform(rng, 0.0, m);
        }
        const Vector t1 = bellman_operator(p, sch, v1, Direction::kRobust);
        const Vector t2 = bellman_operator(p, sch, v2, Direction::kRobust);
        const double lhs = (t1 - t2).cwiseAbs().maxCoeff();
        const double rhs = (v1 - v2).cwiseAbs().maxCoeff();
        worst = std::max(worst, lhs / rhs);
        if (lhs > factor * rhs + 1e-9) ++violations;
    }
    out.note("max_empirical_modulus", worst).note("required_modulus", factor).note("pair_violations", violations);
    out.check(violations == 0, "operator modulus exceeds (1+gamma)/2");
}

// 5. Coverage of the corrected interval on MRP.
void coverage(Outcome& out) {
    ExperimentConfig cfg;
    cfg.env = "mrp";
    cfg.trials = 200;
    const ResultTable t = run_coverage(cfg);
    const double cov = t.number(0, "coverage");
    out.note("trials", t.cell(0, "trials")).note("valid", t.cell(0, "valid")).note("coverage", cov);
    out.note("mean_width", t.number(0, "mean_width"));
    out.check(t.cell(0, "valid") == "200", "some trials failed");
    out.check(cov >= 0.88, "coverage below 0.88");
}

// 6. Interval width shrinks with more trajectories.
void width_shrinkage(Outcome& out) {
    for (const char* env : {"mrp", "hmp"}) {
        ExperimentConfig cfg;
        cfg.env = env;
        cfg.episodes = {100, 500};
        cfg.horizons = {300};
        cfg.trials = 5;
        const ResultTable t = run_ci_sweep(cfg);
        double w100 = 0.0, w500 = 0.0;
        int n100 = 0, n500 = 0;
        for (std::size_t i = 0; i < t.size(); ++i) {
            if (t.cell(i, "status").rfind("ok", 0) != 0) continue;
            const double w = t.number(i, "width");
            if (t.cell(i, "episodes") == "100") {
                w100 += w;
                ++n100;
            } else {
                w500 += w;
                ++n500;
            }
        }
        out.check(n100 == 5 && n500 == 5, std::string(env) + " some trials failed");
        w100 /= std::max(1, n100);
        w500 /= std::max(1, n500);
        out.note(std::string(env) + "_width_J100", w100).note(std::string(env) + "_width_J500", w500);
        out.check(w500 < w100, std::string(env) + " width does not shrink");
    }
}

// 7. Adversarial estimator consistency and asymptotic interval.
void adversarial(Outcome& out) {
    ExperimentConfig cfg;
    cfg.env = "mrp";
    cfg.horizons = {50};
    const Vector rho = adversarial_radii(cfg);
    cfg.fixed_rho = {rho(0)};
    out.note("tuned_rho", rho(0));

    cfg.totals = {1000, 20000};
    cfg.trials = 5;
    const ResultTable a = run_adversarial(cfg);
    double err_small = 0.0, err_large = 0.0;
    int ok = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a.cell(i, "status") != "ok") continue;
        ++ok;
        (a.cell(i, "total") == "1000" ? err_small : err_large) += a.number(i, "abs_error") / 5.0;
    }
    out.check(ok == 10, "some consistency trials failed");
    out.note("reference", a.number(0, "adversarial_value"));
    out.note("mean_abs_err_T1000", err_small).note("mean_abs_err_T20000", err_large);
    out.check(err_large < err_small, "error at T=20000 not below T=1000");

    cfg.totals = {5000};
    cfg.trials = 100;
    const ResultTable b = run_adversarial(cfg);
    std::vector<double> est, se;
    int covered = 0;
    for (std::size_t i = 0; i < b.size(); ++i) {
        if (b.cell(i, "status") != "ok") continue;
        est.push_back(b.number(i, "estimate"));
        se.push_back(b.number(i, "std_error"));
        covered += b.cell(i, "covered") == "1" ? 1 : 0;
    }
    out.check(est.size() == 100, "some interval trials failed");
    const double rate = est.empty() ? 0.0 : static_cast<double>(covered) / static_cast<double>(est.size());
    const double mc = est.size() > 1 ? sample_stddev(est) : 0.0;
    const double predicted = se.empty() ? 0.0 : mean(se);
    out.note("coverage_T5000", rate).note("mc_stddev", mc).note("mean_predicted_se", predicted);
    out.check(rate >= 0.85, "asymptotic interval coverage below 0.85");
    out.check(mc > 0.0 && std::abs(predicted / mc - 1.0) <= 0.3, "predicted standard error off by more than 30%");
}

// 8. Robust batch policy optimization on HMP.
// Plug-in optimality iterates from v = 0 without projection. Rewards are nonnegative, so the
// sequence is nondecreasing; growth past `limit` means the plug-in optimum is unbounded.
bool plug_in_diverges(const ExperimentConfig& cfg, const FiniteMdp& mdp, int episodes, int horizon,
                      std::uint64_t seed, double limit) {
    const Policy behavior = make_behavior(cfg, EnvId::kHealthcare, mdp);
    const Dataset ds = simulate(mdp, behavior, episodes, horizon, seed, "hmp");
    const BatchProblem problem =
        make_batch_problem(mdp, behavior, build_empirical(ds, mdp.n_states(), mdp.n_actions()));
    RadiusSchedule zero;
    zero.rho = Vector::Zero(mdp.n_states());
    IterationOptions opts;
    opts.bounds = BoundHandling::kCheck;
    Vector v = Vector::Zero(mdp.n_states());
    for (int k = 0; k < 20000 && v.maxCoeff() <= limit; ++k) v = robust_policy_operator(problem, zero, v, opts);
    return v.maxCoeff() > limit;
}

void batch(Outcome& out) {
    ExperimentConfig cfg;
    cfg.env = "hmp";
    cfg.episodes = {50, 300};
    cfg.horizons = {50, 300};
    cfg.paired = true;
    cfg.trials = 20;
    const ResultTable t = run_batch_compare(cfg);
    const FiniteMdp mdp = make_env(EnvId::kHealthcare, cfg.gamma);
    const double bound = default_value_bound(mdp.rewards(), cfg.gamma);
    double gap50 = 0.0, gap300 = 0.0;
    int n50 = 0, n300 = 0, holds = 0, ordered = 0, compared = 0, unbounded = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        const std::string& status = t.cell(i, "status");
        if (status.rfind("ok", 0) != 0) {
            out.check(false, "row failed: " + status);
            continue;
        }
        const bool big = t.cell(i, "episodes") == "300";
        (big ? gap300 : gap50) += t.number(i, "robust_gap");
        ++(big ? n300 : n50);
        if (!big) continue;
        holds += t.cell(i, "policy_bound_holds") == "1" ? 1 : 0;
        if (!t.cell(i, "robust_le_saa").empty()) {
            ++compared;
            ordered += t.cell(i, "robust_le_saa") == "1" ? 1 : 0;
        } else if (plug_in_diverges(cfg, mdp, 300, 300, std::stoull(t.cell(i, "seed")), 1e6 * bound)) {
            ++unbounded;
        }
    }
    gap50 /= std::max(1, n50);
    gap300 /= std::max(1, n300);
    const double rate = n300 ? static_cast<double>(holds) / n300 : 0.0;
    out.note("bound_rate_J300", rate).note("mean_gap_J50", gap50).note("mean_gap_J300", gap300);
    out.note("saa_compared", std::to_string(compared) + "/" + std::to_string(n300)).note("robust_le_saa", ordered);
    out.note("saa_unbounded", unbounded);
    out.check(rate >= 0.9, "lower bound holds in fewer than 90% of trials");
    out.check(gap300 <= gap50, "gap does not improve with data");
    // An unbounded plug-in optimum sits above any finite robust value.
    out.check(ordered == compared && compared + unbounded == n300,
              "robust value exceeds or cannot be compared with plug-in value");
}

// 9. Stationarity of exact marginal weights.
void stationarity(Outcome& out) {
    double worst = 0.0;
    Rng rng(9);
    for (EnvId id : {EnvId::kMachineReplacement, EnvId::kHealthcare}) {
        const EnvCase c = env_case(id);
        const int ns = c.mdp.n_states();
        const int na = c.mdp.n_actions();
        std::vector<std::pair<Policy, Policy>> pairs{{c.target, c.behavior},
                                                     {Policy::uniform(ns, na), c.behavior},
                                                     {c.behavior, c.behavior},
                                                     {q_iteration_policy(c.mdp, 5, 0.3), Policy::uniform(ns, na)}};
        for (int k = 0; k < 6; ++k)
            pairs.emplace_back(testing::random_policy(rng, ns, na), testing::random_policy(rng, ns, na));
        for (const auto& [pi, pb] : pairs) worst = std::max(worst, stationarity_residual(c.mdp, pi, pb));
    }
    out.note("pairs", 20).note("max_residual", worst);
    out.check(worst <= 1e-10, "stationarity residual above 1e-10");
}

// 10. Byte-identical CLI output for repeated runs.
std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void determinism(Outcome& out) {
    if (g_cli.empty()) {
        out.check(false, "no --cli given");
        return;
    }
    const auto dir = std::filesystem::temp_directory_path() / "rope_acceptance_determinism";
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    const std::vector<std::pair<std::string, std::string>> runs{
        {"gen-data", "gen-data --env hmp --episodes 5 --horizon 50 --seed 11"},
        {"ope", "ope --env mrp --episodes 30 --horizon 100"},
        {"ci-sweep", "ci-sweep --env mrp --episodes 20 40 --horizon 100 --trials 3"},
        {"coverage", "coverage --env hmp --episodes 30 --horizon 100 --trials 4"},
        {"adversarial", "adversarial --study --totals 1000 2000 --horizon 100 --trials 2 --tune-grid 40"},
        {"batch-opt", "batch-opt --study --env hmp --episodes 100 --horizon 100 --trials 2 --missing-state-bound"},
        {"tune-rho", "tune-rho --env mrp --tune-grid 40"},
    };
    int identical = 0;
    for (const auto& [name, args] : runs) {
        std::string files[2];
        for (int k = 0; k < 2; ++k) {
            const auto path = dir / (name + "_" + std::to_string(k) + ".out");
            const std::string cmd = "\"" + g_cli + "\" " + args + " --out \"" + path.string() + "\" > /dev/null 2>&1";
            const int rc = std::system(cmd.c_str());
            if (rc != 0) out.check(false, name + " exited with " + std::to_string(rc));
            files[k] = slurp(path);
            auto side = path;
            side += ".json";
            if (std::filesystem::exists(side)) files[k] += slurp(side);
        }
        if (!files[0].empty() && files[0] == files[1]) ++identical;
        else out.check(false, name + " outputs differ or are empty");
    }
    out.note("identical", std::to_string(identical) + "/" + std::to_string(runs.size()));
    std::filesystem::remove_all(dir);
}

} // namespace
} // namespace rope

int main(int argc, char** argv) {
    CLI::App app{"Acceptance checks"};
    std::set<int> only;
    app.add_option("--cli", rope::g_cli, "Path to the rope command-line tool");
    app.add_option("--only", only, "Run only these criteria");
    CLI11_PARSE(app, argc, argv);

    const std::vector<std::pair<std::string, std::function<void(rope::Outcome&)>>> criteria{
        {"zero-radius reduction", rope::zero_radius},
        {"dual exactness", rope::dual_exactness},
        {"regularizer bound", rope::regularizer},
        {"contraction", rope::contraction},
        {"coverage", rope::coverage},
        {"width shrinkage", rope::width_shrinkage},
        {"adversarial consistency", rope::adversarial},
        {"batch policy optimization", rope::batch},
        {"stationarity", rope::stationarity},
        {"determinism", rope::determinism},
    };
    bool all = true;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int id = static_cast<int>(i) + 1;
        if (!only.empty() && !only.count(id)) continue;
        rope::Outcome out;
        const auto start = std::chrono::steady_clock::now();
        try {
            criteria[i].second(out);
        } catch (const std::exception& e) {
            out.check(false, std::string("exception: ") + e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        all = all && out.pass;
        std::printf("%s criterion %d: %s (%.2fs) %s\n", out.pass ? "PASS" : "FAIL", id, criteria[i].first.c_str(),
                    secs, out.detail.str().c_str());
        std::fflush(stdout);
    }
    return all ? 0 : 1;
}
