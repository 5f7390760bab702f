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

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

namespace rope {
namespace {

std::string csv(const ResultTable& t) {
    std::ostringstream os;
    t.write_csv(os);
    return os.str();
}

ExperimentConfig small_config() {
    ExperimentConfig cfg;
    cfg.episodes = {20, 40};
    cfg.horizons = {100};
    cfg.trials = 2;
    cfg.threads = 1;
    return cfg;
}

TEST(Config, Validation) {
    ExperimentConfig cfg;
    EXPECT_NO_THROW(cfg.validate());
    cfg.env = "nope";
    EXPECT_THROW(cfg.validate(), InputError);
    cfg = {};
    cfg.episodes.clear();
    EXPECT_THROW(cfg.validate(), InputError);
    cfg = {};
    cfg.paired = true;
    cfg.episodes = {1, 2};
    EXPECT_THROW(cfg.validate(), InputError);
    cfg = {};
    cfg.behavior = "q";
    EXPECT_THROW(cfg.validate(), InputError);
    cfg.behavior = "q12";
    EXPECT_NO_THROW(cfg.validate());
    cfg.radii = "fixed";
    EXPECT_THROW(cfg.validate(), InputError);
}

TEST(Grid, CrossedAndPaired) {
    ExperimentConfig cfg;
    cfg.episodes = {1, 2};
    cfg.horizons = {10, 20};
    EXPECT_EQ(grid_cells(cfg).size(), 4u);
    cfg.paired = true;
    const auto cells = grid_cells(cfg);
    ASSERT_EQ(cells.size(), 2u);
    EXPECT_EQ(cells[1], (std::pair<int, int>{2, 20}));
}

TEST(ResultTableTest, SortsByKeyAndLooksUpColumns) {
    ResultTable t("x", {"a", "b"});
    t.add_row({2}, {"2", "0.5"});
    t.add_row({1}, {"1", ""});
    t.sort();
    EXPECT_EQ(t.cell(0, "a"), "1");
    EXPECT_TRUE(std::isnan(t.number(0, "b")));
    EXPECT_DOUBLE_EQ(t.number(1, "b"), 0.5);
    EXPECT_THROW(t.cell(0, "c"), InputError);
    EXPECT_THROW(t.add_row({3}, {"only one"}), InternalError);
    EXPECT_EQ(csv(t), "a,b\n1,\n2,0.5\n");
}

TEST(ParallelFor, VisitsEveryIndexAndPropagatesErrors) {
    std::vector<int> hits(100, 0);
    parallel_for(100, 4, [&](std::size_t i) { hits[i] += 1; });
    for (int h : hits) EXPECT_EQ(h, 1);
    EXPECT_THROW(parallel_for(10, 3, [](std::size_t i) {
                     if (i == 7) throw InputError("boom");
                 }),
                 InputError);
}

TEST(CiSweep, DeterministicAcrossThreadCounts) {
    ExperimentConfig cfg = small_config();
    const std::string one = csv(run_ci_sweep(cfg));
    cfg.threads = 4;
    EXPECT_EQ(csv(run_ci_sweep(cfg)), one);
    cfg.seed = 8;
    EXPECT_NE(csv(run_ci_sweep(cfg)), one);
}

TEST(CiSweep, RowsAreConsistent) {
    const ResultTable t = run_ci_sweep(small_config());
    ASSERT_EQ(t.size(), 4u);
    for (std::size_t i = 0; i < t.size(); ++i) {
        EXPECT_EQ(t.cell(i, "status").rfind("ok", 0), 0u) << t.cell(i, "status");
        EXPECT_LE(t.number(i, "ci_lower"), t.number(i, "lower"));
        EXPECT_LE(t.number(i, "lower"), t.number(i, "upper"));
        EXPECT_DOUBLE_EQ(t.number(i, "transitions"), t.number(i, "episodes") * t.number(i, "horizon"));
    }
}

TEST(Coverage, HugeRadiusAlwaysCovers) {
    ExperimentConfig cfg = small_config();
    cfg.radii = "fixed";
    cfg.fixed_rho = {5.0};
    const ResultTable t = run_coverage(cfg);
    for (std::size_t i = 0; i < t.size(); ++i) EXPECT_DOUBLE_EQ(t.number(i, "coverage"), 1.0);
}

TEST(Coverage, ZeroRadiusUncorrectedCollapsesToPlugIn) {
    ExperimentConfig cfg = small_config();
    cfg.radii = "fixed";
    cfg.fixed_rho = {0.0};
    cfg.corrected = false;
    const ResultTable t = run_ci_sweep(cfg);
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (t.cell(i, "status") != "ok") continue;
        EXPECT_NEAR(t.number(i, "lower"), t.number(i, "plug_in"), 1e-6);
        EXPECT_NEAR(t.number(i, "width"), 0.0, 1e-6);
    }
}

TEST(BatchCompare, ZeroRadiusArmEqualsPlugInArm) {
    ExperimentConfig cfg;
    cfg.env = "hmp";
    cfg.episodes = {300};
    cfg.horizons = {300};
    cfg.radii = "fixed";
    cfg.fixed_rho = {0.0};
    cfg.missing_bound = true;
    cfg.threads = 1;
    const ResultTable t = run_batch_compare(cfg);
    ASSERT_EQ(t.size(), 1u);
    ASSERT_EQ(t.cell(0, "status"), "ok");
    EXPECT_NEAR(t.number(0, "robust_value"), t.number(0, "saa_value"), 1e-9);
    EXPECT_EQ(t.cell(0, "robust_policy"), t.cell(0, "saa_policy"));
    EXPECT_EQ(t.cell(0, "robust_le_saa"), "1");
}

TEST(TuneRadius, IdenticalEnvironmentsTakeFirstPositiveGridPoint) {
    const FiniteMdp mdp = machine_replacement();
    const Policy b = Policy::uniform(10, 2);
    ExperimentConfig cfg;
    cfg.tune_grid = 50;
    const TunedRadius r = tune_adversarial_radius(mdp, mdp, optimal_policy(mdp).policy, b, cfg);
    EXPECT_EQ(r.grid_index, 1);
    EXPECT_GT(r.rho, 0.0);
    EXPECT_LE(r.adversarial_value, r.future_value + 1e-8);
}

TEST(TuneRadius, PerturbedEnvironmentFindsSmallestFeasibleGridPoint) {
    const FiniteMdp future = machine_replacement();
    const FiniteMdp data = perturbed_variant(EnvId::kMachineReplacement);
    const Policy b = Policy::uniform(10, 2);
    const Policy pi = optimal_policy(future).policy;
    ExperimentConfig cfg;
    cfg.tune_grid = 100;
    const TunedRadius r = tune_adversarial_radius(future, data, pi, b, cfg);
    EXPECT_LE(r.adversarial_value, r.future_value + 1e-8);
    const auto problem = make_problem(future, pi, b, population_conditional(data, b));
    const double diam = problem.cost.diameter();
    EXPECT_NEAR(r.rho, diam * r.grid_index / 100.0, 1e-15);
    EXPECT_GE(r.grid_index, 1);
    if (r.grid_index > 1) {
        const double below =
            adversarial_estimate(problem, Vector::Constant(10, diam * (r.grid_index - 1) / 100.0)).bound;
        EXPECT_GT(below, r.future_value);
    }
    // Adversarial value is nonincreasing along the grid.
    double prev = kInf;
    for (int k = 0; k <= 10; ++k) {
        const double v = adversarial_estimate(problem, Vector::Constant(10, diam * k / 100.0)).bound;
        EXPECT_LE(v, prev + 1e-9);
        prev = v;
    }
}

TEST(Adversarial, StudyRowsAndDeterminism) {
    ExperimentConfig cfg;
    cfg.totals = {2000};
    cfg.horizons = {200};
    cfg.trials = 2;
    cfg.fixed_rho = {0.001};
    cfg.threads = 1;
    const ResultTable t = run_adversarial(cfg);
    ASSERT_EQ(t.size(), 2u);
    EXPECT_EQ(t.cell(0, "transitions"), "2000");
    cfg.threads = 2;
    EXPECT_EQ(csv(run_adversarial(cfg)), csv(t));
    cfg.totals.clear();
    EXPECT_THROW(run_adversarial(cfg), InputError);
}

TEST(Behavior, Construction) {
    ExperimentConfig cfg;
    const FiniteMdp h = healthcare_management();
    cfg.behavior = "uniform";
    EXPECT_EQ(make_behavior(cfg, EnvId::kHealthcare, h), Policy::uniform(6, 3));
    cfg.behavior = "q3";
    cfg.epsilon = 0.1;
    EXPECT_EQ(make_behavior(cfg, EnvId::kHealthcare, h), q_iteration_policy(h, 3, 0.1));
    cfg.fixed_rho = {0.1, 0.2};
    EXPECT_THROW(fixed_radius_vector(cfg, 6), InputError);
}

} // namespace
} // namespace rope
