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

#include "oracles.hpp"

#include "rope/empirical.hpp"
#include "rope/wdro.hpp"

#include <gtest/gtest.h>

namespace rope {
namespace {

using testing::InnerInstance;

// Two points z1 = (a0, s0) and z2 = (a0, s1) with c(z1, z2) = 0.5.
CostMetric two_point_metric() {
    Matrix t(2, 2);
    t << 0.0, 0.5, 0.5, 0.0;
    return CostMetric::from_table(1, 2, t);
}

TEST(GlobalSlope, ConstantFunctionIsFlat) {
    const CostMetric cost = CostMetric::standard(3, 3);
    const std::vector<double> f(9, 4.2);
    for (int z = 0; z < 9; ++z) EXPECT_DOUBLE_EQ(global_slope(f, z, cost), 0.0);
}

TEST(GlobalSlope, NonpositiveAtUniqueMaximizer) {
    const CostMetric cost = CostMetric::standard(3, 3);
    std::vector<double> f{1, 2, 3, 0, 9, 1, 2, 2, 1};
    EXPECT_LE(global_slope(f, 4, cost), 0.0);
}

TEST(GlobalSlope, MatchesPairwiseEnumeration) {
    Rng rng(11);
    const CostMetric cost = CostMetric::standard(3, 3);
    for (int rep = 0; rep < 50; ++rep) {
        std::vector<double> f(9);
        for (auto& x : f) x = testing::uniform(rng, -3, 3);
        for (int z = 0; z < 9; ++z)
            EXPECT_NEAR(global_slope(f, z, cost), testing::pairwise_global_slope(f, z, cost), 1e-12);
    }
}

TEST(GlobalSlope, NeedsTwoPoints) {
    const CostMetric cost = CostMetric::standard(1, 1);
    const std::vector<double> f{1.0};
    EXPECT_THROW(global_slope(f, 0, cost), InputError);
}

TEST(LipschitzNorm, FullSupportIsClassicalConstant) {
    Rng rng(12);
    const CostMetric cost = CostMetric::standard(2, 4);
    std::vector<double> f(8);
    for (auto& x : f) x = testing::uniform(rng, -1, 1);
    double classical = 0.0;
    for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 8; ++j)
            if (i != j) classical = std::max(classical, (f[static_cast<std::size_t>(i)] - f[static_cast<std::size_t>(j)]) / cost(i, j));
    std::vector<int> all{0, 1, 2, 3, 4, 5, 6, 7};
    EXPECT_NEAR(lipschitz_norm(f, all, cost), classical, 1e-12);
}

TEST(LipschitzNorm, ConstantIsZeroAndEmptySupportThrows) {
    const CostMetric cost = CostMetric::standard(2, 2);
    const std::vector<double> f(4, 1.0);
    const std::vector<int> support{0, 3};
    EXPECT_DOUBLE_EQ(lipschitz_norm(f, support, cost), 0.0);
    EXPECT_THROW(lipschitz_norm(f, std::vector<int>{}, cost), InputError);
}

TEST(LipschitzNorm, RandomSupportMatchesEnumeration) {
    Rng rng(13);
    for (int rep = 0; rep < 30; ++rep) {
        InnerInstance in = testing::random_inner_instance(rng);
        double expect = -INFINITY;
        for (const auto& a : in.atoms) expect = std::max(expect, testing::pairwise_global_slope(in.f, a.point, in.cost));
        EXPECT_NEAR(lipschitz_norm(in.f, in.atoms, in.cost), expect, 1e-12);
    }
}

TEST(RobustInner, ZeroRadiusReturnsMeanAndSentinel) {
    const CostMetric cost = CostMetric::standard(2, 3);
    const std::vector<double> f{1, 2, 3, 4, 5, 6};
    const AtomSet atoms{{0, 0.25}, {5, 0.75}};
    const InnerSolution r = robust_inner(f, atoms, 0.0, cost);
    EXPECT_DOUBLE_EQ(r.value, 0.25 * 1 + 0.75 * 6);
    EXPECT_TRUE(std::isinf(r.lambda));
    EXPECT_DOUBLE_EQ(optimistic_inner(f, atoms, 0.0, cost).value, r.value);
}

TEST(RobustInner, SingleAtomLinearTransport) {
    const CostMetric cost = two_point_metric();
    const std::vector<double> f{1.0, 0.0};
    const AtomSet atoms{{0, 1.0}};
    EXPECT_NEAR(robust_inner(f, atoms, 0.25, cost).value, 0.5, 1e-15);
    const WorstCase wc = worst_case_distribution(f, atoms, 0.25, cost);
    EXPECT_NEAR(wc.mu(0), 0.5, 1e-15);
    EXPECT_NEAR(wc.mu(1), 0.5, 1e-15);
    EXPECT_NEAR(wc.plan_cost, 0.25, 1e-15);
}

TEST(OptimisticInner, SingleAtomMirror) {
    const CostMetric cost = two_point_metric();
    const std::vector<double> f{0.0, 1.0};
    const AtomSet atoms{{0, 1.0}};
    EXPECT_NEAR(optimistic_inner(f, atoms, 0.25, cost).value, 0.5, 1e-15);
}

TEST(RobustInner, NegativeRadiusAndEmptyAtomsThrow) {
    const CostMetric cost = two_point_metric();
    const std::vector<double> f{0.0, 1.0};
    EXPECT_THROW(robust_inner(f, {{0, 1.0}}, -0.1, cost), InputError);
    EXPECT_THROW(robust_inner(f, {}, 0.1, cost), InputError);
}

// An instance where the optimum sits at a kink of one atom's envelope that is
// not of the form (f(z_i) - f(z)) / c(z, z_i) for the atom's own point.
TEST(RobustInner, KinkBetweenTwoNonAtomPoints) {
    Matrix t(3, 3);
    t << 0.0, 1.0, 0.2, 1.0, 0.0, 0.8, 0.2, 0.8, 0.0;
    const CostMetric cost = CostMetric::from_table(1, 3, t);
    const std::vector<double> f{0.0, -10.0, -2.0};
    const AtomSet atoms{{0, 1.0}};
    InnerInstance in{cost, f, atoms, 0.5};
    for (double rho : {0.1, 0.3, 0.5, 0.9, 1.2}) {
        in.rho = rho;
        EXPECT_NEAR(robust_inner(f, atoms, rho, cost).value, testing::grid_dual_oracle(in, 1.0), 1e-9) << rho;
    }
}

TEST(RobustInner, MatchesDenseGridOracle) {
    Rng rng(2024);
    for (int rep = 0; rep < 150; ++rep) {
        InnerInstance in = testing::random_inner_instance(rng, rep % 2 == 1);
        const double robust = robust_inner(in.f, in.atoms, in.rho, in.cost).value;
        const double optimistic = optimistic_inner(in.f, in.atoms, in.rho, in.cost).value;
        const double r_oracle = testing::grid_dual_oracle(in, 1.0, 20000);
        const double o_oracle = -testing::grid_dual_oracle(in, -1.0, 20000);
        EXPECT_NEAR(robust, r_oracle, 1e-4 * (1 + std::abs(r_oracle))) << rep;
        EXPECT_NEAR(optimistic, o_oracle, 1e-4 * (1 + std::abs(o_oracle))) << rep;
        // The exact solver can never lose to the grid.
        EXPECT_GE(robust, r_oracle - 1e-9);
        EXPECT_LE(optimistic, o_oracle + 1e-9);
    }
}

TEST(WorstCase, PrimalMatchesDualAndRespectsBudget) {
    Rng rng(99);
    for (int rep = 0; rep < 300; ++rep) {
        InnerInstance in = testing::random_inner_instance(rng, rep % 3 == 0);
        const WorstCase wc = worst_case_distribution(in.f, in.atoms, in.rho, in.cost);
        const double dual = robust_inner(in.f, in.atoms, in.rho, in.cost).value;
        double primal = 0.0;
        for (int z = 0; z < in.cost.n_points(); ++z) primal += wc.mu(z) * in.f[static_cast<std::size_t>(z)];
        EXPECT_NEAR(primal, dual, 1e-8);
        EXPECT_LE(wc.plan_cost, in.rho + 1e-10);
        EXPECT_NEAR(wc.mu.sum(), 1.0, 1e-10);
        EXPECT_GE(wc.mu.minCoeff(), 0.0);
        const WorstCase bc = best_case_distribution(in.f, in.atoms, in.rho, in.cost);
        EXPECT_NEAR(bc.value, optimistic_inner(in.f, in.atoms, in.rho, in.cost).value, 1e-8);
        EXPECT_LE(bc.plan_cost, in.rho + 1e-10);
    }
}

TEST(WorstCase, ZeroRadiusIsTheCenter) {
    const CostMetric cost = CostMetric::standard(2, 2);
    const std::vector<double> f{3, 1, 2, 0};
    const AtomSet atoms{{1, 0.5}, {2, 0.5}};
    const WorstCase wc = worst_case_distribution(f, atoms, 0.0, cost);
    EXPECT_DOUBLE_EQ(wc.mu(1), 0.5);
    EXPECT_DOUBLE_EQ(wc.mu(2), 0.5);
    EXPECT_DOUBLE_EQ(wc.plan_cost, 0.0);
}

TEST(WorstCase, SlackBudgetMovesNothingExtra) {
    // Everything reaches the global minimum with budget to spare: lambda* = 0.
    const CostMetric cost = CostMetric::standard(1, 3);
    const std::vector<double> f{0.0, 1.0, 2.0};
    const AtomSet atoms{{1, 0.5}, {2, 0.5}};
    const WorstCase wc = worst_case_distribution(f, atoms, 10.0, cost);
    EXPECT_DOUBLE_EQ(wc.lambda, 0.0);
    EXPECT_NEAR(wc.mu(0), 1.0, 1e-15);
    EXPECT_NEAR(wc.plan_cost, 0.5 * (1.0 / 4) + 0.5 * (2.0 / 4), 1e-15);
}

TEST(InnerProperties, BoundsMonotonicityAndSaturation) {
    Rng rng(5);
    for (int rep = 0; rep < 100; ++rep) {
        InnerInstance in = testing::random_inner_instance(rng, rep % 2 == 0);
        const double fmin = *std::min_element(in.f.begin(), in.f.end());
        const double fmax = *std::max_element(in.f.begin(), in.f.end());
        const double mean = atom_mean(in.f, in.atoms);
        double prev_r = INFINITY;
        double prev_o = -INFINITY;
        for (int k = 0; k <= 20; ++k) {
            const double rho = 1.5 * in.cost.diameter() * k / 20.0;
            const double r = robust_inner(in.f, in.atoms, rho, in.cost).value;
            const double o = optimistic_inner(in.f, in.atoms, rho, in.cost).value;
            EXPECT_LE(fmin - 1e-12, r);
            EXPECT_LE(r, mean + 1e-12);
            EXPECT_LE(mean, o + 1e-12);
            EXPECT_LE(o, fmax + 1e-12);
            EXPECT_LE(r, prev_r + 1e-12);
            EXPECT_GE(o, prev_o - 1e-12);
            prev_r = r;
            prev_o = o;
        }
        EXPECT_NEAR(robust_inner(in.f, in.atoms, in.cost.diameter(), in.cost).value, fmin, 1e-8);
        EXPECT_NEAR(optimistic_inner(in.f, in.atoms, in.cost.diameter(), in.cost).value, fmax, 1e-8);
    }
}

TEST(Regularizer, ZeroRadiusAndConstantFunction) {
    const CostMetric cost = CostMetric::standard(2, 3);
    const std::vector<double> f{1, 5, 2, 0, 3, 3};
    const AtomSet atoms{{0, 0.5}, {4, 0.5}};
    EXPECT_DOUBLE_EQ(regularizer_value(f, atoms, 0.0, cost), 0.0);
    const std::vector<double> c(6, 2.5);
    EXPECT_NEAR(regularizer_value(c, atoms, 0.7, cost), 0.0, 1e-15);
}

TEST(Regularizer, TinyRadiusEqualsRhoTimesLipschitz) {
    Rng rng(77);
    for (int rep = 0; rep < 100; ++rep) {
        InnerInstance in = testing::random_inner_instance(rng);
        const double rho = 1e-6;
        const double lip = std::max(0.0, lipschitz_norm(in.f, in.atoms, in.cost));
        EXPECT_NEAR(regularizer_value(in.f, in.atoms, rho, in.cost), rho * lip, 1e-10);
    }
}

TEST(Regularizer, NeverExceedsRhoTimesLipschitz) {
    Rng rng(78);
    for (int rep = 0; rep < 100; ++rep) {
        InnerInstance in = testing::random_inner_instance(rng);
        const double lip = std::max(0.0, lipschitz_norm(in.f, in.atoms, in.cost));
        for (int k = 0; k <= 20; ++k) {
            const double rho = 2.0 * in.cost.diameter() * k / 20.0;
            EXPECT_LE(regularizer_value(in.f, in.atoms, rho, in.cost), rho * lip + 1e-10);
        }
    }
}

TEST(AtomSet, WeightsFromCounts) {
    std::vector<StateConditional> states(2);
    states[0].atoms = {{0, 1, 3.0}, {1, 0, 1.0}};
    states[0].n = 4.0;
    const EmpiricalConditional emp(2, 2, states);
    const AtomSet atoms = atom_set(emp, 0, CostMetric::standard(2, 2));
    ASSERT_EQ(atoms.size(), 2u);
    EXPECT_EQ(atoms[0].point, 1);
    EXPECT_DOUBLE_EQ(atoms[0].weight, 0.75);
    EXPECT_EQ(atoms[1].point, 2);
}

} // namespace
} // namespace rope
