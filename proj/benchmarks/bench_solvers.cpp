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

#include "rope/batch_rl.hpp"
#include "rope/empirical.hpp"
#include "rope/environments.hpp"
#include "rope/mdp.hpp"
#include "rope/rng.hpp"
#include "rope/robust_eval.hpp"
#include "rope/trajectory.hpp"
#include "rope/wdro.hpp"

#include <benchmark/benchmark.h>

#include <vector>

namespace {

using namespace rope;

// Random inner problem on the standard metric with `atoms` equally weighted atoms.
struct InnerCase {
    CostMetric cost;
    std::vector<double> f;
    AtomSet atoms;
};

InnerCase make_inner(int n_actions, int n_states, int atoms, std::uint64_t seed) {
    InnerCase c{CostMetric::standard(n_actions, n_states), {}, {}};
    Rng rng(seed);
    c.f.resize(static_cast<std::size_t>(c.cost.n_points()));
    for (double& x : c.f) x = 20.0 * rng.uniform() - 10.0;
    for (int i = 0; i < atoms; ++i) {
        const int p = static_cast<int>(rng.uniform() * c.cost.n_points());
        c.atoms.push_back({p, 1.0 / atoms});
    }
    return c;
}

void BM_RobustInner(benchmark::State& state) {
    const auto c = make_inner(4, static_cast<int>(state.range(0)), static_cast<int>(state.range(1)), 11);
    const double rho = 0.1 * c.cost.diameter();
    for (auto _ : state) benchmark::DoNotOptimize(robust_inner(c.f, c.atoms, rho, c.cost));
}
BENCHMARK(BM_RobustInner)->Args({6, 8})->Args({10, 32})->Args({30, 128});

void BM_WorstCaseDistribution(benchmark::State& state) {
    const auto c = make_inner(4, static_cast<int>(state.range(0)), static_cast<int>(state.range(1)), 12);
    const double rho = 0.1 * c.cost.diameter();
    for (auto _ : state) benchmark::DoNotOptimize(worst_case_distribution(c.f, c.atoms, rho, c.cost));
}
BENCHMARK(BM_WorstCaseDistribution)->Args({6, 8})->Args({10, 32})->Args({30, 128});

EvaluationProblem mrp_problem(int episodes, int horizon) {
    const FiniteMdp mdp = make_env(EnvId::kMachineReplacement);
    const Policy behavior = default_behavior(EnvId::kMachineReplacement, mdp);
    const Policy target = optimal_policy(mdp).policy;
    const Dataset ds = simulate(mdp, behavior, episodes, horizon, 7, "mrp");
    return make_problem(mdp, target, behavior, build_empirical(ds, mdp.n_states(), mdp.n_actions()));
}

void BM_Simulate(benchmark::State& state) {
    const FiniteMdp mdp = make_env(EnvId::kMachineReplacement);
    const Policy behavior = default_behavior(EnvId::kMachineReplacement, mdp);
    const int n = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(simulate(mdp, behavior, n, n, 7, "mrp"));
    state.SetItemsProcessed(state.iterations() * n * n);
}
BENCHMARK(BM_Simulate)->Arg(100)->Arg(300);

void BM_RobustValueIteration(benchmark::State& state) {
    const EvaluationProblem problem = mrp_problem(300, 300);
    const double bound = default_value_bound(make_env(EnvId::kMachineReplacement).rewards(), problem.discount);
    const RadiusSchedule schedule = radius_for_ci(problem.emp, 0.05, bound, problem.cost.diameter());
    for (auto _ : state) benchmark::DoNotOptimize(robust_value_iteration(problem, schedule));
}
BENCHMARK(BM_RobustValueIteration)->Unit(benchmark::kMillisecond);

void BM_RobustPolicyOptimization(benchmark::State& state) {
    const FiniteMdp mdp = make_env(EnvId::kHealthcare);
    const Policy behavior = default_behavior(EnvId::kHealthcare, mdp);
    const Dataset ds = simulate(mdp, behavior, 300, 300, 7, "hmp");
    const BatchProblem problem =
        make_batch_problem(mdp, behavior, build_empirical(ds, mdp.n_states(), mdp.n_actions()));
    const RadiusSchedule schedule = batch_radius(problem.emp, 0.05, default_value_bound(mdp.rewards(), 0.95),
                                                 problem.cost.diameter(), mdp.n_actions());
    for (auto _ : state) benchmark::DoNotOptimize(robust_policy_optimization(problem, schedule));
}
BENCHMARK(BM_RobustPolicyOptimization)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
