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

#pragma once

#include "rope/robust_eval.hpp"

namespace rope {

struct BatchProblem {
    EmpiricalConditional emp;
    Policy behavior;
    Matrix rewards;  ///< r(s, a)
    Vector initial_dist;
    double discount;
    CostMetric cost;
};

BatchProblem make_batch_problem(const FiniteMdp& mdp, const Policy& behavior, EmpiricalConditional emp,
                                std::optional<CostMetric> cost = std::nullopt);

/// Per-(s, a') check of rho_s ||1{a = a'} / pi_b(a|s)||_Lip <= (1-gamma)/(2 gamma) - eps_s.
struct PolicyContraction {
    Matrix lipschitz;  ///< n_states x n_actions
    Matrix margin;     ///< n_states x n_actions
    bool pass = false;
};

PolicyContraction policy_contraction(const BatchProblem& problem, const RadiusSchedule& schedule,
                                     const Vector& epsilon = {});

struct BatchResult {
    Policy policy;
    Vector v;
    double value = 0.0;  ///< L* = (1 - gamma) d0^T v*
    long iterations = 0;
    double residual = 0.0;
    bool projected = false;
    PolicyContraction contraction;
    std::vector<std::string> warnings;
};

/// v(s) <- max_{a'} [ r(s, a') + gamma * robust_inner(v(s') 1{a = a'} / pi_b(a|s)) ].
/// `greedy`, when given, receives the maximizing action per state (ties to the lowest index).
Vector robust_policy_operator(const BatchProblem& problem, const RadiusSchedule& schedule, const Vector& v,
                              const IterationOptions& options = {}, std::vector<int>* greedy = nullptr);

/// Iterates the operator above from v = 0. Warns when the per-policy contraction check fails.
BatchResult robust_policy_optimization(const BatchProblem& problem, const RadiusSchedule& schedule,
                                       const IterationOptions& options = {});

/// tau = log(|S| / alpha), tau_s = tau + log(2 |A| n_s M).
RadiusSchedule batch_radius(const EmpiricalConditional& emp, double alpha, double value_bound, double diam,
                            int n_actions, MissingStateMode missing = MissingStateMode::kError);

/// rho = 0 plug-in optimization. Throws EstimatorError when
/// gamma * mu_hat(a|s) / pi_b(a|s) >= 1 for some (s, a).
BatchResult saa_policy_optimization(const BatchProblem& problem, const IterationOptions& options = {});

/// 100 (J* - J(pi)) / |J*| on the true MDP. Throws InputError if J* = 0.
double relative_gap(const FiniteMdp& mdp, const Policy& policy);
double relative_gap(double optimal_value, double policy_value);

} // namespace rope
