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

#include "rope/common.hpp"

#include <span>

namespace rope {

/**
 * Tabular discounted MDP <S, A, P, R, gamma, d0>.
 *
 * Transitions are stored densely as P(s' | s, a). Construction validates every
 * invariant (stochastic rows, nonnegative rewards, probability d0, gamma in (0,1))
 * and throws InputError on violation; a constructed FiniteMdp is always valid.
 */
class FiniteMdp {
public:
    /// @param transitions flat tensor indexed [(s * n_actions + a) * n_states + s']
    /// @param rewards     n_states x n_actions
    FiniteMdp(int n_states, int n_actions, std::vector<double> transitions, Matrix rewards,
              double discount, Vector initial_dist);

    int n_states() const noexcept { return n_states_; }
    int n_actions() const noexcept { return n_actions_; }
    double discount() const noexcept { return discount_; }
    const Matrix& rewards() const noexcept { return rewards_; }
    double reward(int s, int a) const { return rewards_(s, a); }
    const Vector& initial_dist() const noexcept { return initial_dist_; }

    double transition(int s, int a, int next) const {
        return transitions_[static_cast<std::size_t>((s * n_actions_ + a) * n_states_ + next)];
    }
    std::span<const double> transition_row(int s, int a) const {
        return {transitions_.data() + static_cast<std::ptrdiff_t>((s * n_actions_ + a) * n_states_),
                static_cast<std::size_t>(n_states_)};
    }
    const std::vector<double>& transitions() const noexcept { return transitions_; }

    /// Copy with a different discount factor.
    FiniteMdp with_discount(double discount) const;
    /// Copy with a different initial distribution.
    FiniteMdp with_initial_dist(Vector initial_dist) const;

    bool operator==(const FiniteMdp&) const = default;

private:
    int n_states_;
    int n_actions_;
    std::vector<double> transitions_;
    Matrix rewards_;
    double discount_;
    Vector initial_dist_;
};

/// Stochastic policy table pi(a|s), rows are probability vectors.
class Policy {
public:
    explicit Policy(Matrix probs);

    static Policy uniform(int n_states, int n_actions);
    /// One action per state; `actions[s]` gets probability 1.
    static Policy deterministic(const std::vector<int>& actions, int n_actions);

    int n_states() const noexcept { return static_cast<int>(probs_.rows()); }
    int n_actions() const noexcept { return static_cast<int>(probs_.cols()); }
    double prob(int s, int a) const { return probs_(s, a); }
    const Matrix& probs() const noexcept { return probs_; }
    bool deterministic() const noexcept { return deterministic_; }
    /// Action with probability one in state s. Only valid for deterministic policies.
    int action(int s) const;

    bool operator==(const Policy& other) const { return probs_ == other.probs_; }

private:
    Matrix probs_;
    bool deterministic_;
};

/// beta_s(a) = pi(a|s) / pi_b(a|s) together with the per-state spread M_s.
struct ImportanceRatio {
    Matrix beta;  ///< n_states x n_actions
    Vector span;  ///< M_s = max_a beta_s(a) - min_a beta_s(a)
};

/// d_pi(s) = (1 - gamma) sum_t gamma^t P(s_t = s).
using VisitationDistribution = Vector;

/// P_pi(s, s') = sum_a pi(a|s) P(s'|s, a).
Matrix policy_transition_matrix(const FiniteMdp& mdp, const Policy& policy);

/// r_pi(s) = sum_a pi(a|s) r(s, a).
Vector policy_rewards(const FiniteMdp& mdp, const Policy& policy);

/// Solves d = (1 - gamma) d0 + gamma P_pi^T d.
VisitationDistribution exact_average_visitation(const FiniteMdp& mdp, const Policy& policy);

/// R_pi = sum_{s,a} d_pi(s) pi(a|s) r(s, a).
double exact_policy_value(const FiniteMdp& mdp, const Policy& policy);

/// Unnormalized value function v = (I - gamma P_pi)^{-1} r_pi.
Vector exact_value_function(const FiniteMdp& mdp, const Policy& policy);

struct OptimalPolicyResult {
    Policy policy;
    double value;       ///< normalized value R_pi of `policy`
    Vector values;      ///< converged unnormalized v*
    long iterations;
};

/// Value iteration on the known MDP; greedy ties go to the lowest action index.
/// Throws EstimatorError when `max_iterations` sweeps do not reach `tol`.
OptimalPolicyResult optimal_policy(const FiniteMdp& mdp, double tol = 1e-10,
                                   long max_iterations = 1'000'000);

/// k synchronous Bellman-optimality sweeps from Q = 0, then epsilon-greedy softening.
Policy q_iteration_policy(const FiniteMdp& mdp, int sweeps, double epsilon);

/// Elementwise ratio target / behavior. Throws InputError listing every (s, a)
/// where the target has mass but the behavior does not.
ImportanceRatio importance_ratios(const Policy& target, const Policy& behavior);

/// Marginalized ratio w(s) = d_pi(s) / d_pib(s). Throws InputError if d_pib(s) = 0.
Vector marginal_importance_weights(const FiniteMdp& mdp, const Policy& target,
                                   const Policy& behavior);

/// Largest absolute residual of the stationary system
/// w(s') d_b(s') = (1 - gamma) d0(s') + gamma sum_{s,a} d_b(s,a,s') beta_s(a) w(s).
double stationarity_residual(const FiniteMdp& mdp, const Policy& target, const Policy& behavior);

/// Index of the maximum entry; ties to the lowest index.
int argmax_lowest(std::span<const double> values);

} // namespace rope
