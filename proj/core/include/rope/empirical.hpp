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

#include "rope/mdp.hpp"
#include "rope/trajectory.hpp"

namespace rope {

/// One deduplicated (action, next state) observation at a state. `count` is an
/// integer tally for logged data and a probability mass for population models.
struct Atom {
    int action;
    int next_state;
    double count;

    bool operator==(const Atom&) const = default;
};

struct StateConditional {
    std::vector<Atom> atoms;  ///< sorted by (action, next_state), distinct keys
    double n = 0.0;           ///< n_s, sum of atom counts

    double weight(std::size_t i) const { return atoms[i].count / n; }
    bool covered() const noexcept { return n > 0.0; }
};

enum class MissingStateMode {
    kError,  ///< a state with n_s = 0 is a hard error
    kBound,  ///< pin the continuation value to 0 (lower) or M (upper)
};

/// Per-state empirical conditionals mu_hat_s of (a, s') given s.
class EmpiricalConditional {
public:
    EmpiricalConditional(int n_states, int n_actions, std::vector<StateConditional> states);

    int n_states() const noexcept { return n_states_; }
    int n_actions() const noexcept { return n_actions_; }
    const StateConditional& state(int s) const { return states_[static_cast<std::size_t>(s)]; }
    const std::vector<StateConditional>& states() const noexcept { return states_; }
    double count(int s) const { return state(s).n; }
    double total() const noexcept { return total_; }
    std::vector<int> uncovered_states() const;
    /// Throws UncoveredStatesError if any n_s = 0.
    void require_coverage() const;

    /// mu_hat(a | s) marginalized over next states.
    Matrix action_frequencies() const;
    /// mu_hat(a, s' | s) as a dense n_states x (n_actions * n_states) table, column a * S + s'.
    Matrix dense() const;

private:
    int n_states_;
    int n_actions_;
    std::vector<StateConditional> states_;
    double total_;
};

/// Tallies every transition of `ds`. With MissingStateMode::kError an uncovered
/// state throws UncoveredStatesError; kBound keeps it with n_s = 0.
EmpiricalConditional build_empirical(const Dataset& ds, int n_states, int n_actions,
                                     MissingStateMode missing = MissingStateMode::kError);

/// Population conditionals: atom mass d_pib(s) pi_b(a|s) P(s'|s,a), so that
/// n_s = d_pib(s) and weights are the exact conditionals d_pib(a, s' | s).
EmpiricalConditional population_conditional(const FiniteMdp& mdp, const Policy& behavior);

struct PlugInTransition {
    Matrix p;         ///< P(s, s') = sum_a mu_hat(a, s'|s) beta_s(a)
    Vector row_sums;  ///< sum_a mu_hat(a|s) beta_s(a)
};

PlugInTransition plug_in_transition(const EmpiricalConditional& emp, const ImportanceRatio& ratio);

/// (1 - gamma) d0^T (I - gamma P)^{-1} r_pi with the plug-in P. Throws
/// EstimatorError when the system fails the test of solve_discounted.
double plug_in_value(const EmpiricalConditional& emp, const ImportanceRatio& ratio,
                     const Vector& target_rewards, const Vector& initial_dist, double discount);

/// Largest eigenvalue modulus.
double spectral_radius(const Matrix& p);

/// Solves (I - gamma P) x = rhs for nonnegative P. Accepts when gamma * max row
/// sum < 1, or failing that gamma * spectral_radius(P) < 1; throws EstimatorError otherwise.
Vector solve_discounted(const Matrix& p, const Vector& rhs, double discount, const char* what);

} // namespace rope
