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

#include "rope/cost.hpp"
#include "rope/empirical.hpp"

#include <span>

namespace rope {

/// A weighted support point of an empirical conditional on A x S.
struct SupportPoint {
    int point;      ///< z = a * n_states + s'
    double weight;  ///< nonnegative, weights of an atom set sum to one
};

using AtomSet = std::vector<SupportPoint>;

/// Atoms of mu_hat_s as support points of `cost`.
AtomSet atom_set(const EmpiricalConditional& emp, int s, const CostMetric& cost);

struct InnerSolution {
    double value;
    /// Attaining dual multiplier; +infinity when rho = 0 (the supremum is only
    /// approached as lambda grows without bound).
    double lambda;
};

struct WorstCase {
    Vector mu;         ///< dense distribution over A x S
    double plan_cost;  ///< transport cost of the constructed plan from the atoms
    double value;      ///< E_mu[f]
    double lambda;
};

/// I_f(z) = max over z' != z of (f(z') - f(z)) / c(z', z). Needs at least two points.
double global_slope(std::span<const double> f, int z, const CostMetric& cost);

/// max of global_slope(f, z) over z in `support`.
double lipschitz_norm(std::span<const double> f, std::span<const int> support, const CostMetric& cost);
double lipschitz_norm(std::span<const double> f, const AtomSet& atoms, const CostMetric& cost);

/// sum_i w_i f(z_i).
double atom_mean(std::span<const double> f, const AtomSet& atoms);

/**
 * min of E_mu[f] over the Wasserstein ball W(mu, atoms) <= rho, through the
 * one-dimensional dual
 *
 *   max_{lambda >= 0} -lambda rho + sum_i w_i min_z { f(z) + lambda c(z, z_i) }.
 *
 * Each summand is the lower envelope of the lines lambda -> f(z) + lambda c(z, z_i),
 * so the objective is concave piecewise linear with kinks only where an
 * envelope switches lines. The solver builds every envelope exactly, sweeps the
 * kinks in increasing lambda while tracking the right derivative
 * sum_i w_i c(active_i, z_i) - rho, and stops at the first kink where the
 * derivative turns nonpositive. No grid or tolerance enters the optimum.
 */
InnerSolution robust_inner(std::span<const double> f, const AtomSet& atoms, double rho, const CostMetric& cost);

/// max of E_mu[f] over the same ball; equals -robust_inner(-f).
InnerSolution optimistic_inner(std::span<const double> f, const AtomSet& atoms, double rho, const CostMetric& cost);

/**
 * Primal minimizer of robust_inner recovered from the dual optimum.
 *
 * Atoms whose envelope is strictly inside a piece at lambda* move entirely to
 * that piece's point. Atoms with a kink at lambda* start at the cheaper side and
 * are moved, in ascending atom order, to the costlier side until the plan cost
 * reaches rho (complementary slackness for lambda* > 0); at lambda* = 0 no extra
 * movement is made. A greedy split by slope ratio alone is not optimal here
 * because every atom is coupled through the single budget constraint.
 * Throws InternalError if E_mu[f] misses the dual value by more than 1e-8 (scaled).
 */
WorstCase worst_case_distribution(std::span<const double> f, const AtomSet& atoms, double rho,
                                  const CostMetric& cost);

/// Maximizer of optimistic_inner.
WorstCase best_case_distribution(std::span<const double> f, const AtomSet& atoms, double rho,
                                 const CostMetric& cost);

/// sup over the ball of E[f] minus the empirical mean.
double regularizer_value(std::span<const double> f, const AtomSet& atoms, double rho, const CostMetric& cost);

/// Dual objective of robust_inner at a given lambda (used by tests and diagnostics).
double robust_dual_objective(std::span<const double> f, const AtomSet& atoms, double rho, double lambda,
                             const CostMetric& cost);

} // namespace rope
