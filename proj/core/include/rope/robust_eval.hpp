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
#include "rope/wdro.hpp"

#include <optional>
#include <string>

namespace rope {

enum class RadiusMode { kNonasymptotic, kAsymptotic, kFixed };

const char* to_string(RadiusMode mode) noexcept;

/// Per-state radii rho_s and the parameters that produced them. For computed
/// schedules rho_s = sqrt(2 tau_s / n_s) * diam.
struct RadiusSchedule {
    Vector rho;
    Vector tau;               ///< tau_s; zero for fixed schedules
    Vector counts;            ///< n_s used by the formula
    double base_tau = 0.0;    ///< tau before the per-state log term
    double alpha = 0.0;
    double value_bound = 0.0; ///< M
    double diam = 0.0;
    RadiusMode mode = RadiusMode::kFixed;
};

/// Default value bound 2 r_max / (1 - gamma).
double default_value_bound(const Matrix& rewards, double discount);

/// tau = log(2|S| / alpha), tau_s = tau + log(2 n_s M).
/// With MissingStateMode::kBound uncovered states get rho_s = 0; otherwise they throw.
RadiusSchedule radius_for_ci(const EmpiricalConditional& emp, double alpha, double value_bound, double diam,
                             MissingStateMode missing = MissingStateMode::kError);

/// Recomputes sqrt(2 tau_s / n_s) * diam from stored fields.
Vector recompute_radii(const RadiusSchedule& schedule);

RadiusSchedule fixed_radii(Vector rho, double diam);
RadiusSchedule uniform_radii(int n_states, double rho, double diam);

/// Everything the robust and optimistic recursions need besides the radii.
struct EvaluationProblem {
    EmpiricalConditional emp;
    ImportanceRatio ratio;
    Vector target_rewards;  ///< r_pi(s) = sum_a pi(a|s) r(s,a)
    Vector initial_dist;
    double discount;
    CostMetric cost;
};

/// Assembles a problem from the MDP's reward table, d0 and discount.
EvaluationProblem make_problem(const FiniteMdp& mdp, const Policy& target, const Policy& behavior,
                               EmpiricalConditional emp, std::optional<CostMetric> cost = std::nullopt);

enum class BoundHandling {
    kProject,  ///< clip iterates to [-M, M] after each sweep
    kCheck,    ///< leave iterates alone, warn when they leave the box
};

struct IterationOptions {
    double tol = 1e-10;
    long max_iterations = 1'000'000;
    double value_bound = 0.0;  ///< M; nonpositive means default_value_bound
    BoundHandling bounds = BoundHandling::kProject;
    MissingStateMode missing = MissingStateMode::kError;
};

struct StateContraction {
    double lipschitz = 0.0;  ///< ||beta_s||_{Lip, mu_hat_s}
    double epsilon = 0.0;
    double margin = 0.0;     ///< (1-gamma)/(2 gamma) - eps_s - rho_s ||beta_s||
    bool pass = false;
};

struct ContractionReport {
    std::vector<StateContraction> states;
    bool pass = false;
    double min_ratio = 0.0;         ///< min_s n_s / M_s^2 (inf when every M_s = 0)
    double required_ratio = 0.0;    ///< gamma^2 / (1-gamma)^2 * log(|S| / tau_report)
    bool sample_size_ok = false;
};

enum class Direction { kRobust, kOptimistic };

struct RobustEstimate {
    Vector v;
    double bound = 0.0;      ///< L or U = (1 - gamma) d0^T v
    Vector lambda;           ///< lambda*_s at the last sweep; +inf for rho_s = 0
    long iterations = 0;
    double residual = 0.0;   ///< sup-norm change of the last sweep
    bool projected = false;  ///< some sweep hit the [-M, M] box
    double value_bound = 0.0;
    Direction direction = Direction::kRobust;
    ContractionReport contraction;
    std::vector<std::string> warnings;
};

/// One application of the robust (or optimistic) Bellman operator, without projection.
Vector bellman_operator(const EvaluationProblem& problem, const RadiusSchedule& schedule, const Vector& v,
                        Direction direction, const IterationOptions& options = {}, Vector* lambda = nullptr);

/// Iterates v <- r_pi + gamma * inner(v(s') beta_s(a)) from v = 0 until the sup-norm
/// change is below tol. Throws EstimatorError with contraction diagnostics on
/// non-convergence or non-finite iterates.
RobustEstimate robust_value_iteration(const EvaluationProblem& problem, const RadiusSchedule& schedule,
                                      const IterationOptions& options = {});
RobustEstimate optimistic_value_iteration(const EvaluationProblem& problem, const RadiusSchedule& schedule,
                                          const IterationOptions& options = {});
RobustEstimate value_iteration(const EvaluationProblem& problem, const RadiusSchedule& schedule,
                               Direction direction, const IterationOptions& options = {});

/// Per-state margins and the sample-size report. `epsilon` empty means the
/// default (1 - gamma) / (4 gamma) everywhere.
ContractionReport contraction_diagnostics(const ImportanceRatio& ratio, const EmpiricalConditional& emp,
                                          const RadiusSchedule& schedule, double discount,
                                          const CostMetric& cost, const Vector& epsilon = {},
                                          double tau_report = 0.05);

/// d0^T (I - gamma P_hat)^{-1} eps with eps_s = 6 / n_s.
double correction_term(const EmpiricalConditional& emp, const ImportanceRatio& ratio, double discount,
                       const Vector& initial_dist);

struct ConfidenceInterval {
    double lower = 0.0;
    double upper = 0.0;
    double correction = 0.0;
    double nominal_level = 0.0;
    bool corrected = false;

    double width() const noexcept { return upper - lower; }
    bool covers(double x) const noexcept { return lower <= x && x <= upper; }
};

/// [L - corr, U + corr] when corrected, else [L, U]. Throws InternalError if L > U + 1e-9.
ConfidenceInterval confidence_interval(double lower, double upper, double correction, double alpha,
                                       bool corrected);

/// 2 d0^T (I - gamma P_hat)^{-1} eps with eps_s = gamma rho_s max_{|v| <= M} ||beta_s v||_Lip.
double interval_length_bound(const EmpiricalConditional& emp, const ImportanceRatio& ratio,
                             const RadiusSchedule& schedule, double discount, double value_bound,
                             const Vector& initial_dist, const CostMetric& cost);

} // namespace rope
