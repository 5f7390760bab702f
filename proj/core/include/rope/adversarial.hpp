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

/// Robust value L(rho) at fixed per-state radii. Adds a warning when
/// rho_s ||beta_s||_Lip >= (1 - gamma) / gamma at some state.
RobustEstimate adversarial_estimate(const EvaluationProblem& problem, const Vector& rho,
                                    const IterationOptions& options = {});

/// Worst-case conditionals mu*_s (dense over A x S, column a * S + s') for the
/// integrand v(s') beta_s(a) at the given radii.
std::vector<Vector> worst_case_conditionals(const EvaluationProblem& problem, const Vector& rho, const Vector& v);

/**
 * Plug-in asymptotic variance y^T D Lambda D y.
 *
 * P*(s, s') = sum_a beta_s(a) mu*(a, s'|s), u = (I - gamma P*^T)^{-1} d0,
 * w = (I - gamma P*)^{-1} r_pi and y(s, a, s') = gamma (1 - gamma) u(s) w(s') beta_s(a).
 * Lambda is block-diagonal with multinomial covariances of mu_hat(. | s) and D
 * scales block s by 1 / sqrt(n_s / sum n).
 */
double asymptotic_variance(const EvaluationProblem& problem, const std::vector<Vector>& mu_star);

/// value -/+ z_{1 - alpha/2} sqrt(sigma2 / T).
ConfidenceInterval adversarial_ci(double value, double sigma2, double total, double alpha);

struct AdversarialEstimate {
    RobustEstimate estimate;
    double sigma2 = 0.0;
    double total = 0.0;  ///< T, total logged transitions
    ConfidenceInterval ci;
};

/// adversarial_estimate, worst_case_conditionals, asymptotic_variance and adversarial_ci in one call.
AdversarialEstimate adversarial_analysis(const EvaluationProblem& problem, const Vector& rho, double alpha,
                                         const IterationOptions& options = {});

} // namespace rope
